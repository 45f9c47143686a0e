//! Configuration, subcommands, and self-checks behind the `qfridge` binary.

pub mod commands;
pub mod config;
pub mod presets;
pub mod quantity;
pub mod validate;
