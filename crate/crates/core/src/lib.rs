//! Steady-state and transient simulation of laser-driven three- and four-level
//! quantum refrigerators coupled to a microwave resonator.
//!
//! Frequencies and rates are cyclic MHz (1/µs) unless a name says otherwise.

pub mod atom;
pub mod composite;
pub mod error;
pub mod harness;
pub(crate) mod linalg;
pub mod operator;
pub mod rates;
pub mod regression;
pub mod resonator;
pub mod units;

pub use error::{Error, Result};
pub use faer::c64;
