//! Physical constants and unit conversions.
//!
//! Every frequency and rate inside the crate is a cyclic frequency in MHz
//! (equivalently a rate in 1/µs). Temperatures enter the bath physics as
//! `k_B T / h` expressed in the same unit.

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

const HZ_PER_MHZ: f64 = 1.0e6;

/// Convert a temperature in kelvin to `k_B T / h` in MHz.
pub fn kelvin_to_mhz(kelvin: f64) -> f64 {
    BOLTZMANN * kelvin / PLANCK / HZ_PER_MHZ
}

/// Convert `k_B T / h` in MHz back to kelvin.
pub fn mhz_to_kelvin(mhz: f64) -> f64 {
    mhz * HZ_PER_MHZ * PLANCK / BOLTZMANN
}

pub fn hz_to_mhz(hz: f64) -> f64 {
    hz / HZ_PER_MHZ
}

pub fn mhz_to_hz(mhz: f64) -> f64 {
    mhz * HZ_PER_MHZ
}

/// Convert an angular frequency in rad/s to cyclic MHz.
pub fn rad_per_s_to_mhz(omega: f64) -> f64 {
    omega / std::f64::consts::TAU / HZ_PER_MHZ
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn room_temperature_is_about_6_25_thz() {
        let t = kelvin_to_mhz(300.0);
        assert!((t / 6.251e6 - 1.0).abs() < 1e-3, "{t}");
        assert!((mhz_to_kelvin(t) - 300.0).abs() < 1e-10);
    }

    #[test]
    fn angular_conversion() {
        let mhz = rad_per_s_to_mhz(std::f64::consts::TAU * 1.0e9);
        assert!((mhz - 1000.0).abs() < 1e-9);
    }
}
