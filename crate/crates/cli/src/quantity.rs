//! Unit-tagged scalar values such as `"1.5 MHz"`, `"6.28 Grad/s"` or `"300 K"`.

use std::f64::consts::TAU;

use qfridge::units;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    /// Cyclic frequency or rate; canonical unit MHz (1/µs).
    Frequency,
    /// Temperature; canonical unit K. Frequency tags are read as `k_B T / h`.
    Temperature,
    /// Time; canonical unit µs.
    Time,
}

impl Dimension {
    fn describe(self) -> &'static str {
        match self {
            Dimension::Frequency => "a frequency (Hz, kHz, MHz, GHz, THz, or rad/s, krad/s, Mrad/s, Grad/s, Trad/s)",
            Dimension::Temperature => "a temperature (K, mK, or a frequency unit for k_B T / h)",
            Dimension::Time => "a time (s, ms, us, ns)",
        }
    }
}

/// Factor to MHz for cyclic and angular frequency tags.
fn frequency_factor(unit: &str) -> Option<f64> {
    Some(match unit {
        "Hz" => 1e-6,
        "kHz" => 1e-3,
        "MHz" => 1.0,
        "GHz" => 1e3,
        "THz" => 1e6,
        "rad/s" => 1e-6 / TAU,
        "krad/s" => 1e-3 / TAU,
        "Mrad/s" => 1.0 / TAU,
        "Grad/s" => 1e3 / TAU,
        "Trad/s" => 1e6 / TAU,
        _ => return None,
    })
}

fn time_factor(unit: &str) -> Option<f64> {
    Some(match unit {
        "s" => 1e6,
        "ms" => 1e3,
        "us" | "µs" => 1.0,
        "ns" => 1e-3,
        _ => return None,
    })
}

/// Parse `"<number> <unit>"` into the canonical unit of `dim`.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, String> {
    let text = text.trim();
    let Some((num, unit)) = text.split_once(char::is_whitespace) else {
        return Err(format!("`{text}` has no unit tag; expected {}", dim.describe()));
    };
    let value: f64 = num.parse().map_err(|_| format!("`{num}` is not a number"))?;
    if !value.is_finite() {
        return Err(format!("`{num}` is not finite"));
    }
    let unit = unit.trim();
    let converted = match dim {
        Dimension::Frequency => frequency_factor(unit).map(|f| value * f),
        Dimension::Time => time_factor(unit).map(|f| value * f),
        Dimension::Temperature => match unit {
            "K" => Some(value),
            "mK" => Some(value * 1e-3),
            _ => frequency_factor(unit).map(|f| units::mhz_to_kelvin(value * f)),
        },
    };
    converted.ok_or_else(|| format!("unknown unit `{unit}`; expected {}", dim.describe()))
}

/// Canonical text for a value already in the canonical unit of `dim`.
pub fn format_quantity(value: f64, dim: Dimension) -> String {
    let unit = match dim {
        Dimension::Frequency => "MHz",
        Dimension::Temperature => "K",
        Dimension::Time => "us",
    };
    // `{:?}` is the shortest representation that parses back to the same bits
    format!("{value:?} {unit}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_and_angular_agree() {
        let a = parse_quantity("1 GHz", Dimension::Frequency).unwrap();
        let b = parse_quantity(&format!("{} Grad/s", TAU), Dimension::Frequency).unwrap();
        assert_eq!(a, 1000.0);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn untagged_value_rejected() {
        let err = parse_quantity("1.5", Dimension::Frequency).unwrap_err();
        assert!(err.contains("no unit tag"), "{err}");
        assert!(parse_quantity("1.5 furlongs", Dimension::Frequency).unwrap_err().contains("unknown unit"));
    }

    #[test]
    fn temperature_from_frequency() {
        let t = parse_quantity(&format!("{} MHz", units::kelvin_to_mhz(300.0)), Dimension::Temperature).unwrap();
        assert!((t - 300.0).abs() < 1e-9);
        assert_eq!(parse_quantity("20 mK", Dimension::Temperature).unwrap(), 0.02);
    }

    #[test]
    fn format_round_trips() {
        for v in [0.1, 1e-16, 6.251e6 / 3.0, 400000000.0] {
            let s = format_quantity(v, Dimension::Frequency);
            assert_eq!(parse_quantity(&s, Dimension::Frequency).unwrap(), v);
        }
    }
}
