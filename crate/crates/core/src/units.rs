//! Unit-suffixed quantity parsing for config files. A value may be a bare
//! number (interpreted in the base SI unit of its dimension) or a string
//! like "8 mm" / "10 mA"; both spellings of a quantity resolve identically.

use crate::error::{Error, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Area,
    Current,
    Frequency,
    Temperature,
    Density,
    SpecificHeat,
    Conductivity,
    Resistance,
    ResistanceSlope,
    Time,
    Dimensionless,
}

impl Dimension {
    pub fn base_unit(&self) -> &'static str {
        match self {
            Dimension::Length => "m",
            Dimension::Area => "m^2",
            Dimension::Current => "A",
            Dimension::Frequency => "Hz",
            Dimension::Temperature => "K",
            Dimension::Density => "kg/m^3",
            Dimension::SpecificHeat => "J/(kg K)",
            Dimension::Conductivity => "W/(m K)",
            Dimension::Resistance => "ohm",
            Dimension::ResistanceSlope => "ohm/K",
            Dimension::Time => "s",
            Dimension::Dimensionless => "",
        }
    }

    /// (suffix, factor to base SI unit); longest-match wins.
    fn suffixes(&self) -> &'static [(&'static str, f64)] {
        match self {
            Dimension::Length => &[
                ("nm", 1e-9),
                ("um", 1e-6),
                ("µm", 1e-6),
                ("mm", 1e-3),
                ("cm", 1e-2),
                ("m", 1.0),
            ],
            Dimension::Area => &[
                ("um^2", 1e-12),
                ("µm^2", 1e-12),
                ("um2", 1e-12),
                ("µm2", 1e-12),
                ("mm^2", 1e-6),
                ("mm2", 1e-6),
                ("cm^2", 1e-4),
                ("cm2", 1e-4),
                ("m^2", 1.0),
                ("m2", 1.0),
            ],
            Dimension::Current => &[("uA", 1e-6), ("µA", 1e-6), ("mA", 1e-3), ("A", 1.0)],
            Dimension::Frequency => &[
                ("mHz", 1e-3),
                ("kHz", 1e3),
                ("MHz", 1e6),
                ("Hz", 1.0),
            ],
            Dimension::Temperature => &[("K", 1.0)],
            Dimension::Density => &[("kg/m^3", 1.0), ("kg/m3", 1.0), ("g/cm^3", 1e3), ("g/cm3", 1e3)],
            Dimension::SpecificHeat => &[("J/(kg K)", 1.0), ("J/kg/K", 1.0), ("J/kgK", 1.0)],
            Dimension::Conductivity => &[("W/(m K)", 1.0), ("W/m/K", 1.0), ("W/mK", 1.0)],
            Dimension::Resistance => &[("mohm", 1e-3), ("kohm", 1e3), ("ohm", 1.0)],
            Dimension::ResistanceSlope => &[("ohm/K", 1.0), ("mohm/K", 1e-3)],
            Dimension::Time => &[("ms", 1e-3), ("us", 1e-6), ("µs", 1e-6), ("s", 1.0)],
            Dimension::Dimensionless => &[],
        }
    }
}

/// Parse "<number> [suffix]" into base SI units of `dim`.
pub fn parse_quantity(s: &str, dim: Dimension) -> Result<f64> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Config(format!("empty quantity (expected {})", dim.base_unit())));
    }
    // longest numeric prefix wins, so scientific notation survives ("1e-2 mm^2")
    let mut parsed: Option<(f64, usize)> = None;
    for i in 1..=s.len() {
        if !s.is_char_boundary(i) {
            continue;
        }
        if let Ok(v) = s[..i].trim().parse::<f64>() {
            parsed = Some((v, i));
        }
    }
    let (value, split) = parsed.ok_or_else(|| {
        Error::Config(format!("cannot parse number in quantity '{s}'"))
    })?;
    let unit = s[split..].trim();
    if unit.is_empty() {
        return Ok(value);
    }
    for (suffix, factor) in dim.suffixes() {
        if unit == *suffix {
            return Ok(value * factor);
        }
    }
    Err(Error::Config(format!(
        "unknown unit '{unit}' in '{s}' (expected {} or a listed alias)",
        dim.base_unit()
    )))
}

/// A config-file quantity: either a bare TOML number (base SI unit) or a
/// unit-suffixed string. Resolve with [`Qty::in_unit`].
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Qty {
    Number(f64),
    Text(String),
}

impl Qty {
    pub fn in_unit(&self, dim: Dimension) -> Result<f64> {
        match self {
            Qty::Number(v) => Ok(*v),
            Qty::Text(s) => parse_quantity(s, dim),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn length_spellings_agree() {
        let a = parse_quantity("8 mm", Dimension::Length).unwrap();
        let b = parse_quantity("0.008 m", Dimension::Length).unwrap();
        let c = parse_quantity("8mm", Dimension::Length).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-15);
        assert_relative_eq!(a, c, max_relative = 1e-15);
        assert_relative_eq!(a, 8e-3, max_relative = 1e-15);
    }

    #[test]
    fn micro_variants() {
        assert_relative_eq!(
            parse_quantity("20 um", Dimension::Length).unwrap(),
            parse_quantity("20 µm", Dimension::Length).unwrap(),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            parse_quantity("1e-2 mm^2", Dimension::Area).unwrap(),
            1e-8,
            max_relative = 1e-15
        );
    }

    #[test]
    fn current_and_frequency() {
        assert_relative_eq!(parse_quantity("10 mA", Dimension::Current).unwrap(), 1e-2);
        assert_relative_eq!(parse_quantity("2.5 kHz", Dimension::Frequency).unwrap(), 2500.0);
        assert_relative_eq!(parse_quantity("0.3 Hz", Dimension::Frequency).unwrap(), 0.3);
    }

    #[test]
    fn bare_number_is_base_si() {
        assert_relative_eq!(parse_quantity("0.42", Dimension::Length).unwrap(), 0.42);
        let q = Qty::Number(5e-3);
        assert_relative_eq!(q.in_unit(Dimension::Current).unwrap(), 5e-3);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_quantity("8 furlongs", Dimension::Length).is_err());
        assert!(parse_quantity("mm", Dimension::Length).is_err());
        assert!(parse_quantity("", Dimension::Length).is_err());
        // unit from the wrong dimension
        assert!(parse_quantity("3 mA", Dimension::Length).is_err());
    }

    #[test]
    fn density_cgs_alias() {
        assert_relative_eq!(
            parse_quantity("21.45 g/cm^3", Dimension::Density).unwrap(),
            21450.0,
            max_relative = 1e-12
        );
    }
}
