//! Atomic units and the handful of laboratory conversions used at the API
//! boundary. Everything inside the crate works with hbar = e = m_e = 1.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants. Defaults are CODATA 2018 plus the antihydrogen mass
/// and standard gravity; all of them can be overridden from a `key=value`
/// file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// Metres per Bohr radius.
    pub bohr_radius: f64,
    /// Joules per Hartree.
    pub hartree: f64,
    /// Speed of light in atomic units (inverse fine-structure constant).
    pub light_speed_au: f64,
    /// Reduced Planck constant in J s.
    pub hbar_si: f64,
    /// Antihydrogen mass in electron masses.
    pub atom_mass_au: f64,
    /// Gravitational acceleration in m/s^2.
    pub gravity_si: f64,
}

pub const FINE_STRUCTURE: f64 = 7.297_352_569_3e-3;
const ELECTRON_MASS_SI: f64 = 9.109_383_701_5e-31;

impl Default for Constants {
    fn default() -> Self {
        Self {
            bohr_radius: 5.291_772_109_03e-11,
            hartree: 4.359_744_722_207_1e-18,
            light_speed_au: 137.035_999_084,
            hbar_si: 1.054_571_817e-34,
            atom_mass_au: 1837.15,
            gravity_si: 9.806,
        }
    }
}

/// Result of converting a free-fall height into a kinetic energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FallEnergy {
    /// Kinetic energy at the plate, Hartree.
    pub energy: f64,
    /// Energy per unit mass, (m/s)^2.
    pub gh: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LengthUnit {
    Bohr,
    Picometre,
    Nanometre,
    Micrometre,
    Millimetre,
    Centimetre,
    Metre,
}

impl LengthUnit {
    /// Size of one unit in metres (`None` for the Bohr radius, which depends
    /// on the constant set).
    fn metres(self) -> Option<f64> {
        match self {
            LengthUnit::Bohr => None,
            LengthUnit::Picometre => Some(1e-12),
            LengthUnit::Nanometre => Some(1e-9),
            LengthUnit::Micrometre => Some(1e-6),
            LengthUnit::Millimetre => Some(1e-3),
            LengthUnit::Centimetre => Some(1e-2),
            LengthUnit::Metre => Some(1.0),
        }
    }
}

impl FromStr for LengthUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "a0" | "au" | "bohr" => Ok(LengthUnit::Bohr),
            "pm" => Ok(LengthUnit::Picometre),
            "nm" => Ok(LengthUnit::Nanometre),
            "um" | "µm" => Ok(LengthUnit::Micrometre),
            "mm" => Ok(LengthUnit::Millimetre),
            "cm" => Ok(LengthUnit::Centimetre),
            "m" => Ok(LengthUnit::Metre),
            other => Err(Error::Config(format!("unknown length unit '{other}'"))),
        }
    }
}

impl fmt::Display for LengthUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LengthUnit::Bohr => "a0",
            LengthUnit::Picometre => "pm",
            LengthUnit::Nanometre => "nm",
            LengthUnit::Micrometre => "um",
            LengthUnit::Millimetre => "mm",
            LengthUnit::Centimetre => "cm",
            LengthUnit::Metre => "m",
        };
        f.write_str(s)
    }
}

impl Constants {
    /// Angular frequency corresponding to one atomic unit, rad/s.
    pub fn frequency_au(&self) -> f64 {
        self.hartree / self.hbar_si
    }

    /// Converts an angular frequency in rad/s to atomic units.
    pub fn frequency_to_au(&self, omega: f64) -> f64 {
        omega / self.frequency_au()
    }

    /// Atom mass in kg.
    pub fn atom_mass_si(&self) -> f64 {
        self.atom_mass_au * ELECTRON_MASS_SI
    }

    /// Seconds per atomic unit of time.
    pub fn time_au(&self) -> f64 {
        self.hbar_si / self.hartree
    }

    pub fn length_to_au(&self, value: f64, unit: LengthUnit) -> Result<f64> {
        if !(value >= 0.0) {
            return Err(Error::Domain(format!("length must be non-negative, got {value}")));
        }
        Ok(match unit.metres() {
            None => value,
            Some(scale) => value * scale / self.bohr_radius,
        })
    }

    pub fn length_from_au(&self, value: f64, unit: LengthUnit) -> f64 {
        match unit.metres() {
            None => value,
            Some(scale) => value * self.bohr_radius / scale,
        }
    }

    /// Parses strings such as `10cm`, `3 nm` or `250` (Bohr radii when no
    /// unit is given) into Bohr radii.
    pub fn parse_length(&self, text: &str) -> Result<f64> {
        let (value, unit) = split_quantity(text)?;
        let unit = if unit.is_empty() { LengthUnit::Bohr } else { unit.parse()? };
        self.length_to_au(value, unit)
    }

    /// Kinetic energy gained in a free fall of height `h` (metres).
    pub fn height_to_energy(&self, h: f64) -> Result<FallEnergy> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Domain(format!("fall height must be positive, got {h}")));
        }
        let gh = self.gravity_si * h;
        Ok(FallEnergy {
            energy: self.atom_mass_si() * gh / self.hartree,
            gh,
        })
    }

    /// Inverse of [`Constants::height_to_energy`]: height in metres.
    pub fn energy_to_height(&self, energy: f64) -> f64 {
        energy * self.hartree / (self.atom_mass_si() * self.gravity_si)
    }

    /// k = sqrt(2 m E) in inverse Bohr radii.
    pub fn energy_to_wavevector(&self, energy: f64) -> Result<f64> {
        if !(energy >= 0.0) {
            return Err(Error::Domain(format!("energy must be non-negative, got {energy}")));
        }
        Ok((2.0 * self.atom_mass_au * energy).sqrt())
    }

    pub fn wavevector_to_energy(&self, k: f64) -> f64 {
        k * k / (2.0 * self.atom_mass_au)
    }

    /// Reads `key = value` overrides. Blank lines and `#` comments are
    /// ignored; unknown keys are rejected.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value", lineno + 1))
            })?;
            let value: f64 = value.trim().parse().map_err(|_| {
                Error::Config(format!("line {}: '{}' is not a number", lineno + 1, value.trim()))
            })?;
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::Config(format!("line {}: constants must be positive", lineno + 1)));
            }
            match key.trim() {
                "bohr_radius" => c.bohr_radius = value,
                "hartree" => c.hartree = value,
                "light_speed_au" => c.light_speed_au = value,
                "hbar_si" => c.hbar_si = value,
                "atom_mass_au" => c.atom_mass_au = value,
                "gravity_si" => c.gravity_si = value,
                other => return Err(Error::Config(format!("unknown constant '{other}'"))),
            }
        }
        Ok(c)
    }

    pub fn to_config_string(&self) -> String {
        format!(
            "bohr_radius = {:e}\nhartree = {:e}\nlight_speed_au = {}\nhbar_si = {:e}\natom_mass_au = {}\ngravity_si = {}\n",
            self.bohr_radius,
            self.hartree,
            self.light_speed_au,
            self.hbar_si,
            self.atom_mass_au,
            self.gravity_si
        )
    }
}

/// Splits `"10cm"` into `(10.0, "cm")`.
pub(crate) fn split_quantity(text: &str) -> Result<(f64, &str)> {
    let text = text.trim();
    let idx = text
        .char_indices()
        .find(|&(i, ch)| {
            !(ch.is_ascii_digit()
                || ch == '.'
                || ch == '+'
                || ch == '-'
                || ((ch == 'e' || ch == 'E')
                    && text[i + 1..].starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '+')))
        })
        .map(|(i, _)| i)
        .unwrap_or(text.len());
    let value = text[..idx]
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("cannot parse quantity '{text}'")))?;
    Ok((value, text[idx..].trim()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn light_speed_is_inverse_fine_structure() {
        let c = Constants::default();
        assert_relative_eq!(c.light_speed_au, 1.0 / FINE_STRUCTURE, max_relative = 1e-6);
    }

    #[test]
    fn reference_constants_match_table_caption() {
        let c = Constants::default();
        assert_relative_eq!(c.bohr_radius, 52.917e-12, max_relative = 1e-4);
        assert_relative_eq!(c.hartree, 4.3597e-18, max_relative = 1e-4);
    }

    #[test]
    fn length_conversions() {
        let c = Constants::default();
        assert_eq!(c.length_to_au(0.0, LengthUnit::Metre).unwrap(), 0.0);
        assert_relative_eq!(c.length_to_au(52.917, LengthUnit::Picometre).unwrap(), 1.0, max_relative = 1e-4);
        assert_relative_eq!(c.length_to_au(1.0, LengthUnit::Nanometre).unwrap(), 18.897, max_relative = 1e-4);
        assert!(matches!("furlong".parse::<LengthUnit>(), Err(Error::Config(_))));
        assert!(c.length_to_au(-1.0, LengthUnit::Metre).is_err());
    }

    #[test]
    fn parse_lengths() {
        let c = Constants::default();
        assert_relative_eq!(c.parse_length("10cm").unwrap(), 0.1 / c.bohr_radius, max_relative = 1e-14);
        assert_relative_eq!(c.parse_length("3 nm").unwrap(), 3e-9 / c.bohr_radius, max_relative = 1e-14);
        assert_eq!(c.parse_length("250").unwrap(), 250.0);
        assert_relative_eq!(c.parse_length("1e-9m").unwrap(), 1e-9 / c.bohr_radius, max_relative = 1e-14);
        assert!(c.parse_length("3 parsec").is_err());
        assert!(c.parse_length("cm").is_err());
    }

    #[test]
    fn ten_centimetre_fall() {
        let c = Constants::default();
        let fall = c.height_to_energy(0.1).unwrap();
        assert!((fall.gh - 0.98).abs() < 0.01);
        // 1.674e-27 kg * 9.806 * 0.1 / 4.3597e-18 J
        assert_relative_eq!(fall.energy, 3.765e-10, max_relative = 2e-3);
        let k = c.energy_to_wavevector(fall.energy).unwrap();
        assert_relative_eq!(k, 1.176e-3, max_relative = 2e-3);
        assert!(c.height_to_energy(0.0).is_err());
        assert!(c.height_to_energy(1e-12).unwrap().energy > 0.0);
    }

    #[test]
    fn wavevector_laws() {
        let c = Constants::default();
        assert_eq!(c.energy_to_wavevector(0.0).unwrap(), 0.0);
        assert!(c.energy_to_wavevector(-1.0).is_err());
        let e = 3.7e-10;
        let ratio = c.energy_to_wavevector(2.0 * e).unwrap() / c.energy_to_wavevector(e).unwrap();
        assert!((ratio - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn config_overrides() {
        let c = Constants::from_config_str("# test\ngravity_si = 9.81\n\natom_mass_au=1836.0 # comment\n").unwrap();
        assert_eq!(c.gravity_si, 9.81);
        assert_eq!(c.atom_mass_au, 1836.0);
        assert!(Constants::from_config_str("planck = 1").is_err());
        assert!(Constants::from_config_str("gravity_si 9").is_err());
        let round = Constants::from_config_str(&Constants::default().to_config_string()).unwrap();
        assert_eq!(round, Constants::default());
    }

    proptest::proptest! {
        #[test]
        fn round_trip_lengths(v in 1e-12f64..1e3) {
            let c = Constants::default();
            for unit in [LengthUnit::Nanometre, LengthUnit::Centimetre, LengthUnit::Metre] {
                let back = c.length_from_au(c.length_to_au(v, unit).unwrap(), unit);
                proptest::prop_assert!(((back - v) / v).abs() < 1e-12);
            }
        }

        #[test]
        fn energy_linear_in_height(h in 1e-6f64..10.0) {
            let c = Constants::default();
            let e1 = c.height_to_energy(h).unwrap().energy;
            let e2 = c.height_to_energy(2.0 * h).unwrap().energy;
            proptest::prop_assert_eq!(e2, 2.0 * e1);
            let back = c.energy_to_height(e1);
            proptest::prop_assert!(((back - h) / h).abs() < 1e-12);
        }
    }
}
