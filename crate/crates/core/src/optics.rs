//! Optical response at imaginary frequency: dielectric functions of the
//! mirror, dynamic polarizability of the atom, and the electromagnetic
//! reflection amplitudes of bulk and slab mirrors.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::Constants;

/// Reference perfect-mirror van der Waals coefficient for hydrogen, Eh a0^3.
pub const C3_PERFECT_REFERENCE: f64 = 0.25;
/// Reference perfect-mirror retarded coefficient for hydrogen, Eh a0^4.
pub const C4_PERFECT_REFERENCE: f64 = 73.6;

/// Samples of a real function of imaginary frequency, interpolated linearly
/// in log(xi). Frequencies are stored in atomic units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tabulated {
    xi: Vec<f64>,
    values: Vec<f64>,
}

impl Tabulated {
    pub fn new(xi: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xi.len() != values.len() || xi.len() < 2 {
            return Err(Error::Config("tabulated data needs at least two (xi, value) pairs".into()));
        }
        if xi[0] < 0.0 || xi.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("tabulated frequencies must be non-negative and strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("tabulated values must be finite".into()));
        }
        Ok(Self { xi, values })
    }

    /// Reads a two-column text file (xi in rad/s, value). Lines starting
    /// with `#` are comments.
    pub fn from_file(path: &Path, constants: &Constants) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, constants)
    }

    pub fn parse(text: &str, constants: &Constants) -> Result<Self> {
        let mut xi = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty());
            let mut next = || -> Result<f64> {
                cols.next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Config(format!("line {}: expected two numeric columns", lineno + 1)))
            };
            xi.push(constants.frequency_to_au(next()?));
            values.push(next()?);
        }
        Self::new(xi, values)
    }

    pub fn max_frequency(&self) -> f64 {
        *self.xi.last().expect("at least two samples")
    }

    pub fn eval(&self, xi: f64) -> Result<f64> {
        let (lo, hi) = (self.xi[0], self.max_frequency());
        if !(xi >= lo && xi <= hi) {
            return Err(Error::Extrapolation { query: xi, lo, hi });
        }
        let i = self.xi.partition_point(|&x| x <= xi).clamp(1, self.xi.len() - 1);
        let (x0, x1) = (self.xi[i - 1], self.xi[i]);
        let (y0, y1) = (self.values[i - 1], self.values[i]);
        // log interpolation except on a segment touching xi = 0
        let s = if x0 > 0.0 { (xi / x0).ln() / (x1 / x0).ln() } else { (xi - x0) / (x1 - x0) };
        Ok(y0 + s * (y1 - y0))
    }
}

/// Relative dielectric function at imaginary frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DielectricModel {
    /// Perfect reflector, treated as the epsilon -> infinity limit.
    Perfect,
    /// eps(i xi) = eps_inf + (eps0 - eps_inf) w0^2 / (xi^2 + w0^2); w0 in a.u.
    DrudeLorentz { eps0: f64, eps_inf: f64, omega0: f64 },
    /// eps(i xi) = 1 + sum_j B_j / (1 + (xi / w_j)^2); w_j in a.u.
    Sellmeier { strengths: [f64; 3], omegas: [f64; 3] },
    Tabulated(Tabulated),
}

impl DielectricModel {
    /// Drude-Lorentz model with the resonance given in rad/s.
    pub fn drude_lorentz(eps0: f64, eps_inf: f64, omega0_rad_s: f64, constants: &Constants) -> Self {
        DielectricModel::DrudeLorentz { eps0, eps_inf, omega0: constants.frequency_to_au(omega0_rad_s) }
    }

    /// Three-term Sellmeier model with resonances given in rad/s.
    pub fn sellmeier(strengths: [f64; 3], omegas_rad_s: [f64; 3], constants: &Constants) -> Self {
        DielectricModel::Sellmeier { strengths, omegas: omegas_rad_s.map(|w| constants.frequency_to_au(w)) }
    }

    /// Intrinsic silicon.
    pub fn silicon(constants: &Constants) -> Self {
        Self::drude_lorentz(11.87, 1.035, 6.6e15, constants)
    }

    /// Amorphous silica.
    pub fn silica(constants: &Constants) -> Self {
        Self::sellmeier(
            [0.696_749, 0.408_218, 0.890_815],
            [27.2732e15, 16.2858e15, 0.190_257e15],
            constants,
        )
    }

    pub fn is_perfect(&self) -> bool {
        matches!(self, DielectricModel::Perfect)
    }

    /// eps(i xi); the perfect mirror returns `f64::INFINITY`.
    pub fn epsilon(&self, xi: f64) -> Result<f64> {
        if !(xi >= 0.0) {
            return Err(Error::Domain(format!("frequency must be non-negative, got {xi}")));
        }
        Ok(match self {
            DielectricModel::Perfect => f64::INFINITY,
            DielectricModel::DrudeLorentz { eps0, eps_inf, omega0 } => {
                eps_inf + (eps0 - eps_inf) * omega0 * omega0 / (xi * xi + omega0 * omega0)
            }
            DielectricModel::Sellmeier { strengths, omegas } => {
                1.0 + strengths
                    .iter()
                    .zip(omegas)
                    .map(|(b, w)| b / (1.0 + (xi / w) * (xi / w)))
                    .sum::<f64>()
            }
            DielectricModel::Tabulated(t) => t.eval(xi)?,
        })
    }

    /// Frequencies at which the response changes character; used as
    /// quadrature breakpoints.
    pub fn characteristic_frequencies(&self) -> Vec<f64> {
        match self {
            DielectricModel::Perfect => vec![],
            DielectricModel::DrudeLorentz { omega0, .. } => vec![*omega0],
            DielectricModel::Sellmeier { omegas, .. } => omegas.to_vec(),
            DielectricModel::Tabulated(_) => vec![],
        }
    }

    /// Upper end of the frequency range where the model is defined.
    pub fn max_frequency(&self) -> Option<f64> {
        match self {
            DielectricModel::Tabulated(t) => Some(t.max_frequency()),
            _ => None,
        }
    }
}

/// Dynamic polarizability of the atom at imaginary frequency, in a0^3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolarizabilityModel {
    /// alpha(i xi) = alpha0 / (1 + (xi / omega_a)^2).
    EffectiveOscillator { alpha0: f64, omega_a: f64 },
    Tabulated(Tabulated),
}

impl PolarizabilityModel {
    /// Single-oscillator model for (anti)hydrogen calibrated so that the
    /// perfect mirror gives C3 = 0.25 and C4 = 73.6 exactly:
    /// C4 = 3 c alpha0 / (8 pi) and C3 = alpha0 omega_a / 8.
    pub fn hydrogen(constants: &Constants) -> Self {
        let alpha0 = 8.0 * std::f64::consts::PI * C4_PERFECT_REFERENCE / (3.0 * constants.light_speed_au);
        let omega_a = 8.0 * C3_PERFECT_REFERENCE / alpha0;
        PolarizabilityModel::EffectiveOscillator { alpha0, omega_a }
    }

    pub fn alpha(&self, xi: f64) -> Result<f64> {
        if !(xi >= 0.0) {
            return Err(Error::Domain(format!("frequency must be non-negative, got {xi}")));
        }
        match self {
            PolarizabilityModel::EffectiveOscillator { alpha0, omega_a } => {
                let u = xi / omega_a;
                Ok(alpha0 / (1.0 + u * u))
            }
            PolarizabilityModel::Tabulated(t) => t.eval(xi),
        }
    }

    pub fn static_value(&self) -> Result<f64> {
        self.alpha(0.0)
    }

    pub fn characteristic_frequencies(&self) -> Vec<f64> {
        match self {
            PolarizabilityModel::EffectiveOscillator { omega_a, .. } => vec![*omega_a],
            PolarizabilityModel::Tabulated(_) => vec![],
        }
    }

    pub fn max_frequency(&self) -> Option<f64> {
        match self {
            PolarizabilityModel::Tabulated(t) => Some(t.max_frequency()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    Bulk,
    /// Free-standing slab, thickness in a0.
    Slab { thickness: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MirrorSpec {
    pub dielectric: DielectricModel,
    pub geometry: Geometry,
}

impl MirrorSpec {
    pub fn bulk(dielectric: DielectricModel) -> Self {
        Self { dielectric, geometry: Geometry::Bulk }
    }

    pub fn slab(dielectric: DielectricModel, thickness: f64) -> Result<Self> {
        if !(thickness > 0.0) || !thickness.is_finite() {
            return Err(Error::Domain(format!("slab thickness must be positive, got {thickness}")));
        }
        Ok(Self { dielectric, geometry: Geometry::Slab { thickness } })
    }

    pub fn thickness(&self) -> Option<f64> {
        match self.geometry {
            Geometry::Bulk => None,
            Geometry::Slab { thickness } => Some(thickness),
        }
    }

    /// TE and TM reflection amplitudes for a vacuum wavevector `kappa` at
    /// imaginary frequency `xi`.
    pub fn reflection(&self, xi: f64, kappa: f64, c: f64) -> Result<(f64, f64)> {
        if self.dielectric.is_perfect() {
            // a perfectly conducting slab of any thickness reflects fully
            return Ok((-1.0, 1.0));
        }
        let eps = self.dielectric.epsilon(xi)?;
        Ok(self.reflection_with_eps(eps, xi, kappa, c))
    }

    /// As [`MirrorSpec::reflection`] with eps(i xi) already evaluated.
    #[inline]
    pub fn reflection_with_eps(&self, eps: f64, xi: f64, kappa: f64, c: f64) -> (f64, f64) {
        if eps.is_infinite() {
            return (-1.0, 1.0);
        }
        let big_k = medium_wavevector(kappa, xi, eps, c);
        let (te, tm) = fresnel_pair(kappa, big_k, xi, eps, c);
        match self.geometry {
            Geometry::Bulk => (te, tm),
            Geometry::Slab { thickness } => (
                slab_reflection(te, big_k, thickness),
                slab_reflection(tm, big_k, thickness),
            ),
        }
    }

    /// Power of the long-distance law: 4 for bulks and perfect mirrors,
    /// 5 for dielectric slabs.
    pub fn far_exponent(&self) -> i32 {
        match self.geometry {
            Geometry::Slab { .. } if !self.dielectric.is_perfect() => 5,
            _ => 4,
        }
    }

    /// Label such as `silica 3 nm` or `perfect bulk`.
    pub fn describe(&self, constants: &Constants) -> String {
        let material = match &self.dielectric {
            DielectricModel::Perfect => "perfect",
            DielectricModel::DrudeLorentz { .. } => "drude-lorentz",
            DielectricModel::Sellmeier { .. } => "sellmeier",
            DielectricModel::Tabulated(_) => "tabulated",
        };
        match self.geometry {
            Geometry::Bulk => format!("{material} bulk"),
            Geometry::Slab { thickness } => {
                format!("{material} {} nm", constants.length_from_au(thickness, crate::units::LengthUnit::Nanometre))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarization {
    Te,
    Tm,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::Te => "TE",
            Polarization::Tm => "TM",
        })
    }
}

/// A Wick-rotated electromagnetic mode above the mirror.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmMode {
    pub xi: f64,
    /// Transverse wavevector magnitude.
    pub k: f64,
    /// Vacuum longitudinal wavevector sqrt(k^2 + xi^2/c^2).
    pub kappa: f64,
    /// Longitudinal wavevector in the medium sqrt(k^2 + eps xi^2/c^2).
    pub big_k: f64,
    pub polarization: Polarization,
}

impl EmMode {
    pub fn new(xi: f64, k: f64, eps: f64, c: f64, polarization: Polarization) -> Self {
        let kappa = (k * k + xi * xi / (c * c)).sqrt();
        Self { xi, k, kappa, big_k: medium_wavevector(kappa, xi, eps, c), polarization }
    }
}

#[inline]
fn medium_wavevector(kappa: f64, xi: f64, eps: f64, c: f64) -> f64 {
    (kappa * kappa + (eps - 1.0) * xi * xi / (c * c)).sqrt()
}

/// (rho_TE, rho_TM) for a bulk interface. The TE numerator is written as
/// -(eps - 1) xi^2 / c^2 / (kappa + K) to avoid cancellation.
#[inline]
fn fresnel_pair(kappa: f64, big_k: f64, xi: f64, eps: f64, c: f64) -> (f64, f64) {
    if eps.is_infinite() {
        return (-1.0, 1.0);
    }
    let sum = kappa + big_k;
    let q = xi * xi / (c * c);
    let te = -(eps - 1.0) * q / (sum * sum);
    // eps kappa - K = (eps - 1)((eps + 1) kappa^2 - xi^2/c^2) / (eps kappa + K)
    let tm_den = eps * kappa + big_k;
    let tm = (eps - 1.0) * ((eps + 1.0) * kappa * kappa - q) / (tm_den * tm_den);
    (te, tm)
}

/// Bulk Fresnel amplitude for the mode's polarization.
pub fn fresnel_bulk(mode: &EmMode, eps: f64, c: f64) -> f64 {
    let (te, tm) = fresnel_pair(mode.kappa, mode.big_k, mode.xi, eps, c);
    match mode.polarization {
        Polarization::Te => te,
        Polarization::Tm => tm,
    }
}

/// Reflection amplitude of a slab of thickness `d` from its bulk amplitude.
pub fn slab_reflection(rho_bulk: f64, big_k: f64, d: f64) -> f64 {
    let f = (-2.0 * big_k * d).exp();
    let one_minus_f = -(-2.0 * big_k * d).exp_m1();
    one_minus_f * rho_bulk / (1.0 - f * rho_bulk * rho_bulk)
}
