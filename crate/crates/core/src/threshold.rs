//! Low-energy limit: the complex length a(k) defined by
//! r(k) = -exp(-2 i k a(k)), its k -> 0 limit (the scattering length), and
//! the lifetime of the first gravitational quantum state it implies.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::cp_potential::PotentialTable;
use crate::error::{Error, Result};
use crate::qreflect::{Controls, ReflectionResult};
use crate::units::Constants;

fn check_inputs(r: Complex64, k: f64) -> Result<()> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Domain(format!("a(k) needs k > 0, got {k}")));
    }
    let m = r.norm();
    if !(m > 0.0 && m <= 1.0 + 1e-12) {
        return Err(Error::Domain(format!("a(k) needs 0 < |r| <= 1, got {m}")));
    }
    Ok(())
}

/// a(k) = i ln(-r) / (2k) on the principal branch of the logarithm.
pub fn a_of_k_principal(r: Complex64, k: f64) -> Result<Complex64> {
    check_inputs(r, k)?;
    let l = (-r).ln();
    Ok(Complex64::i() * l / (2.0 * k))
}

/// a(k) with arg(-r) chosen closest to the value a constant a(k) would give
/// from the previous sample `(k_prev, a_prev)`. A remaining mismatch above
/// pi/2 means the branch cannot be decided.
pub fn a_of_k(r: Complex64, k: f64, previous: Option<(f64, Complex64)>) -> Result<Complex64> {
    check_inputs(r, k)?;
    let Some((_, a_prev)) = previous else {
        return a_of_k_principal(r, k);
    };
    let theta = (-r).arg();
    let predicted = -2.0 * k * a_prev.re;
    let turns = ((predicted - theta) / (2.0 * PI)).round();
    let unwrapped = theta + 2.0 * PI * turns;
    let jump = (unwrapped - predicted).abs();
    if jump > 0.5 * PI {
        return Err(Error::Sampling { jump });
    }
    Ok(Complex64::new(-unwrapped / (2.0 * k), r.norm().ln() / (2.0 * k)))
}

/// Geometric ladder from `k_max` down to `k_min` with `per_decade` points
/// per decade, both ends included.
pub fn k_ladder(k_max: f64, k_min: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(k_max > k_min && k_min > 0.0) || per_decade == 0 {
        return Err(Error::Config(format!("bad k ladder [{k_min}, {k_max}] x {per_decade}")));
    }
    let n = ((k_max / k_min).log10() * per_decade as f64).round() as usize;
    let step = (k_min / k_max).ln() / n as f64;
    let mut ks: Vec<f64> = (0..=n).map(|i| k_max * (step * i as f64).exp()).collect();
    ks[n] = k_min;
    Ok(ks)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Fit over k <= k_min * 10^window_decades.
    pub window_decades: f64,
    /// Largest accepted max |a - fit| / |a(0)| inside the window.
    pub residual_threshold: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { window_decades: 2.0, residual_threshold: 1e-2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringLength {
    pub a0: Complex64,
    /// Slope of the linear model a(k) = a0 + a1 k.
    pub a1: Complex64,
    pub fit_window: (f64, f64),
    pub fit_residual: f64,
    pub samples: Vec<(f64, Complex64)>,
}

/// Solves at each k (descending) and tracks the branch of a(k).
pub fn sweep(table: &PotentialTable, ks: &[f64], controls: &Controls) -> Result<Vec<ReflectionResult>> {
    if ks.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Config("k samples must be strictly descending".into()));
    }
    let mass = table.constants.atom_mass_au;
    let energies: Vec<f64> = ks.iter().map(|k| k * k / (2.0 * mass)).collect();
    let mut results = crate::qreflect::reflection_at_energies(table, &energies, controls)?;
    let mut previous = None;
    for res in &mut results {
        let a = a_of_k(res.r, res.k, previous)?;
        res.a_of_k = a;
        previous = Some((res.k, a));
    }
    Ok(results)
}

/// Least-squares line a(k) = a0 + a1 k through the samples inside the
/// window at the small-k end.
pub fn fit_scattering_length(samples: &[(f64, Complex64)], fit: &FitOptions) -> Result<ScatteringLength> {
    let k_min = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let k_hi = k_min * 10f64.powf(fit.window_decades);
    let window: Vec<(f64, Complex64)> = samples.iter().copied().filter(|s| s.0 <= k_hi * (1.0 + 1e-12)).collect();
    if window.len() < 3 {
        return Err(Error::Config(format!("need at least 3 samples with k <= {k_hi:e}, got {}", window.len())));
    }
    let n = window.len() as f64;
    let mean_k = window.iter().map(|s| s.0).sum::<f64>() / n;
    let mean_a = window.iter().map(|s| s.1).sum::<Complex64>() / n;
    let sxx: f64 = window.iter().map(|s| (s.0 - mean_k).powi(2)).sum();
    let sxy: Complex64 = window.iter().map(|s| (s.1 - mean_a) * (s.0 - mean_k)).sum();
    let a1 = sxy / sxx;
    let a0 = mean_a - a1 * mean_k;
    let fit_residual = window.iter().map(|s| (s.1 - a0 - a1 * s.0).norm()).fold(0.0, f64::max) / a0.norm();
    if fit_residual > fit.residual_threshold {
        return Err(Error::WindowTooWide { residual: fit_residual, threshold: fit.residual_threshold });
    }
    Ok(ScatteringLength { a0, a1, fit_window: (k_min, k_hi.min(samples[0].0)), fit_residual, samples: samples.to_vec() })
}

/// Sweeps `ks` (descending, reaching k <= 1e-5) and extrapolates to k = 0.
pub fn scattering_length(
    table: &PotentialTable,
    ks: &[f64],
    controls: &Controls,
    fit: &FitOptions,
) -> Result<ScatteringLength> {
    match ks.last() {
        Some(&k) if k <= 1e-5 => {}
        _ => return Err(Error::Config("k samples must reach k <= 1e-5".into())),
    }
    let results = sweep(table, ks, controls)?;
    let samples: Vec<(f64, Complex64)> = results.iter().map(|r| (r.k, r.a_of_k)).collect();
    let sl = fit_scattering_length(&samples, fit)?;
    if !(sl.a0.im < 0.0) {
        return Err(Error::Domain(format!("scattering length {} has no absorptive part", sl.a0)));
    }
    Ok(sl)
}

/// Lifetime in seconds of the first gravitational state,
/// tau = hbar / (2 m g |Im a(0)|).
pub fn lifetime(a0: Complex64, constants: &Constants) -> Result<f64> {
    if !(a0.im < 0.0) {
        return Err(Error::Domain(format!("lifetime needs Im a(0) < 0, got {}", a0.im)));
    }
    let im_metres = a0.im.abs() * constants.bohr_radius;
    Ok(constants.hbar_si / (2.0 * constants.atom_mass_si() * constants.gravity_si * im_metres))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn full_reflection_has_zero_length() {
        let a = a_of_k_principal(Complex64::new(-1.0, 0.0), 1e-3).unwrap();
        assert!(a.norm() < 1e-12);
    }

    #[test]
    fn probability_identity() {
        for (r, k) in [(Complex64::new(0.1, -0.3), 1e-3), (Complex64::new(-0.9, 0.05), 2e-6)] {
            let a = a_of_k_principal(r, k).unwrap();
            assert_relative_eq!(r.norm_sqr(), (4.0 * k * a.im).exp(), max_relative = 1e-12);
        }
    }

    #[test]
    fn branch_follows_previous_sample() {
        // a = -2000 - 300i at k = 1e-3 puts arg(-r) = 4 beyond pi
        let a_true = Complex64::new(-2000.0, -300.0);
        let k = 1e-3;
        let r = -(Complex64::new(0.0, -2.0 * k) * a_true).exp();
        let principal = a_of_k_principal(r, k).unwrap();
        assert!((principal - a_true).norm() > 1.0);
        let tracked = a_of_k(r, k, Some((1.1e-3, Complex64::new(-1990.0, -300.0)))).unwrap();
        assert!((tracked - a_true).norm() < 1e-9);
        assert!(matches!(a_of_k(r, k, Some((1.1e-3, Complex64::new(-1200.0, 0.0)))), Err(Error::Sampling { .. })));
    }

    #[test]
    fn ladder() {
        let ks = k_ladder(1e-3, 1e-6, 4).unwrap();
        assert_eq!(ks.len(), 13);
        assert_eq!(ks[12], 1e-6);
        assert_relative_eq!(ks[4], 1e-4, max_relative = 1e-12);
    }

    #[test]
    fn linear_fit_recovers_intercept() {
        let a0 = Complex64::new(-53.0, -543.0);
        let a1 = Complex64::new(1e4, 3e4);
        let ks = k_ladder(1e-3, 1e-6, 4).unwrap();
        let samples: Vec<_> = ks.iter().map(|&k| (k, a0 + a1 * k)).collect();
        let fit = fit_scattering_length(&samples, &FitOptions::default()).unwrap();
        assert!((fit.a0 - a0).norm() < 1e-9);
        let curved: Vec<_> = ks.iter().map(|&k| (k, a0 + a1 * k + Complex64::new(0.0, 5e9) * k * k)).collect();
        assert!(matches!(
            fit_scattering_length(&curved, &FitOptions::default()),
            Err(Error::WindowTooWide { .. })
        ));
    }

    #[test]
    fn lifetime_of_perfect_mirror_state() {
        let c = Constants::default();
        let tau = lifetime(Complex64::new(-53.0, -543.0), &c).unwrap();
        // hbar / (2 * 1.674e-27 * 9.806 * 543 * 5.2918e-11)
        assert_relative_eq!(tau, 0.1118, max_relative = 2e-3);
        let half = lifetime(Complex64::new(0.0, -271.5), &c).unwrap();
        assert_relative_eq!(half, 2.0 * tau, max_relative = 1e-14);
        assert!(lifetime(Complex64::new(1.0, 0.0), &c).is_err());
    }
}
