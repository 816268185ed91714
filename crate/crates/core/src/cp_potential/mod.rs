//! Casimir-Polder potential of an atom above a mirror at zero temperature.
//!
//! With the transverse wavevector traded for the longitudinal one,
//! kappa = sqrt(k^2 + xi^2/c^2), the potential reads
//!
//! ```text
//! V(z) = 1/(2 pi c^2) int_0^inf dxi alpha(i xi)
//!        int_{xi/c}^inf dkappa e^{-2 kappa z} [xi^2 rho_TE - (2 c^2 kappa^2 - xi^2) rho_TM]
//! ```
//!
//! and the inner integral is evaluated in u = 2 z (kappa - xi/c), which turns
//! the exponential into e^{-u} e^{-2 xi z / c}.

mod cache;
mod table;

pub use cache::{cache_path, load_or_build, read_table, spec_hash, write_table, CACHE_FORMAT_VERSION};
pub use table::{PotentialTable, TableSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::{MirrorSpec, PolarizabilityModel};
use crate::quad::{integrate_carried, integrate_tail_carried, Estimate, QuadOptions};
use crate::units::Constants;

/// Upper limit of the inner u integral; e^{-60} u^2 is below 1e-22.
const U_MAX: f64 = 60.0;

/// Distance at which the long-range coefficient is read off.
pub const FAR_FIT_Z: f64 = 1e8;
/// Largest relative drift of V z^n over the decade below the fit point.
pub const FAR_FIT_THRESHOLD: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialOptions {
    /// Relative tolerance of each of the two nested quadratures.
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for PotentialOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-8, max_intervals: 2000 }
    }
}

/// What is integrated against the e^{-2 kappa z} kernel.
#[derive(Clone, Copy, PartialEq)]
enum Weight {
    Value,
    /// d/dz, which multiplies the integrand by -2 kappa.
    Derivative,
}

struct Integrand<'a> {
    mirror: &'a MirrorSpec,
    polarizability: &'a PolarizabilityModel,
    c: f64,
    z: f64,
    weight: Weight,
    inner: QuadOptions,
}

impl Integrand<'_> {
    /// Inner integral at fixed xi, times alpha(i xi) e^{-2 xi z / c}.
    fn at(&self, xi: f64) -> Result<Estimate> {
        let alpha = self.polarizability.alpha(xi)?;
        let damping = (-2.0 * xi * self.z / self.c).exp();
        if damping == 0.0 || alpha == 0.0 {
            return Ok(Estimate { value: 0.0, error: 0.0 });
        }
        let eps = self.mirror.dielectric.epsilon(xi)?;
        let (c, z) = (self.c, self.z);
        let a = xi / c;
        let xi2 = xi * xi;
        let f = |u: f64| {
            let kappa = a + 0.5 * u / z;
            let (te, tm) = self.mirror.reflection_with_eps(eps, xi, kappa, c);
            let mut g = xi2 * te - (2.0 * c * c * kappa * kappa - xi2) * tm;
            if self.weight == Weight::Derivative {
                g *= -2.0 * kappa;
            }
            ((-u).exp() * g, 0.0)
        };
        let mut breaks = vec![0.5, 2.0, 5.0, 15.0, 30.0];
        if eps.is_finite() && eps > 1.0 {
            // where kappa crosses the medium scale sqrt(eps - 1) xi / c
            breaks.push(2.0 * z * a * (eps - 1.0).sqrt());
        }
        if let Some(d) = self.mirror.thickness() {
            // a slab scale far below the first node is numerically a bulk
            if z / d >= self.inner.rel_tol * breaks[0] {
                breaks.push(z / d);
            }
        }
        // a node that misses the inner tolerance carries its error outward
        let (est, _) = integrate_carried(f, 0.0, U_MAX, &breaks, self.inner);
        let scale = alpha * damping / (2.0 * z);
        Ok(Estimate { value: est.value * scale, error: est.error * scale.abs() })
    }
}

fn outer_breaks(mirror: &MirrorSpec, polarizability: &PolarizabilityModel, c: f64, z: f64, rel_tol: f64) -> Vec<f64> {
    let mut b = mirror.dielectric.characteristic_frequencies();
    b.extend(polarizability.characteristic_frequencies());
    b.extend([0.5 * c / z, 5.0 * c / z, 20.0 * c / z]);
    b.retain(|x| x.is_finite() && *x > 0.0);
    b.sort_by(f64::total_cmp);
    if let Some(d) = mirror.thickness() {
        let xi_d = 0.5 * c / d;
        if xi_d >= rel_tol * b[0] {
            b.push(xi_d);
            b.sort_by(f64::total_cmp);
        }
    }
    // one breakpoint per decade so bisection never spans several decades
    let (lo, hi) = (b[0], b[b.len() - 1]);
    let mut x = lo * 10.0;
    while x < hi {
        b.push(x);
        x *= 10.0;
    }
    b.sort_by(f64::total_cmp);
    b
}

fn integrate_xi(
    mirror: &MirrorSpec,
    polarizability: &PolarizabilityModel,
    z: f64,
    constants: &Constants,
    opts: PotentialOptions,
    weight: Weight,
) -> Result<Estimate> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("distance must be positive, got {z}")));
    }
    let c = constants.light_speed_au;
    let outer = QuadOptions { rel_tol: opts.rel_tol, abs_tol: 0.0, max_intervals: opts.max_intervals };
    let inner = QuadOptions { rel_tol: 0.1 * opts.rel_tol, abs_tol: 0.0, max_intervals: opts.max_intervals };
    let integrand = Integrand { mirror, polarizability, c, z, weight, inner };

    let mut failure = None;
    let mut eval = |xi: f64| match integrand.at(xi) {
        Ok(e) => (e.value, e.error),
        Err(err) => {
            failure.get_or_insert(err);
            (0.0, 0.0)
        }
    };
    let breaks = outer_breaks(mirror, polarizability, c, z, opts.rel_tol);
    let limit = [mirror.dielectric.max_frequency(), polarizability.max_frequency()]
        .into_iter()
        .flatten()
        .reduce(f64::min);
    let est = match limit {
        // tabulated data: the integral stops where the data end
        Some(hi) => integrate_carried(&mut eval, 0.0, hi, &breaks, outer).0,
        None => {
            let split = *breaks.last().expect("at least the retardation breakpoints");
            let head = integrate_carried(&mut eval, 0.0, split, &breaks, outer).0;
            // the tail only needs to be accurate relative to the whole
            let tail_opts = QuadOptions { abs_tol: 0.1 * opts.rel_tol * head.value.abs(), ..outer };
            head + integrate_tail_carried(&mut eval, split, tail_opts).0
        }
    };
    if let Some(err) = failure {
        return Err(err);
    }
    let norm = 1.0 / (2.0 * std::f64::consts::PI * c * c);
    let est = Estimate { value: est.value * norm, error: est.error * norm };
    if !(est.error <= 10.0 * opts.rel_tol * est.value.abs()) {
        return Err(Error::Quadrature { requested: opts.rel_tol, estimate: est.value, error: est.error });
    }
    Ok(est)
}

/// V(z) in Hartree with its quadrature error estimate.
pub fn compute_potential(
    mirror: &MirrorSpec,
    polarizability: &PolarizabilityModel,
    z: f64,
    constants: &Constants,
    opts: PotentialOptions,
) -> Result<Estimate> {
    integrate_xi(mirror, polarizability, z, constants, opts, Weight::Value)
}

/// dV/dz from the same double integral.
pub fn compute_potential_derivative(
    mirror: &MirrorSpec,
    polarizability: &PolarizabilityModel,
    z: f64,
    constants: &Constants,
    opts: PotentialOptions,
) -> Result<Estimate> {
    integrate_xi(mirror, polarizability, z, constants, opts, Weight::Derivative)
}

/// Short-distance coefficient, V ~ -C3 / z^3, from the non-retarded limit
/// C3 = 1/(4 pi) int alpha(i xi) (eps - 1)/(eps + 1) dxi.
/// Slabs share the coefficient of their bulk.
pub fn c3_coefficient(mirror: &MirrorSpec, polarizability: &PolarizabilityModel, opts: PotentialOptions) -> Result<f64> {
    let mut failure = None;
    let mut f = |xi: f64| {
        let ratio = match mirror.dielectric.epsilon(xi) {
            Ok(e) if e.is_infinite() => 1.0,
            Ok(e) => (e - 1.0) / (e + 1.0),
            Err(err) => {
                failure.get_or_insert(err);
                0.0
            }
        };
        match polarizability.alpha(xi) {
            Ok(a) => (a * ratio, 0.0),
            Err(err) => {
                failure.get_or_insert(err);
                (0.0, 0.0)
            }
        }
    };
    let mut breaks = mirror.dielectric.characteristic_frequencies();
    breaks.extend(polarizability.characteristic_frequencies());
    breaks.sort_by(f64::total_cmp);
    let q = QuadOptions { rel_tol: 0.01 * opts.rel_tol, abs_tol: 0.0, max_intervals: opts.max_intervals };
    let limit = [mirror.dielectric.max_frequency(), polarizability.max_frequency()]
        .into_iter()
        .flatten()
        .reduce(f64::min);
    let (est, ok) = match limit {
        Some(hi) => integrate_carried(&mut f, 0.0, hi, &breaks, q),
        None => {
            let split = breaks.last().copied().unwrap_or(1.0);
            let (a, ok1) = integrate_carried(&mut f, 0.0, split, &breaks, q);
            let tail_q = QuadOptions { abs_tol: 0.1 * q.rel_tol * a.value.abs(), ..q };
            let (b, ok2) = integrate_tail_carried(&mut f, split, tail_q);
            (a + b, ok1 && ok2)
        }
    };
    if let Some(err) = failure {
        return Err(err);
    }
    if !ok {
        return Err(Error::Quadrature { requested: q.rel_tol, estimate: est.value, error: est.error });
    }
    Ok(est.value / (4.0 * std::f64::consts::PI))
}

/// Short- and long-distance power laws of the potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymptotes {
    pub c3: f64,
    /// C4 for bulks and perfect mirrors, C5 for dielectric slabs.
    pub c_far: f64,
    pub far_exponent: i32,
    /// Relative change of V z^n over the decade below the fit point.
    pub far_residual: f64,
}

/// C3 from the non-retarded reduction and C_far = -V z^n at
/// [`FAR_FIT_Z`], checked against the value a decade closer.
pub fn asymptotic_coeffs(
    mirror: &MirrorSpec,
    polarizability: &PolarizabilityModel,
    constants: &Constants,
    opts: PotentialOptions,
) -> Result<Asymptotes> {
    let c3 = c3_coefficient(mirror, polarizability, opts)?;
    let n = mirror.far_exponent();
    let scaled = |z: f64| -> Result<f64> {
        Ok(-compute_potential(mirror, polarizability, z, constants, opts)?.value * z.powi(n))
    };
    let c_far = scaled(FAR_FIT_Z)?;
    let closer = scaled(0.1 * FAR_FIT_Z)?;
    let far_residual = (closer / c_far - 1.0).abs();
    if far_residual > FAR_FIT_THRESHOLD {
        return Err(Error::Asymptote(format!(
            "V z^{n} still drifts by {far_residual:.3e} over the last decade below z = {FAR_FIT_Z:e}"
        )));
    }
    Ok(Asymptotes { c3, c_far, far_exponent: n, far_residual })
}
