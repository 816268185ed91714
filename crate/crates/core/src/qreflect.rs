//! Quantum reflection from the potential with a fully absorbing wall.
//!
//! The wavefunction is written as
//! psi = (c_+ e^{i phi} + c_- e^{-i phi}) / sqrt(p), phi' = p, and the exact
//! Schrodinger equation becomes c_+' = e^{-2i phi} p'/(2p) c_-,
//! c_-' = e^{2i phi} p'/(2p) c_+. The current |c_-|^2 - |c_+|^2 is conserved.
//!
//! Near the wall the potential is -C3/z^3 and the energy negligible; there
//! the amplitudes are known in closed form in x = sqrt(8 m C3 / z), with
//! phi = x0 - x. The solver starts from that solution, integrates in x while
//! the potential dominates, switches to z, and stops once c_+ and c_- no
//! longer change.
//!
//! The returned amplitude refers the outgoing wave e^{ikz} to the incoming
//! e^{-ikz} with z measured from the mirror surface:
//! r = c_+/c_- exp(2i lim(phi - k z)). Its modulus is the ratio c_+/c_- of
//! the amplitudes; the phase factor makes Re a(k) independent of x0.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cp_potential::PotentialTable;
use crate::error::{Error, Result};
use crate::ode::{Dopri5, StepControl};
use crate::quad::{integrate_tail_carried, QuadOptions};
use crate::specfun::{kummer_m, kummer_u};
use crate::threshold::a_of_k_principal;

const KUMMER_A: f64 = 1.5;
const KUMMER_B: f64 = 4.0;

/// Closed-form (c_+, c_-) of the pure -C3/z^3 potential at zero energy
/// with full absorption, for phase origin x0.
pub fn wall_amplitudes(x: f64, x0: f64) -> Result<(Complex64, Complex64)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("wall amplitudes need x > 0, got {x}")));
    }
    let i = Complex64::i();
    let t = Complex64::new(0.0, 2.0 * x);
    let pre = Complex64::new(-2.0, -2.0) * x.powf(1.5);
    let u_plus = kummer_u(KUMMER_A, KUMMER_B, t)?;
    let m_plus = kummer_m(KUMMER_A, KUMMER_B, t)?;
    let u_minus = kummer_u(KUMMER_A, KUMMER_B, t.conj())?;
    let half_sqrt_pi = std::f64::consts::PI.sqrt() / 8.0;
    let c_plus = pre * (u_plus - i * half_sqrt_pi * m_plus) * Complex64::from_polar(1.0, -2.0 * x0);
    let c_minus = pre * u_minus;
    Ok((c_plus, c_minus))
}

/// Numerical controls of [`integrate_amplitudes`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Controls {
    /// Start no further out than where |V| = ratio_start E.
    pub ratio_start: f64,
    /// Switch from x to z where |V| = ratio_switch E.
    pub ratio_switch: f64,
    /// c_+- must change by less than this over a decade in z.
    pub tol_flat: f64,
    /// Relative step tolerance of the Runge-Kutta pair.
    pub rtol: f64,
    /// Start no further out than where |V + C3/z^3| = vdw_tol |V|.
    pub vdw_tol: f64,
    /// Largest tolerated |(|c_-|^2 - |c_+|^2) - 1|.
    pub current_tol: f64,
    /// Give up if the amplitudes are not flat by this distance.
    pub z_limit: f64,
}

impl Default for Controls {
    fn default() -> Self {
        Self {
            ratio_start: 1e4,
            ratio_switch: 1e2,
            tol_flat: 1e-8,
            rtol: 1e-10,
            vdw_tol: 1e-6,
            current_tol: 1e-6,
            z_limit: 1e13,
        }
    }
}

impl Controls {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.ratio_start, self.ratio_switch, self.tol_flat, self.rtol, self.vdw_tol, self.current_tol];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Config("solver controls must be positive and finite".into()));
        }
        if self.ratio_switch >= self.ratio_start {
            return Err(Error::Config("ratio_switch must be below ratio_start".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Matching point with the closed-form wall solution.
    pub z_start: f64,
    /// Where |V| = ratio_start E.
    pub z_energy: f64,
    /// Where the potential departs from -C3/z^3 by vdw_tol.
    pub z_vdw: f64,
    pub z_switch: f64,
    /// Distance at which c_+- were found constant.
    pub z_end: f64,
    /// Largest change of c_+- over the last checked decade.
    pub last_decade_change: f64,
    pub max_current_defect: f64,
    pub final_current_defect: f64,
    pub steps: usize,
    pub rejected_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionResult {
    pub energy: f64,
    pub k: f64,
    pub r: Complex64,
    pub probability: f64,
    /// Principal-branch a(k) = i ln(-r) / (2k).
    pub a_of_k: Complex64,
    pub diagnostics: Diagnostics,
}

/// z where |V(z)| = level, by bisection in log z (V is monotone).
fn crossing(table: &PotentialTable, level: f64) -> f64 {
    let (mut lo, mut hi) = (1e-8f64.ln(), 1e16f64.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if -table.eval_potential(mid.exp()) > level {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    (0.5 * (lo + hi)).exp()
}

fn vdw_deviation(table: &PotentialTable, z: f64) -> f64 {
    let v = table.eval_potential(z);
    (v + table.c3 / z.powi(3)).abs() / v.abs()
}

/// Largest z below which the potential stays within `tol` of -C3/z^3.
fn vdw_edge(table: &PotentialTable, tol: f64) -> f64 {
    let grid = &table.z_grid;
    if vdw_deviation(table, grid[0]) > tol {
        return grid[0];
    }
    let Some(i) = grid.iter().position(|&z| vdw_deviation(table, z) > tol) else {
        return *grid.last().expect("non-empty grid");
    };
    let (mut lo, mut hi) = (grid[i - 1].ln(), grid[i].ln());
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if vdw_deviation(table, mid.exp()) > tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo.exp()
}

struct Physics<'a> {
    table: &'a PotentialTable,
    mass: f64,
    energy: f64,
}

impl Physics<'_> {
    /// d/dz of [Re c+, Im c+, Re c-, Im c-, phi].
    fn rhs(&self, z: f64, y: &[f64; 5]) -> [f64; 5] {
        let (v, dv, _) = self.table.eval_derivatives(z);
        let p2 = 2.0 * self.mass * (self.energy - v);
        let p = p2.sqrt();
        // p'/(2p) with p' = -m V'/p
        let w = -self.mass * dv / (2.0 * p2);
        let (s, c) = (2.0 * y[4]).sin_cos();
        let (cp_re, cp_im, cm_re, cm_im) = (y[0], y[1], y[2], y[3]);
        // e^{-2i phi} c_-  and  e^{2i phi} c_+
        let a_re = c * cm_re + s * cm_im;
        let a_im = c * cm_im - s * cm_re;
        let b_re = c * cp_re - s * cp_im;
        let b_im = c * cp_im + s * cp_re;
        [w * a_re, w * a_im, w * b_re, w * b_im, p]
    }
}

fn current_defect(y: &[f64; 5]) -> f64 {
    (y[2] * y[2] + y[3] * y[3] - y[0] * y[0] - y[1] * y[1] - 1.0).abs()
}

fn amplitudes(y: &[f64; 5]) -> (Complex64, Complex64) {
    (Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3]))
}

/// Reflection amplitude at energy `energy` (Hartree).
pub fn integrate_amplitudes(table: &PotentialTable, energy: f64, controls: &Controls) -> Result<ReflectionResult> {
    controls.validate()?;
    if !(energy > 0.0) || !energy.is_finite() {
        return Err(Error::Domain(format!("energy must be positive, got {energy}")));
    }
    let mass = table.constants.atom_mass_au;
    let k = (2.0 * mass * energy).sqrt();
    let c3 = table.c3;

    let z_energy = crossing(table, controls.ratio_start * energy);
    let z_vdw = vdw_edge(table, controls.vdw_tol);
    let z_start = z_energy.min(z_vdw);
    let z_switch = crossing(table, controls.ratio_switch * energy).max(z_start);
    if z_switch > table.z_max() {
        return Err(Error::Coverage(format!(
            "energy {energy:e} needs the potential beyond the table end z = {:e}",
            table.z_max()
        )));
    }

    let x_start = (8.0 * mass * c3 / z_start).sqrt();
    let x_switch = (8.0 * mass * c3 / z_switch).sqrt();
    let (cp0, cm0) = wall_amplitudes(x_start, x_start)?;
    let physics = Physics { table, mass, energy };
    let control = StepControl { rtol: controls.rtol, atol: 1e-2 * controls.rtol, ..Default::default() };

    let mut max_defect: f64 = 0.0;
    let mut check = |y: &[f64; 5], at: f64| -> Result<()> {
        let d = current_defect(y);
        max_defect = max_defect.max(d);
        if d > controls.current_tol {
            return Err(Error::Integration(format!("current defect {d:.3e} at z = {at:e}")));
        }
        Ok(())
    };

    let y0 = [cp0.re, cp0.im, cm0.re, cm0.im, 0.0];
    check(&y0, z_start)?;

    // near the wall, in x (z = 8 m C3 / x^2, dz/dx = -2 z / x)
    let zx = |x: f64| 8.0 * mass * c3 / (x * x);
    let mut fx = |x: f64, y: &[f64; 5]| {
        let z = zx(x);
        let jac = -2.0 * z / x;
        physics.rhs(z, y).map(|d| d * jac)
    };
    let mut sx = Dopri5::new(&mut fx, x_start, y0, -0.05, control);
    while !sx.step(&mut fx, x_switch)? {
        check(&sx.y, zx(sx.t))?;
    }
    check(&sx.y, zx(sx.t))?;
    let (mut steps, mut rejected) = (sx.steps, sx.rejected);

    // outward in z, decade by decade
    let mut fz = |z: f64, y: &[f64; 5]| physics.rhs(z, y);
    let z_begin = zx(x_switch);
    let mut sz = Dopri5::new(&mut fz, z_begin, sx.y, 1e-3 * z_begin, control);
    let quiet = crossing(table, 1e-2 * energy);
    let mut previous = amplitudes(&sz.y);
    let mut target = z_begin;
    let mut change = f64::INFINITY;
    loop {
        target *= 10.0;
        if target > controls.z_limit {
            return Err(Error::Asymptotics { z_max: controls.z_limit, change });
        }
        while !sz.step(&mut fz, target)? {
            check(&sz.y, sz.t)?;
        }
        check(&sz.y, sz.t)?;
        let now = amplitudes(&sz.y);
        change = (now.0 - previous.0).norm().max((now.1 - previous.1).norm());
        previous = now;
        if change <= controls.tol_flat && target >= quiet {
            break;
        }
    }
    steps += sz.steps;
    rejected += sz.rejected;
    let z_end = sz.t;
    let y = sz.y;

    // lim (phi - k z) = phi(z_end) - k z_end + int_{z_end}^inf (p - k) dz
    let tail = integrate_tail_carried(
        |z| {
            let v = table.eval_potential(z);
            let p = (2.0 * mass * (energy - v)).sqrt();
            (-2.0 * mass * v / (p + k), 0.0)
        },
        z_end,
        QuadOptions { rel_tol: 1e-10, ..Default::default() },
    )
    .0
    .value;
    let phase = y[4] - k * z_end + tail;
    let (c_plus, c_minus) = amplitudes(&y);
    let r = c_plus / c_minus * Complex64::from_polar(1.0, 2.0 * phase);
    let probability = r.norm_sqr();
    let diagnostics = Diagnostics {
        z_start,
        z_energy,
        z_vdw,
        z_switch,
        z_end,
        last_decade_change: change,
        max_current_defect: max_defect,
        final_current_defect: current_defect(&y),
        steps,
        rejected_steps: rejected,
    };
    Ok(ReflectionResult { energy, k, r, probability, a_of_k: a_of_k_principal(r, k)?, diagnostics })
}

#[cfg(feature = "parallel")]
fn map_energies(table: &PotentialTable, energies: &[f64], controls: &Controls) -> Result<Vec<ReflectionResult>> {
    use rayon::prelude::*;
    energies.par_iter().map(|&e| integrate_amplitudes(table, e, controls)).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_energies(table: &PotentialTable, energies: &[f64], controls: &Controls) -> Result<Vec<ReflectionResult>> {
    energies.iter().map(|&e| integrate_amplitudes(table, e, controls)).collect()
}

/// Reflection results at each energy, sharing one table.
pub fn reflection_at_energies(table: &PotentialTable, energies: &[f64], controls: &Controls) -> Result<Vec<ReflectionResult>> {
    map_energies(table, energies, controls)
}

/// One result per free-fall height (metres); heights must be positive and
/// ascending.
pub fn reflection_curve(table: &PotentialTable, heights: &[f64], controls: &Controls) -> Result<Vec<ReflectionResult>> {
    if heights.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("heights must be strictly ascending".into()));
    }
    let energies = heights
        .iter()
        .map(|&h| table.constants.height_to_energy(h).map(|f| f.energy))
        .collect::<Result<Vec<_>>>()?;
    map_energies(table, &energies, controls)
}
