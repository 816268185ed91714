use serde::{Deserialize, Serialize};

use super::{c3_coefficient, compute_potential, compute_potential_derivative, PotentialOptions, FAR_FIT_THRESHOLD};
use crate::error::{Error, Result};
use crate::optics::{MirrorSpec, PolarizabilityModel};
use crate::quad::Estimate;
use crate::units::Constants;

/// Grid and tolerance of a potential table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableSpec {
    pub z_min: f64,
    pub z_max: f64,
    pub points_per_decade: usize,
    pub quadrature: PotentialOptions,
}

impl Default for TableSpec {
    fn default() -> Self {
        Self { z_min: 0.01, z_max: 1e8, points_per_decade: 20, quadrature: PotentialOptions::default() }
    }
}

impl TableSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.z_min > 0.0 && self.z_max > self.z_min && self.z_max.is_finite()) {
            return Err(Error::Config(format!("need 0 < z_min < z_max, got [{}, {}]", self.z_min, self.z_max)));
        }
        if self.points_per_decade < 2 {
            return Err(Error::Config("points_per_decade must be at least 2".into()));
        }
        if !(self.quadrature.rel_tol > 0.0 && self.quadrature.rel_tol < 1e-2) {
            return Err(Error::Config(format!("quadrature tolerance {} out of range", self.quadrature.rel_tol)));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let decades = (self.z_max / self.z_min).log10();
        let n = ((decades * self.points_per_decade as f64).round() as usize).max(1) + 1;
        let (s0, s1) = (self.z_min.ln(), self.z_max.ln());
        let h = (s1 - s0) / (n - 1) as f64;
        let mut z: Vec<f64> = (0..n).map(|i| (s0 + i as f64 * h).exp()).collect();
        z[0] = self.z_min;
        z[n - 1] = self.z_max;
        z
    }
}

/// V(z) on a log grid with power-law extensions outside it.
///
/// Inside the grid log(-V) is a clamped cubic spline in log z whose end
/// slopes come from the derivative quadrature; below the grid the potential
/// is exactly -C3/z^3, above it -C_far/z^n.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTable {
    pub mirror: MirrorSpec,
    pub polarizability: PolarizabilityModel,
    pub spec: TableSpec,
    pub constants: Constants,
    pub z_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub c3: f64,
    pub c_far: f64,
    pub far_exponent: i32,
    /// Relative drift of V z^n over the last decade of the grid.
    pub far_residual: f64,
    /// d log(-V) / d log z at the two grid ends.
    pub end_slopes: (f64, f64),
    log_values: Vec<f64>,
    second: Vec<f64>,
    s0: f64,
    h: f64,
}

#[cfg(feature = "parallel")]
fn evaluate_grid<F: Fn(f64) -> Result<Estimate> + Sync>(grid: &[f64], f: F) -> Result<Vec<Estimate>> {
    use rayon::prelude::*;
    grid.par_iter().map(|&z| f(z)).collect()
}

#[cfg(not(feature = "parallel"))]
fn evaluate_grid<F: Fn(f64) -> Result<Estimate>>(grid: &[f64], f: F) -> Result<Vec<Estimate>> {
    grid.iter().map(|&z| f(z)).collect()
}

impl PotentialTable {
    pub fn build(
        mirror: &MirrorSpec,
        polarizability: &PolarizabilityModel,
        spec: TableSpec,
        constants: &Constants,
    ) -> Result<Self> {
        spec.validate()?;
        let grid = spec.grid();
        let opts = spec.quadrature;
        let est = evaluate_grid(&grid, |z| compute_potential(mirror, polarizability, z, constants, opts))?;
        let values: Vec<f64> = est.iter().map(|e| e.value).collect();
        let errors: Vec<f64> = est.iter().map(|e| e.error).collect();
        let slope = |i: usize| -> Result<f64> {
            let d = compute_potential_derivative(mirror, polarizability, grid[i], constants, opts)?;
            Ok(grid[i] * d.value / values[i])
        };
        let end_slopes = (slope(0)?, slope(grid.len() - 1)?);
        let c3 = c3_coefficient(mirror, polarizability, opts)?;
        Self::assemble(mirror.clone(), polarizability.clone(), spec, *constants, grid, values, errors, c3, end_slopes)
    }

    /// Validates the samples, fits the far asymptote and sets up the spline.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        mirror: MirrorSpec,
        polarizability: PolarizabilityModel,
        spec: TableSpec,
        constants: Constants,
        z_grid: Vec<f64>,
        values: Vec<f64>,
        errors: Vec<f64>,
        c3: f64,
        end_slopes: (f64, f64),
    ) -> Result<Self> {
        let n = z_grid.len();
        if n < 4 || values.len() != n || errors.len() != n {
            return Err(Error::TableBuild(format!("inconsistent table sizes ({n} grid points)")));
        }
        if let Some(i) = values.iter().position(|v| !(*v < 0.0)) {
            return Err(Error::TableBuild(format!("V({:e}) = {:e} is not negative", z_grid[i], values[i])));
        }
        if let Some(i) = values.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::TableBuild(format!(
                "V not increasing between z = {:e} and {:e}",
                z_grid[i],
                z_grid[i + 1]
            )));
        }
        let near = -values[0] * z_grid[0].powi(3) / c3;
        if (near - 1.0).abs() > 1e-2 {
            return Err(Error::Asymptote(format!(
                "V z^3 / (-C3) = {near:.4} at z_min = {:e}; lower z_min",
                z_grid[0]
            )));
        }
        let far_exponent = mirror.far_exponent();
        let z_max = z_grid[n - 1];
        let c_far = -values[n - 1] * z_max.powi(far_exponent);
        // compare with the sample a decade inward (or the first sample)
        let j = n - 1 - (spec.points_per_decade).min(n - 1);
        let far_residual = (-values[j] * z_grid[j].powi(far_exponent) / c_far - 1.0).abs();
        if far_residual > FAR_FIT_THRESHOLD {
            return Err(Error::Asymptote(format!(
                "V z^{far_exponent} drifts by {far_residual:.3e} over the last decade; raise z_max"
            )));
        }

        let log_values: Vec<f64> = values.iter().map(|v| (-v).ln()).collect();
        let s0 = z_grid[0].ln();
        let h = (z_max.ln() - s0) / (n - 1) as f64;
        let second = clamped_spline(&log_values, h, end_slopes.0, end_slopes.1);
        Ok(Self {
            mirror,
            polarizability,
            spec,
            constants,
            z_grid,
            values,
            errors,
            c3,
            c_far,
            far_exponent,
            far_residual,
            end_slopes,
            log_values,
            second,
            s0,
            h,
        })
    }

    pub fn z_min(&self) -> f64 {
        self.z_grid[0]
    }

    pub fn z_max(&self) -> f64 {
        *self.z_grid.last().expect("non-empty grid")
    }

    /// (log(-V), d/ds, d^2/ds^2) at s = ln z inside the grid.
    fn spline(&self, s: f64) -> (f64, f64, f64) {
        let n = self.log_values.len();
        let pos = ((s - self.s0) / self.h).max(0.0);
        let i = (pos.floor() as usize).min(n - 2);
        let t = pos - i as f64;
        let (a, b) = (1.0 - t, t);
        let (y0, y1) = (self.log_values[i], self.log_values[i + 1]);
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let h = self.h;
        let y = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let dy = (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1;
        let d2y = a * m0 + b * m1;
        (y, dy, d2y)
    }

    pub fn eval_potential(&self, z: f64) -> f64 {
        self.eval_derivatives(z).0
    }

    /// (V, dV/dz, d^2V/dz^2).
    pub fn eval_derivatives(&self, z: f64) -> (f64, f64, f64) {
        if z < self.z_min() {
            let c3 = self.c3;
            return (-c3 / z.powi(3), 3.0 * c3 / z.powi(4), -12.0 * c3 / z.powi(5));
        }
        if z > self.z_max() {
            let (c, n) = (self.c_far, self.far_exponent);
            let nf = n as f64;
            return (-c / z.powi(n), nf * c / z.powi(n + 1), -nf * (nf + 1.0) * c / z.powi(n + 2));
        }
        let (y, dy, d2y) = self.spline(z.ln());
        let v = -y.exp();
        (v, v * dy / z, v * (dy * dy + d2y - dy) / (z * z))
    }
}

/// Second derivatives of the clamped cubic spline through equally spaced
/// samples `y` with step `h` and end first derivatives `d0`, `dn`.
fn clamped_spline(y: &[f64], h: f64, d0: f64, dn: f64) -> Vec<f64> {
    let n = y.len();
    let mut diag = vec![2.0 * h / 3.0; n];
    diag[0] = h / 3.0;
    diag[n - 1] = h / 3.0;
    let off = h / 6.0;
    let mut rhs = vec![0.0; n];
    rhs[0] = (y[1] - y[0]) / h - d0;
    rhs[n - 1] = dn - (y[n - 1] - y[n - 2]) / h;
    for i in 1..n - 1 {
        rhs[i] = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / h;
    }
    // Thomas algorithm
    for i in 1..n {
        let w = off / diag[i - 1];
        diag[i] -= w * off;
        rhs[i] -= w * rhs[i - 1];
    }
    let mut m = vec![0.0; n];
    m[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        m[i] = (rhs[i] - off * m[i + 1]) / diag[i];
    }
    m
}
