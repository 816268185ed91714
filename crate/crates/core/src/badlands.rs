//! The badlands function Q(z) = p''/(2p^3) - 3p'^2/(4p^4), the Schwarzian of
//! the WKB phase over 2p^2. Quantum reflection happens where Q is of order
//! one; WKB holds where it is small.

use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::cp_potential::PotentialTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BadlandsProfile {
    pub energy: f64,
    pub z_grid: Vec<f64>,
    pub q: Vec<f64>,
    pub peak_z: f64,
    pub peak_q: f64,
}

/// Q at a single point.
pub fn badlands_q(table: &PotentialTable, energy: f64, z: f64) -> f64 {
    let m = table.constants.atom_mass_au;
    let (v, dv, d2v) = table.eval_derivatives(z);
    let p = (2.0 * m * (energy - v)).sqrt();
    let dp = -m * dv / p;
    let d2p = (-m * d2v - dp * dp) / p;
    0.5 * d2p / p.powi(3) - 0.75 * (dp / (p * p)).powi(2)
}

/// Log-spaced grid of `n` points over [z_lo, z_hi].
pub fn log_grid(z_lo: f64, z_hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(z_lo > 0.0 && z_hi > z_lo) || n < 3 {
        return Err(Error::Config(format!("bad badlands grid [{z_lo}, {z_hi}] x {n}")));
    }
    let step = (z_hi / z_lo).ln() / (n - 1) as f64;
    let mut z: Vec<f64> = (0..n).map(|i| z_lo * (step * i as f64).exp()).collect();
    z[n - 1] = z_hi;
    Ok(z)
}

/// Evaluates Q on `z_grid` (ascending) and refines the maximum by a golden
/// section search in ln z.
pub fn badlands_profile(table: &PotentialTable, energy: f64, z_grid: &[f64]) -> Result<BadlandsProfile> {
    if !(energy > 0.0) || !energy.is_finite() {
        return Err(Error::Domain(format!("badlands needs E > 0, got {energy}")));
    }
    if z_grid.len() < 3 || z_grid.windows(2).any(|w| !(w[1] > w[0])) || !(z_grid[0] > 0.0) {
        return Err(Error::Config("badlands grid must be positive, ascending, with at least 3 points".into()));
    }
    let q: Vec<f64> = z_grid.iter().map(|&z| badlands_q(table, energy, z)).collect();
    let (imax, _) = q
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
    let n = z_grid.len();
    if imax == 0 || imax == n - 1 {
        let side = if imax == 0 { "inner" } else { "outer" };
        return Err(Error::Coverage(format!(
            "Q is largest at the {side} end z = {:e}; widen the grid",
            z_grid[imax]
        )));
    }
    let f = |s: f64| badlands_q(table, energy, s.exp());
    let (s_peak, q_peak) = golden_max(f, z_grid[imax - 1].ln(), z_grid[imax + 1].ln(), 1e-10);
    if !(q_peak > 0.0 && q_peak.is_finite()) {
        return Err(Error::Domain(format!("badlands peak value {q_peak} is not positive")));
    }
    Ok(BadlandsProfile { energy, z_grid: z_grid.to_vec(), q, peak_z: s_peak.exp(), peak_q: q_peak })
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let s = 0.5 * (a + b);
    (s, f(s))
}

impl BadlandsProfile {
    /// Two columns, z in bohr and Q.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "z_bohr,Q")?;
        for (z, q) in self.z_grid.iter().zip(&self.q) {
            writeln!(w, "{z:e},{q:e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_parabola_top() {
        let (x, y) = golden_max(|x| 2.0 - (x - 0.3).powi(2), -1.0, 2.0, 1e-12);
        // a smooth maximum is only resolvable to about sqrt(eps)
        assert!((x - 0.3).abs() < 1e-7);
        assert!((y - 2.0).abs() < 1e-14);
    }

    #[test]
    fn grid_ends() {
        let g = log_grid(1.0, 1e4, 9).unwrap();
        assert_eq!(g.len(), 9);
        assert!((g[2] - 10.0).abs() < 1e-12);
        assert_eq!(g[8], 1e4);
        assert!(log_grid(0.0, 1.0, 5).is_err());
    }
}
