//! Dormand-Prince 5(4) stepper with embedded error control, used for the
//! coupled amplitude equations. The state is a fixed-size real array.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_steps: 5_000_000 }
    }
}

/// Integrator state between calls. Works for either direction of `t`.
pub struct Dopri5<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    h: f64,
    dydt: [f64; N],
    pub control: StepControl,
    pub steps: usize,
    pub rejected: usize,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for (c, k) in terms {
            s += c * k[i];
        }
        *o += h * s;
    }
    out
}

impl<const N: usize> Dopri5<N> {
    /// `h0` is the signed trial step.
    pub fn new<F: FnMut(f64, &[f64; N]) -> [f64; N]>(mut f: F, t: f64, y: [f64; N], h0: f64, control: StepControl) -> Self {
        let dydt = f(t, &y);
        Self { t, y, h: h0, dydt, control, steps: 0, rejected: 0 }
    }

    /// Advances by one accepted step without passing `t_end`. Returns
    /// `true` once `t_end` is reached.
    pub fn step<F: FnMut(f64, &[f64; N]) -> [f64; N]>(&mut self, f: &mut F, t_end: f64) -> Result<bool> {
        let dir = (t_end - self.t).signum();
        if dir == 0.0 {
            return Ok(true);
        }
        let mut h = self.h.abs() * dir;
        loop {
            if self.steps + self.rejected >= self.control.max_steps {
                return Err(Error::Integration(format!("step budget exhausted at t = {:e}", self.t)));
            }
            let last = (self.t + h - t_end) * dir >= 0.0;
            if last {
                h = t_end - self.t;
            }
            let (t, y, k1) = (self.t, &self.y, &self.dydt);
            let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
            let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
            let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(t + C5 * h, &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(t + h, &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
            let y_new = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let t_new = if last { t_end } else { t + h };
            let k7 = f(t_new, &y_new);
            let err_vec = axpy(&[0.0; N], h, &[(E1, k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)]);
            let mut err = 0.0;
            for i in 0..N {
                let scale = self.control.atol + self.control.rtol * y[i].abs().max(y_new[i].abs());
                err += (err_vec[i] / scale).powi(2);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Integration(format!("non-finite state near t = {t:e}")));
            }
            if err <= 1.0 {
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                self.t = t_new;
                self.y = y_new;
                self.dydt = k7;
                self.steps += 1;
                if !last {
                    self.h = h * grow;
                }
                return Ok(last);
            }
            self.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            if (h.abs()) <= 1e-14 * self.t.abs().max(1e-300) {
                return Err(Error::Integration(format!("step size underflow at t = {t:e}")));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let mut f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut s = Dopri5::new(&mut f, 0.0, [1.0, 0.0], 0.1, StepControl::default());
        let end = 20.0 * std::f64::consts::PI;
        while !s.step(&mut f, end).unwrap() {}
        assert!((s.y[0] - 1.0).abs() < 1e-8);
        assert!(s.y[1].abs() < 1e-8);
    }

    #[test]
    fn backward_exponential() {
        let mut f = |_t: f64, y: &[f64; 1]| [y[0]];
        let mut s = Dopri5::new(&mut f, 2.0, [2f64.exp()], -0.01, StepControl::default());
        while !s.step(&mut f, 0.0).unwrap() {}
        assert_eq!(s.t, 0.0);
        assert!((s.y[0] - 1.0).abs() < 1e-9);
    }
}
