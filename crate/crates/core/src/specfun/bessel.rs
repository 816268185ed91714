//! Bessel functions of the first and second kind of order 0 and 1 for real
//! positive argument, and the order-1 Hankel functions built from them.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

use super::dd::Dd;
use super::gamma::EULER_GAMMA;
use crate::error::{Error, Result};

/// Below this argument the ascending series are used.
const SERIES_MAX: f64 = 20.0;

/// (J_n(x), Y_n(x)) for n in {0, 1} from the ascending series, summed in
/// double-double.
fn series(n: u32, x: f64) -> (f64, f64) {
    let q = -0.25 * x * x;
    // T_k = q^k / (k! (n+k)!)
    let mut term = Dd::new(1.0);
    let mut sum_j = term;
    let mut harmonic_k = Dd::ZERO;
    let mut harmonic_nk = if n == 1 { Dd::new(1.0) } else { Dd::ZERO };
    let mut sum_h = term.mul(harmonic_k.add(harmonic_nk));
    for k in 1..400u32 {
        let kf = k as f64;
        term = term.mul_f64(q).div_f64(kf * (kf + n as f64));
        harmonic_k = harmonic_k.add(Dd::recip_f64(kf));
        harmonic_nk = harmonic_nk.add(Dd::recip_f64(kf + n as f64));
        sum_j = sum_j.add(term);
        sum_h = sum_h.add(term.mul(harmonic_k.add(harmonic_nk)));
        if term.abs_f64() < 1e-34 && kf > x {
            break;
        }
    }
    let half_pow = if n == 1 { 0.5 * x } else { 1.0 };
    let j = sum_j.to_f64() * half_pow;
    let log_term = 2.0 / PI * ((0.5 * x).ln() + EULER_GAMMA) * j;
    let finite = if n == 1 { -2.0 / (PI * x) } else { 0.0 };
    let y = finite + log_term - half_pow / PI * sum_h.to_f64();
    (j, y)
}

/// Hankel's large-argument expansion of H^(1)_n(x).
fn hankel_asymptotic(n: u32, x: f64) -> Complex64 {
    let mu = 4.0 * (n * n) as f64;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut last = 1.0f64;
    for k in 0..200 {
        let kf = k as f64;
        let odd = 2.0 * kf + 1.0;
        let next = term * Complex64::new(0.0, 1.0) * ((mu - odd * odd) / ((kf + 1.0) * 8.0 * x));
        let mag = next.norm();
        if mag > last || mag < 1e-18 {
            break;
        }
        sum += next;
        term = next;
        last = mag;
    }
    let omega = x - 0.5 * n as f64 * PI - FRAC_PI_4;
    Complex64::from_polar((2.0 / (PI * x)).sqrt(), omega) * sum
}

fn jy(n: u32, x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Bessel functions need x > 0, got {x}")));
    }
    if x <= SERIES_MAX {
        Ok(series(n, x))
    } else {
        let h = hankel_asymptotic(n, x);
        Ok((h.re, h.im))
    }
}

/// (J_0(x), Y_0(x)).
pub fn bessel_jy0(x: f64) -> Result<(f64, f64)> {
    jy(0, x)
}

/// (J_1(x), Y_1(x)).
pub fn bessel_jy1(x: f64) -> Result<(f64, f64)> {
    jy(1, x)
}

/// H^(1)_1(x) = J_1(x) + i Y_1(x).
pub fn hankel1_order1(x: f64) -> Result<Complex64> {
    let (j, y) = jy(1, x)?;
    Ok(Complex64::new(j, y))
}

/// H^(2)_1(x), the complex conjugate of H^(1)_1 for real x.
pub fn hankel2_order1(x: f64) -> Result<Complex64> {
    Ok(hankel1_order1(x)?.conj())
}
