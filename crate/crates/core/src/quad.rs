//! Globally adaptive Gauss-Kronrod (7/15) quadrature.
//!
//! The integrand may return a second "carried" error alongside its value;
//! this is how the nested potential integral propagates the error estimates
//! of its inner integrals into the outer one.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Integral estimate with its absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            self.error
        } else {
            self.error / self.value.abs()
        }
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate { value: self.value + rhs.value, error: self.error + rhs.error }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-8, abs_tol: 0.0, max_intervals: 400 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    carried: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> (f64, f64)>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let (fc, ec) = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut carried = ec.abs() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, e1) = f(center - dx);
        let (f2, e2) = f(center + dx);
        resk += WGK[j] * (f1 + f2);
        carried += WGK[j] * (e1.abs() + e2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let value = resk * half;
    let error = ((resk - resg) * half).abs();
    Segment { a, b, value, error, carried: carried * half.abs() }
}

/// Adaptive integration of `f` over the finite interval `[a, b]`, starting
/// from the partition given by `breaks` (points outside the interval are
/// ignored). Returns the estimate and whether the tolerance was met.
pub fn integrate_carried<F>(mut f: F, a: f64, b: f64, breaks: &[f64], opts: QuadOptions) -> (Estimate, bool)
where
    F: FnMut(f64) -> (f64, f64),
{
    let mut nodes = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    nodes.extend(inner);
    nodes.push(b);

    let mut heap = BinaryHeap::new();
    for w in nodes.windows(2) {
        heap.push(kronrod(&mut f, w[0], w[1]));
    }
    loop {
        let (value, error, carried) = heap
            .iter()
            .fold((0.0, 0.0, 0.0), |acc, s| (acc.0 + s.value, acc.1 + s.error, acc.2 + s.carried));
        let tol = opts.abs_tol.max(opts.rel_tol * value.abs());
        let total = Estimate { value, error: error + carried };
        if error <= tol {
            return (total, total.error <= tol.max(opts.rel_tol * value.abs()) * 10.0);
        }
        if heap.len() >= opts.max_intervals {
            return (total, false);
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            let (value, error, carried) = heap
                .iter()
                .fold((0.0, 0.0, 0.0), |acc, s| (acc.0 + s.value, acc.1 + s.error, acc.2 + s.carried));
            return (Estimate { value, error: error + carried }, false);
        }
        heap.push(kronrod(&mut f, worst.a, mid));
        heap.push(kronrod(&mut f, mid, worst.b));
    }
}

/// Adaptive integration of a plain integrand.
pub fn integrate<F>(mut f: F, a: f64, b: f64, breaks: &[f64], opts: QuadOptions) -> (Estimate, bool)
where
    F: FnMut(f64) -> f64,
{
    integrate_carried(|x| (f(x), 0.0), a, b, breaks, opts)
}

/// Integral over `[a, inf)` through the substitution x = a / t, which is
/// well behaved for integrands decaying at least like 1/x^2. Requires a > 0.
pub fn integrate_tail_carried<F>(mut f: F, a: f64, opts: QuadOptions) -> (Estimate, bool)
where
    F: FnMut(f64) -> (f64, f64),
{
    debug_assert!(a > 0.0);
    integrate_carried(
        |t| {
            if t <= 0.0 {
                return (0.0, 0.0);
            }
            let x = a / t;
            let jac = a / (t * t);
            let (v, e) = f(x);
            let (v, e) = (v * jac, e * jac);
            if v.is_finite() { (v, e) } else { (0.0, 0.0) }
        },
        0.0,
        1.0,
        &[],
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let (est, ok) = integrate(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, &[], QuadOptions::default());
        assert!(ok);
        assert!((est.value - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
    }

    #[test]
    fn peaked_integrand_adapts() {
        // Lorentzian of width 1e-3 on [-1, 1]
        let w = 1e-3;
        let (est, ok) = integrate(|x| w / (x * x + w * w), -1.0, 1.0, &[], QuadOptions { rel_tol: 1e-10, ..Default::default() });
        let exact = 2.0 * (1.0 / w).atan();
        assert!(ok);
        assert!(((est.value - exact) / exact).abs() < 1e-10);
        assert!(est.error < 1e-8);
    }

    #[test]
    fn tail_mapping() {
        let (est, ok) = integrate_tail_carried(|x| (1.0 / (1.0 + x * x), 0.0), 1.0, QuadOptions { rel_tol: 1e-12, ..Default::default() });
        assert!(ok);
        assert!((est.value - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        let (est, _) = integrate_tail_carried(|x| ((-x).exp(), 0.0), 2.0, QuadOptions { rel_tol: 1e-12, ..Default::default() });
        assert!((est.value - (-2.0f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn reports_failure_when_budget_exhausted() {
        let (_, ok) = integrate(|x| (1.0 / x).sin(), 1e-6, 1.0, &[], QuadOptions { rel_tol: 1e-14, max_intervals: 8, ..Default::default() });
        assert!(!ok);
    }

    #[test]
    fn carried_errors_accumulate() {
        let (est, _) = integrate_carried(|_| (1.0, 0.5), 0.0, 2.0, &[], QuadOptions::default());
        assert!((est.value - 2.0).abs() < 1e-14);
        assert!((est.error - 1.0).abs() < 1e-12);
    }
}
