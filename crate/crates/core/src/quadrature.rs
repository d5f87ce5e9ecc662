//! Adaptive Gauss–Kronrod quadrature, Gauss–Legendre rules and Wynn's
//! epsilon accelerator.

use std::collections::BinaryHeap;
use std::cmp::Ordering;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: reals and complex numbers.
pub trait Integrand: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

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

/// One 15-point Kronrod panel; returns the Kronrod value and `|K - G|`.
pub fn gk15<T: Integrand>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        k = k + pair * WGK[i];
        if i % 2 == 1 {
            g = g + pair * WG[i / 2];
        }
    }
    let k = k * h;
    let g = g * h;
    (k, (k - g).magnitude())
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Quad<T> {
    pub value: T,
    pub error: f64,
}

/// Globally adaptive GK15 over the breakpoints `pts` (sorted, at least two).
/// Stops when the summed error estimate is below `max(abs_tol, rel_tol·|I|)`.
pub fn adaptive<T: Integrand>(
    f: impl Fn(f64) -> T,
    pts: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<Quad<T>> {
    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut err = 0.0;
    for w in pts.windows(2) {
        let (v, e) = gk15(&f, w[0], w[1]);
        total = total + v;
        err += e;
        heap.push(Panel { a: w[0], b: w[1], value: v, err: e });
    }
    let target = |total: &T| abs_tol.max(rel_tol * total.magnitude());
    while err > target(&total) && heap.len() < max_panels {
        let p = heap.pop().expect("nonempty");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            heap.push(p);
            break;
        }
        let (v1, e1) = gk15(&f, p.a, m);
        let (v2, e2) = gk15(&f, m, p.b);
        total = total - p.value + v1 + v2;
        err += e1 + e2 - p.err;
        heap.push(Panel { a: p.a, b: m, value: v1, err: e1 });
        heap.push(Panel { a: m, b: p.b, value: v2, err: e2 });
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    let mut value = T::zero();
    let mut error = 0.0;
    for p in heap.iter() {
        value = value + p.value;
        error += p.err;
    }
    let tol = target(&value);
    if error > tol && error > 10.0 * f64::EPSILON * value.magnitude() {
        return Err(Error::Quadrature { estimate: error, tolerance: tol });
    }
    Ok(Quad { value, error })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Wynn's epsilon algorithm; returns the best estimate of the limit of the
/// partial sums `s` together with a difference-based error estimate.
pub fn wynn_epsilon(s: &[f64]) -> (f64, f64) {
    let n = s.len();
    if n < 3 {
        let last = *s.last().unwrap_or(&0.0);
        let prev = if n == 2 { s[0] } else { last };
        return (last, (last - prev).abs());
    }
    // e[k] holds column k of the table; even columns approximate the limit.
    let mut prev_col = vec![0.0; n + 1];
    let mut col: Vec<f64> = s.to_vec();
    let mut best = s[n - 1];
    let mut best_err = (s[n - 1] - s[n - 2]).abs();
    let mut k = 0;
    while col.len() > 1 {
        let mut next = Vec::with_capacity(col.len() - 1);
        for i in 0..col.len() - 1 {
            let d = col[i + 1] - col[i];
            let base = if k == 0 { 0.0 } else { prev_col[i + 1] };
            if d == 0.0 {
                next.push(f64::INFINITY);
            } else {
                next.push(base + 1.0 / d);
            }
        }
        k += 1;
        if k % 2 == 0 && next.len() >= 2 {
            let m = next.len();
            let (a, b) = (next[m - 1], next[m - 2]);
            if a.is_finite() && b.is_finite() {
                let e = (a - b).abs();
                if e < best_err {
                    best = a;
                    best_err = e;
                }
            }
        }
        if next.iter().any(|v| !v.is_finite()) {
            break;
        }
        prev_col = col;
        col = next;
    }
    (best, best_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_polynomial_exact() {
        // GK15 integrates degree-22 polynomials exactly.
        let (v, _) = gk15(&|x: f64| x.powi(10) - 3.0 * x.powi(3), 0.0, 1.0);
        assert!((v - (1.0 / 11.0 - 0.75)).abs() < 1e-15);
    }

    #[test]
    fn adaptive_endpoint_singularity() {
        let q = adaptive(|x: f64| x.sqrt().ln(), &[0.0, 1.0], 1e-12, 1e-12, 500).unwrap();
        assert!((q.value + 0.5).abs() < 1e-11);
    }

    #[test]
    fn adaptive_complex() {
        let q = adaptive(
            |x: f64| Complex64::new(0.0, x).exp(),
            &[0.0, std::f64::consts::PI],
            1e-13,
            1e-13,
            100,
        )
        .unwrap();
        assert!((q.value - Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn adaptive_reports_failure() {
        let r = adaptive(|x: f64| (1.0 / x).sin() / x, &[1e-6, 1.0], 1e-14, 0.0, 4);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn gauss_legendre_moments() {
        for n in [1, 2, 5, 16, 33] {
            let (x, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}");
            let deg = 2 * n - 2;
            let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((m - 2.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        // ln 2 = 1 - 1/2 + 1/3 - ...
        let mut s = Vec::new();
        let mut acc = 0.0;
        for k in 1..=20 {
            acc += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
            s.push(acc);
        }
        let (v, _) = wynn_epsilon(&s);
        assert!((v - std::f64::consts::LN_2).abs() < 1e-12);
    }
}
