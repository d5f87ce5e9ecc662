//! Fractional heat kernel `K_α(x) = ∫ e^{-|2πξ|^α} e^{2πi x·ξ} dξ` on `ℝ^n`.
//!
//! In one dimension `K_α^{(k)}(x) = (1/π) Re ∫_0^∞ (iu)^k e^{-u^α} e^{ixu} du`.
//! The main route rotates the contour to `u = v e^{iφ}` with
//! `φ = min(π/2, π/(4α))`, which turns the oscillation into exponential decay
//! and keeps `Re(u^α) > 0`. The Gaussian case uses the exact saddle shift. An
//! independent real-axis route (segmentation at the zeros of the oscillating
//! factor plus Wynn acceleration) is kept for cross-checks and is the route
//! used for the radial two-dimensional kernel.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{adaptive, wynn_epsilon};
use crate::special::{bessel_j0, bessel_j1};

const REL_TOL: f64 = 1e-13;
const MAX_PANELS: usize = 4000;
/// Tail cut: integrands are dropped where their log-magnitude is below this.
const LOG_CUTOFF: f64 = -60.0;
const MAX_SEGMENTS: usize = 400;
const WYNN_WINDOW: usize = 40;

/// Kernel value together with its quadrature error estimate.
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct KernelValue {
    pub x: f64,
    pub value: f64,
    pub error: f64,
}

fn check(alpha: f64, n: usize, k: usize, x: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::param(format!("alpha must be positive, got {alpha}")));
    }
    if n != 1 && n != 2 {
        return Err(Error::param(format!("kernel dimension must be 1 or 2, got {n}")));
    }
    if k > 2 {
        return Err(Error::param(format!("derivative order must be 0, 1 or 2, got {k}")));
    }
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::param(format!("radius must be finite and nonnegative, got {x}")));
    }
    Ok(())
}

fn is_gaussian(alpha: f64) -> bool {
    (alpha - 2.0).abs() < 1e-14
}

/// Kernel values `K_α(x)` at the given radii.
pub fn kernel_values(alpha: f64, n: usize, xs: &[f64]) -> Result<Vec<KernelValue>> {
    xs.iter().map(|&x| kernel_derivative(alpha, n, 0, x)).collect()
}

/// `k`-th radial derivative of `K_α` at radius `x` (for `n = 1` the ordinary
/// `x`-derivative, whose modulus equals `|∇^k K_α|`).
pub fn kernel_derivative(alpha: f64, n: usize, k: usize, x: f64) -> Result<KernelValue> {
    check(alpha, n, k, x)?;
    if n == 1 {
        if is_gaussian(alpha) {
            gaussian_1d(k, x)
        } else {
            rotated_1d(alpha, k, x)
        }
    } else {
        radial_2d(alpha, k, x)
    }
}

fn gaussian_1d(k: usize, x: f64) -> Result<KernelValue> {
    // After u = v + ix/2 the integrand is (iv - x/2)^k e^{-v^2}, times e^{-x^2/4}.
    let f = |v: f64| {
        let base = Complex64::new(-0.5 * x, v);
        (base.powu(k as u32) * (-v * v).exp()).re
    };
    let q = adaptive(f, &[-9.0, -3.0, 0.0, 3.0, 9.0], 0.0, REL_TOL, MAX_PANELS)?;
    let pre = (-0.25 * x * x).exp() / (2.0 * PI);
    Ok(KernelValue { x, value: pre * q.value, error: pre * q.error })
}

/// Smallest `V` (by doubling) where `log(V^k) - decay(V) < LOG_CUTOFF`.
fn tail_limit(k: usize, decay: impl Fn(f64) -> f64, start: f64) -> f64 {
    let mut v = start.max(1e-3);
    for _ in 0..200 {
        if (k as f64) * v.ln().max(0.0) - decay(v) < LOG_CUTOFF {
            return v;
        }
        v *= 2.0;
    }
    v
}

fn rotated_1d(alpha: f64, k: usize, x: f64) -> Result<KernelValue> {
    let phi = (PI / 2.0).min(PI / (4.0 * alpha));
    let rot = Complex64::from_polar(1.0, phi);
    let rot_a = Complex64::from_polar(1.0, alpha * phi);
    let decay = |v: f64| v.powf(alpha) * rot_a.re + x * v * rot.im;
    let vmax = tail_limit(k, decay, 1.0 / (1.0 + x));
    let wmax = vmax.sqrt();
    let g = |w: f64| {
        let v = w * w;
        let e = -rot_a * v.powf(alpha) + Complex64::new(0.0, x) * rot * v;
        e.exp() * (2.0 * w * v.powi(k as i32))
    };
    let mut pts: Vec<f64> = (0..=16).rev().map(|i| wmax * 0.5f64.powi(i)).collect();
    pts.insert(0, 0.0);
    let q = adaptive(g, &pts, 1e-300, REL_TOL, MAX_PANELS)?;
    let pre = Complex64::new(0.0, 1.0).powu(k as u32) * Complex64::from_polar(1.0, phi * (k as f64 + 1.0));
    Ok(KernelValue {
        x,
        value: (pre * q.value).re / PI,
        error: q.error / PI,
    })
}

/// Oscillatory integral `∫_0^∞ h(u) du` with `h` changing sign near the given
/// increasing `zeros`; integrates segment by segment, accelerating the partial
/// sums with Wynn's algorithm when the decay cut `umax` is far away.
fn oscillatory(
    h: impl Fn(f64) -> f64,
    zero: impl Fn(usize) -> f64,
    umax: f64,
    singular_origin: bool,
) -> Result<(f64, f64)> {
    let mut sums = Vec::new();
    let mut total = 0.0;
    let mut qerr = 0.0;
    let mut a = 0.0;
    let mut m = 0;
    loop {
        let mut b = zero(m);
        m += 1;
        if b <= a {
            continue;
        }
        let last = b >= umax;
        if last {
            b = umax;
        }
        let pts: Vec<f64> = if a == 0.0 && singular_origin {
            let mut p: Vec<f64> = (0..=12).rev().map(|i| b * 0.5f64.powi(i)).collect();
            p.insert(0, 0.0);
            p
        } else {
            vec![a, b]
        };
        let q = adaptive(&h, &pts, 1e-300, REL_TOL, MAX_PANELS)?;
        total += q.value;
        qerr += q.error;
        sums.push(total);
        a = b;
        if last {
            return Ok((total, qerr));
        }
        if sums.len() >= MAX_SEGMENTS {
            let window = &sums[sums.len() - WYNN_WINDOW..];
            let (v, e) = wynn_epsilon(window);
            return Ok((v, e + qerr));
        }
    }
}

/// Real-axis route for `n = 1`: `(1/π) ∫_0^∞ u^k e^{-u^α} cos(xu + kπ/2) du`.
pub fn kernel_derivative_real_axis(alpha: f64, k: usize, x: f64) -> Result<KernelValue> {
    check(alpha, 1, k, x)?;
    let shift = k as f64 * PI / 2.0;
    let h = |u: f64| u.powi(k as i32) * (-u.powf(alpha)).exp() * (x * u + shift).cos();
    let umax = tail_limit(k, |u| u.powf(alpha), 1.0);
    let zero = |m: usize| {
        if x == 0.0 {
            f64::INFINITY
        } else {
            ((m as f64 + 0.5) * PI - shift).max(0.0) / x
        }
    };
    let (v, e) = oscillatory(h, zero, umax, true)?;
    Ok(KernelValue { x, value: v / PI, error: e / PI })
}

/// `d^k/dz^k J_0(z)` for `k ≤ 2`.
fn j0_derivative(k: usize, z: f64) -> f64 {
    match k {
        0 => bessel_j0(z),
        1 => -bessel_j1(z),
        _ => {
            if z.abs() < 1e-8 {
                -0.5 + 3.0 * z * z / 16.0
            } else {
                -bessel_j0(z) + bessel_j1(z) / z
            }
        }
    }
}

/// Radial kernel in the plane: `(1/2π) ∫_0^∞ e^{-u^α} u^{k+1} J_0^{(k)}(ru) du`.
fn radial_2d(alpha: f64, k: usize, r: f64) -> Result<KernelValue> {
    let h = |u: f64| u.powi(k as i32 + 1) * (-u.powf(alpha)).exp() * j0_derivative(k, r * u);
    let umax = tail_limit(k + 1, |u| u.powf(alpha), 1.0);
    // Asymptotic zeros of J_0, J_1 and J_0'' = -J_0 + J_1/z.
    let offset = if k == 1 { 1.25 } else { 0.75 };
    let zero = |m: usize| {
        if r == 0.0 {
            f64::INFINITY
        } else {
            (m as f64 + offset) * PI / r
        }
    };
    let (v, e) = oscillatory(h, zero, umax, true)?;
    Ok(KernelValue { x: r, value: v / (2.0 * PI), error: e / (2.0 * PI) })
}

/// Log-log least-squares fit of `|∇^k K_α|` against the radius.
#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub alpha: f64,
    pub n: usize,
    pub k: usize,
    pub slope: f64,
    pub intercept: f64,
    pub points_used: usize,
    pub samples: Vec<KernelValue>,
}

/// Fit the power-law decay of `|∇^k K_α|` on `points` geometric radii in
/// `[x_min, x_max]`. Samples whose value is not at least 100 times its error
/// estimate (or underflows) are excluded from the fit.
pub fn kernel_decay_probe(
    alpha: f64,
    n: usize,
    k: usize,
    x_min: f64,
    x_max: f64,
    points: usize,
) -> Result<DecayFit> {
    if !(x_min > 0.0 && x_max > x_min) || points < 2 {
        return Err(Error::param("decay probe needs 0 < x_min < x_max and at least two radii"));
    }
    if x_max / x_min < 100.0 {
        return Err(Error::param("decay probe radii must span at least two decades"));
    }
    let ratio = (x_max / x_min).ln();
    let samples: Vec<KernelValue> = (0..points)
        .map(|i| {
            let x = x_min * (ratio * i as f64 / (points - 1) as f64).exp();
            kernel_derivative(alpha, n, k, x)
        })
        .collect::<Result<_>>()?;
    let used: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.value.abs() > 100.0 * s.error && s.value.abs() > f64::MIN_POSITIVE)
        .map(|s| (s.x.ln(), s.value.abs().ln()))
        .collect();
    if used.len() < 2 {
        return Err(Error::Numerical("too few reliable kernel samples for a decay fit".into()));
    }
    let (slope, intercept) = least_squares(&used);
    Ok(DecayFit { alpha, n, k, slope, intercept, points_used: used.len(), samples })
}

pub(crate) fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;

    fn poisson(x: f64) -> f64 {
        1.0 / (PI * (1.0 + x * x))
    }

    fn gauss(x: f64) -> f64 {
        (-(x * x) / 4.0).exp() / (4.0 * PI).sqrt()
    }

    #[test]
    fn spec_examples() {
        let v = kernel_values(1.0, 1, &[0.0, 1.0]).unwrap();
        assert!((v[0].value - 1.0 / PI).abs() < 1e-12);
        assert!((v[1].value - 1.0 / (2.0 * PI)).abs() < 1e-12);
        let g = kernel_values(2.0, 1, &[0.0]).unwrap();
        assert!((g[0].value - 0.5 / PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn closed_forms_on_radii() {
        for i in 0..20 {
            let x = 10.0 * i as f64 / 19.0;
            let p = kernel_derivative(1.0, 1, 0, x).unwrap();
            assert!((p.value - poisson(x)).abs() <= 1e-10 * poisson(x), "x={x}");
            let g = kernel_derivative(2.0, 1, 0, x).unwrap();
            assert!((g.value - gauss(x)).abs() <= 1e-10 * gauss(x), "x={x}");
        }
    }

    #[test]
    fn derivative_closed_forms() {
        for x in [0.3f64, 2.0, 7.0] {
            let d1 = -2.0 * x / (PI * (1.0 + x * x).powi(2));
            let d2 = (6.0 * x * x - 2.0) / (PI * (1.0 + x * x).powi(3));
            assert!((kernel_derivative(1.0, 1, 1, x).unwrap().value - d1).abs() < 1e-11 * d1.abs());
            assert!((kernel_derivative(1.0, 1, 2, x).unwrap().value - d2).abs() < 1e-11 * d2.abs());
            let g1 = -x / 2.0 * gauss(x);
            let g2 = (x * x / 4.0 - 0.5) * gauss(x);
            assert!((kernel_derivative(2.0, 1, 1, x).unwrap().value - g1).abs() < 1e-11 * gauss(x));
            assert!((kernel_derivative(2.0, 1, 2, x).unwrap().value - g2).abs() < 1e-11 * gauss(x));
        }
    }

    #[test]
    fn origin_value_gamma_formula() {
        for alpha in [0.5, 0.8, 1.3, 1.7] {
            let k0 = kernel_derivative(alpha, 1, 0, 0.0).unwrap().value;
            let exact = gamma(1.0 + 1.0 / alpha) / PI;
            assert!((k0 - exact).abs() < 1e-11 * exact, "alpha={alpha}");
        }
    }

    #[test]
    fn routes_agree() {
        for alpha in [0.5, 1.0, 1.5, 3.0] {
            for k in 0..=2 {
                for x in [0.0, 0.7, 3.0, 10.0] {
                    let a = kernel_derivative(alpha, 1, k, x).unwrap();
                    let b = kernel_derivative_real_axis(alpha, k, x).unwrap();
                    let scale = a.value.abs().max(1e-6);
                    assert!(
                        (a.value - b.value).abs() < 1e-8 * scale,
                        "alpha={alpha} k={k} x={x}: {} vs {}",
                        a.value,
                        b.value
                    );
                }
            }
        }
    }

    #[test]
    fn planar_closed_forms() {
        for r in [0.0, 0.5, 2.0, 6.0] {
            let p = kernel_derivative(1.0, 2, 0, r).unwrap().value;
            let pe = (1.0 + r * r).powf(-1.5) / (2.0 * PI);
            assert!((p - pe).abs() < 1e-9 * pe, "r={r}: {p} vs {pe}");
            let g = kernel_derivative(2.0, 2, 0, r).unwrap().value;
            let ge = (-(r * r) / 4.0).exp() / (4.0 * PI);
            assert!((g - ge).abs() < 1e-9 * ge.max(1e-6), "r={r}");
        }
        let d = kernel_derivative(1.0, 2, 1, 2.0).unwrap().value;
        let de = -3.0 * 2.0 * (5.0f64).powf(-2.5) / (2.0 * PI);
        assert!((d - de).abs() < 1e-9 * de.abs());
    }

    #[test]
    fn positivity_for_stable_range() {
        for alpha in [0.5, 1.0, 1.5, 2.0] {
            for x in [0.0, 1.0, 5.0, 50.0, 500.0] {
                let v = kernel_derivative(alpha, 1, 0, x).unwrap();
                assert!(v.value >= -v.error, "alpha={alpha} x={x}");
            }
        }
    }

    #[test]
    fn poisson_decay_slope() {
        let fit = kernel_decay_probe(1.0, 1, 0, 10.0, 1000.0, 12).unwrap();
        assert!((fit.slope + 2.0).abs() < 0.02);
        let half = kernel_decay_probe(0.5, 1, 0, 10.0, 1000.0, 12).unwrap();
        assert!(half.slope >= -1.65 && half.slope <= -1.35, "{}", half.slope);
        let g = kernel_decay_probe(2.0, 1, 0, 10.0, 1000.0, 24).unwrap();
        assert!(g.slope <= -3.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(kernel_values(0.0, 1, &[1.0]).is_err());
        assert!(kernel_values(1.0, 3, &[1.0]).is_err());
        assert!(kernel_values(1.0, 1, &[-1.0]).is_err());
        assert!(kernel_decay_probe(1.0, 1, 0, 10.0, 50.0, 8).is_err());
    }
}
