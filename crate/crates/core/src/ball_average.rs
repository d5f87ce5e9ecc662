//! Higher-order ball averages `B_{ℓ,t}` and their multiplier `m_ℓ`.
//!
//! `m_ℓ(ξ) = C_n Σ_j c_j ∫_0^1 cos(j u ξ)(1-u^2)^{(n-1)/2} du` with
//! `C_n = nΓ(n/2)/(√π Γ((n+1)/2))` and `c_j = -2(-1)^j binom(2ℓ,ℓ-j)/binom(2ℓ,ℓ)`.
//! The spec-level [`m_ell`] integrates this directly; operator application
//! uses the closed forms `sin a/a` (n = 1) and `2J_1(a)/a` (n = 2).

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{to_spectrum, SampledFunction};
use crate::kernel::least_squares;
use crate::lipschitz::modulus;
use crate::quadrature::gauss_legendre;
use crate::special::{bessel_j1, binomial, gamma};

pub const MAX_ELL: u32 = 4;
const QUAD_TOL: f64 = 1e-14;
const SERIES_TERMS: u32 = 30;

fn check_ell_n(ell: u32, n: usize) -> Result<()> {
    if ell == 0 || ell > MAX_ELL {
        return Err(Error::param(format!("ell must be in 1..={MAX_ELL}, got {ell}")));
    }
    if n != 1 && n != 2 {
        return Err(Error::param(format!("dimension must be 1 or 2, got {n}")));
    }
    Ok(())
}

/// Integer numerators `-2(-1)^j binom(2ℓ, ℓ-j)` of `c_j` over the common
/// denominator `binom(2ℓ, ℓ)`.
pub fn coefficient_numerators(ell: u32) -> (Vec<i128>, i128) {
    let l = ell as u64;
    let num = (1..=l)
        .map(|j| {
            let b = binomial(2 * l, l - j);
            if j % 2 == 0 {
                -2 * b
            } else {
                2 * b
            }
        })
        .collect();
    (num, binomial(2 * l, l))
}

/// The real coefficients `c_1..c_ℓ`.
pub fn coefficients(ell: u32) -> Vec<f64> {
    let (num, den) = coefficient_numerators(ell);
    num.iter().map(|&a| a as f64 / den as f64).collect()
}

/// Whether `Σ c_j = 1` holds in exact integer arithmetic.
pub fn coefficient_sum_is_one(ell: u32) -> bool {
    let (num, den) = coefficient_numerators(ell);
    num.iter().sum::<i128>() == den
}

fn dim_constant(n: usize) -> f64 {
    let nf = n as f64;
    nf * gamma(nf / 2.0) / (PI.sqrt() * gamma((nf + 1.0) / 2.0))
}

/// A multiplier value with its quadrature error estimate.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MultiplierValue {
    pub xi: f64,
    pub value: f64,
    pub error: f64,
}

/// `∫_0^{π/2} cos(a sin θ) cos^n θ dθ` (the `u = sin θ` form of the integral)
/// by composite Gauss–Legendre with `panels` panels.
fn ball_integral(a: f64, n: usize, panels: usize, nodes: &(Vec<f64>, Vec<f64>)) -> f64 {
    let h = 0.5 * PI / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let c = (p as f64 + 0.5) * h;
        for (x, w) in nodes.0.iter().zip(&nodes.1) {
            let th = c + 0.5 * h * x;
            // du = cos θ dθ and (1-u^2)^{(n-1)/2} = cos^{n-1} θ.
            s += w * (a * th.sin()).cos() * th.cos().powi(n as i32);
        }
    }
    s * 0.5 * h
}

/// Quadrature evaluation of `m_ℓ(ξ)`; the panel count is doubled until two
/// successive estimates agree, and their difference is the reported error.
pub fn m_ell(xi: f64, ell: u32, n: usize) -> Result<MultiplierValue> {
    check_ell_n(ell, n)?;
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(Error::param(format!("xi must be finite and nonnegative, got {xi}")));
    }
    let nodes = gauss_legendre(16);
    let cn = dim_constant(n);
    let c = coefficients(ell);
    let eval = |panels: usize| -> f64 {
        c.iter()
            .enumerate()
            .map(|(i, cj)| cj * ball_integral((i + 1) as f64 * xi, n, panels, &nodes))
            .sum::<f64>()
            * cn
    };
    let mut panels = 1 + (ell as f64 * xi / 8.0).ceil() as usize;
    let mut prev = eval(panels);
    for _ in 0..12 {
        panels *= 2;
        let cur = eval(panels);
        let err = (cur - prev).abs();
        if err <= QUAD_TOL * (1.0 + cur.abs()) {
            return Ok(MultiplierValue { xi, value: cur, error: err });
        }
        prev = cur;
    }
    Err(Error::Quadrature { estimate: (eval(panels) - prev).abs(), tolerance: QUAD_TOL })
}

/// Average of one ball of radius `a` in multiplier form.
fn single_ball(a: f64, n: usize) -> f64 {
    if a.abs() < 1e-4 {
        // Taylor: 1 - a^2/(2(n+2)) + a^4/(8(n+2)(n+4))
        let nf = n as f64;
        let a2 = a * a;
        return 1.0 - a2 / (2.0 * (nf + 2.0)) + a2 * a2 / (8.0 * (nf + 2.0) * (nf + 4.0));
    }
    if n == 1 {
        a.sin() / a
    } else {
        2.0 * bessel_j1(a) / a
    }
}

/// Closed-form `m_ℓ(ξ)`.
pub fn m_ell_closed(xi: f64, ell: u32, n: usize) -> f64 {
    coefficients(ell)
        .iter()
        .enumerate()
        .map(|(i, c)| c * single_ball((i + 1) as f64 * xi, n))
        .sum()
}

/// `Σ_j (-1)^j binom(2ℓ,ℓ-j) j^{2p}` in exact arithmetic.
fn moment_sum(ell: u32, p: u32) -> i128 {
    let l = ell as u64;
    (1..=l)
        .map(|j| {
            let b = binomial(2 * l, l - j);
            let v = b * (j as i128).pow(2 * p);
            if j % 2 == 0 {
                v
            } else {
                -v
            }
        })
        .sum()
}

/// `1 - m_ℓ(ξ)` without cancellation for small `ξ`: the Taylor series of the
/// cosine integrals, whose first `ℓ-1` nonconstant terms vanish identically.
pub fn one_minus_m_ell(xi: f64, ell: u32, n: usize) -> f64 {
    if xi >= 1.0 {
        return 1.0 - m_ell_closed(xi, ell, n);
    }
    let nf = n as f64;
    let den = binomial(2 * ell as u64, ell as u64) as f64;
    let mut s = 0.0;
    for p in 1..=SERIES_TERMS {
        let sp = moment_sum(ell, p);
        if sp == 0 {
            continue;
        }
        let pf = p as f64;
        // C_n ∫ u^{2p}(1-u^2)^{(n-1)/2} du
        let moment = nf * gamma(nf / 2.0) * gamma(pf + 0.5) / (2.0 * PI.sqrt() * gamma(pf + 1.0 + nf / 2.0));
        let coef = -2.0 * sp as f64 / den;
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * coef * moment * xi.powi(2 * p as i32) / gamma(2.0 * pf + 1.0);
    }
    -s
}

/// `B_{ℓ,t} f`: multiply the spectrum by `m_ℓ(2πt|k|)`.
pub fn ball_avg_apply(f: &SampledFunction, ell: u32, t: f64) -> Result<SampledFunction> {
    let n = f.grid().dim();
    check_ell_n(ell, n)?;
    if !(t > 0.0 && t <= 0.5) {
        return Err(Error::param(format!("t must lie in (0, 1/2], got {t}")));
    }
    Ok(to_spectrum(f).radial_real(|r| m_ell_closed(2.0 * PI * t * r, ell, n)))
}

/// `f - B_{ℓ,t} f` through the cancellation-free multiplier `1 - m_ℓ`.
pub fn approx_residual(f: &SampledFunction, ell: u32, t: f64) -> Result<SampledFunction> {
    let n = f.grid().dim();
    check_ell_n(ell, n)?;
    if !(t > 0.0 && t <= 0.5) {
        return Err(Error::param(format!("t must lie in (0, 1/2], got {t}")));
    }
    Ok(to_spectrum(f).radial_real(|r| one_minus_m_ell(2.0 * PI * t * r, ell, n)))
}

/// `‖f - B_{ℓ,t} f‖_∞` on the grid.
pub fn approx_error(f: &SampledFunction, ell: u32, t: f64) -> Result<f64> {
    Ok(approx_residual(f, ell, t)?.sup_norm())
}

/// Log-log slope of `approx_error` against `t`.
pub fn approx_error_slope(f: &SampledFunction, ell: u32, ts: &[f64]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .map(|&t| approx_error(f, ell, t).map(|e| (t.ln(), e.max(f64::MIN_POSITIVE).ln())))
        .collect::<Result<_>>()?;
    if pts.len() < 2 {
        return Err(Error::param("need at least two t values"));
    }
    Ok(least_squares(&pts).0)
}

/// `ξ` samples geometric on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let r = (hi / lo).ln();
    (0..count)
        .map(|i| lo * (r * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Range of `(1 - m_ℓ(ξ)) / min(1, ξ^{2ℓ})` over a grid.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RatioBounds {
    pub c1: f64,
    pub c2: f64,
}

pub fn comparability_bounds(ell: u32, n: usize, xis: &[f64]) -> Result<RatioBounds> {
    check_ell_n(ell, n)?;
    let mut c1 = f64::INFINITY;
    let mut c2 = 0.0f64;
    for &x in xis {
        let r = one_minus_m_ell(x, ell, n) / x.powi(2 * ell as i32).min(1.0);
        c1 = c1.min(r);
        c2 = c2.max(r);
    }
    Ok(RatioBounds { c1, c2 })
}

/// Sign pattern of `m_ℓ` on `ξ ≥ 1`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PositivityReport {
    pub ell: u32,
    pub n: usize,
    /// `max_{ξ ≥ 1} m_ℓ(ξ)` on the grid.
    pub gamma_hat: f64,
    pub min_value: f64,
    pub nonpositive_samples: usize,
    pub samples: usize,
    /// Whether the strict positivity claim held at every sample.
    pub positive: bool,
}

pub fn positivity_report(ell: u32, n: usize, xis: &[f64]) -> Result<PositivityReport> {
    check_ell_n(ell, n)?;
    let vals: Vec<f64> = xis.iter().filter(|&&x| x >= 1.0).map(|&x| m_ell_closed(x, ell, n)).collect();
    let gamma_hat = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_value = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let nonpositive = vals.iter().filter(|&&v| v <= 0.0).count();
    Ok(PositivityReport {
        ell,
        n,
        gamma_hat,
        min_value,
        nonpositive_samples: nonpositive,
        samples: vals.len(),
        positive: nonpositive == 0,
    })
}

/// Fitted log-log slope of the octave-wise maxima of `|m_ℓ|` over
/// `[2^lo, 2^hi]`; the decay bound predicts `-(n+1)/2`.
pub fn decay_slope(ell: u32, n: usize, lo: i32, hi: i32) -> Result<f64> {
    check_ell_n(ell, n)?;
    let mut pts = Vec::new();
    for a in lo..hi {
        let start = 2f64.powi(a);
        let peak = (0..400)
            .map(|i| m_ell_closed(start * (1.0 + i as f64 / 400.0), ell, n).abs())
            .fold(0.0, f64::max);
        pts.push(((1.5 * start).ln(), peak.ln()));
    }
    Ok(least_squares(&pts).0)
}

/// Smallest constant `C` with `|f - B_{ℓ,t}f|(x) ≤ C sup Δ_{2ℓ}f(x',y)` over
/// `t/(8ℓ) ≤ y ≤ t/2`, `|x'-x| ≤ 4ℓt`, on the grid (one-dimensional).
pub fn localization_constant(f: &SampledFunction, ell: u32, t: f64, y_samples: usize) -> Result<f64> {
    if f.grid().dim() != 1 {
        return Err(Error::param("localization check is implemented for n = 1"));
    }
    let resid = approx_residual(f, ell, t)?;
    let lo = t / (8.0 * ell as f64);
    let hi = (t / 2.0).min(1.0);
    let ys = log_grid(lo, hi, y_samples.max(2));
    let m = modulus(f, 2 * ell, &ys)?;
    let n = f.grid().size();
    let mut pointwise = vec![0.0f64; n];
    for i in 0..ys.len() {
        for (p, v) in pointwise.iter_mut().zip(m.at(i)) {
            *p = p.max(*v);
        }
    }
    let radius = ((4.0 * ell as f64 * t) * n as f64).floor() as usize;
    let radius = radius.min(n / 2);
    let mut worst = 0.0f64;
    for x in 0..n {
        let mut local = 0.0f64;
        for d in 0..=radius {
            local = local.max(pointwise[(x + d) % n]).max(pointwise[(x + n - d) % n]);
        }
        let r = resid.values()[x].abs();
        if r > 1e-13 {
            worst = worst.max(r / local.max(1e-300));
        }
    }
    Ok(worst)
}
