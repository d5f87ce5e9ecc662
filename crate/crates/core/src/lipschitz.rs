//! Symmetric differences, moduli of smoothness and the two `Λ_s` norms.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{from_spectrum, to_spectrum, SampledFunction, Spectrum};
use crate::heat::{heat_deriv_field, mixed_derivative, FracHeatParams, TimeGrid};

/// Default y-sampling: 32 points per octave over 8 octaves.
pub const Y_PER_OCTAVE: usize = 32;
pub const Y_OCTAVES: usize = 8;
/// Default number of directions for the planar modulus.
pub const DIRECTIONS: usize = 16;

/// `y_i = 2^{-i/32}`, `i = 0..256`, covering `(2^{-8}, 1]`.
pub fn default_ys() -> Vec<f64> {
    geometric_ys(Y_OCTAVES, Y_PER_OCTAVE)
}

pub fn geometric_ys(octaves: usize, per_octave: usize) -> Vec<f64> {
    (0..octaves * per_octave)
        .map(|i| 2f64.powf(-(i as f64) / per_octave as f64))
        .collect()
}

fn diff_multiplier(k: [i64; 2], h: [f64; 2], order: u32) -> Complex64 {
    let phase = PI * (k[0] as f64 * h[0] + k[1] as f64 * h[1]);
    Complex64::new(0.0, 2.0 * phase.sin()).powu(order)
}

fn sym_diff_spec(spec: &Spectrum, h: [f64; 2], order: u32) -> Vec<f64> {
    from_spectrum(&spec.multiply(|k| diff_multiplier(k, h, order))).into_values()
}

/// `Δ_h^k f`: the `k`-fold symmetric difference `f(x+h/2) - f(x-h/2)`,
/// applied exactly through its multiplier `(2i sin(πk·h))^k`.
pub fn sym_diff(f: &SampledFunction, h: [f64; 2], k: u32) -> Result<SampledFunction> {
    if k == 0 {
        return Err(Error::param("difference order must be at least 1"));
    }
    if h.iter().any(|c| !c.is_finite()) {
        return Err(Error::param("difference step must be finite"));
    }
    let spec = to_spectrum(f);
    SampledFunction::new(*f.grid(), sym_diff_spec(&spec, h, k))
}

/// Unit directions used for the planar sup over `|h| = y`. Half the circle
/// suffices because `h → -h` only changes the sign of `Δ_h^k f`.
pub fn directions(dim: usize, count: usize) -> Vec<[f64; 2]> {
    if dim == 1 {
        return vec![[1.0, 0.0]];
    }
    (0..count)
        .map(|d| {
            let th = PI * d as f64 / count as f64;
            [th.cos(), th.sin()]
        })
        .collect()
}

/// Samples of `Δ_k f(x, y) = sup_{|h|=y} |Δ_h^k f(x)|`.
#[derive(Clone, Debug)]
pub struct DiffModulus {
    pub order: u32,
    pub ys: Vec<f64>,
    pub directions: usize,
    len: usize,
    values: Vec<f64>,
}

impl DiffModulus {
    /// Modulus values at the `i`-th y-sample.
    pub fn at(&self, i: usize) -> &[f64] {
        &self.values[i * self.len..(i + 1) * self.len]
    }
}

fn modulus_row(spec: &Spectrum, y: f64, order: u32, dirs: &[[f64; 2]]) -> Vec<f64> {
    let mut row = vec![0.0f64; spec.grid().len()];
    for d in dirs {
        let v = sym_diff_spec(spec, [y * d[0], y * d[1]], order);
        for (r, x) in row.iter_mut().zip(v) {
            *r = r.max(x.abs());
        }
    }
    row
}

pub fn modulus(f: &SampledFunction, k: u32, ys: &[f64]) -> Result<DiffModulus> {
    modulus_with(f, k, ys, DIRECTIONS)
}

pub fn modulus_with(f: &SampledFunction, k: u32, ys: &[f64], n_dir: usize) -> Result<DiffModulus> {
    if k == 0 {
        return Err(Error::param("difference order must be at least 1"));
    }
    if ys.iter().any(|&y| !(y > 0.0 && y <= 1.0)) {
        return Err(Error::param("y samples must lie in (0, 1]"));
    }
    if n_dir == 0 {
        return Err(Error::param("need at least one direction"));
    }
    let spec = to_spectrum(f);
    let dirs = directions(f.grid().dim(), n_dir);
    let rows: Vec<Vec<f64>> = ys.par_iter().map(|&y| modulus_row(&spec, y, k, &dirs)).collect();
    Ok(DiffModulus {
        order: k,
        ys: ys.to_vec(),
        directions: dirs.len(),
        len: f.grid().len(),
        values: rows.concat(),
    })
}

/// `max_y y^{-s} sup_x Δ_{r1} f(x, y)` over the given y-samples.
pub fn lambda_s_seminorm_diff_with(
    f: &SampledFunction,
    s: f64,
    r1: u32,
    ys: &[f64],
    n_dir: usize,
) -> Result<f64> {
    if r1 == 0 || (r1 as f64) <= s {
        return Err(Error::param(format!("need r1 > s, got r1={r1}, s={s}")));
    }
    if ys.iter().any(|&y| !(y > 0.0 && y <= 1.0)) {
        return Err(Error::param("y samples must lie in (0, 1]"));
    }
    let spec = to_spectrum(f);
    let dirs = directions(f.grid().dim(), n_dir);
    Ok(ys
        .par_iter()
        .map(|&y| {
            let m = modulus_row(&spec, y, r1, &dirs).into_iter().fold(0.0, f64::max);
            m * y.powf(-s)
        })
        .reduce(|| 0.0, f64::max))
}

pub fn lambda_s_seminorm_diff(f: &SampledFunction, s: f64, r1: u32) -> Result<f64> {
    lambda_s_seminorm_diff_with(f, s, r1, &default_ys(), DIRECTIONS)
}

/// `‖f‖_∞ + max_y y^{-s} sup_x Δ_{r1} f(x, y)`.
pub fn lambda_s_norm_diff(f: &SampledFunction, s: f64, r1: u32) -> Result<f64> {
    Ok(f.sup_norm() + lambda_s_seminorm_diff(f, s, r1)?)
}

/// Semigroup seminorm `sup_t t^{αr-s} ‖∂_{n+1}^r u_α(·, t^α)‖_∞` over the samples.
pub fn lambda_s_seminorm_heat(f: &SampledFunction, params: FracHeatParams, times: TimeGrid) -> f64 {
    heat_deriv_field(f, params, times).envelope()
}

/// One ratio of the two seminorms for a test function.
#[derive(Clone, Debug, Serialize)]
pub struct NormComparison {
    pub heat: f64,
    pub diff: f64,
    pub ratio: f64,
}

pub fn compare_norms(
    f: &SampledFunction,
    params: FracHeatParams,
    times: TimeGrid,
) -> Result<NormComparison> {
    let r1 = params.s.floor() as u32 + 1;
    let heat = lambda_s_seminorm_heat(f, params, times);
    let diff = lambda_s_seminorm_diff(f, params.s, r1)?;
    let ratio = heat / (diff + 1e-300);
    Ok(NormComparison { heat, diff, ratio })
}

/// Normalized derivative sups `t^{|β|/α + i - s/α} ‖∂_t^i ∂^β T_{α,t} f‖_∞`.
#[derive(Clone, Debug, Serialize)]
pub struct DerivativeBound {
    pub i: u32,
    pub beta: [u32; 2],
    /// Largest normalized value per time octave.
    pub per_octave: Vec<f64>,
    pub sup: f64,
    /// `sup / ‖f‖_{Λ_s}` with the difference norm of order `⌊s⌋ + 1`.
    pub constant: f64,
    /// Finest-octave value over the largest value; stays at most 1 when no growth occurs toward `t → 0`.
    pub growth: f64,
}

/// Sample the normalized derivative on `times` (here `t` is the semigroup time).
pub fn derivative_bound(
    f: &SampledFunction,
    alpha: f64,
    s: f64,
    i: u32,
    beta: [u32; 2],
    times: TimeGrid,
) -> Result<DerivativeBound> {
    let order = (beta[0] + if f.grid().dim() == 2 { beta[1] } else { 0 }) as f64;
    if !(order + i as f64 * alpha > s) {
        return Err(Error::param(format!("need |beta| + i alpha > s, got |beta|={order}, i={i}")));
    }
    let expo = order / alpha + i as f64 - s / alpha;
    let rows: Vec<f64> = (0..times.len())
        .into_par_iter()
        .map(|ti| {
            let t = times.time(ti);
            Ok(t.powf(expo) * mixed_derivative(f, alpha, t, i, beta)?.sup_norm())
        })
        .collect::<Result<_>>()?;
    let per_octave: Vec<f64> = (0..times.octaves())
        .map(|j| (0..times.per_octave()).map(|m| rows[times.index(j, m)]).fold(0.0, f64::max))
        .collect();
    let sup = per_octave.iter().cloned().fold(0.0, f64::max);
    let norm = lambda_s_norm_diff(f, s, s.floor() as u32 + 1)?;
    Ok(DerivativeBound {
        i,
        beta,
        constant: if norm > 0.0 { sup / norm } else { 0.0 },
        growth: if sup > 0.0 { per_octave[per_octave.len() - 1] / sup } else { 0.0 },
        per_octave,
        sup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{shift_eval, PeriodicGrid};
    use crate::special::binomial;

    fn g1(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(1, n).unwrap()
    }

    fn sine(n: usize) -> SampledFunction {
        SampledFunction::from_fn(g1(n), |x| (2.0 * PI * x[0]).sin()).unwrap()
    }

    #[test]
    fn first_and_second_difference_of_sine() {
        let f = sine(64);
        let y = 0.13;
        let d1 = sym_diff(&f, [y, 0.0], 1).unwrap();
        let d2 = sym_diff(&f, [y, 0.0], 2).unwrap();
        for i in 0..64 {
            let x = i as f64 / 64.0;
            let e1 = 2.0 * (PI * y).sin() * (2.0 * PI * x).cos();
            let e2 = -4.0 * (PI * y).sin().powi(2) * (2.0 * PI * x).sin();
            assert!((d1.values()[i] - e1).abs() < 1e-12);
            assert!((d2.values()[i] - e2).abs() < 1e-12);
        }
    }

    #[test]
    fn multiplier_matches_binomial_shift_sum() {
        let g = PeriodicGrid::new(2, 16).unwrap();
        let f = SampledFunction::from_fn(g, |x| {
            (2.0 * PI * (x[0] + 2.0 * x[1])).sin() + (2.0 * PI * 3.0 * x[0]).cos() * (2.0 * PI * x[1]).cos()
        })
        .unwrap();
        let h = [0.07, -0.03];
        for k in 1..=4u32 {
            let d = sym_diff(&f, h, k).unwrap();
            let mut acc = vec![0.0; g.len()];
            for j in 0..=k {
                let c = binomial(k as u64, j as u64) as f64 * if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                let off = j as f64 - k as f64 / 2.0;
                let sh = shift_eval(&f, [off * h[0], off * h[1]]).unwrap();
                for (a, v) in acc.iter_mut().zip(sh.values()) {
                    *a += c * v;
                }
            }
            for (a, b) in acc.iter().zip(d.values()) {
                assert!((a - b).abs() < 1e-11, "k={k}");
            }
        }
    }

    #[test]
    fn constants_have_zero_modulus() {
        let c = SampledFunction::constant(g1(32), 7.0);
        let m = modulus(&c, 3, &[0.1, 0.5, 1.0]).unwrap();
        for i in 0..3 {
            assert!(m.at(i).iter().all(|v| v.abs() < 1e-12));
        }
        assert!((lambda_s_norm_diff(&c, 0.5, 1).unwrap() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn modulus_of_sine_and_scaling() {
        let f = sine(64);
        let ys = [0.05, 0.3];
        let m = modulus(&f, 2, &ys).unwrap();
        let m3 = modulus(&f.scaled(-3.0), 2, &ys).unwrap();
        for (i, &y) in ys.iter().enumerate() {
            for x in 0..64 {
                let e = 4.0 * (PI * y).sin().powi(2) * (2.0 * PI * x as f64 / 64.0).sin().abs();
                assert!((m.at(i)[x] - e).abs() < 1e-12);
                assert!((m3.at(i)[x] - 3.0 * m.at(i)[x]).abs() < 1e-12);
                assert!(m.at(i)[x] <= 4.0 * f.sup_norm() + 1e-12);
            }
        }
    }

    #[test]
    fn diff_norm_of_sine_against_dense_search() {
        let f = sine(64);
        let got = lambda_s_norm_diff(&f, 0.5, 1).unwrap();
        // Dense maximization of 2 sin(πy)/√y over (0,1].
        let dense = (1..=200_000)
            .map(|i| {
                let y = i as f64 / 200_000.0;
                2.0 * (PI * y).sin() / y.sqrt()
            })
            .fold(0.0, f64::max);
        let expect = 1.0 + dense;
        assert!(got <= expect + 1e-12);
        assert!((got - expect).abs() < 1e-3 * expect, "{got} vs {expect}");
        let scaled = lambda_s_norm_diff(&f.scaled(-2.5), 0.5, 1).unwrap();
        assert!((scaled - 2.5 * got).abs() < 1e-12 * got);
    }

    #[test]
    fn heat_seminorm_single_mode_calculus() {
        let f = sine(64);
        let p = FracHeatParams::new(2.0, 1, 0.5).unwrap();
        let tg = TimeGrid::default();
        let got = lambda_s_seminorm_heat(&f, p, tg);
        let lam = (2.0 * PI).powi(2);
        let t_star = (0.75 / lam).sqrt();
        let peak = t_star.powf(1.5) * lam * (-0.75f64).exp();
        let sampled = tg
            .times()
            .iter()
            .map(|t| t.powf(1.5) * lam * (-t * t * lam).exp())
            .fold(0.0, f64::max);
        assert!((got - sampled).abs() < 1e-12 * sampled);
        assert!(got <= peak && got > 0.99 * peak);
        assert!(lambda_s_seminorm_heat(&SampledFunction::constant(*f.grid(), 1.0), p, tg) == 0.0);
    }

    #[test]
    fn marchaud_triangle_bound() {
        let f = SampledFunction::from_fn(g1(256), |x| {
            (0..6).map(|j| 2f64.powf(-0.5 * j as f64) * (2.0 * PI * 2f64.powi(j) * x[0]).cos()).sum()
        })
        .unwrap();
        // The bound uses sup over all x, so the lower order is evaluated on a
        // finer grid to cover the half-step offsets.
        let a = lambda_s_seminorm_diff(&f.refine(8).unwrap(), 0.5, 1).unwrap();
        let b = lambda_s_seminorm_diff(&f, 0.5, 2).unwrap();
        assert!(b <= 2.0 * a + 1e-12, "{b} vs {a}");
    }

    #[test]
    fn planar_modulus_is_rotation_aware() {
        let g = PeriodicGrid::new(2, 32).unwrap();
        let f = SampledFunction::from_fn(g, |x| (2.0 * PI * x[1]).sin()).unwrap();
        let m = modulus(&f, 1, &[0.25]).unwrap();
        // The sup over directions is attained along the second axis.
        let expect = 2.0 * (PI * 0.25f64).sin();
        let got = m.at(0).iter().fold(0.0f64, |a, b| a.max(*b));
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_orders() {
        let f = sine(16);
        assert!(sym_diff(&f, [0.1, 0.0], 0).is_err());
        assert!(lambda_s_norm_diff(&f, 1.5, 1).is_err());
        assert!(modulus(&f, 1, &[0.0]).is_err());
    }

    #[test]
    fn derivative_bound_of_a_mode() {
        let f = sine(64);
        let times = TimeGrid::new(10, 8).unwrap();
        let b = derivative_bound(&f, 2.0, 0.5, 0, [1, 0], times).unwrap();
        // t^{1/4} 2π e^{-4π² t} peaks at t = 1/(16π²).
        let t0 = 1.0 / (16.0 * PI * PI);
        let want = t0.powf(0.25) * 2.0 * PI * (-0.25f64).exp();
        assert!(b.sup <= want * (1.0 + 1e-12) && b.sup > 0.95 * want);
        assert!(b.growth < 1.0);
        assert!(derivative_bound(&f, 2.0, 0.5, 0, [0, 0], times).is_err());
    }
}
