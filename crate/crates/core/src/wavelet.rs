//! Periodized Daubechies wavelets on the torus, the `Λ_X^s` norm, the `V_0`
//! set and the doubling probe for lattices.
//!
//! Coefficients are those of the orthogonal DWT of the sample vector. The
//! continuum pairing `⟨f, ψ_ω⟩` is approximated by `coefficient / N^{dim/2}`:
//! discrete basis vectors have unit ℓ² norm, while sampled `ψ_ω` has
//! `Σ |ψ_ω(x_i)|² ≈ N^{dim}`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{PeriodicGrid, SampledFunction};
use crate::hyperbolic::DyadicCube;
use crate::lattice::{lattice_norm, LatticeSpec};
use crate::special::binomial;

/// Lowpass filter of DB-`order` (`2·order` taps), normalized so `Σh = √2`.
///
/// The roots of `P(y) = Σ_{k<N} C(N-1+k, k) y^k` are mapped through
/// `z + 1/z = 2 - 4y`; the roots inside the unit circle give the minimum
/// phase factor.
pub fn daubechies_filter(order: usize) -> Result<Vec<f64>> {
    if !(1..=10).contains(&order) {
        return Err(Error::param(format!("Daubechies order must lie in 1..=10, got {order}")));
    }
    let n = order;
    let coeffs: Vec<f64> = (0..n).map(|k| binomial((n - 1 + k) as u64, k as u64) as f64).collect();
    let ys = poly_roots(&coeffs)?;
    // Product (1+z)^N Π (z - z_r), ascending powers.
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    let mul = |p: &[Complex64], root: Complex64| {
        let mut out = vec![Complex64::new(0.0, 0.0); p.len() + 1];
        for (i, c) in p.iter().enumerate() {
            out[i + 1] += c;
            out[i] -= c * root;
        }
        out
    };
    for _ in 0..n {
        poly = mul(&poly, Complex64::new(-1.0, 0.0));
    }
    for y in ys {
        let b = Complex64::new(2.0, 0.0) - 4.0 * y;
        let disc = (b * b - 4.0).sqrt();
        let z1 = (b + disc) / 2.0;
        let z2 = (b - disc) / 2.0;
        poly = mul(&poly, if z1.norm() < 1.0 { z1 } else { z2 });
    }
    let sum: f64 = poly.iter().map(|c| c.re).sum();
    let scale = std::f64::consts::SQRT_2 / sum;
    let mut h: Vec<f64> = poly.iter().map(|c| c.re * scale).collect();
    h.reverse();
    Ok(h)
}

/// All roots of `Σ c_k y^k` by Durand-Kerner iteration, polished by Newton.
fn poly_roots(c: &[f64]) -> Result<Vec<Complex64>> {
    let deg = c.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = c[deg];
    let monic: Vec<f64> = c.iter().map(|v| v / lead).collect();
    let eval = |y: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * y + a);
    let deriv = |y: Complex64| {
        (1..=deg).rev().fold(Complex64::new(0.0, 0.0), |acc, k| acc * y + monic[k] * k as f64)
    };
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..deg {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if i != j {
                    den *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / den;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let d = deriv(*r);
            if d.norm() > 0.0 {
                *r -= eval(*r) / d;
            }
        }
    }
    if roots.iter().any(|r| !r.re.is_finite() || !r.im.is_finite()) {
        return Err(Error::Numerical("Daubechies root finding diverged".into()));
    }
    Ok(roots)
}

/// A periodized Daubechies system: filter order and number of decomposition levels.
#[derive(Clone, Debug, Serialize)]
pub struct WaveletSystem {
    pub filter_order: usize,
    pub levels: usize,
    #[serde(skip)]
    lowpass: Vec<f64>,
    #[serde(skip)]
    highpass: Vec<f64>,
}

impl WaveletSystem {
    pub fn new(filter_order: usize, levels: usize) -> Result<Self> {
        if !(2..=10).contains(&filter_order) {
            return Err(Error::param(format!("filter order must lie in 2..=10, got {filter_order}")));
        }
        let lowpass = daubechies_filter(filter_order)?;
        let f = lowpass.len();
        let highpass = (0..f)
            .map(|k| if k % 2 == 0 { lowpass[f - 1 - k] } else { -lowpass[f - 1 - k] })
            .collect();
        Ok(WaveletSystem { filter_order, levels, lowpass, highpass })
    }

    /// Full-depth system for `grid`: DB-8 for `s ≤ 1`, DB-10 above.
    pub fn for_smoothness(s: f64, grid: &PeriodicGrid) -> Result<Self> {
        Self::new(if s <= 1.0 { 8 } else { 10 }, grid.log2_size())
    }

    pub fn lowpass(&self) -> &[f64] {
        &self.lowpass
    }

    pub fn highpass(&self) -> &[f64] {
        &self.highpass
    }

    /// Level of the scaling coefficients after `levels` steps on `grid`.
    pub fn coarsest(&self, grid: &PeriodicGrid) -> Result<usize> {
        grid.log2_size().checked_sub(self.levels).ok_or_else(|| {
            Error::GridTooSmall(format!(
                "{} levels requested on a grid of size {}",
                self.levels,
                grid.size()
            ))
        })
    }
}

/// One analysis step on a periodic vector of even length.
fn analyze(sys: &WaveletSystem, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let l = x.len();
    let half = l / 2;
    let mut a = vec![0.0; half];
    let mut d = vec![0.0; half];
    for k in 0..half {
        let (mut sa, mut sd) = (0.0, 0.0);
        for (n, (&h, &g)) in sys.lowpass.iter().zip(&sys.highpass).enumerate() {
            let v = x[(2 * k + n) % l];
            sa += h * v;
            sd += g * v;
        }
        a[k] = sa;
        d[k] = sd;
    }
    (a, d)
}

/// Adjoint of [`analyze`], which is its inverse.
fn synthesize(sys: &WaveletSystem, a: &[f64], d: &[f64]) -> Vec<f64> {
    let l = 2 * a.len();
    let mut x = vec![0.0; l];
    for k in 0..a.len() {
        for (n, (&h, &g)) in sys.lowpass.iter().zip(&sys.highpass).enumerate() {
            x[(2 * k + n) % l] += h * a[k] + g * d[k];
        }
    }
    x
}

/// Discrete DWT coefficients of a sample vector.
///
/// `details[j - coarsest][band]` holds the `2^{j·dim}` coefficients of level `j`
/// in row-major cube order; one band in 1D, three (HL, LH, HH) in 2D.
#[derive(Clone, Debug, Serialize)]
pub struct WaveletCoeffs {
    pub grid: PeriodicGrid,
    pub coarsest: usize,
    pub scaling: Vec<f64>,
    pub details: Vec<Vec<Vec<f64>>>,
}

impl WaveletCoeffs {
    fn pairing_scale(&self) -> f64 {
        (self.grid.len() as f64).sqrt().recip()
    }

    pub fn bands(&self) -> usize {
        if self.grid.dim() == 1 {
            1
        } else {
            3
        }
    }

    /// Approximate `⟨f, ψ_{(0,I)}⟩` for the scaling cubes.
    pub fn scaling_pairings(&self) -> Vec<f64> {
        let s = self.pairing_scale();
        self.scaling.iter().map(|c| c * s).collect()
    }

    /// Approximate `⟨f, ψ_ω⟩` at absolute level `level`, band `band`.
    pub fn detail_pairings(&self, level: usize, band: usize) -> Vec<f64> {
        let s = self.pairing_scale();
        self.details[level - self.coarsest][band].iter().map(|c| c * s).collect()
    }

    /// All discrete coefficients in a fixed order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = self.scaling.clone();
        for lvl in &self.details {
            for band in lvl {
                out.extend_from_slice(band);
            }
        }
        out
    }

    /// `Σ |⟨f, ψ_ω⟩|²`, the `L²` norm squared of the sample interpolant.
    pub fn energy(&self) -> f64 {
        self.flatten().iter().map(|c| c * c).sum::<f64>() / self.grid.len() as f64
    }

    fn zeros_like(grid: PeriodicGrid, sys: &WaveletSystem) -> Result<Self> {
        let c = sys.coarsest(&grid)?;
        let d = grid.dim();
        let bands = if d == 1 { 1 } else { 3 };
        Ok(WaveletCoeffs {
            grid,
            coarsest: c,
            scaling: vec![0.0; 1 << (c * d)],
            details: (c..grid.log2_size()).map(|j| vec![vec![0.0; 1 << (j * d)]; bands]).collect(),
        })
    }
}

/// Periodized orthogonal DWT of the samples of `f`.
pub fn dwt(f: &SampledFunction, sys: &WaveletSystem) -> Result<WaveletCoeffs> {
    let grid = *f.grid();
    let coarsest = sys.coarsest(&grid)?;
    let top = grid.log2_size();
    let mut details = vec![Vec::new(); top - coarsest];
    if grid.dim() == 1 {
        let mut a = f.values().to_vec();
        for j in (coarsest..top).rev() {
            let (na, d) = analyze(sys, &a);
            details[j - coarsest] = vec![d];
            a = na;
        }
        return Ok(WaveletCoeffs { grid, coarsest, scaling: a, details });
    }
    let n = grid.size();
    let mut block: Vec<f64> = f.values().to_vec();
    let mut l = n;
    for j in (coarsest..top).rev() {
        let half = l / 2;
        // Rows then columns of the current l × l block.
        let mut rows_lo = vec![0.0; l * half];
        let mut rows_hi = vec![0.0; l * half];
        for i in 0..l {
            let (a, d) = analyze(sys, &block[i * l..(i + 1) * l]);
            rows_lo[i * half..(i + 1) * half].copy_from_slice(&a);
            rows_hi[i * half..(i + 1) * half].copy_from_slice(&d);
        }
        let mut ll = vec![0.0; half * half];
        let mut hl = vec![0.0; half * half];
        let mut lh = vec![0.0; half * half];
        let mut hh = vec![0.0; half * half];
        for c in 0..half {
            let col_lo: Vec<f64> = (0..l).map(|i| rows_lo[i * half + c]).collect();
            let col_hi: Vec<f64> = (0..l).map(|i| rows_hi[i * half + c]).collect();
            let (a0, d0) = analyze(sys, &col_lo);
            let (a1, d1) = analyze(sys, &col_hi);
            for r in 0..half {
                ll[r * half + c] = a0[r];
                hl[r * half + c] = d0[r];
                lh[r * half + c] = a1[r];
                hh[r * half + c] = d1[r];
            }
        }
        details[j - coarsest] = vec![hl, lh, hh];
        block = ll;
        l = half;
    }
    Ok(WaveletCoeffs { grid, coarsest, scaling: block, details })
}

/// Inverse of [`dwt`].
pub fn idwt(c: &WaveletCoeffs, sys: &WaveletSystem) -> Result<SampledFunction> {
    let grid = c.grid;
    let top = grid.log2_size();
    if sys.coarsest(&grid)? != c.coarsest {
        return Err(Error::GridMismatch("coefficient depth does not match the system".into()));
    }
    if grid.dim() == 1 {
        let mut a = c.scaling.clone();
        for j in c.coarsest..top {
            a = synthesize(sys, &a, &c.details[j - c.coarsest][0]);
        }
        return SampledFunction::new(grid, a);
    }
    let mut block = c.scaling.clone();
    let mut half = 1usize << c.coarsest;
    for j in c.coarsest..top {
        let l = 2 * half;
        let bands = &c.details[j - c.coarsest];
        let (hl, lh, hh) = (&bands[0], &bands[1], &bands[2]);
        let mut rows_lo = vec![0.0; l * half];
        let mut rows_hi = vec![0.0; l * half];
        for col in 0..half {
            let pick = |m: &[f64]| (0..half).map(|r| m[r * half + col]).collect::<Vec<f64>>();
            let lo = synthesize(sys, &pick(&block), &pick(hl));
            let hi = synthesize(sys, &pick(lh), &pick(hh));
            for i in 0..l {
                rows_lo[i * half + col] = lo[i];
                rows_hi[i * half + col] = hi[i];
            }
        }
        let mut next = vec![0.0; l * l];
        for i in 0..l {
            let row = synthesize(sys, &rows_lo[i * half..(i + 1) * half], &rows_hi[i * half..(i + 1) * half]);
            next[i * l..(i + 1) * l].copy_from_slice(&row);
        }
        block = next;
        half = l;
    }
    SampledFunction::new(grid, block)
}

/// Which basis element to synthesize.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisElement {
    /// Scaling function on a cube of the coarsest level.
    Scaling { index: usize },
    /// Wavelet `ψ_ω` at absolute level `level`, band `band`, cube `index`.
    Wavelet { level: usize, band: usize, index: usize },
}

/// Samples of the basis element whose pairing with itself is 1, i.e. the
/// discrete basis vector scaled by `N^{dim/2}`.
pub fn basis_element(grid: PeriodicGrid, sys: &WaveletSystem, which: BasisElement) -> Result<SampledFunction> {
    let mut c = WaveletCoeffs::zeros_like(grid, sys)?;
    let amp = (grid.len() as f64).sqrt();
    match which {
        BasisElement::Scaling { index } => {
            *c.scaling.get_mut(index).ok_or_else(|| Error::param("scaling index out of range"))? = amp;
        }
        BasisElement::Wavelet { level, band, index } => {
            if level < c.coarsest || level >= grid.log2_size() {
                return Err(Error::param(format!("wavelet level {level} out of range")));
            }
            let slot = c.details[level - c.coarsest]
                .get_mut(band)
                .and_then(|b| b.get_mut(index))
                .ok_or_else(|| Error::param("wavelet band or index out of range"))?;
            *slot = amp;
        }
    }
    idwt(&c, sys)
}

/// The level-indexed sequence `Σ_{I_ω ∈ D_j} |I_ω|^{-s/n-1/2} |⟨f,ψ_ω⟩| 1_{I_ω}`,
/// including the scaling term at `j = 0` when the decomposition is full depth.
pub fn wavelet_sequence(c: &WaveletCoeffs, s: f64) -> Vec<Vec<f64>> {
    let grid = c.grid;
    let dim = grid.dim();
    let top = grid.log2_size();
    let mut seq = vec![vec![0.0; grid.len()]; top];
    let cube_of = |x: usize, level: usize| {
        let [a, b] = grid.index(x);
        let shift = top - level;
        if dim == 1 {
            a >> shift
        } else {
            (a >> shift) * (1 << level) + (b >> shift)
        }
    };
    if c.coarsest == 0 {
        let v = c.scaling_pairings()[0].abs();
        for g in seq[0].iter_mut() {
            *g += v;
        }
    }
    for j in c.coarsest..top {
        let weight = 2f64.powf(j as f64 * (s + dim as f64 / 2.0));
        let mut per_cube = vec![0.0; 1 << (j * dim)];
        for band in 0..c.bands() {
            for (k, p) in c.detail_pairings(j, band).into_iter().enumerate() {
                per_cube[k] += weight * p.abs();
            }
        }
        for (x, g) in seq[j].iter_mut().enumerate() {
            *g += per_cube[cube_of(x, j)];
        }
    }
    seq
}

/// `‖f‖_{Λ_X^s}` with the lattice `spec`.
pub fn lambda_x_norm(f: &SampledFunction, s: f64, sys: &WaveletSystem, spec: &LatticeSpec) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::param(format!("s must be positive, got {s}")));
    }
    let c = dwt(f, sys)?;
    lattice_norm(f.grid(), &wavelet_sequence(&c, s), spec)
}

/// `V_0 = {I ∈ D_0 : |⟨f, ψ_{(0,I)}⟩| > ε}`. On the torus `D_0` is the single
/// unit cube and its pairing is the mean of `f`.
pub fn v0_set(f: &SampledFunction, sys: &WaveletSystem, eps: f64) -> Result<Vec<DyadicCube>> {
    if !(eps > 0.0) {
        return Err(Error::param(format!("eps must be positive, got {eps}")));
    }
    let c = dwt(f, sys)?;
    if c.coarsest != 0 {
        return Err(Error::param("V_0 needs a full-depth decomposition"));
    }
    let per = 1usize;
    Ok(c.scaling_pairings()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > eps)
        .map(|(i, _)| DyadicCube { level: 0, index: [i / per, 0] })
        .collect())
}

/// First moment `∫ x φ(x) dx = Σ n h_n / √2` of the scaling function.
pub fn scaling_centroid(sys: &WaveletSystem) -> f64 {
    sys.lowpass.iter().enumerate().map(|(n, h)| n as f64 * h).sum::<f64>() / std::f64::consts::SQRT_2
}

/// Cross-check pairings from a finer, centroid-corrected discretization.
///
/// The interpolant is resampled `factor` times finer at the points
/// `(k + c)/N'`, `c` the scaling centroid, which makes the fine samples
/// second-order approximations of the fine scaling coefficients. Levels
/// below `log2 N` are then kept and rescaled to pairings.
pub fn refined_pairings(f: &SampledFunction, sys: &WaveletSystem, factor: usize) -> Result<WaveletCoeffs> {
    let fine = f.refine(factor)?;
    let fine_grid = *fine.grid();
    let shift = scaling_centroid(sys) * fine_grid.spacing();
    let h = if fine_grid.dim() == 1 { [shift, 0.0] } else { [shift, shift] };
    let fine = crate::grid::shift_eval(&fine, h)?;
    let fine_sys = WaveletSystem::new(sys.filter_order, fine_grid.log2_size())?;
    let mut c = dwt(&fine, &fine_sys)?;
    let grid = *f.grid();
    let keep = grid.log2_size();
    let rescale = (factor as f64).powf(grid.dim() as f64 / 2.0).recip();
    c.details.truncate(keep);
    for lvl in c.details.iter_mut() {
        for band in lvl.iter_mut() {
            band.iter_mut().for_each(|v| *v *= rescale);
        }
    }
    c.scaling.iter_mut().for_each(|v| *v *= rescale);
    c.grid = grid;
    Ok(c)
}

/// Result of the doubling probe.
#[derive(Clone, Debug, Serialize)]
pub struct DoublingProbe {
    pub worst_ratio: f64,
    pub trials: usize,
}

/// Ratio `‖{(Σ 1_{2B_{k,j}})^θ}‖_X / ‖{(Σ 1_{B_{k,j}})^θ}‖_X` over random
/// ball families on `grid`; the maximum is an empirical doubling constant.
pub fn doubling_probe(
    grid: &PeriodicGrid,
    spec: &LatticeSpec,
    levels: usize,
    trials: usize,
    seed: u64,
) -> Result<DoublingProbe> {
    spec.validate()?;
    if !spec.p.is_finite() && spec.kind != crate::lattice::LatticeKind::FInfQ {
        return Err(Error::param("the doubling probe needs finite p"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 1.0f64;
    for _ in 0..trials {
        let mut small = vec![vec![0.0; grid.len()]; levels];
        let mut big = small.clone();
        for j in 0..levels {
            let count = rng.gen_range(0..4);
            for _ in 0..count {
                let center = [rng.gen::<f64>(), rng.gen::<f64>()];
                let radius = rng.gen_range(2.0..(grid.size() as f64 / 8.0).max(3.0)) * grid.spacing();
                add_ball(grid, &mut small[j], center, radius);
                add_ball(grid, &mut big[j], center, 2.0 * radius);
            }
        }
        let ratio = ball_family_ratio(grid, &small, &big, spec)?;
        worst = worst.max(ratio);
    }
    Ok(DoublingProbe { worst_ratio: worst, trials })
}

fn add_ball(grid: &PeriodicGrid, g: &mut [f64], center: [f64; 2], radius: f64) {
    for (x, v) in g.iter_mut().enumerate() {
        let p = grid.point(x);
        if crate::hyperbolic::torus_dist2(p, center, grid.dim()) < radius * radius {
            *v += 1.0;
        }
    }
}

/// Lattice-norm ratio of the `θ`-powered counting functions; 1 when both vanish.
pub fn ball_family_ratio(
    grid: &PeriodicGrid,
    small: &[Vec<f64>],
    big: &[Vec<f64>],
    spec: &LatticeSpec,
) -> Result<f64> {
    let pow = |seq: &[Vec<f64>]| -> Vec<Vec<f64>> {
        seq.iter().map(|g| g.iter().map(|v| v.powf(spec.theta)).collect()).collect()
    };
    let a = lattice_norm(grid, &pow(small), spec)?;
    let b = lattice_norm(grid, &pow(big), spec)?;
    Ok(if a == 0.0 && b == 0.0 { 1.0 } else { b / a })
}
