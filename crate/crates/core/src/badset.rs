//! Bad sets `D` and `S`, their `dt/t` profiles, ε-sweeps of lattice norms
//! and the grid verifiers for the three set inclusions between them.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{PeriodicGrid, SampledFunction};
use crate::heat::{heat_deriv_field, FracHeatParams, HeatDerivField, TimeGrid};
use crate::hyperbolic::{carleson_m, mu_measure, neighborhood, row_distance_maps, SpaceTimeSet};
use crate::lattice::{lattice_norm, LatticeSpec};
use crate::lipschitz::modulus;
use crate::wavelet::{dwt, WaveletSystem};

/// `D(s, f, ε) = {(x,t) : t^{αr-s}|W(x,t)| > ε}` on the field's samples.
pub fn bad_set_d(w: &HeatDerivField, s: f64, eps: f64) -> Result<SpaceTimeSet> {
    if !(eps > 0.0) {
        return Err(Error::param(format!("eps must be positive, got {eps}")));
    }
    let expo = w.params().alpha * w.params().r as f64 - s;
    let times = *w.times();
    let norms: Vec<f64> = (0..times.len()).map(|ti| times.time(ti).powf(expo)).collect();
    Ok(SpaceTimeSet::from_predicate(*w.grid(), times, |ti, x| {
        norms[ti] * w.slice(ti)[x].abs() > eps
    }))
}

/// Samples of `Δ_{r1} f(x, y)` at `y` equal to the time samples.
#[derive(Clone, Debug)]
pub struct ModulusField {
    pub order: u32,
    grid: PeriodicGrid,
    times: TimeGrid,
    values: Vec<f64>,
}

impl ModulusField {
    pub fn row(&self, ti: usize) -> &[f64] {
        let n = self.grid.len();
        &self.values[ti * n..(ti + 1) * n]
    }

    pub fn times(&self) -> &TimeGrid {
        &self.times
    }

    /// `max_y y^{-s} Δ_{r1} f(x,y)` over the samples.
    pub fn envelope(&self, s: f64) -> f64 {
        (0..self.times.len())
            .map(|ti| self.row(ti).iter().fold(0.0f64, |m, v| m.max(*v)) * self.times.time(ti).powf(-s))
            .fold(0.0, f64::max)
    }
}

pub fn modulus_field(f: &SampledFunction, r1: u32, times: TimeGrid) -> Result<ModulusField> {
    let m = modulus(f, r1, &times.times())?;
    let values = (0..times.len()).flat_map(|i| m.at(i).to_vec()).collect();
    Ok(ModulusField { order: r1, grid: *f.grid(), times, values })
}

/// `S = {(x,y) : Δ_{r1} f(x,y) > ε y^s}` from a precomputed modulus.
pub fn bad_set_s_from(m: &ModulusField, s: f64, eps: f64) -> Result<SpaceTimeSet> {
    if !(eps > 0.0) {
        return Err(Error::param(format!("eps must be positive, got {eps}")));
    }
    let thresh: Vec<f64> = (0..m.times.len()).map(|ti| eps * m.times.time(ti).powf(s)).collect();
    Ok(SpaceTimeSet::from_predicate(m.grid, m.times, |ti, x| m.row(ti)[x] > thresh[ti]))
}

pub fn bad_set_s(f: &SampledFunction, r1: u32, s: f64, eps: f64, times: TimeGrid) -> Result<SpaceTimeSet> {
    if (r1 as f64) <= s {
        return Err(Error::param(format!("need r1 > s, got r1={r1}, s={s}")));
    }
    bad_set_s_from(&modulus_field(f, r1, times)?, s, eps)
}

/// `Θ_j(x) = Σ_{t in octave j} 1_A(x,t) log2/M_t`, one grid function per octave.
pub fn theta_profile(a: &SpaceTimeSet) -> Vec<Vec<f64>> {
    let times = a.times();
    let n = a.grid().len();
    let w = times.weight();
    (0..times.octaves())
        .map(|j| {
            let mut g = vec![0.0; n];
            for m in 0..times.per_octave() {
                for (v, &b) in g.iter_mut().zip(a.row(times.index(j, m))) {
                    if b {
                        *v += w;
                    }
                }
            }
            g
        })
        .collect()
}

/// Geometric ε-grid `λ̂·10^{-4+4i/(count-1)}`; empty when `λ̂ = 0`.
pub fn eps_grid(envelope: f64, count: usize) -> Vec<f64> {
    if !(envelope > 0.0) || count < 2 {
        return Vec::new();
    }
    (0..count)
        .map(|i| envelope * 10f64.powf(-4.0 + 4.0 * i as f64 / (count - 1) as f64))
        .collect()
}

/// Smallest grid ε whose curve value is at most `frac` times the value at the
/// smallest ε; 0 if the curve vanishes there.
pub fn threshold_index(eps: &[f64], curve: &[f64], frac: f64) -> f64 {
    match curve.first() {
        None => 0.0,
        Some(&c0) if c0 <= 0.0 => 0.0,
        Some(&c0) => {
            let cut = frac * c0;
            eps.iter().zip(curve).find(|(_, &v)| v <= cut).map(|(e, _)| *e).unwrap_or(f64::INFINITY)
        }
    }
}

/// Default fraction for [`threshold_index`].
pub const THETA_CUT: f64 = 0.05;
/// Default ε-grid length.
pub const SWEEP_POINTS: usize = 32;

/// ε-curves of the lattice functionals of the bad sets.
#[derive(Clone, Debug, Serialize)]
pub struct EpsSweep {
    pub envelope: f64,
    pub eps: Vec<f64>,
    /// `‖{Θ_j^θ}‖_X`.
    pub norm: Vec<f64>,
    /// `‖{Σ_{I∈V_0} 1_I δ_{0,j}}‖_X`.
    pub norm_v0: Vec<f64>,
    pub mu: Vec<f64>,
    pub carleson: Vec<f64>,
    pub theta_cut: f64,
    /// Threshold-crossing index of `norm`.
    pub critical_index: f64,
    /// Compact-domain surrogate for ε_X⁰: the level-0 pairing `|⟨f, ψ_(0,I)⟩|`.
    pub critical_index_v0: f64,
}

/// `‖{Θ_j^θ}‖_X` of a set.
pub fn profile_norm(a: &SpaceTimeSet, spec: &LatticeSpec) -> Result<f64> {
    let seq: Vec<Vec<f64>> = theta_profile(a)
        .into_iter()
        .map(|g| g.into_iter().map(|v| if v > 0.0 { v.powf(spec.theta) } else { 0.0 }).collect())
        .collect();
    lattice_norm(a.grid(), &seq, spec)
}

pub fn eps_sweep(
    f: &SampledFunction,
    params: FracHeatParams,
    times: TimeGrid,
    sys: &WaveletSystem,
    spec: &LatticeSpec,
) -> Result<EpsSweep> {
    let w = heat_deriv_field(f, params, times);
    eps_sweep_field(f, &w, sys, spec, SWEEP_POINTS)
}

/// Sweep on a precomputed field of `f`.
pub fn eps_sweep_field(
    f: &SampledFunction,
    w: &HeatDerivField,
    sys: &WaveletSystem,
    spec: &LatticeSpec,
    points: usize,
) -> Result<EpsSweep> {
    spec.validate()?;
    let s = w.params().s;
    let envelope = w.envelope();
    let eps = eps_grid(envelope, points);
    let level0 = {
        let c = dwt(f, sys)?;
        if c.coarsest != 0 {
            return Err(Error::param("sweeps need a full-depth wavelet system"));
        }
        c.scaling_pairings()[0].abs()
    };
    let grid = *f.grid();
    let unit = {
        let mut seq = vec![vec![0.0; grid.len()]; w.times().octaves()];
        seq[0] = vec![1.0; grid.len()];
        lattice_norm(&grid, &seq, spec)?
    };
    let rows: Vec<(f64, f64, f64)> = eps
        .par_iter()
        .map(|&e| {
            let d = bad_set_d(w, s, e)?;
            Ok((profile_norm(&d, spec)?, mu_measure(&d), carleson_m(&d)))
        })
        .collect::<Result<_>>()?;
    let norm: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let norm_v0 = eps.iter().map(|&e| if level0 > e { unit } else { 0.0 }).collect();
    Ok(EpsSweep {
        envelope,
        critical_index: threshold_index(&eps, &norm, THETA_CUT),
        critical_index_v0: level0,
        mu: rows.iter().map(|r| r.1).collect(),
        carleson: rows.iter().map(|r| r.2).collect(),
        norm,
        norm_v0,
        eps,
        theta_cut: THETA_CUT,
    })
}

/// Violations of one candidate constant.
#[derive(Clone, Debug, Serialize)]
pub struct InclusionTrial {
    pub delta_or_r: f64,
    pub c: f64,
    pub violations: usize,
    pub checked: usize,
}

/// Report of the `[D_j(ε)]_δ ⊂ D_{j-1}(ε₁) ∪ D_j(ε₁) ∪ D_{j+1}(ε₁)` check.
#[derive(Clone, Debug, Serialize)]
pub struct Prop61Report {
    pub eps: f64,
    pub eps1: f64,
    pub trials: Vec<InclusionTrial>,
    /// Largest δ with zero violations.
    pub best_delta: Option<f64>,
    pub injected: bool,
}

/// Check the three-octave inclusion for every δ in `deltas`.
///
/// With `inject`, one full octave slab is added to the left set; this must
/// produce violations and serves as a self-test of the checker.
pub fn verify_prop_61(
    w: &HeatDerivField,
    s: f64,
    eps: f64,
    eps1: f64,
    deltas: &[f64],
    inject: bool,
) -> Result<Prop61Report> {
    if !(eps1 > 0.0 && eps1 < eps) {
        return Err(Error::param(format!("need 0 < eps1 < eps, got eps1={eps1}, eps={eps}")));
    }
    if deltas.iter().any(|&d| !(d > 0.0 && d < std::f64::consts::LN_2)) {
        return Err(Error::param("delta must lie in (0, log 2) so neighborhoods stay within adjacent octaves"));
    }
    let mut left = bad_set_d(w, s, eps)?;
    let right = bad_set_d(w, s, eps1)?;
    let times = *w.times();
    if inject {
        // The octave where the right set is sparsest.
        let counts = right.octave_counts();
        let j = (0..times.octaves()).min_by_key(|&j| counts[j]).unwrap_or(0);
        for m in 0..times.per_octave() {
            for x in 0..w.grid().len() {
                left.insert(times.index(j, m), x);
            }
        }
    }
    let slices: Vec<SpaceTimeSet> = (0..times.octaves()).map(|j| left.octave_slice(j)).collect();
    let allowed: Vec<SpaceTimeSet> = (0..times.octaves())
        .map(|j| {
            let lo = j.saturating_sub(1);
            let hi = (j + 1).min(times.octaves() - 1);
            SpaceTimeSet::from_predicate(*w.grid(), times, |ti, x| {
                let o = times.octave_of(ti);
                o >= lo && o <= hi && right.contains(ti, x)
            })
        })
        .collect();
    let trials = deltas
        .iter()
        .map(|&delta| {
            let mut violations = 0;
            let mut checked = 0;
            for j in 0..times.octaves() {
                if slices[j].is_empty() {
                    continue;
                }
                let nb = neighborhood(&slices[j], delta)?;
                checked += nb.count();
                violations += nb.difference_count(&allowed[j])?;
            }
            Ok(InclusionTrial { delta_or_r: delta, c: eps1 / eps, violations, checked })
        })
        .collect::<Result<Vec<_>>>()?;
    let best_delta = trials
        .iter()
        .filter(|t| t.violations == 0)
        .map(|t| t.delta_or_r)
        .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |v| v.max(d))));
    Ok(Prop61Report { eps, eps1, trials, best_delta, injected: inject })
}

/// Does `(x, y)` lie in the `R`-neighborhood of the rows `rows` of a set whose
/// per-row squared distance maps are `maps`?
fn covered(
    grid: &PeriodicGrid,
    times: &TimeGrid,
    maps: &[Option<Vec<f64>>],
    rows: std::ops::Range<usize>,
    x: usize,
    y: f64,
    ch: f64,
) -> bool {
    let h2 = grid.spacing().powi(2);
    rows.into_iter().any(|ti| match &maps[ti] {
        None => false,
        Some(map) => {
            let t = times.time(ti);
            let budget = 2.0 * t * y * ch - (y - t).powi(2);
            budget > 0.0 && map[x] * h2 < budget
        }
    })
}

/// Count members of octave `j` of `left` not covered by octaves `j+1..=j+m`
/// of the `R`-neighborhood of the set behind `maps` (which lives on `far`,
/// an extension of `left`'s time grid).
fn union_violations(left: &SpaceTimeSet, far: &TimeGrid, maps: &[Option<Vec<f64>>], r: f64, m: usize) -> (usize, usize) {
    let times = *left.times();
    let n = left.grid().len();
    let ch = r.cosh() - 1.0;
    let grid = *left.grid();
    (0..times.len())
        .into_par_iter()
        .map(|ti| {
            let j = times.octave_of(ti);
            let y = times.time(ti);
            let lo = far.index(j + 1, 0).min(far.len());
            let hi = far.index((j + 1 + m).min(far.octaves()), 0).min(far.len());
            let mut bad = 0;
            let mut seen = 0;
            let row = left.row(ti);
            for x in 0..n {
                if row[x] {
                    seen += 1;
                    if !covered(&grid, far, maps, lo..hi, x, y, ch) {
                        bad += 1;
                    }
                }
            }
            (bad, seen)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
}

/// Outcome of a grid search over `(R, c)`.
#[derive(Clone, Debug, Serialize)]
pub struct UnionReport {
    pub eps: f64,
    pub trials: Vec<InclusionTrial>,
    /// Smallest passing `R`, with the largest passing `c` at that `R`.
    pub best: Option<(f64, f64)>,
}

fn search(
    r_grid: &[f64],
    c_grid: &[f64],
    eps: f64,
    mut check: impl FnMut(f64, f64) -> Result<(usize, usize)>,
) -> Result<UnionReport> {
    let mut rs = r_grid.to_vec();
    rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut cs = c_grid.to_vec();
    cs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut trials = Vec::new();
    for &r in &rs {
        for &c in &cs {
            let (violations, checked) = check(r, c)?;
            trials.push(InclusionTrial { delta_or_r: r, c, violations, checked });
            if violations == 0 {
                return Ok(UnionReport { eps, trials, best: Some((r, c)) });
            }
        }
    }
    Ok(UnionReport { eps, trials, best: None })
}

fn check_grids(r_grid: &[f64], c_grid: &[f64]) -> Result<()> {
    if r_grid.is_empty() || r_grid.iter().any(|&r| !(r >= 1.0 && r.is_finite())) {
        return Err(Error::param("R values must be finite and at least 1"));
    }
    if c_grid.is_empty() || c_grid.iter().any(|&c| !(c > 0.0 && c <= 1.0)) {
        return Err(Error::param("c values must lie in (0, 1]"));
    }
    Ok(())
}

fn union_depth(r: f64) -> usize {
    (r.log2().ceil() as usize).max(1)
}

/// Shared inputs of the `S ⊂ ∪[D]_R` check.
pub struct Prop62 {
    left: SpaceTimeSet,
    field: HeatDerivField,
    s: f64,
    pub eps: f64,
}

impl Prop62 {
    pub fn new(
        f: &SampledFunction,
        params: FracHeatParams,
        times: TimeGrid,
        r1: u32,
        eps: f64,
        max_r: f64,
    ) -> Result<Self> {
        let ar = params.alpha * params.r as f64;
        if (r1 as f64) <= ar + 1.0 {
            return Err(Error::param(format!("need r1 > alpha r + 1 = {}, got {r1}", ar + 1.0)));
        }
        let left = bad_set_s(f, r1, params.s, eps, times)?;
        let far = times.extended(union_depth(max_r))?;
        let field = heat_deriv_field(f, params, far);
        Ok(Prop62 { left, field, s: params.s, eps })
    }

    /// `(violations, checked)` for one `(R, c)`.
    pub fn violations(&self, r: f64, c: f64) -> Result<(usize, usize)> {
        let m = union_depth(r);
        if self.field.times().octaves() < self.left.times().octaves() + m {
            return Err(Error::param("R exceeds the precomputed octave extension"));
        }
        let d = bad_set_d(&self.field, self.s, c * self.eps)?;
        let maps = row_distance_maps(&d);
        Ok(union_violations(&self.left, self.field.times(), &maps, r, m))
    }
}

/// Grid search for `S_{r1,j}(s,f,ε) ⊂ ∪_{i=j+1}^{j+m} [D_i(s,f,cε)]_R`, `m = ⌈log2 R⌉`.
#[allow(clippy::too_many_arguments)]
pub fn verify_prop_62(
    f: &SampledFunction,
    params: FracHeatParams,
    times: TimeGrid,
    r1: u32,
    eps: f64,
    r_grid: &[f64],
    c_grid: &[f64],
) -> Result<UnionReport> {
    check_grids(r_grid, c_grid)?;
    let max_r = r_grid.iter().cloned().fold(1.0, f64::max);
    let ctx = Prop62::new(f, params, times, r1, eps, max_r)?;
    search(r_grid, c_grid, eps, |r, c| ctx.violations(r, c))
}

/// Shared inputs of the `D ⊂ ∪[S]_R` check.
pub struct Prop63 {
    left: SpaceTimeSet,
    modulus: ModulusField,
    ell: u32,
    s: f64,
    pub eps: f64,
}

impl Prop63 {
    pub fn new(f: &SampledFunction, params: FracHeatParams, times: TimeGrid, ell: u32, eps: f64) -> Result<Self> {
        params.require_inclusion_range()?;
        let ar = params.alpha * params.r as f64;
        let l = ell as f64;
        if !(params.s / 2.0 < l && l < (ar - 1.0) / 2.0) {
            return Err(Error::param(format!(
                "need s/2 < ell < (alpha r - 1)/2, got ell={ell}, s={}, alpha r={ar}",
                params.s
            )));
        }
        let w = heat_deriv_field(f, params, times);
        let left = bad_set_d(&w, params.s, eps)?;
        let far = times.extended(8 * ell as usize)?;
        let modulus = modulus_field(f, 2 * ell, far)?;
        Ok(Prop63 { left, modulus, ell, s: params.s, eps })
    }

    pub fn violations(&self, r: f64, c: f64) -> Result<(usize, usize)> {
        let s_set = bad_set_s_from(&self.modulus, self.s, c * self.eps)?;
        let maps = row_distance_maps(&s_set);
        Ok(union_violations(&self.left, self.modulus.times(), &maps, r, 8 * self.ell as usize))
    }
}

/// Grid search for `D_j(s,f,ε) ⊂ ∪_{i=j+1}^{j+8ℓ} [S_{2ℓ,i}(s,f,cε)]_R`.
#[allow(clippy::too_many_arguments)]
pub fn verify_prop_63(
    f: &SampledFunction,
    params: FracHeatParams,
    times: TimeGrid,
    ell: u32,
    eps: f64,
    r_grid: &[f64],
    c_grid: &[f64],
) -> Result<UnionReport> {
    check_grids(r_grid, c_grid)?;
    let ctx = Prop63::new(f, params, times, ell, eps)?;
    search(r_grid, c_grid, eps, |r, c| ctx.violations(r, c))
}

/// Default search grids: δ ∈ {2^-6..2^-2}, R ∈ {2..64}, c ∈ {2^-6..2^-1}.
pub fn default_deltas() -> Vec<f64> {
    (2..=6).rev().map(|k| 0.5f64.powi(k)).collect()
}

pub fn default_r_grid() -> Vec<f64> {
    (1..=6).map(|k| 2f64.powi(k)).collect()
}

pub fn default_c_grid() -> Vec<f64> {
    (1..=6).map(|k| 0.5f64.powi(k)).collect()
}
