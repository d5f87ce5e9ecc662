//! Distance proxies built from bad sets, and an upper oracle from wavelet
//! truncations.
//!
//! Each proxy is a functional of `D(ε)` evaluated on an ε-grid. Its critical
//! index is the threshold crossing of [`threshold_index`]. On a finite grid
//! every functional is finite, so the index of the whole curve is positive
//! even for smooth data. The tail index uses only the octaves past the head
//! time grid, which a smooth function leaves empty at every grid ε.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::badset::{bad_set_d, eps_grid, theta_profile, threshold_index, SWEEP_POINTS, THETA_CUT};
use crate::error::{Error, Result};
use crate::grid::SampledFunction;
use crate::heat::{heat_deriv_field, FracHeatParams, HeatDerivField, TimeGrid};
use crate::hyperbolic::{carleson_m, SpaceTimeSet};
use crate::lattice::{lattice_norm, LatticeKind, LatticeSpec};
use crate::lipschitz::lambda_s_norm_diff;
use crate::wavelet::{dwt, idwt, WaveletSystem};

/// Target space of a proxy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "kebab-case")]
pub enum ProxySpace {
    /// `(Σ_j μ(D_j)^{q/p})^{1/q}`.
    Besov { p: f64, q: f64 },
    /// `#{j : D_j ≠ ∅}`, the `p = ∞` Besov criterion.
    BesovCount,
    /// `‖(Σ_j Θ_j)^{1/q}‖_{L^p}`.
    TriebelLizorkin { p: f64, q: f64 },
    /// `M(D)`, shared by `F_{∞,q}` and the `bmo` criterion.
    Carleson,
    /// `sup_Q |Q|^{-τ} (Σ_{j≥j_Q} μ(D_j ∩ Q×(0,1])^{q/p})^{1/q}`.
    BesovTau { p: f64, q: f64, tau: f64 },
    /// `sup_Q |Q|^{-τ} ‖(Σ_{j≥j_Q} Θ_j)^{1/q}‖_{L^p(Q)}`.
    TlTau { p: f64, q: f64, tau: f64 },
}

impl ProxySpace {
    pub fn name(&self) -> String {
        match self {
            ProxySpace::Besov { p, q } => format!("besov(p={p},q={q})"),
            ProxySpace::BesovCount => "besov-count".into(),
            ProxySpace::TriebelLizorkin { p, q } => format!("triebel-lizorkin(p={p},q={q})"),
            ProxySpace::Carleson => "carleson".into(),
            ProxySpace::BesovTau { p, q, tau } => format!("besov-tau(p={p},q={q},tau={tau})"),
            ProxySpace::TlTau { p, q, tau } => format!("tl-tau(p={p},q={q},tau={tau})"),
        }
    }

    /// Lattice and `Θ` exponent through which the functional is evaluated.
    fn lattice(&self) -> Result<Option<LatticeSpec>> {
        let finite = |p: f64, q: f64| {
            if p > 0.0 && p.is_finite() && q > 0.0 && q.is_finite() {
                Ok(())
            } else {
                Err(Error::param(format!("{} needs finite positive p and q", self.name())))
            }
        };
        Ok(match *self {
            ProxySpace::Besov { p, q } => {
                finite(p, q)?;
                Some(LatticeSpec::new(LatticeKind::LqLp, p, q, 0.0, 1.0 / p)?)
            }
            ProxySpace::TriebelLizorkin { p, q } => {
                finite(p, q)?;
                Some(LatticeSpec::new(LatticeKind::LpLq, p, q, 0.0, 1.0 / q)?)
            }
            ProxySpace::BesovTau { p, q, tau } => {
                finite(p, q)?;
                Some(LatticeSpec::new(LatticeKind::LqLpTau, p, q, tau, 1.0 / p)?)
            }
            ProxySpace::TlTau { p, q, tau } => {
                finite(p, q)?;
                Some(LatticeSpec::new(LatticeKind::LpTauLq, p, q, tau, 1.0 / q)?)
            }
            ProxySpace::BesovCount | ProxySpace::Carleson => None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.lattice().map(|_| ())
    }

    /// The functional of `a` restricted to octaves `j ≥ from`.
    pub fn functional(&self, a: &SpaceTimeSet, from: usize) -> Result<f64> {
        match self {
            ProxySpace::Carleson => {
                let times = *a.times();
                let tail = SpaceTimeSet::from_predicate(*a.grid(), times, |ti, x| {
                    times.octave_of(ti) >= from && a.contains(ti, x)
                });
                Ok(carleson_m(&tail))
            }
            ProxySpace::BesovCount => {
                Ok(a.octave_counts().iter().skip(from).filter(|&&c| c > 0).count() as f64)
            }
            _ => {
                let spec = self.lattice()?.expect("lattice-backed space");
                let seq: Vec<Vec<f64>> = theta_profile(a)
                    .into_iter()
                    .enumerate()
                    .map(|(j, g)| {
                        if j < from {
                            vec![0.0; g.len()]
                        } else {
                            g.into_iter().map(|v| if v > 0.0 { v.powf(spec.theta) } else { 0.0 }).collect()
                        }
                    })
                    .collect();
                lattice_norm(a.grid(), &seq, &spec)
            }
        }
    }
}

/// The spaces reported by default.
pub fn default_spaces() -> Vec<ProxySpace> {
    vec![
        ProxySpace::Besov { p: 2.0, q: 2.0 },
        ProxySpace::Besov { p: 1.0, q: 2.0 },
        ProxySpace::BesovCount,
        ProxySpace::TriebelLizorkin { p: 2.0, q: 1.0 },
        ProxySpace::Carleson,
        ProxySpace::BesovTau { p: 2.0, q: 2.0, tau: 0.25 },
        ProxySpace::TlTau { p: 2.0, q: 1.0, tau: 0.25 },
    ]
}

/// ε-curves and indices of one proxy.
#[derive(Clone, Debug, Serialize)]
pub struct ProxyCurve {
    pub space: ProxySpace,
    pub name: String,
    /// Functional over every octave.
    pub values: Vec<f64>,
    /// Functional over the tail octaves only.
    pub tail: Vec<f64>,
    pub critical_index: f64,
    pub tail_index: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DistanceReport {
    pub envelope: f64,
    pub eps: Vec<f64>,
    /// First tail octave; octaves before it form the head time grid.
    pub tail_from: usize,
    pub octaves: usize,
    pub theta_cut: f64,
    pub proxies: Vec<ProxyCurve>,
    /// Compact-domain surrogate for the far-cube term: `|⟨f, ψ_(0,I)⟩|` on the single level-0 cube.
    pub level0_surrogate: f64,
}

impl DistanceReport {
    pub fn proxy(&self, space: &ProxySpace) -> Option<&ProxyCurve> {
        self.proxies.iter().find(|c| &c.space == space)
    }
}

/// Proxies of `f` on `times` extended by `tail_octaves` finer octaves.
pub fn distance_proxies(
    f: &SampledFunction,
    params: FracHeatParams,
    times: TimeGrid,
    sys: &WaveletSystem,
    spaces: &[ProxySpace],
    tail_octaves: usize,
) -> Result<DistanceReport> {
    for sp in spaces {
        sp.validate()?;
    }
    if tail_octaves == 0 {
        return Err(Error::param("need at least one tail octave"));
    }
    let c = dwt(f, sys)?;
    if c.coarsest != 0 {
        return Err(Error::param("distance proxies need a full-depth wavelet system"));
    }
    let field = heat_deriv_field(f, params, times.extended(tail_octaves)?);
    let mut rep = proxies_on_field(&field, params.s, spaces, times.octaves(), SWEEP_POINTS)?;
    rep.level0_surrogate = c.scaling_pairings()[0].abs();
    Ok(rep)
}

/// Proxy curves on a precomputed field; octaves `≥ tail_from` form the tail.
pub fn proxies_on_field(
    w: &HeatDerivField,
    s: f64,
    spaces: &[ProxySpace],
    tail_from: usize,
    points: usize,
) -> Result<DistanceReport> {
    let envelope = w.envelope();
    let eps = eps_grid(envelope, points);
    let rows: Vec<Vec<(f64, f64)>> = eps
        .par_iter()
        .map(|&e| {
            let d = bad_set_d(w, s, e)?;
            spaces.iter().map(|sp| Ok((sp.functional(&d, 0)?, sp.functional(&d, tail_from)?))).collect()
        })
        .collect::<Result<_>>()?;
    let proxies = spaces
        .iter()
        .enumerate()
        .map(|(k, sp)| {
            let values: Vec<f64> = rows.iter().map(|r| r[k].0).collect();
            let tail: Vec<f64> = rows.iter().map(|r| r[k].1).collect();
            ProxyCurve {
                space: *sp,
                name: sp.name(),
                critical_index: threshold_index(&eps, &values, THETA_CUT),
                tail_index: threshold_index(&eps, &tail, THETA_CUT),
                values,
                tail,
            }
        })
        .collect();
    Ok(DistanceReport {
        envelope,
        eps,
        tail_from,
        octaves: w.times().octaves(),
        theta_cut: THETA_CUT,
        proxies,
        level0_surrogate: 0.0,
    })
}

/// `P_L f`: the wavelet expansion of `f` cut to levels `< level`.
pub fn wavelet_truncation(f: &SampledFunction, sys: &WaveletSystem, level: usize) -> Result<SampledFunction> {
    let mut c = dwt(f, sys)?;
    for (i, lvl) in c.details.iter_mut().enumerate() {
        if i + c.coarsest >= level {
            lvl.iter_mut().for_each(|band| band.iter_mut().for_each(|v| *v = 0.0));
        }
    }
    idwt(&c, sys)
}

/// `P_L f` for every `L` in `levels`.
pub fn wavelet_truncations(f: &SampledFunction, sys: &WaveletSystem, levels: &[usize]) -> Result<Vec<SampledFunction>> {
    levels.iter().map(|&l| wavelet_truncation(f, sys, l)).collect()
}

/// Keep the coefficients with `|⟨f, ψ_ω⟩| > thresh` (the scaling part is always kept).
pub fn threshold_projection(f: &SampledFunction, sys: &WaveletSystem, thresh: f64) -> Result<SampledFunction> {
    let mut c = dwt(f, sys)?;
    let cut = thresh * (f.grid().len() as f64).sqrt();
    for lvl in c.details.iter_mut() {
        for band in lvl.iter_mut() {
            band.iter_mut().filter(|v| v.abs() <= cut).for_each(|v| *v = 0.0);
        }
    }
    idwt(&c, sys)
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleResult {
    pub value: f64,
    /// Index of the minimizing candidate.
    pub best: usize,
    pub per_candidate: Vec<f64>,
}

/// `min_g ‖f - g‖_{Λ_s}` over the candidates, with the difference norm of order `r1`.
pub fn distance_upper_oracle(f: &SampledFunction, s: f64, r1: u32, candidates: &[SampledFunction]) -> Result<OracleResult> {
    if candidates.is_empty() {
        return Err(Error::param("need at least one candidate"));
    }
    let per_candidate: Vec<f64> = candidates
        .par_iter()
        .map(|g| lambda_s_norm_diff(&f.sub(g)?, s, r1))
        .collect::<Result<_>>()?;
    let (best, value) = per_candidate
        .iter()
        .cloned()
        .enumerate()
        .fold((0, f64::INFINITY), |m, (i, v)| if v < m.1 { (i, v) } else { m });
    Ok(OracleResult { value, best, per_candidate })
}
