//! Concrete quasi-normed lattices of function sequences on the torus.
//!
//! A sequence is a slice of grid functions `g_j`, `j = 0..J`, sampled on one
//! [`PeriodicGrid`]. Exponents may be `f64::INFINITY`, in which case sums
//! become maxima. Dyadic cubes range over levels `0..=log2 N`; cubes larger
//! than the torus are not considered.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PeriodicGrid;
use crate::hyperbolic::pool_to_level;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LatticeKind {
    /// `(Σ_j ‖g_j‖_p^q)^{1/q}`
    #[serde(rename = "lq_Lp")]
    LqLp,
    /// `‖(Σ_j |g_j|^q)^{1/q}‖_p`
    #[serde(rename = "Lp_lq")]
    LpLq,
    /// `sup_{l,m} (⨍_{I_{l,m}} Σ_{j≥l} |g_j|^q)^{1/q}`
    #[serde(rename = "F_inf_q")]
    FInfQ,
    /// `sup_Q |Q|^{-τ} (Σ_{j≥j_Q} ‖g_j‖_{L^p(Q)}^q)^{1/q}`
    #[serde(rename = "lq_Lp_tau")]
    LqLpTau,
    /// `sup_Q |Q|^{-τ} ‖(Σ_{j≥j_Q} |g_j|^q)^{1/q}‖_{L^p(Q)}`
    #[serde(rename = "Lp_tau_lq")]
    LpTauLq,
}

impl LatticeKind {
    pub const ALL: [LatticeKind; 5] =
        [Self::LqLp, Self::LpLq, Self::FInfQ, Self::LqLpTau, Self::LpTauLq];

    pub fn name(&self) -> &'static str {
        match self {
            Self::LqLp => "lq_Lp",
            Self::LpLq => "Lp_lq",
            Self::FInfQ => "F_inf_q",
            Self::LqLpTau => "lq_Lp_tau",
            Self::LpTauLq => "Lp_tau_lq",
        }
    }
}

/// Parameters selecting one lattice. `p` is ignored by `F_inf_q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    pub p: f64,
    pub q: f64,
    #[serde(default)]
    pub tau: f64,
    #[serde(default = "one")]
    pub theta: f64,
}

fn one() -> f64 {
    1.0
}

fn exponent_ok(e: f64) -> bool {
    e > 0.0 && !e.is_nan()
}

impl LatticeSpec {
    pub fn new(kind: LatticeKind, p: f64, q: f64, tau: f64, theta: f64) -> Result<Self> {
        let spec = LatticeSpec { kind, p, q, tau, theta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn lq_lp(p: f64, q: f64) -> Result<Self> {
        Self::new(LatticeKind::LqLp, p, q, 0.0, 1.0)
    }

    pub fn lp_lq(p: f64, q: f64) -> Result<Self> {
        Self::new(LatticeKind::LpLq, p, q, 0.0, 1.0)
    }

    pub fn f_inf_q(q: f64) -> Result<Self> {
        Self::new(LatticeKind::FInfQ, f64::INFINITY, q, 0.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !exponent_ok(self.q) {
            return Err(Error::param(format!("q must lie in (0, inf], got {}", self.q)));
        }
        if self.kind != LatticeKind::FInfQ && !exponent_ok(self.p) {
            return Err(Error::param(format!("p must lie in (0, inf], got {}", self.p)));
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(Error::param(format!("theta must be positive, got {}", self.theta)));
        }
        match self.kind {
            LatticeKind::LqLpTau | LatticeKind::LpTauLq => {
                if !self.p.is_finite() {
                    return Err(Error::param("tau lattices need finite p"));
                }
                if !(self.tau >= 0.0 && self.tau < 1.0 / self.p) {
                    return Err(Error::param(format!(
                        "tau must lie in [0, 1/p) = [0, {}), got {}",
                        1.0 / self.p,
                        self.tau
                    )));
                }
            }
            _ => {
                if self.tau != 0.0 {
                    return Err(Error::param("tau is only meaningful for the tau lattices"));
                }
            }
        }
        Ok(())
    }
}

/// `(Σ a_i^e)^{1/e}` for nonnegative terms, `max` when `e = ∞`.
fn lsum(terms: impl Iterator<Item = f64>, e: f64) -> f64 {
    if e.is_infinite() {
        terms.fold(0.0, f64::max)
    } else {
        terms.map(|a| a.powf(e)).sum::<f64>().powf(1.0 / e)
    }
}

/// `‖g‖_{L^p}` over the torus with cell volume `h^n`.
fn lp_norm(grid: &PeriodicGrid, g: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        g.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else {
        (g.iter().map(|v| v.abs().powf(p)).sum::<f64>() * grid.cell_volume()).powf(1.0 / p)
    }
}

/// Per-cube `max |g|` at a dyadic level.
fn pool_max(grid: &PeriodicGrid, g: &[f64], level: usize) -> Vec<f64> {
    let shift = grid.log2_size() - level;
    let per = 1usize << level;
    let mut out = vec![0.0f64; per.pow(grid.dim() as u32)];
    for (x, v) in g.iter().enumerate() {
        let [a, b] = grid.index(x);
        let idx = if grid.dim() == 1 { a >> shift } else { (a >> shift) * per + (b >> shift) };
        out[idx] = out[idx].max(v.abs());
    }
    out
}

/// Per-cube `‖g‖_{L^p(Q)}` at a dyadic level.
fn pool_lp(grid: &PeriodicGrid, g: &[f64], level: usize, p: f64) -> Vec<f64> {
    if p.is_infinite() {
        return pool_max(grid, g, level);
    }
    let pw: Vec<f64> = g.iter().map(|v| v.abs().powf(p)).collect();
    pool_to_level(grid, &pw, level)
        .into_iter()
        .map(|s| (s * grid.cell_volume()).powf(1.0 / p))
        .collect()
}

/// Pointwise `(Σ_{j≥from} |g_j|^q)^{1/q}`.
fn pointwise_lq(grid: &PeriodicGrid, seq: &[Vec<f64>], from: usize, q: f64) -> Vec<f64> {
    (0..grid.len())
        .map(|x| lsum(seq.iter().skip(from).map(|g| g[x].abs()), q))
        .collect()
}

fn check_sequence(grid: &PeriodicGrid, seq: &[Vec<f64>]) -> Result<()> {
    for (j, g) in seq.iter().enumerate() {
        if g.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "sequence term {j} has {} samples, grid has {}",
                g.len(),
                grid.len()
            )));
        }
    }
    Ok(())
}

/// The quasi-norm of `seq` in the lattice selected by `spec`.
pub fn lattice_norm(grid: &PeriodicGrid, seq: &[Vec<f64>], spec: &LatticeSpec) -> Result<f64> {
    spec.validate()?;
    check_sequence(grid, seq)?;
    let (p, q) = (spec.p, spec.q);
    let top = grid.log2_size();
    let dim = grid.dim() as i32;
    let value = match spec.kind {
        LatticeKind::LqLp => lsum(seq.iter().map(|g| lp_norm(grid, g, p)), q),
        LatticeKind::LpLq => lp_norm(grid, &pointwise_lq(grid, seq, 0, q), p),
        LatticeKind::FInfQ => {
            let mut best = 0.0f64;
            for l in 0..=top.min(seq.len().saturating_sub(1)) {
                let v = if q.is_infinite() {
                    let tail = pointwise_lq(grid, seq, l, q);
                    pool_max(grid, &tail, l).into_iter().fold(0.0, f64::max)
                } else {
                    let tail: Vec<f64> = (0..grid.len())
                        .map(|x| seq.iter().skip(l).map(|g| g[x].abs().powf(q)).sum())
                        .collect();
                    let cells = 2f64.powi((top - l) as i32 * dim);
                    pool_to_level(grid, &tail, l)
                        .into_iter()
                        .map(|s| (s / cells).powf(1.0 / q))
                        .fold(0.0, f64::max)
                };
                best = best.max(v);
            }
            best
        }
        LatticeKind::LqLpTau => {
            let mut best = 0.0f64;
            for l in 0..=top {
                let vol = 0.5f64.powi(l as i32 * dim);
                let pooled: Vec<Vec<f64>> =
                    seq.iter().skip(l).map(|g| pool_lp(grid, g, l, p)).collect();
                let cubes = 1usize << (l * grid.dim());
                for c in 0..cubes {
                    let v = lsum(pooled.iter().map(|row| row[c]), q) / vol.powf(spec.tau);
                    best = best.max(v);
                }
            }
            best
        }
        LatticeKind::LpTauLq => {
            let mut best = 0.0f64;
            for l in 0..=top {
                let vol = 0.5f64.powi(l as i32 * dim);
                let tail = pointwise_lq(grid, seq, l, q);
                let v = pool_lp(grid, &tail, l, p).into_iter().fold(0.0, f64::max);
                best = best.max(v / vol.powf(spec.tau));
            }
            best
        }
    };
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(1, n).unwrap()
    }

    fn half_indicator(n: usize) -> Vec<f64> {
        (0..n).map(|i| if i < n / 2 { 1.0 } else { 0.0 }).collect()
    }

    #[test]
    fn single_term_values() {
        let grid = g1(64);
        let seq = vec![half_indicator(64), vec![0.0; 64], vec![0.0; 64]];
        let v = lattice_norm(&grid, &seq, &LatticeSpec::lq_lp(2.0, 1.0).unwrap()).unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-12);
        for p in [0.5, 1.0, 3.0, f64::INFINITY] {
            for q in [0.7, 2.0, f64::INFINITY] {
                let a = lattice_norm(&grid, &seq, &LatticeSpec::lq_lp(p, q).unwrap()).unwrap();
                let b = lattice_norm(&grid, &seq, &LatticeSpec::lp_lq(p, q).unwrap()).unwrap();
                assert!((a - b).abs() < 1e-12 * a.max(1.0), "p={p} q={q}");
            }
        }
    }

    #[test]
    fn zero_sequence() {
        let grid = g1(32);
        let seq = vec![vec![0.0; 32]; 4];
        for kind in LatticeKind::ALL {
            let spec = LatticeSpec::new(kind, 2.0, 2.0, 0.0, 1.0).unwrap();
            assert_eq!(lattice_norm(&grid, &seq, &spec).unwrap(), 0.0);
        }
    }

    #[test]
    fn f_inf_q_of_full_levels() {
        // g_j ≡ 1 for j < J: the top cube sees all J terms.
        let grid = g1(16);
        let seq = vec![vec![1.0; 16]; 3];
        let v = lattice_norm(&grid, &seq, &LatticeSpec::f_inf_q(2.0).unwrap()).unwrap();
        assert!((v - 3f64.sqrt()).abs() < 1e-12);
        // A spike at level 2 inside a level-2 cube of edge 1/4.
        let mut spike = vec![vec![0.0; 16]; 3];
        spike[2][0] = 1.0;
        let v = lattice_norm(&grid, &spike, &LatticeSpec::f_inf_q(1.0).unwrap()).unwrap();
        assert!((v - 0.25).abs() < 1e-12);
    }

    #[test]
    fn tau_weight_on_small_cube() {
        // 1 on the first cell at level 0: the smallest cube maximizes |Q|^{-τ}‖·‖.
        let n = 16;
        let grid = g1(n);
        let mut g = vec![0.0; n];
        g[0] = 1.0;
        let seq = vec![g];
        let spec = LatticeSpec::new(LatticeKind::LqLpTau, 2.0, 2.0, 0.25, 1.0).unwrap();
        let v = lattice_norm(&grid, &seq, &spec).unwrap();
        // Only j_Q = 0 sees the term: Q = [0,1), value (1/16)^{1/2}.
        assert!((v - 0.25).abs() < 1e-12);
        let seq2: Vec<Vec<f64>> = (0..5).map(|_| seq[0].clone()).collect();
        let v2 = lattice_norm(&grid, &seq2, &spec).unwrap();
        // Level l sees the 5 - l terms j = l..4, each of L^2(Q) norm 1/4.
        let expect = (0..5)
            .map(|l| 0.25 * ((5 - l) as f64).sqrt() * 2f64.powf(l as f64 / 4.0))
            .fold(0.0, f64::max);
        assert!((v2 - expect).abs() < 1e-12);
        let b = LatticeSpec::new(LatticeKind::LpTauLq, 2.0, 2.0, 0.25, 1.0).unwrap();
        assert!((lattice_norm(&grid, &seq, &b).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        assert!(LatticeSpec::new(LatticeKind::LqLpTau, 2.0, 1.0, 0.5, 1.0).is_err());
        assert!(LatticeSpec::new(LatticeKind::LqLpTau, 2.0, 1.0, 0.49, 1.0).is_ok());
        assert!(LatticeSpec::new(LatticeKind::LqLp, 0.0, 1.0, 0.0, 1.0).is_err());
        assert!(LatticeSpec::new(LatticeKind::LqLp, 1.0, 1.0, 0.1, 1.0).is_err());
        assert!(LatticeSpec::new(LatticeKind::LqLp, 1.0, 1.0, 0.0, 0.0).is_err());
        let grid = g1(16);
        let spec = LatticeSpec::lq_lp(1.0, 1.0).unwrap();
        assert!(lattice_norm(&grid, &[vec![0.0; 8]], &spec).is_err());
    }

    #[test]
    fn monotone_in_pointwise_order() {
        let grid = g1(32);
        let a: Vec<Vec<f64>> = (0..4).map(|j| (0..32).map(|i| ((i * j) % 5) as f64).collect()).collect();
        let b: Vec<Vec<f64>> = a.iter().map(|g| g.iter().map(|v| v + 0.5).collect()).collect();
        for kind in LatticeKind::ALL {
            let spec = LatticeSpec::new(kind, 1.5, 0.8, 0.0, 1.0).unwrap();
            assert!(lattice_norm(&grid, &a, &spec).unwrap() <= lattice_norm(&grid, &b, &spec).unwrap());
        }
    }
}
