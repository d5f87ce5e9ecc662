//! Run configuration read from a TOML file.
//!
//! Every section is optional and falls back to the desk-scale defaults.
//! [`RunConfig::validate`] checks all parameters before any computation runs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::badset::{default_c_grid, default_deltas, default_r_grid, SWEEP_POINTS};
use crate::distance::{default_spaces, ProxySpace};
use crate::error::{Error, Result};
use crate::families::FunctionSpec;
use crate::grid::{PeriodicGrid, SampledFunction};
use crate::heat::{FracHeatParams, TimeGrid};
use crate::lattice::{LatticeKind, LatticeSpec};
use crate::wavelet::WaveletSystem;

/// A function given analytically or as a CSV file of samples (one value per
/// record, row-major for 2D).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSource {
    Csv { csv: PathBuf },
    Analytic(FunctionSpec),
}

impl Default for FunctionSource {
    fn default() -> Self {
        FunctionSource::Analytic(FunctionSpec::lacunary(0.5))
    }
}

impl FunctionSource {
    pub fn build(&self, grid: PeriodicGrid, base: &Path) -> Result<SampledFunction> {
        match self {
            FunctionSource::Analytic(spec) => spec.build(grid),
            FunctionSource::Csv { csv } => {
                let path = if csv.is_absolute() { csv.clone() } else { base.join(csv) };
                let mut rd = ::csv::ReaderBuilder::new()
                    .has_headers(false)
                    .flexible(true)
                    .from_path(&path)
                    .map_err(|e| Error::param(format!("cannot read {}: {e}", path.display())))?;
                let mut values = Vec::new();
                for rec in rd.records() {
                    let rec = rec.map_err(|e| Error::param(format!("{}: {e}", path.display())))?;
                    for field in rec.iter().filter(|f| !f.trim().is_empty()) {
                        values.push(field.trim().parse::<f64>().map_err(|e| {
                            Error::param(format!("{}: bad sample {field:?}: {e}", path.display()))
                        })?);
                    }
                }
                FunctionSpec::Samples { values }.build(grid)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub dim: usize,
    pub size: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { dim: 1, size: 4096 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeatConfig {
    pub alpha: f64,
    pub r: u32,
    pub s: f64,
}

impl Default for HeatConfig {
    fn default() -> Self {
        HeatConfig { alpha: 2.0, r: 2, s: 0.5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub octaves: usize,
    pub per_octave: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig { octaves: 8, per_octave: 16 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveletConfig {
    /// Daubechies order; chosen from `s` when absent.
    pub filter_order: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelConfig {
    pub alpha: f64,
    pub n: usize,
    pub radii: Vec<f64>,
    pub decay_orders: Vec<usize>,
    pub decay_min: f64,
    pub decay_max: f64,
    pub decay_points: usize,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            alpha: 1.0,
            n: 1,
            radii: (0..20).map(|i| 10.0 * i as f64 / 19.0).collect(),
            decay_orders: vec![0, 1, 2],
            decay_min: 10.0,
            decay_max: 1e3,
            decay_points: 25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SemigroupConfig {
    pub times: Vec<f64>,
}

impl Default for SemigroupConfig {
    fn default() -> Self {
        SemigroupConfig { times: vec![0.0, 1e-3, 1e-2, 1e-1] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BallAvgConfig {
    pub ell: Vec<u32>,
    pub n: Vec<usize>,
    pub xi_min: f64,
    pub xi_max: f64,
    pub xi_points: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
}

impl Default for BallAvgConfig {
    fn default() -> Self {
        BallAvgConfig {
            ell: vec![1, 2, 3],
            n: vec![1, 2],
            xi_min: 1e-3,
            xi_max: 50.0,
            xi_points: 400,
            t_min: 2f64.powi(-8),
            t_max: 0.25,
            t_points: 13,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BadSetConfig {
    /// Thresholds as fractions of the envelope.
    pub eps_fractions: Vec<f64>,
    /// Difference order for the `S` set; `⌊s⌋ + 1` when absent.
    pub r1: Option<u32>,
}

impl Default for BadSetConfig {
    fn default() -> Self {
        BadSetConfig { eps_fractions: vec![0.05, 0.2, 0.5], r1: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub points: usize,
    pub lattices: Vec<LatticeSpec>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            points: SWEEP_POINTS,
            lattices: vec![
                LatticeSpec { kind: LatticeKind::LqLp, p: 2.0, q: 1.0, tau: 0.0, theta: 1.0 },
                LatticeSpec { kind: LatticeKind::LpLq, p: 2.0, q: 1.0, tau: 0.0, theta: 1.0 },
                LatticeSpec { kind: LatticeKind::FInfQ, p: f64::INFINITY, q: 1.0, tau: 0.0, theta: 1.0 },
            ],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub eps_fraction: f64,
    pub eps1_fraction: f64,
    pub deltas: Vec<f64>,
    pub r_grid: Vec<f64>,
    pub c_grid: Vec<f64>,
    pub r1: u32,
    pub ell: u32,
    pub inject_violation: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            eps_fraction: 0.5,
            eps1_fraction: 0.25,
            deltas: default_deltas(),
            r_grid: default_r_grid(),
            c_grid: default_c_grid(),
            r1: 6,
            ell: 1,
            inject_violation: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DistanceConfig {
    pub spaces: Vec<ProxySpace>,
    pub tail_octaves: usize,
    /// Highest truncation level of the oracle candidates.
    pub max_level: Option<usize>,
    pub thresholds: Vec<f64>,
    /// A known smooth part `g`; candidates are then `g + P_L(f - g)`.
    pub smooth_part: Option<FunctionSource>,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        DistanceConfig {
            spaces: default_spaces(),
            tail_octaves: 8,
            max_level: None,
            thresholds: vec![1e-3, 1e-2],
            smooth_part: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelftestConfig {
    pub only: Vec<u8>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub function: FunctionSource,
    pub grid: GridConfig,
    pub heat: HeatConfig,
    pub time: TimeConfig,
    pub wavelet: WaveletConfig,
    pub lattice: Option<LatticeSpec>,
    pub kernel: KernelConfig,
    pub semigroup: SemigroupConfig,
    pub ballavg: BallAvgConfig,
    pub badset: BadSetConfig,
    pub sweep: SweepConfig,
    pub verify: VerifyConfig,
    pub distance: DistanceConfig,
    pub selftest: SelftestConfig,
}

fn check(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::param(msg))
    }
}

fn all_in(v: &[f64], lo: f64, hi: f64, name: &str) -> Result<()> {
    check(!v.is_empty(), format!("{name} must not be empty"))?;
    check(
        v.iter().all(|&x| x > lo && x <= hi && x.is_finite()),
        format!("{name} must lie in ({lo}, {hi}]"),
    )
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::param(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::param(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn grid(&self) -> Result<PeriodicGrid> {
        PeriodicGrid::new(self.grid.dim, self.grid.size)
    }

    pub fn params(&self) -> Result<FracHeatParams> {
        FracHeatParams::new(self.heat.alpha, self.heat.r, self.heat.s)
    }

    pub fn times(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.time.octaves, self.time.per_octave)
    }

    pub fn wavelets(&self) -> Result<WaveletSystem> {
        let grid = self.grid()?;
        let sys = match self.wavelet.filter_order {
            Some(order) => WaveletSystem::new(order, grid.log2_size())?,
            None => WaveletSystem::for_smoothness(self.heat.s, &grid)?,
        };
        sys.coarsest(&grid)?;
        Ok(sys)
    }

    /// Check every parameter block; no computation happens here beyond
    /// building the wavelet filter.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        let params = self.params()?;
        let times = self.times()?;
        self.wavelets()?;
        if let Some(l) = &self.lattice {
            l.validate()?;
        }
        if let FunctionSource::Analytic(spec) = &self.function {
            spec.build(grid)?;
        }

        let k = &self.kernel;
        check(k.alpha > 0.0 && k.alpha.is_finite(), "kernel.alpha must be positive")?;
        check(k.n == 1 || k.n == 2, "kernel.n must be 1 or 2")?;
        check(k.radii.iter().all(|&x| x >= 0.0 && x.is_finite()), "kernel.radii must be nonnegative")?;
        check(k.decay_orders.iter().all(|&o| o <= 2), "kernel.decay_orders must lie in 0..=2")?;
        check(
            k.decay_min > 0.0 && k.decay_max >= 100.0 * k.decay_min && k.decay_points >= 2,
            "kernel decay radii must span two decades with at least two points",
        )?;

        check(
            self.semigroup.times.iter().all(|&t| t >= 0.0 && t.is_finite()),
            "semigroup.times must be nonnegative",
        )?;

        let b = &self.ballavg;
        check(!b.ell.is_empty() && b.ell.iter().all(|&l| (1..=4).contains(&l)), "ballavg.ell must lie in 1..=4")?;
        check(!b.n.is_empty() && b.n.iter().all(|&n| n == 1 || n == 2), "ballavg.n must be 1 or 2")?;
        check(b.xi_min > 0.0 && b.xi_max > b.xi_min && b.xi_points >= 2, "ballavg xi range is empty")?;
        check(
            b.t_min > 0.0 && b.t_max > b.t_min && b.t_max <= 0.5 && b.t_points >= 2,
            "ballavg t range must lie in (0, 1/2]",
        )?;

        all_in(&self.badset.eps_fractions, 0.0, f64::MAX, "badset.eps_fractions")?;
        if let Some(r1) = self.badset.r1 {
            check(r1 as f64 > params.s, "badset.r1 must exceed s")?;
        }

        check(self.sweep.points >= 2, "sweep.points must be at least 2")?;
        for l in &self.sweep.lattices {
            l.validate()?;
        }

        let v = &self.verify;
        check(
            v.eps1_fraction > 0.0 && v.eps1_fraction < v.eps_fraction,
            "verify needs 0 < eps1_fraction < eps_fraction",
        )?;
        all_in(&v.deltas, 0.0, std::f64::consts::LN_2, "verify.deltas")?;
        all_in(&v.c_grid, 0.0, 1.0, "verify.c_grid")?;
        all_in(&v.r_grid, 0.0, 1e3, "verify.r_grid")?;
        check(v.r_grid.iter().all(|&r| r >= 1.0), "verify.r_grid values must be at least 1")?;

        let d = &self.distance;
        check(!d.spaces.is_empty(), "distance.spaces must not be empty")?;
        for sp in &d.spaces {
            sp.validate()?;
        }
        check(d.tail_octaves >= 1, "distance.tail_octaves must be at least 1")?;
        if let Some(l) = d.max_level {
            check(l <= grid.log2_size(), "distance.max_level exceeds the grid depth")?;
        }
        check(d.thresholds.iter().all(|&t| t >= 0.0 && t.is_finite()), "distance.thresholds must be nonnegative")?;
        if let Some(FunctionSource::Analytic(spec)) = &d.smooth_part {
            spec.build(grid)?;
        }
        check(
            self.selftest.only.iter().all(|&i| (1..=12).contains(&i)),
            "selftest.only ids must lie in 1..=12",
        )?;
        let _ = times;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
        let empty = RunConfig::from_toml_str("").unwrap();
        assert_eq!(empty, RunConfig::default());
    }

    #[test]
    fn parses_sections() {
        let cfg = RunConfig::from_toml_str(
            r#"
seed = 7
[function]
family = "mode"
k = [3, 0]
[grid]
dim = 1
size = 512
[heat]
alpha = 1.0
r = 1
s = 0.3
[[sweep.lattices]]
kind = "lq_Lp_tau"
p = 2.0
q = 1.0
tau = 0.25
[[distance.spaces]]
space = "besov"
p = 2.0
q = 2.0
"#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.grid.size, 512);
        assert!(matches!(cfg.function, FunctionSource::Analytic(FunctionSpec::Mode { k: [3, 0], .. })));
        assert_eq!(cfg.sweep.lattices[0].kind, LatticeKind::LqLpTau);
        assert_eq!(cfg.distance.spaces, vec![ProxySpace::Besov { p: 2.0, q: 2.0 }]);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            "[grid]\ndim = 1\nsize = 100",
            "[heat]\nalpha = 1.0\nr = 1\ns = 1.5",
            "[verify]\neps_fraction = 0.2\neps1_fraction = 0.3",
            "[grid]\ndim = 3\nsize = 64",
            "[[distance.spaces]]\nspace = \"besov-tau\"\np = 2.0\nq = 1.0\ntau = 0.6",
        ] {
            let res = RunConfig::from_toml_str(text).and_then(|c| c.validate());
            assert!(res.is_err(), "{text}");
        }
        assert!(RunConfig::from_toml_str("[grid]\nsize = \"big\"").is_err());
        assert!(RunConfig::from_toml_str("[nonsense]\nx = 1").is_err());
    }

    #[test]
    fn csv_source() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let vals: Vec<String> = (0..16).map(|i| format!("{}", i as f64 * 0.5)).collect();
        std::fs::write(&path, vals.join("\n")).unwrap();
        let src = FunctionSource::Csv { csv: "f.csv".into() };
        let f = src.build(PeriodicGrid::new(1, 16).unwrap(), dir.path()).unwrap();
        assert_eq!(f.values()[3], 1.5);
        assert!(src.build(PeriodicGrid::new(1, 32).unwrap(), dir.path()).is_err());
    }
}
