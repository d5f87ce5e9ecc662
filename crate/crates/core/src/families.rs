//! Named test functions: lacunary series, single modes, a band-limited
//! smoothed step and random band-limited data with dyadic coefficient decay.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{from_spectrum, PeriodicGrid, SampledFunction, Spectrum};

/// A reproducible function description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FunctionSpec {
    /// `A Σ_{j=j0}^{j1} 2^{-js} cos(2π 2^j x)`; in 2D the argument is `x_0 + x_1`.
    Lacunary {
        s: f64,
        #[serde(default)]
        first: Option<usize>,
        #[serde(default)]
        last: Option<usize>,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `A sin(2π k·x + phase)`.
    Mode {
        k: [i64; 2],
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Square wave with Gaussian frequency taper `e^{-(k/cutoff)^2}`.
    Smoothstep {
        #[serde(default)]
        cutoff: Option<f64>,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Random phases, dyadic block `j` scaled by `2^{-j(s+1/2)}`.
    RandomDecay {
        s: f64,
        seed: u64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    Constant { value: f64 },
    /// Inline samples, row-major for 2D.
    Samples { values: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

impl FunctionSpec {
    pub fn lacunary(s: f64) -> Self {
        FunctionSpec::Lacunary { s, first: None, last: None, amplitude: 1.0 }
    }

    pub fn mode(k: i64) -> Self {
        FunctionSpec::Mode { k: [k, 0], amplitude: 1.0, phase: 0.0 }
    }

    pub fn name(&self) -> String {
        match self {
            FunctionSpec::Lacunary { s, .. } => format!("lacunary(s={s})"),
            FunctionSpec::Mode { k, .. } => format!("mode(k={},{})", k[0], k[1]),
            FunctionSpec::Smoothstep { .. } => "smoothstep".into(),
            FunctionSpec::RandomDecay { s, seed, .. } => format!("random-decay(s={s},seed={seed})"),
            FunctionSpec::Constant { value } => format!("constant({value})"),
            FunctionSpec::Samples { .. } => "samples".into(),
        }
    }

    pub fn build(&self, grid: PeriodicGrid) -> Result<SampledFunction> {
        let top = grid.log2_size();
        let diag = |x: [f64; 2]| if grid.dim() == 1 { x[0] } else { x[0] + x[1] };
        match self {
            FunctionSpec::Lacunary { s, first, last, amplitude } => {
                let j0 = first.unwrap_or(0);
                // Highest term at a quarter of the Nyquist band.
                let j1 = last.unwrap_or(top.saturating_sub(2));
                if j1 + 1 >= top || j0 > j1 {
                    return Err(Error::param(format!("lacunary levels {j0}..={j1} unresolved on this grid")));
                }
                SampledFunction::from_fn(grid, |x| {
                    let u = diag(x);
                    amplitude
                        * (j0..=j1)
                            .map(|j| 2f64.powf(-(j as f64) * s) * (2.0 * PI * (1u64 << j) as f64 * u).cos())
                            .sum::<f64>()
                })
            }
            FunctionSpec::Mode { k, amplitude, phase } => {
                let half = (grid.size() / 2) as i64;
                if k[0].abs() >= half || k[1].abs() >= half || (grid.dim() == 1 && k[1] != 0) {
                    return Err(Error::param(format!("mode {k:?} unresolved on this grid")));
                }
                SampledFunction::from_fn(grid, |x| {
                    amplitude * (2.0 * PI * (k[0] as f64 * x[0] + k[1] as f64 * x[1]) + phase).sin()
                })
            }
            FunctionSpec::Smoothstep { cutoff, amplitude } => {
                let kc = cutoff.unwrap_or(grid.size() as f64 / 16.0);
                if !(kc > 0.0) {
                    return Err(Error::param("smoothstep cutoff must be positive"));
                }
                let kmax = grid.size() as i64 / 2 - 1;
                SampledFunction::from_fn(grid, |x| {
                    let u = diag(x);
                    amplitude
                        * (1..=kmax)
                            .step_by(2)
                            .map(|k| {
                                let kf = k as f64;
                                4.0 / (PI * kf) * (-(kf / kc).powi(2)).exp() * (2.0 * PI * kf * u).sin()
                            })
                            .sum::<f64>()
                })
            }
            FunctionSpec::RandomDecay { s, seed, amplitude } => random_decay(grid, *s, *seed, *amplitude),
            FunctionSpec::Constant { value } => {
                if !value.is_finite() {
                    return Err(Error::param("constant must be finite"));
                }
                Ok(SampledFunction::constant(grid, *value))
            }
            FunctionSpec::Samples { values } => {
                if values.len() != grid.len() {
                    return Err(Error::GridMismatch(format!(
                        "{} samples given for a grid of {} points",
                        values.len(),
                        grid.len()
                    )));
                }
                SampledFunction::new(grid, values.clone())
            }
        }
    }
}

fn random_decay(grid: PeriodicGrid, s: f64, seed: u64, amplitude: f64) -> Result<SampledFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.size();
    let half = n as i64 / 2;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    let bin = |k: i64| k.rem_euclid(n as i64) as usize;
    let kmax = half / 2;
    // Half-plane of frequencies; the conjugate partner is filled in alongside.
    let freqs: Vec<[i64; 2]> = if grid.dim() == 1 {
        (1..kmax).map(|k| [k, 0]).collect()
    } else {
        let mut v = Vec::new();
        for a in -kmax + 1..kmax {
            for b in -kmax + 1..kmax {
                if a > 0 || (a == 0 && b > 0) {
                    v.push([a, b]);
                }
            }
        }
        v
    };
    for k in freqs {
        let r = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
        let j = r.log2().floor().max(0.0);
        let mag = amplitude * 2f64.powf(-j * (s + 0.5)) * rng.gen_range(0.5..1.0);
        let c = Complex64::from_polar(mag / 2.0, rng.gen_range(0.0..2.0 * PI));
        let (p, m) = if grid.dim() == 1 {
            (bin(k[0]), bin(-k[0]))
        } else {
            (grid.flat([bin(k[0]), bin(k[1])]), grid.flat([bin(-k[0]), bin(-k[1])]))
        };
        coeffs[p] = c;
        coeffs[m] = c.conj();
    }
    Ok(from_spectrum(&Spectrum::from_coeffs(grid, coeffs)?))
}

/// The standard test family at smoothness `s`.
pub fn standard_family(s: f64) -> Vec<FunctionSpec> {
    vec![
        FunctionSpec::lacunary(s),
        FunctionSpec::mode(1),
        FunctionSpec::mode(3),
        FunctionSpec::Smoothstep { cutoff: None, amplitude: 1.0 },
        FunctionSpec::RandomDecay { s, seed: 20_240_601, amplitude: 1.0 },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::to_spectrum;

    #[test]
    fn lacunary_values() {
        let grid = PeriodicGrid::new(1, 256).unwrap();
        let f = FunctionSpec::lacunary(0.5).build(grid).unwrap();
        let want: f64 = (0..=6).map(|j| 2f64.powf(-0.5 * j as f64)).sum();
        assert!((f.values()[0] - want).abs() < 1e-12);
        assert!(FunctionSpec::Lacunary { s: 0.5, first: None, last: Some(7), amplitude: 1.0 }
            .build(grid)
            .is_err());
    }

    #[test]
    fn random_decay_is_real_and_reproducible() {
        for dim in [1usize, 2] {
            let grid = PeriodicGrid::new(dim, if dim == 1 { 256 } else { 32 }).unwrap();
            let spec = FunctionSpec::RandomDecay { s: 0.5, seed: 4, amplitude: 1.0 };
            let a = spec.build(grid).unwrap();
            let b = spec.build(grid).unwrap();
            assert_eq!(a.values(), b.values());
            let sp = to_spectrum(&a);
            assert!(sp.coeff([0, 0]).norm() < 1e-14);
            assert!(a.sup_norm() > 0.0);
        }
    }

    #[test]
    fn smoothstep_is_odd_square_wave_approximation() {
        let grid = PeriodicGrid::new(1, 1024).unwrap();
        let f = FunctionSpec::Smoothstep { cutoff: Some(64.0), amplitude: 1.0 }.build(grid).unwrap();
        assert!((f.values()[256] - 1.0).abs() < 1e-3);
        assert!((f.values()[768] + 1.0).abs() < 1e-3);
        assert!(f.values()[0].abs() < 1e-12);
    }

    #[test]
    fn serde_roundtrip() {
        let spec = FunctionSpec::RandomDecay { s: 0.3, seed: 9, amplitude: 2.0 };
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("random-decay"));
        let back: FunctionSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }
}
