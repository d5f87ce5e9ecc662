//! Fractional heat semigroup `T_{α,t}`, Laplacian powers and the space-time
//! derivative field that every bad set is cut from.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{from_spectrum, to_spectrum, PeriodicGrid, SampledFunction};

/// Parameters `α`, `r`, `s` with `αr > s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FracHeatParams {
    pub alpha: f64,
    pub r: u32,
    pub s: f64,
}

impl FracHeatParams {
    pub fn new(alpha: f64, r: u32, s: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::param(format!("alpha must be positive, got {alpha}")));
        }
        if r == 0 {
            return Err(Error::param("r must be at least 1"));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::param(format!("s must be positive, got {s}")));
        }
        if alpha * r as f64 <= s {
            return Err(Error::param(format!("need alpha*r > s, got {alpha}*{r} <= {s}")));
        }
        Ok(Self { alpha, r, s })
    }

    /// Smallest `r` with `αr > s`.
    pub fn minimal(alpha: f64, s: f64) -> Result<Self> {
        let r = ((s / alpha).floor() as u32 + 1).max(1);
        Self::new(alpha, r, s)
    }

    /// The stricter `αr > s + 3` needed where the set inclusions are checked.
    pub fn require_inclusion_range(&self) -> Result<()> {
        if self.alpha * self.r as f64 <= self.s + 3.0 {
            return Err(Error::param(format!(
                "set inclusions need alpha*r > s+3, got {}*{} <= {}",
                self.alpha,
                self.r,
                self.s + 3.0
            )));
        }
        Ok(())
    }

    /// Exponent `αr - s` of the time normalization.
    pub fn weight_exponent(&self) -> f64 {
        self.alpha * self.r as f64 - self.s
    }
}

/// Geometric time samples `t_{j,m} = 2^{-j} 2^{-(m-1/2)/M}`, `j < J`, `m = 1..M`.
///
/// Each sample is the log-midpoint of a cell of dt/t-mass `log 2 / M`, so the
/// weights integrate constants exactly over every octave.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TimeGrid {
    octaves: usize,
    per_octave: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self { octaves: 8, per_octave: 16 }
    }
}

impl TimeGrid {
    pub fn new(octaves: usize, per_octave: usize) -> Result<Self> {
        if octaves == 0 || octaves > 40 {
            return Err(Error::param(format!("octave count must be in 1..=40, got {octaves}")));
        }
        if per_octave < 4 {
            return Err(Error::param(format!("need at least 4 samples per octave, got {per_octave}")));
        }
        Ok(Self { octaves, per_octave })
    }

    pub fn octaves(&self) -> usize {
        self.octaves
    }

    pub fn per_octave(&self) -> usize {
        self.per_octave
    }

    pub fn len(&self) -> usize {
        self.octaves * self.per_octave
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of sample `m` (zero-based) in octave `j`.
    pub fn index(&self, j: usize, m: usize) -> usize {
        j * self.per_octave + m
    }

    pub fn octave_of(&self, idx: usize) -> usize {
        idx / self.per_octave
    }

    pub fn time(&self, idx: usize) -> f64 {
        let j = (idx / self.per_octave) as f64;
        let m = (idx % self.per_octave) as f64;
        (-(j + (m + 0.5) / self.per_octave as f64) * std::f64::consts::LN_2).exp()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    /// dt/t weight of one sample.
    pub fn weight(&self) -> f64 {
        std::f64::consts::LN_2 / self.per_octave as f64
    }

    /// The same sampling with `extra` additional finer octaves.
    pub fn extended(&self, extra: usize) -> Result<Self> {
        Self::new(self.octaves + extra, self.per_octave)
    }
}

fn radius(k: [i64; 2]) -> f64 {
    ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt()
}

/// `T_{α,t} f`: multiply the spectrum by `e^{-t(2π|k|)^α}`.
pub fn semigroup_apply(f: &SampledFunction, alpha: f64, t: f64) -> Result<SampledFunction> {
    if !(alpha > 0.0) {
        return Err(Error::param("alpha must be positive"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::param(format!("semigroup time must be nonnegative, got {t}")));
    }
    Ok(to_spectrum(f).radial_real(|r| (-t * (2.0 * PI * r).powf(alpha)).exp()))
}

/// `(-Δ)^{β/2} f`: multiply the spectrum by `(2π|k|)^β`.
pub fn frac_laplacian_apply(f: &SampledFunction, beta: f64) -> Result<SampledFunction> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::param(format!("beta must be nonnegative, got {beta}")));
    }
    Ok(to_spectrum(f).radial_real(|r| (2.0 * PI * r).powf(beta)))
}

/// `∂_t^i ∂_x^β T_{α,t} f` for a multi-index `β` (second entry ignored for n = 1).
pub fn mixed_derivative(
    f: &SampledFunction,
    alpha: f64,
    t: f64,
    i: u32,
    beta: [u32; 2],
) -> Result<SampledFunction> {
    if !(alpha > 0.0) || !(t >= 0.0) {
        return Err(Error::param("need alpha > 0 and t >= 0"));
    }
    let spec = to_spectrum(f);
    let out = spec.multiply(|k| {
        let lam = (2.0 * PI * radius(k)).powf(alpha);
        let time = (-lam).powi(i as i32) * (-t * lam).exp();
        let mut m = num_complex::Complex64::new(time, 0.0);
        for d in 0..2 {
            m *= num_complex::Complex64::new(0.0, 2.0 * PI * k[d] as f64).powu(beta[d]);
        }
        m
    });
    Ok(from_spectrum(&out))
}

/// Samples of `W(x,t) = ∂_{n+1}^r u_α(x, t^α)` on grid × time samples.
///
/// Values are stored unnormalized; `normalized` applies `t^{αr-s}`.
#[derive(Clone, Debug)]
pub struct HeatDerivField {
    params: FracHeatParams,
    times: TimeGrid,
    grid: PeriodicGrid,
    values: Vec<f64>,
}

impl HeatDerivField {
    pub fn params(&self) -> &FracHeatParams {
        &self.params
    }

    pub fn times(&self) -> &TimeGrid {
        &self.times
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    /// Unnormalized values at time sample `ti`.
    pub fn slice(&self, ti: usize) -> &[f64] {
        let n = self.grid.len();
        &self.values[ti * n..(ti + 1) * n]
    }

    /// `t^{αr-s}` for time sample `ti`.
    pub fn normalization(&self, ti: usize) -> f64 {
        self.times.time(ti).powf(self.params.weight_exponent())
    }

    /// `t^{αr-s}|W|` at time sample `ti`, space index `x`.
    pub fn normalized(&self, ti: usize, x: usize) -> f64 {
        self.normalization(ti) * self.slice(ti)[x].abs()
    }

    /// Normalized field magnitudes at time sample `ti`.
    pub fn normalized_slice(&self, ti: usize) -> Vec<f64> {
        let w = self.normalization(ti);
        self.slice(ti).iter().map(|v| w * v.abs()).collect()
    }

    /// The envelope `λ̂ = max t^{αr-s}|W|` over all samples.
    pub fn envelope(&self) -> f64 {
        (0..self.times.len())
            .map(|ti| self.normalization(ti) * self.slice(ti).iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .fold(0.0, f64::max)
    }
}

/// Build the field with one multiplier pass per time sample:
/// `m(k) = (-1)^r (2π|k|)^{αr} e^{-t^α (2π|k|)^α}`.
pub fn heat_deriv_field(
    f: &SampledFunction,
    params: FracHeatParams,
    times: TimeGrid,
) -> HeatDerivField {
    let spec = to_spectrum(f);
    let ar = params.alpha * params.r as f64;
    let sign = if params.r % 2 == 0 { 1.0 } else { -1.0 };
    let slices: Vec<Vec<f64>> = (0..times.len())
        .into_par_iter()
        .map(|ti| {
            let ta = times.time(ti).powf(params.alpha);
            spec.radial_real(|r| {
                let w = 2.0 * PI * r;
                if r == 0.0 {
                    0.0
                } else {
                    sign * w.powf(ar) * (-ta * w.powf(params.alpha)).exp()
                }
            })
            .into_values()
        })
        .collect();
    HeatDerivField { params, times, grid: *f.grid(), values: slices.concat() }
}
