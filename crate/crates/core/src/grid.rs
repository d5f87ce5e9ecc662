//! Periodic sampled functions on the unit torus and the exact spectral engine.
//!
//! Every operator in this crate (semigroup, fractional Laplacian, ball
//! averages, symmetric differences) is a Fourier multiplier, so all of them go
//! through [`Spectrum`]. Frequencies are integers `k` in `[-N/2, N/2)` per
//! axis and multipliers receive `k` directly, with `|2πξ| = 2π|k|`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// Uniform grid with `size` points per axis on `[0,1)^dim`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodicGrid {
    dim: usize,
    size: usize,
}

impl PeriodicGrid {
    pub fn new(dim: usize, size: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::param(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        if size < 8 || !size.is_power_of_two() {
            return Err(Error::param(format!(
                "grid size must be a power of two >= 8, got {size}"
            )));
        }
        Ok(Self { dim, size })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.size as f64
    }

    /// Total number of points, `N^dim`.
    pub fn len(&self) -> usize {
        self.size.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lebesgue measure of one sample cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn log2_size(&self) -> usize {
        self.size.trailing_zeros() as usize
    }

    /// Multi-index of a flat position (row-major, first axis slowest).
    pub fn index(&self, flat: usize) -> [usize; 2] {
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat / self.size, flat % self.size]
        }
    }

    pub fn flat(&self, idx: [usize; 2]) -> usize {
        if self.dim == 1 {
            idx[0]
        } else {
            idx[0] * self.size + idx[1]
        }
    }

    /// Coordinates of a flat position.
    pub fn point(&self, flat: usize) -> [f64; 2] {
        let [a, b] = self.index(flat);
        [a as f64 * self.spacing(), b as f64 * self.spacing()]
    }

    /// Integer frequency carried by an FFT bin on one axis.
    pub fn frequency_1d(&self, bin: usize) -> i64 {
        let n = self.size as i64;
        let b = bin as i64;
        if b < n / 2 {
            b
        } else {
            b - n
        }
    }

    /// Integer frequency vector of a flat FFT position; the unused second
    /// component is zero in one dimension.
    pub fn frequency(&self, flat: usize) -> [i64; 2] {
        let [a, b] = self.index(flat);
        if self.dim == 1 {
            [self.frequency_1d(a), 0]
        } else {
            [self.frequency_1d(a), self.frequency_1d(b)]
        }
    }

    pub fn refined(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !factor.is_power_of_two() {
            return Err(Error::param("refinement factor must be a power of two"));
        }
        Self::new(self.dim, self.size * factor)
    }

    fn check_same(&self, other: &PeriodicGrid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Minimal periodic distance between two coordinates on the unit circle.
pub fn torus_delta(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Real function sampled on a [`PeriodicGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    grid: PeriodicGrid,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!("sample {i} is not finite")));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: PeriodicGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn from_fn(grid: PeriodicGrid, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: PeriodicGrid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Grid maximum of `|f|`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sup norm of the trigonometric interpolant evaluated on a grid
    /// `factor` times finer. `factor = 1` is the plain grid maximum.
    pub fn refined_sup_norm(&self, factor: usize) -> Result<f64> {
        if factor == 1 {
            return Ok(self.sup_norm());
        }
        Ok(self.refine(factor)?.sup_norm())
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `L^2(torus)` norm of the interpolant (exact by Parseval).
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * lambda).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    /// Evaluate the trigonometric interpolant on a finer grid.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        let fine = self.grid.refined(factor)?;
        let spec = to_spectrum(self);
        let n = self.grid.size;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); fine.len()];
        let nf = fine.size as i64;
        let wrap = |k: i64| k.rem_euclid(nf) as usize;
        for (i, c) in spec.coeffs.iter().enumerate() {
            let [k0, k1] = self.grid.frequency(i);
            // The Nyquist bin is split evenly between +N/2 and -N/2 so the
            // refined interpolant stays real.
            let nyq0 = k0 == -(n as i64) / 2;
            let nyq1 = self.grid.dim == 2 && k1 == -(n as i64) / 2;
            let alts0: &[i64] = if nyq0 { &[k0, -k0] } else { std::slice::from_ref(&k0) };
            let alts1: &[i64] = if nyq1 { &[k1, -k1] } else { std::slice::from_ref(&k1) };
            let share = 1.0 / (alts0.len() * alts1.len()) as f64;
            for &a in alts0 {
                if fine.dim == 1 {
                    coeffs[wrap(a)] += c * share;
                } else {
                    for &b in alts1 {
                        coeffs[fine.flat([wrap(a), wrap(b)])] += c * share;
                    }
                }
            }
        }
        Ok(from_spectrum(&Spectrum { grid: fine, coeffs }))
    }
}

/// Fourier coefficients of a sampled function, stored in FFT bin order.
#[derive(Clone, Debug)]
pub struct Spectrum {
    grid: PeriodicGrid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    /// Coefficients in FFT bin order; use [`PeriodicGrid::frequency`] to map
    /// a position to its integer frequency.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn from_coeffs(grid: PeriodicGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::GridMismatch("coefficient count".into()));
        }
        Ok(Self { grid, coeffs })
    }

    /// Coefficient at integer frequency `k`; indices are taken modulo `N`.
    pub fn coeff(&self, k: [i64; 2]) -> Complex64 {
        let n = self.grid.size as i64;
        let a = k[0].rem_euclid(n) as usize;
        let b = k[1].rem_euclid(n) as usize;
        self.coeffs[self.grid.flat([a, b])]
    }

    /// Multiply by `m(k)` without any symmetry checks.
    pub fn multiply(&self, m: impl Fn([i64; 2]) -> Complex64 + Sync) -> Spectrum {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * m(self.grid.frequency(i)))
            .collect();
        Spectrum { grid: self.grid, coeffs }
    }

    /// Apply a real radial multiplier `m(|k|)` and return the real function.
    /// This is the hot path for semigroups, Laplacian powers and ball averages.
    pub fn radial_real(&self, m: impl Fn(f64) -> f64) -> SampledFunction {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let [a, b] = self.grid.frequency(i);
                let r = ((a * a + b * b) as f64).sqrt();
                c * m(r)
            })
            .collect();
        from_spectrum(&Spectrum { grid: self.grid, coeffs })
    }

    /// Sum of `|c_k|^2`.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

fn fft_in_place(grid: &PeriodicGrid, data: &mut [Complex64], inverse: bool) {
    let n = grid.size;
    let fft = plan(n, inverse);
    if grid.dim == 1 {
        fft.process(data);
        return;
    }
    for row in data.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = data[i * n + j];
        }
        fft.process(&mut col);
        for i in 0..n {
            data[i * n + j] = col[i];
        }
    }
}

/// Forward transform: `c_k = N^{-dim} Σ_x f(x) e^{-2πi k·x}`.
pub fn to_spectrum(f: &SampledFunction) -> Spectrum {
    let mut data: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_in_place(&f.grid, &mut data, false);
    let scale = 1.0 / f.grid.len() as f64;
    for c in &mut data {
        *c *= scale;
    }
    Spectrum { grid: f.grid, coeffs: data }
}

/// Inverse transform, keeping the real part.
///
/// For a real input spectrum manipulated by a Hermitian multiplier the
/// imaginary part is rounding noise. At Nyquist bins, taking the real part is
/// the same as symmetrizing the multiplier between `+N/2` and `-N/2`.
pub fn from_spectrum(spec: &Spectrum) -> SampledFunction {
    SampledFunction::from_vec_unchecked(
        spec.grid,
        from_spectrum_complex(spec).into_iter().map(|c| c.re).collect(),
    )
}

/// Inverse transform returning complex samples.
pub fn from_spectrum_complex(spec: &Spectrum) -> Vec<Complex64> {
    let mut data = spec.coeffs.clone();
    fft_in_place(&spec.grid, &mut data, true);
    data
}

/// Multiply a spectrum by `m(k)`.
///
/// With `real_output` set, the multiplier must satisfy `m(-k) = conj(m(k))`
/// (checked as a function of the integer frequency, so Nyquist bins are
/// compared against `+N/2`) and a violation is reported.
pub fn apply_multiplier(
    spec: &Spectrum,
    m: impl Fn([i64; 2]) -> Complex64 + Sync,
    real_output: bool,
) -> Result<Spectrum> {
    if real_output {
        for i in 0..spec.grid.len() {
            let k = spec.grid.frequency(i);
            let a = m(k);
            let b = m([-k[0], -k[1]]);
            let tol = 1e-12 * (1.0 + a.norm());
            if (b - a.conj()).norm() > tol {
                return Err(Error::NonHermitian(k[..spec.grid.dim].to_vec()));
            }
        }
    }
    Ok(spec.multiply(m))
}

/// Exact fractional translate `f(· + h)` of the trigonometric interpolant.
pub fn shift_eval(f: &SampledFunction, h: [f64; 2]) -> Result<SampledFunction> {
    let dim = f.grid.dim;
    if h[..dim].iter().any(|c| !c.is_finite() || c.abs() >= 1.0) {
        return Err(Error::param("shift components must satisfy |h| < 1"));
    }
    let spec = to_spectrum(f);
    let shifted = spec.multiply(|k| {
        let phase = 2.0 * PI * (k[0] as f64 * h[0] + k[1] as f64 * h[1]);
        Complex64::from_polar(1.0, phase)
    });
    Ok(from_spectrum(&shifted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid1(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(1, n).unwrap()
    }

    fn random(grid: PeriodicGrid, seed: u64) -> SampledFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        SampledFunction::new(grid, v).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(PeriodicGrid::new(1, 4).is_err());
        assert!(PeriodicGrid::new(1, 12).is_err());
        assert!(PeriodicGrid::new(3, 16).is_err());
        let g = PeriodicGrid::new(2, 16).unwrap();
        assert_eq!(g.len(), 256);
        assert_eq!(g.frequency(g.flat([15, 8])), [-1, -8]);
    }

    #[test]
    fn rejects_non_finite_samples() {
        let g = grid1(8);
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(SampledFunction::new(g, v).is_err());
    }

    #[test]
    fn constant_spectrum() {
        let f = SampledFunction::constant(grid1(16), 3.0);
        let s = to_spectrum(&f);
        assert!((s.coeff([0, 0]).re - 3.0).abs() < 1e-15);
        for i in 1..16 {
            assert!(s.coeffs()[i].norm() < 1e-15);
        }
    }

    #[test]
    fn sine_spectrum() {
        let f = SampledFunction::from_fn(grid1(32), |x| (2.0 * PI * x[0]).sin()).unwrap();
        let s = to_spectrum(&f);
        assert!((s.coeff([1, 0]) - Complex64::new(0.0, -0.5)).norm() < 1e-15);
        assert!((s.coeff([-1, 0]) - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        for k in 2..16 {
            assert!(s.coeff([k, 0]).norm() < 1e-15);
        }
    }

    #[test]
    fn round_trip_and_parseval_2d() {
        let g = PeriodicGrid::new(2, 16).unwrap();
        let f = random(g, 3);
        let s = to_spectrum(&f);
        let back = from_spectrum(&s);
        let err = f.values().iter().zip(back.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err <= 1e-12 * f.sup_norm());
        let lhs = f.values().iter().map(|v| v * v).sum::<f64>() / g.len() as f64;
        assert!((lhs - s.energy()).abs() <= 1e-12 * lhs);
    }

    #[test]
    fn multiplier_identity_and_projection() {
        let f = random(grid1(64), 5);
        let s = to_spectrum(&f);
        let id = from_spectrum(&apply_multiplier(&s, |_| Complex64::new(1.0, 0.0), true).unwrap());
        for (a, b) in id.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-14);
        }
        let mean = from_spectrum(
            &apply_multiplier(
                &s,
                |k| if k == [0, 0] { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) },
                true,
            )
            .unwrap(),
        );
        for v in mean.values() {
            assert!((v - f.mean()).abs() < 1e-14);
        }
    }

    #[test]
    fn non_hermitian_flagged() {
        let f = random(grid1(16), 1);
        let s = to_spectrum(&f);
        let r = apply_multiplier(&s, |k| Complex64::new(0.0, k[0] as f64).exp() * (k[0] as f64 + 1.0), true);
        assert!(matches!(r, Err(Error::NonHermitian(_))));
        assert!(apply_multiplier(&s, |k| Complex64::new(k[0] as f64, 0.0), false).is_ok());
    }

    #[test]
    fn shift_quarter_period() {
        let f = SampledFunction::from_fn(grid1(64), |x| (2.0 * PI * x[0]).sin()).unwrap();
        let g = shift_eval(&f, [0.25, 0.0]).unwrap();
        for (i, v) in g.values().iter().enumerate() {
            let x = i as f64 / 64.0;
            assert!((v - (2.0 * PI * x).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_one_cell_is_circular() {
        let f = random(grid1(32), 9);
        let g = shift_eval(&f, [1.0 / 32.0, 0.0]).unwrap();
        for i in 0..32 {
            assert!((g.values()[i] - f.values()[(i + 1) % 32]).abs() < 1e-12);
        }
        let z = shift_eval(&f, [0.0, 0.0]).unwrap();
        for (a, b) in z.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(shift_eval(&f, [1.0, 0.0]).is_err());
    }

    #[test]
    fn shift_2d_cell() {
        let g = PeriodicGrid::new(2, 16).unwrap();
        let f = random(g, 2);
        let s = shift_eval(&f, [1.0 / 16.0, -2.0 / 16.0]).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let src = f.values()[g.flat([(i + 1) % 16, (j + 14) % 16])];
                assert!((s.values()[g.flat([i, j])] - src).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn refine_preserves_band_limited_values() {
        let f = SampledFunction::from_fn(grid1(16), |x| (2.0 * PI * 3.0 * x[0]).cos() + 0.5).unwrap();
        let r = f.refine(4).unwrap();
        for (i, v) in r.values().iter().enumerate() {
            let x = i as f64 / 64.0;
            assert!((v - ((2.0 * PI * 3.0 * x).cos() + 0.5)).abs() < 1e-12);
        }
        // A phase-shifted mode peaks between coarse samples.
        let h = SampledFunction::from_fn(grid1(16), |x| (2.0 * PI * (x[0] + 1.0 / 64.0)).sin()).unwrap();
        assert!(h.refined_sup_norm(4).unwrap() > h.sup_norm());
    }

    #[test]
    fn torus_distance() {
        assert!((torus_delta(0.1, 0.9) - 0.2).abs() < 1e-15);
        assert!((torus_delta(0.3, 0.0) - 0.3).abs() < 1e-15);
    }
}
