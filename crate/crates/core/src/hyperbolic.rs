//! Upper half-space geometry on the torus: the Poincaré metric, hyperbolic
//! neighborhoods of sampled space-time sets, Property I, the Carleson
//! functional `M` and the measure `dμ = dx dt/t`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{torus_delta, PeriodicGrid};
use crate::heat::TimeGrid;

/// A point `(x, t)` of the upper half-space over the torus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HPoint {
    pub x: [f64; 2],
    pub t: f64,
}

/// `acosh(1+z)` evaluated as `log1p(z + sqrt(z(z+2)))`, accurate for small `z`.
fn acosh1p(z: f64) -> f64 {
    (z + (z * (z + 2.0)).sqrt()).ln_1p()
}

/// Squared spatial torus distance in the first `dim` coordinates.
pub fn torus_dist2(a: [f64; 2], b: [f64; 2], dim: usize) -> f64 {
    (0..dim).map(|d| torus_delta(a[d], b[d]).powi(2)).sum()
}

/// Poincaré distance with the periodic spatial metric.
pub fn rho(p: HPoint, q: HPoint, dim: usize) -> Result<f64> {
    if !(p.t > 0.0 && q.t > 0.0) {
        return Err(Error::param("half-space points need positive height"));
    }
    let d2 = torus_dist2(p.x, q.x, dim) + (p.t - q.t).powi(2);
    Ok(acosh1p(d2 / (2.0 * p.t * q.t)))
}

/// Poincaré distance in Euclidean `ℝ^{n+1}_+` (no periodization).
pub fn rho_euclidean(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len();
    let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum();
    acosh1p(d2 / (2.0 * p[n - 1] * q[n - 1]))
}

/// Dense boolean mask over time samples × grid points, time-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceTimeSet {
    grid: PeriodicGrid,
    times: TimeGrid,
    mask: Vec<bool>,
}

impl SpaceTimeSet {
    pub fn empty(grid: PeriodicGrid, times: TimeGrid) -> Self {
        Self { grid, times, mask: vec![false; grid.len() * times.len()] }
    }

    pub fn from_mask(grid: PeriodicGrid, times: TimeGrid, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != grid.len() * times.len() {
            return Err(Error::GridMismatch("mask length".into()));
        }
        Ok(Self { grid, times, mask })
    }

    pub fn from_predicate(grid: PeriodicGrid, times: TimeGrid, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let n = grid.len();
        let mask = (0..times.len() * n).map(|i| f(i / n, i % n)).collect();
        Self { grid, times, mask }
    }

    /// All samples with `lo < t ≤ hi`.
    pub fn slab(grid: PeriodicGrid, times: TimeGrid, lo: f64, hi: f64) -> Self {
        Self::from_predicate(grid, times, |ti, _| {
            let t = times.time(ti);
            t > lo && t <= hi
        })
    }

    /// The Carleson box `T(I) = I × (ℓ(I)/2, ℓ(I)]`.
    pub fn carleson_box(grid: PeriodicGrid, times: TimeGrid, cube: DyadicCube) -> Result<Self> {
        cube.check(&grid)?;
        Ok(Self::from_predicate(grid, times, |ti, x| {
            times.octave_of(ti) == cube.level && cube.contains(&grid, x)
        }))
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn times(&self) -> &TimeGrid {
        &self.times
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, ti: usize, x: usize) -> bool {
        self.mask[ti * self.grid.len() + x]
    }

    pub fn insert(&mut self, ti: usize, x: usize) {
        let n = self.grid.len();
        self.mask[ti * n + x] = true;
    }

    pub fn row(&self, ti: usize) -> &[bool] {
        let n = self.grid.len();
        &self.mask[ti * n..(ti + 1) * n]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    fn check_same(&self, o: &Self) -> Result<()> {
        if self.grid != o.grid || self.times != o.times {
            return Err(Error::GridMismatch("space-time sets on different grids".into()));
        }
        Ok(())
    }

    pub fn union(&self, o: &Self) -> Result<Self> {
        self.check_same(o)?;
        let mask = self.mask.iter().zip(&o.mask).map(|(a, b)| *a || *b).collect();
        Ok(Self { mask, ..self.clone() })
    }

    pub fn intersection(&self, o: &Self) -> Result<Self> {
        self.check_same(o)?;
        let mask = self.mask.iter().zip(&o.mask).map(|(a, b)| *a && *b).collect();
        Ok(Self { mask, ..self.clone() })
    }

    pub fn is_subset(&self, o: &Self) -> Result<bool> {
        self.check_same(o)?;
        Ok(self.mask.iter().zip(&o.mask).all(|(a, b)| !*a || *b))
    }

    /// Members of `self` outside `o`.
    pub fn difference_count(&self, o: &Self) -> Result<usize> {
        self.check_same(o)?;
        Ok(self.mask.iter().zip(&o.mask).filter(|(a, b)| **a && !**b).count())
    }

    /// The intersection with the octave `t ∈ (2^{-j-1}, 2^{-j}]`.
    pub fn octave_slice(&self, j: usize) -> Self {
        let n = self.grid.len();
        let times = self.times;
        let mask = self
            .mask
            .iter()
            .enumerate()
            .map(|(i, &b)| b && times.octave_of(i / n) == j)
            .collect();
        Self { mask, ..self.clone() }
    }

    /// Number of members in each octave.
    pub fn octave_counts(&self) -> Vec<usize> {
        let n = self.grid.len();
        let mut c = vec![0; self.times.octaves()];
        for (i, &b) in self.mask.iter().enumerate() {
            if b {
                c[self.times.octave_of(i / n)] += 1;
            }
        }
        c
    }

    /// The sample point of a mask position.
    pub fn point(&self, ti: usize, x: usize) -> HPoint {
        HPoint { x: self.grid.point(x), t: self.times.time(ti) }
    }

    /// μ-mass of one sample: cell volume times `log 2 / M_t`.
    pub fn sample_mass(&self) -> f64 {
        self.grid.cell_volume() * self.times.weight()
    }
}

/// `μ(A) = Σ_{members} |cell| · log 2 / M_t`.
pub fn mu_measure(a: &SpaceTimeSet) -> f64 {
    a.count() as f64 * a.sample_mass()
}

/// Periodic squared distance transform in one dimension (grid units):
/// `out[p] = min_q f[q] + d(p,q)^2` with `d` the circular distance.
pub fn edt_1d_periodic(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let m = 3 * n;
    let g = |i: usize| f[i % n];
    // Lower envelope of parabolas (Felzenszwalb–Huttenlocher) on three tiles.
    let mut v = vec![0usize; m];
    let mut z = vec![0.0f64; m + 1];
    let mut k = 0usize;
    let mut started = false;
    for q in 0..m {
        if !g(q).is_finite() {
            continue;
        }
        if !started {
            v[0] = q;
            z[0] = f64::NEG_INFINITY;
            z[1] = f64::INFINITY;
            started = true;
            continue;
        }
        loop {
            let p = v[k];
            let s = ((g(q) + (q * q) as f64) - (g(p) + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] && k > 0 {
                k -= 1;
                continue;
            }
            if s <= z[k] {
                // k == 0 and the new parabola dominates everywhere.
                v[0] = q;
                z[0] = f64::NEG_INFINITY;
                z[1] = f64::INFINITY;
                break;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    if !started {
        return vec![f64::INFINITY; n];
    }
    let mut out = vec![0.0; n];
    let mut k = 0;
    for (p, o) in out.iter_mut().enumerate() {
        let q = (p + n) as f64;
        while z[k + 1] < q {
            k += 1;
        }
        let d = q - v[k] as f64;
        *o = d * d + g(v[k]);
    }
    out
}

/// Squared periodic distance (grid units) from every point to the members of
/// a boolean row.
pub fn squared_distance_map(grid: &PeriodicGrid, members: &[bool]) -> Vec<f64> {
    let n = grid.size();
    let init: Vec<f64> = members.iter().map(|&b| if b { 0.0 } else { f64::INFINITY }).collect();
    if grid.dim() == 1 {
        return edt_1d_periodic(&init);
    }
    let mut tmp = vec![0.0; n * n];
    for i in 0..n {
        let r = edt_1d_periodic(&init[i * n..(i + 1) * n]);
        tmp[i * n..(i + 1) * n].copy_from_slice(&r);
    }
    let mut out = vec![0.0; n * n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        for i in 0..n {
            col[i] = tmp[i * n + j];
        }
        let r = edt_1d_periodic(&col);
        for i in 0..n {
            out[i * n + j] = r[i];
        }
    }
    out
}

/// Per-row squared distance maps of a set (rows without members are `None`).
pub fn row_distance_maps(a: &SpaceTimeSet) -> Vec<Option<Vec<f64>>> {
    (0..a.times.len())
        .into_par_iter()
        .map(|ti| {
            let row = a.row(ti);
            if row.iter().any(|&b| b) {
                Some(squared_distance_map(&a.grid, row))
            } else {
                None
            }
        })
        .collect()
}

/// Hyperbolic neighborhood over a target time grid from precomputed row
/// distance maps of the source set (which lives on `src_times`).
///
/// A target `(y, τ)` is included iff some source row `t` has
/// `d(y)^2 + (τ-t)^2 < 2tτ(cosh R - 1)`; rows with `|log(t/τ)| ≥ R` are
/// skipped since `ρ ≥ |log(t/τ)|`.
pub fn neighborhood_from_maps(
    grid: PeriodicGrid,
    src_times: TimeGrid,
    maps: &[Option<Vec<f64>>],
    target_times: TimeGrid,
    r: f64,
) -> SpaceTimeSet {
    let n = grid.len();
    let h2 = grid.spacing().powi(2);
    let ch = r.cosh() - 1.0;
    let active: Vec<usize> = (0..maps.len()).filter(|&i| maps[i].is_some()).collect();
    let rows: Vec<Vec<bool>> = (0..target_times.len())
        .into_par_iter()
        .map(|tj| {
            let tau = target_times.time(tj);
            let mut row = vec![false; n];
            for &ti in &active {
                let t = src_times.time(ti);
                if (t / tau).ln().abs() >= r {
                    continue;
                }
                let budget = 2.0 * t * tau * ch - (tau - t).powi(2);
                if budget <= 0.0 {
                    continue;
                }
                let map = maps[ti].as_ref().expect("active row");
                for (m, d) in row.iter_mut().zip(map) {
                    if !*m && d * h2 < budget {
                        *m = true;
                    }
                }
            }
            row
        })
        .collect();
    SpaceTimeSet { grid, times: target_times, mask: rows.concat() }
}

/// `A_R = {p : ρ(p, A) < R}` on the sample grid.
pub fn neighborhood(a: &SpaceTimeSet, r: f64) -> Result<SpaceTimeSet> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::param(format!("neighborhood radius must be positive, got {r}")));
    }
    let maps = row_distance_maps(a);
    Ok(neighborhood_from_maps(a.grid, a.times, &maps, a.times, r))
}

/// All-pairs oracle for [`neighborhood`].
pub fn neighborhood_bruteforce(a: &SpaceTimeSet, r: f64) -> SpaceTimeSet {
    let n = a.grid.len();
    let dim = a.grid.dim();
    let members: Vec<HPoint> = (0..a.mask.len())
        .filter(|&i| a.mask[i])
        .map(|i| a.point(i / n, i % n))
        .collect();
    let mask = (0..a.mask.len())
        .into_par_iter()
        .map(|i| {
            let p = a.point(i / n, i % n);
            members.iter().any(|&q| rho(p, q, dim).expect("positive heights") < r)
        })
        .collect();
    SpaceTimeSet { mask, ..a.clone() }
}

/// Outcome of a Property I check.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PropertyI {
    pub passed: bool,
    /// `min_z μ(B_ρ(z,δ) ∩ A)/μ(B_ρ(z,δ))` over members (1 for an empty set).
    pub worst_ratio: f64,
    pub members: usize,
}

/// Check `μ(B_ρ(z,δ) ∩ A) ≥ δ' μ(B_ρ(z,δ))` at every member `z`.
pub fn property_i_check(a: &SpaceTimeSet, delta: f64, delta_prime: f64) -> Result<PropertyI> {
    if !(delta > 0.0 && delta < 0.1 && delta_prime > 0.0 && delta_prime < 0.1) {
        return Err(Error::param("Property I constants must lie in (0, 1/10)"));
    }
    let floor = 2.0 * a.times.weight();
    if delta < floor {
        return Err(Error::param(format!(
            "delta = {delta} is below the time resolution limit 2 log2 / M_t = {floor}"
        )));
    }
    let grid = a.grid;
    let n = grid.len();
    let size = grid.size();
    let ch = delta.cosh() - 1.0;
    // Per-row prefix sums (n = 1) make interval counts O(1).
    let prefix: Vec<Vec<u32>> = (0..a.times.len())
        .map(|ti| {
            let mut p = vec![0u32; n + 1];
            for (x, &b) in a.row(ti).iter().enumerate() {
                p[x + 1] = p[x] + b as u32;
            }
            p
        })
        .collect();
    let members: Vec<usize> = (0..a.mask.len()).filter(|&i| a.mask[i]).collect();
    let ratios: Vec<f64> = members
        .par_iter()
        .map(|&i| {
            let (ti, x) = (i / n, i % n);
            let t = a.times.time(ti);
            let mut inside = 0u64;
            let mut total = 0u64;
            for tj in 0..a.times.len() {
                let tau = a.times.time(tj);
                if (t / tau).ln().abs() >= delta {
                    continue;
                }
                let budget = 2.0 * t * tau * ch - (tau - t).powi(2);
                if budget <= 0.0 {
                    continue;
                }
                let rad2 = budget / grid.spacing().powi(2);
                if grid.dim() == 1 {
                    // Offsets d with d^2 < rad2, capped at the whole circle.
                    let mut rc = rad2.sqrt().floor();
                    if rc * rc >= rad2 {
                        rc -= 1.0;
                    }
                    let rc = (rc.max(0.0) as usize).min((size - 1) / 2);
                    let width = 2 * rc + 1;
                    total += width as u64;
                    let p = &prefix[tj];
                    let lo = (x + n - rc) % n;
                    let hi = lo + width;
                    inside += if hi <= n {
                        (p[hi] - p[lo]) as u64
                    } else {
                        (p[n] - p[lo] + p[hi - n]) as u64
                    };
                } else {
                    let [x0, x1] = grid.index(x);
                    let rc = rad2.sqrt().floor() as i64;
                    let s = size as i64;
                    let row = a.row(tj);
                    for d0 in -rc..=rc {
                        for d1 in -rc..=rc {
                            if ((d0 * d0 + d1 * d1) as f64) < rad2 {
                                let a0 = (x0 as i64 + d0).rem_euclid(s) as usize;
                                let a1 = (x1 as i64 + d1).rem_euclid(s) as usize;
                                total += 1;
                                inside += row[grid.flat([a0, a1])] as u64;
                            }
                        }
                    }
                }
            }
            inside as f64 / total.max(1) as f64
        })
        .collect();
    let worst = ratios.iter().cloned().fold(1.0, f64::min);
    Ok(PropertyI { passed: worst >= delta_prime, worst_ratio: worst, members: members.len() })
}

/// A dyadic cube of edge `2^{-level}` on the torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DyadicCube {
    pub level: usize,
    pub index: [usize; 2],
}

impl DyadicCube {
    fn check(&self, grid: &PeriodicGrid) -> Result<()> {
        if self.level > grid.log2_size() {
            return Err(Error::param("cube finer than the grid"));
        }
        let per = 1usize << self.level;
        if self.index[0] >= per || (grid.dim() == 2 && self.index[1] >= per) {
            return Err(Error::param("cube index out of range"));
        }
        Ok(())
    }

    pub fn edge(&self) -> f64 {
        0.5f64.powi(self.level as i32)
    }

    pub fn volume(&self, dim: usize) -> f64 {
        self.edge().powi(dim as i32)
    }

    pub fn contains(&self, grid: &PeriodicGrid, x: usize) -> bool {
        let shift = grid.log2_size() - self.level;
        let [a, b] = grid.index(x);
        (a >> shift) == self.index[0] && (grid.dim() == 1 || (b >> shift) == self.index[1])
    }

    /// All cubes of a level.
    pub fn level_cubes(level: usize, dim: usize) -> Vec<DyadicCube> {
        let per = 1usize << level;
        if dim == 1 {
            (0..per).map(|i| DyadicCube { level, index: [i, 0] }).collect()
        } else {
            (0..per * per).map(|i| DyadicCube { level, index: [i / per, i % per] }).collect()
        }
    }
}

/// Sum a grid function over the dyadic cubes of `level` (row-major cube order).
pub fn pool_to_level(grid: &PeriodicGrid, values: &[f64], level: usize) -> Vec<f64> {
    let shift = grid.log2_size() - level;
    let per = 1usize << level;
    let mut out = vec![0.0; per.pow(grid.dim() as u32)];
    for (x, v) in values.iter().enumerate() {
        let [a, b] = grid.index(x);
        let idx = if grid.dim() == 1 { a >> shift } else { (a >> shift) * per + (b >> shift) };
        out[idx] += v;
    }
    out
}

/// Carleson functional `M(A) = sup_I |I|^{-1} ∬_{I×(0,ℓ(I))} 1_A dx dt/t`
/// over dyadic cubes of levels `0..J` (capped at the grid resolution).
pub fn carleson_m(a: &SpaceTimeSet) -> f64 {
    carleson_m_detail(a).0
}

/// `M(A)` together with the maximizing cube.
pub fn carleson_m_detail(a: &SpaceTimeSet) -> (f64, Option<DyadicCube>) {
    let grid = a.grid;
    let n = grid.len();
    let dim = grid.dim();
    let mass = a.sample_mass();
    let max_level = (a.times.octaves() - 1).min(grid.log2_size());
    // Column counts of members in octaves ≥ l, accumulated from the finest octave.
    let mut cols = vec![0.0f64; n];
    let mut per_level: Vec<Vec<f64>> = vec![Vec::new(); max_level + 1];
    for j in (0..a.times.octaves()).rev() {
        for m in 0..a.times.per_octave() {
            let ti = a.times.index(j, m);
            for (c, &b) in cols.iter_mut().zip(a.row(ti)) {
                *c += b as u8 as f64;
            }
        }
        if j <= max_level {
            per_level[j] = cols.clone();
        }
    }
    let mut best = 0.0;
    let mut arg = None;
    for (l, col) in per_level.iter().enumerate() {
        let pooled = pool_to_level(&grid, col, l);
        let vol = 0.5f64.powi((l * dim) as i32);
        let per = 1usize << l;
        for (i, c) in pooled.iter().enumerate() {
            let v = c * mass / vol;
            if v > best {
                best = v;
                let index = if dim == 1 { [i, 0] } else { [i / per, i % per] };
                arg = Some(DyadicCube { level: l, index });
            }
        }
    }
    (best, arg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{E, LN_2};

    fn hp(x: f64, t: f64) -> HPoint {
        HPoint { x: [x, 0.0], t }
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(hp(0.2, 0.3), hp(0.2, 0.3), 1).unwrap(), 0.0);
        assert!((rho(hp(0.0, 1.0), hp(0.0, E), 1).unwrap() - 1.0).abs() < 1e-12);
        let v = rho(hp(0.0, 1.0), hp(0.3, 1.0), 1).unwrap();
        assert!((v - 1.045f64.acosh()).abs() < 1e-14);
        assert!((v - 0.298_886_240_369_915).abs() < 1e-14);
        // Periodic image: 0.9 is 0.1 away from 0.
        let w = rho(hp(0.0, 0.5), hp(0.9, 0.5), 1).unwrap();
        assert!((w - (1.0 + 0.01 / 0.5f64).acosh()).abs() < 1e-14);
        assert!(rho(hp(0.0, 0.0), hp(0.0, 1.0), 1).is_err());
    }

    #[test]
    fn metric_axioms_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let mut p = || HPoint { x: [rng.gen(), rng.gen()], t: rng.gen_range(0.01..1.0) };
            let (a, b, c) = (p(), p(), p());
            for dim in [1, 2] {
                let ab = rho(a, b, dim).unwrap();
                assert_eq!(ab, rho(b, a, dim).unwrap());
                let ac = rho(a, c, dim).unwrap();
                let cb = rho(c, b, dim).unwrap();
                assert!(ab <= ac + cb + 1e-9);
            }
        }
    }

    #[test]
    fn edt_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = 16;
            let f: Vec<f64> = (0..n)
                .map(|_| if rng.gen_bool(0.2) { rng.gen_range(0.0..10.0) } else { f64::INFINITY })
                .collect();
            let out = edt_1d_periodic(&f);
            for p in 0..n {
                let mut best = f64::INFINITY;
                for q in 0..n {
                    let d = (p as i64 - q as i64).rem_euclid(n as i64).min((q as i64 - p as i64).rem_euclid(n as i64));
                    best = best.min(f[q] + (d * d) as f64);
                }
                assert!((out[p] - best).abs() < 1e-9 || (best.is_infinite() && out[p].is_infinite()));
            }
        }
    }

    #[test]
    fn planar_distance_map() {
        let g = PeriodicGrid::new(2, 8).unwrap();
        let mut m = vec![false; 64];
        m[g.flat([0, 0])] = true;
        let d = squared_distance_map(&g, &m);
        assert_eq!(d[g.flat([7, 7])], 2.0);
        assert_eq!(d[g.flat([4, 3])], 25.0);
    }

    #[test]
    fn neighborhood_matches_bruteforce_small() {
        let g = PeriodicGrid::new(1, 64).unwrap();
        let tg = TimeGrid::new(4, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = SpaceTimeSet::from_predicate(g, tg, |_, _| rng.gen_bool(0.02));
        for r in [0.05, 0.3, 1.0, 2.5] {
            assert_eq!(neighborhood(&a, r).unwrap(), neighborhood_bruteforce(&a, r), "R={r}");
        }
        let e = SpaceTimeSet::empty(g, tg);
        assert!(neighborhood(&e, 1.0).unwrap().is_empty());
    }

    #[test]
    fn neighborhood_contains_set_and_is_monotone() {
        let g = PeriodicGrid::new(1, 64).unwrap();
        let tg = TimeGrid::new(4, 8).unwrap();
        let mut a = SpaceTimeSet::empty(g, tg);
        a.insert(tg.index(3, 0), 10);
        let small = neighborhood(&a, 1e-6).unwrap();
        assert_eq!(small, a);
        let r1 = neighborhood(&a, 0.5).unwrap();
        let r2 = neighborhood(&a, 1.0).unwrap();
        assert!(a.is_subset(&r1).unwrap() && r1.is_subset(&r2).unwrap());
        let nested = neighborhood(&r1, 0.5).unwrap();
        assert!(nested.is_subset(&r2).unwrap());
    }

    #[test]
    fn mu_and_carleson_slab() {
        let g = PeriodicGrid::new(1, 256).unwrap();
        let tg = TimeGrid::new(8, 32).unwrap();
        let slab = SpaceTimeSet::slab(g, tg, 0.25, 0.5);
        assert!((carleson_m(&slab) - LN_2).abs() < 1e-12);
        assert!((mu_measure(&slab) - LN_2).abs() < 1e-12);
        let cube = DyadicCube { level: 3, index: [2, 0] };
        let piece = SpaceTimeSet::from_predicate(g, tg, |ti, x| {
            let t = tg.time(ti);
            t > 0.25 && t <= 0.5 && cube.contains(&g, x)
        });
        assert!((mu_measure(&piece) - 0.125 * LN_2).abs() < 1e-12);
        assert_eq!(carleson_m(&SpaceTimeSet::empty(g, tg)), 0.0);
        let b = SpaceTimeSet::carleson_box(g, tg, cube).unwrap();
        assert!((carleson_m(&b) - LN_2).abs() < 1e-12);
    }

    #[test]
    fn property_i_cases() {
        let g = PeriodicGrid::new(1, 256).unwrap();
        let tg = TimeGrid::new(4, 16).unwrap();
        let slab = SpaceTimeSet::slab(g, tg, 0.25, 0.5);
        let r = property_i_check(&slab, 0.09, 0.05).unwrap();
        assert!(r.passed, "{r:?}");
        let mut single = SpaceTimeSet::empty(g, tg);
        single.insert(tg.index(1, 4), 100);
        let s = property_i_check(&single, 0.09, 0.05).unwrap();
        assert!(s.worst_ratio < 1.0);
        assert!(property_i_check(&single, 0.01, 0.05).is_err());
    }
}
