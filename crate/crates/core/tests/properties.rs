use fracheat::badset::{bad_set_d, theta_profile};
use fracheat::grid::{PeriodicGrid, SampledFunction};
use fracheat::heat::{frac_laplacian_apply, heat_deriv_field, semigroup_apply, FracHeatParams, TimeGrid};
use fracheat::hyperbolic::{mu_measure, neighborhood, rho, HPoint, SpaceTimeSet};
use fracheat::lattice::{lattice_norm, LatticeSpec};
use fracheat::lipschitz::{lambda_s_seminorm_diff, lambda_s_seminorm_heat};
use fracheat::wavelet::{dwt, idwt, WaveletSystem};
use proptest::prelude::*;

const N: usize = 64;

fn grid() -> PeriodicGrid {
    PeriodicGrid::new(1, N).unwrap()
}

fn samples() -> impl Strategy<Value = SampledFunction> {
    prop::collection::vec(-1.0f64..1.0, N).prop_map(|v| SampledFunction::new(grid(), v).unwrap())
}

fn mask(times: TimeGrid) -> impl Strategy<Value = SpaceTimeSet> {
    prop::collection::vec(prop::bool::weighted(0.2), N * times.len())
        .prop_map(move |m| SpaceTimeSet::from_mask(grid(), times, m).unwrap())
}

fn times() -> TimeGrid {
    TimeGrid::new(3, 4).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn semigroup_law(f in samples(), alpha in 0.3f64..2.0, t1 in 0.0f64..0.01, t2 in 0.0f64..0.01) {
        let a = semigroup_apply(&semigroup_apply(&f, alpha, t1).unwrap(), alpha, t2).unwrap();
        let b = semigroup_apply(&f, alpha, t1 + t2).unwrap();
        prop_assert!(a.sub(&b).unwrap().sup_norm() <= 1e-12 * (1.0 + f.sup_norm()));
    }

    #[test]
    fn semigroup_is_a_contraction(f in samples(), alpha in 0.3f64..2.0, t in 0.0f64..1.0) {
        let g = semigroup_apply(&f, alpha, t).unwrap();
        prop_assert!(g.l2_norm() <= f.l2_norm() * (1.0 + 1e-12));
        prop_assert!((g.mean() - f.mean()).abs() < 1e-12);
    }

    #[test]
    fn multipliers_commute(f in samples(), alpha in 0.3f64..2.0, t in 0.0f64..0.01, beta in 0.0f64..1.5) {
        let a = frac_laplacian_apply(&semigroup_apply(&f, alpha, t).unwrap(), beta).unwrap();
        let b = semigroup_apply(&frac_laplacian_apply(&f, beta).unwrap(), alpha, t).unwrap();
        let scale = (std::f64::consts::PI * N as f64).powf(beta) * (1.0 + f.sup_norm());
        prop_assert!(a.sub(&b).unwrap().sup_norm() <= 1e-12 * scale);
    }

    #[test]
    fn seminorms_are_homogeneous(f in samples(), lam in -4.0f64..4.0) {
        let p = FracHeatParams::new(2.0, 1, 0.5).unwrap();
        let g = f.scaled(lam);
        let h = lambda_s_seminorm_heat(&f, p, times());
        let hg = lambda_s_seminorm_heat(&g, p, times());
        prop_assert!((hg - lam.abs() * h).abs() <= 1e-12 * (1.0 + hg));
        let d = lambda_s_seminorm_diff(&f, 0.5, 1).unwrap();
        let dg = lambda_s_seminorm_diff(&g, 0.5, 1).unwrap();
        prop_assert!((dg - lam.abs() * d).abs() <= 1e-12 * (1.0 + dg));
    }

    #[test]
    fn bad_sets_nest(f in samples(), a in 0.01f64..1.0, b in 0.01f64..1.0) {
        let p = FracHeatParams::new(2.0, 2, 0.5).unwrap();
        let w = heat_deriv_field(&f, p, times());
        let lam = w.envelope();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let big = bad_set_d(&w, 0.5, lo * lam).unwrap();
        let small = bad_set_d(&w, 0.5, hi * lam).unwrap();
        prop_assert!(small.is_subset(&big).unwrap());
        prop_assert!(bad_set_d(&w, 0.5, lam).unwrap().is_empty());
    }

    #[test]
    fn mu_is_monotone_and_subadditive(a in mask(times()), b in mask(times())) {
        let u = a.union(&b).unwrap();
        let i = a.intersection(&b).unwrap();
        prop_assert!(mu_measure(&u) + 1e-15 >= mu_measure(&a).max(mu_measure(&b)));
        prop_assert!(mu_measure(&u) <= mu_measure(&a) + mu_measure(&b) + 1e-15);
        prop_assert!((mu_measure(&u) + mu_measure(&i) - mu_measure(&a) - mu_measure(&b)).abs() < 1e-12);
    }

    #[test]
    fn theta_is_bounded_by_octave_measure(a in mask(times())) {
        let cap = times().weight() * times().per_octave() as f64;
        for row in theta_profile(&a) {
            prop_assert!(row.iter().all(|&v| (0.0..=cap + 1e-15).contains(&v)));
        }
    }

    #[test]
    fn neighborhoods_grow(a in mask(times()), r1 in 0.05f64..1.0, r2 in 0.05f64..1.0) {
        let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
        let small = neighborhood(&a, lo).unwrap();
        let big = neighborhood(&a, hi).unwrap();
        prop_assert!(a.is_subset(&small).unwrap());
        prop_assert!(small.is_subset(&big).unwrap());
    }

    #[test]
    fn rho_is_a_metric(x in prop::array::uniform3(0.0f64..1.0), t in prop::array::uniform3(0.01f64..1.0)) {
        let p: Vec<HPoint> = (0..3).map(|i| HPoint { x: [x[i], 0.0], t: t[i] }).collect();
        let d = |i: usize, j: usize| rho(p[i], p[j], 1).unwrap();
        prop_assert!(d(0, 0).abs() < 1e-12);
        prop_assert!((d(0, 1) - d(1, 0)).abs() < 1e-12);
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9);
    }

    #[test]
    fn wavelet_reconstruction(f in samples()) {
        let sys = WaveletSystem::for_smoothness(0.5, &grid()).unwrap();
        let c = dwt(&f, &sys).unwrap();
        let back = idwt(&c, &sys).unwrap();
        prop_assert!(back.sub(&f).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn lattice_norm_is_homogeneous_and_monotone(
        v in prop::collection::vec(0.0f64..1.0, 3 * N),
        lam in 0.0f64..5.0,
        p in 1.0f64..4.0,
        q in 1.0f64..4.0,
    ) {
        let seq: Vec<Vec<f64>> = v.chunks(N).map(|c| c.to_vec()).collect();
        let scaled: Vec<Vec<f64>> = seq.iter().map(|r| r.iter().map(|x| lam * x).collect()).collect();
        let bigger: Vec<Vec<f64>> = seq.iter().map(|r| r.iter().map(|x| x + 0.1).collect()).collect();
        for spec in [LatticeSpec::lq_lp(p, q).unwrap(), LatticeSpec::lp_lq(p, q).unwrap()] {
            let base = lattice_norm(&grid(), &seq, &spec).unwrap();
            let s = lattice_norm(&grid(), &scaled, &spec).unwrap();
            prop_assert!((s - lam * base).abs() <= 1e-12 * (1.0 + s));
            prop_assert!(lattice_norm(&grid(), &bigger, &spec).unwrap() >= base);
        }
    }
}
