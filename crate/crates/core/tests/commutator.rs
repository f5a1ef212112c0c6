use std::f64::consts::TAU;

use carlemanlab_core::commutator::*;
use carlemanlab_core::field::quadrature::InnerProduct;
use carlemanlab_core::field::weights::log_temporal_weight;
use carlemanlab_core::field::{
    make_superposition, BumpSampler, Grid, ScalarField, SpaceTimeField, SpatialExponent, TimeGrid, WeightParams,
};
use carlemanlab_core::spectral::laplacian;
use carlemanlab_core::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn params(dim: usize, n: usize, length: f64, steps: usize, a: f64, k: f64) -> CarlemanParams {
    let w = WeightParams::new(a, k, SpatialExponent::DoubleK).unwrap();
    CarlemanParams::new(w, Grid::new(dim, n, length).unwrap(), TimeGrid::default_with_steps(steps).unwrap()).unwrap()
}

fn bump_field(p: &CarlemanParams, seed: u64) -> SpaceTimeField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let specs = BumpSampler::default().sample(&mut rng, &p.grid, &p.time_grid).unwrap();
    make_superposition(&specs, &p.grid, &p.time_grid).unwrap()
}

fn norm(f: &SpaceTimeField) -> f64 {
    f.inner(f).unwrap().sqrt()
}

fn rel(a: &SpaceTimeField, b: &SpaceTimeField) -> f64 {
    norm(&a.sub(b).unwrap()) / norm(b)
}

/// `(∂t + Δ)` conjugated by hand: `h^{-(a+1)} q^{-k} (∂t + Δ)(h^{a+1} q^k v)`.
fn conjugated_heat(v: &SpaceTimeField, p: &CarlemanParams) -> SpaceTimeField {
    let (a, k) = (p.a(), p.k());
    let q = |x: [f64; 3]| 1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let h = |t: f64| log_temporal_weight(t).unwrap().exp();
    let u = v.mul_fn(|x, t| h(t).powf(a + 1.0) * q(x).powf(k));
    let lap = SpaceTimeField::from_frames(*u.grid(), *u.time_grid(), |m, _| Ok(laplacian(u.frame(m)))).unwrap();
    time_derivative(&u).add(&lap).unwrap().mul_fn(|x, t| h(t).powf(-(a + 1.0)) * q(x).powf(-k))
}

#[test]
fn l_matches_conjugation_at_second_order() {
    let errors: Vec<f64> = [16, 32]
        .iter()
        .map(|&m| {
            let p = params(2, 96, 4.0, m, 3.0, 1.0);
            let v = bump_field(&p, 11);
            rel(&apply_l(&v, &p).unwrap(), &conjugated_heat(&v, &p))
        })
        .collect();
    assert!(errors[1] < 0.05, "{errors:?}");
    assert!(errors[0] / errors[1] > 3.5, "{errors:?}");
}

#[test]
fn l_without_spatial_weight_on_a_fourier_mode() {
    // k = 0: L = ∂t + Δ + (a+1)(1-t)/t, exact on quadratics in t away from the end frames.
    let (len, a) = (6.0, 4.0);
    let p = params(2, 16, len, 20, a, 0.0);
    let w = TAU / len;
    let poly = |t: f64| 1.0 + 2.0 * t - 3.0 * t * t;
    let dpoly = |t: f64| 2.0 - 6.0 * t;
    let v = SpaceTimeField::from_frames(p.grid, p.time_grid, |_, t| {
        ScalarField::from_fn(p.grid, |x| poly(t) * (w * x[1]).sin())
    })
    .unwrap();
    let lv = apply_l(&v, &p).unwrap();
    for m in 1..p.time_grid.steps() {
        let t = p.time_grid.time(m);
        let c = dpoly(t) - w * w * poly(t) + (a + 1.0) * (1.0 - t) / t * poly(t);
        let expected = ScalarField::from_fn(p.grid, |x| c * (w * x[1]).sin()).unwrap();
        let err = lv.frame(m).sub(&expected).unwrap().max_abs();
        assert!(err < 1e-10 * expected.max_abs(), "frame {m}: {err}");
    }
}

#[test]
fn zero_field_maps_to_zero() {
    let p = params(3, 8, 8.0, 8, 5.0, 2.0);
    let z = SpaceTimeField::zeros(p.grid, p.time_grid);
    for out in [
        apply_l(&z, &p).unwrap(),
        apply_j(&z, &p).unwrap(),
        apply_k(&z, &p).unwrap(),
        apply_bracket_direct(&z, &p).unwrap(),
        apply_bracket_explicit(&z, &p).unwrap(),
    ] {
        assert_eq!(out.max_abs(), 0.0);
    }
}

#[test]
fn j_plus_k_is_a() {
    for k in [0.0, 1.0, 2.0] {
        let p = params(2, 32, 8.0, 24, 10.0, k);
        let v = bump_field(&p, 5);
        let jk = apply_j(&v, &p).unwrap().add(&apply_k(&v, &p).unwrap()).unwrap();
        assert!(rel(&jk, &apply_a(&v, &p).unwrap()) < 1e-12);
    }
}

#[test]
fn j_is_symmetric() {
    let p = params(2, 32, 8.0, 24, 10.0, 2.0);
    let (v, w) = (bump_field(&p, 1), bump_field(&p, 2));
    let jv = apply_j(&v, &p).unwrap();
    let jw = apply_j(&w, &p).unwrap();
    let defect = (jv.inner(&w).unwrap() - v.inner(&jw).unwrap()).abs();
    assert!(defect < 1e-12 * norm(&jv) * norm(&w), "{defect}");
}

#[test]
fn k_skew_defect_is_second_order_in_time() {
    let defect = |steps: usize, k: f64| {
        let p = params(2, 32, 8.0, steps, 10.0, k);
        let v = bump_field(&p, 3);
        apply_k(&v, &p).unwrap().inner(&v).unwrap() / v.inner(&v).unwrap()
    };
    let (d1, d2) = (defect(32, 0.0), defect(64, 0.0));
    assert!(d1.abs() < 0.05 && (d1 / d2) > 3.5, "{d1} {d2}");
    assert!(defect(64, 1.0).abs() < 2.0 * d2.abs() + 1e-6);
}

#[test]
fn k0_bracket_is_exact_for_linear_time_profiles() {
    // With k = 0 the lattice identity differs from the closed form only by
    // averaging over neighbouring frames, which is exact on linear profiles.
    let (len, a) = (2.0 * TAU, 7.0);
    let p = params(2, 16, len, 16, a, 0.0);
    let w = TAU / len;
    let v = SpaceTimeField::from_frames(p.grid, p.time_grid, |_, t| {
        ScalarField::from_fn(p.grid, |x| (0.3 + 5.0 * t) * (w * x[0]).cos() * (2.0 * w * x[1]).sin())
    })
    .unwrap();
    let direct = apply_bracket_direct(&v, &p).unwrap();
    let explicit = apply_bracket_explicit(&v, &p).unwrap();
    for m in 2..p.time_grid.steps() - 1 {
        let err = direct.frame(m).sub(explicit.frame(m)).unwrap().max_abs();
        assert!(err < 1e-10 * explicit.frame(m).max_abs(), "frame {m}: {err}");
    }
    // and the closed form reduces to ((a+1)t + t|ξ|^2) on this mode
    let xi2 = 5.0 * w * w;
    for m in [0, 7, 16] {
        let t = p.time_grid.time(m);
        let expected = v.frame(m).scaled((a + 1.0) * t + t * xi2);
        assert!(explicit.frame(m).sub(&expected).unwrap().max_abs() < 1e-11 * expected.max_abs());
    }
}

#[test]
fn bracket_discrepancy_converges_at_second_order() {
    // root-mean-square over a few bumps, so one poorly resolved bump cannot decide it
    let disc = |n: usize, m: usize| {
        let p = params(2, n, 4.0, m, 10.0, 2.0);
        let ops = CarlemanOperators::new(p);
        let s: f64 = (0..4).map(|seed| bracket_discrepancy(&bump_field(&p, seed), &ops).unwrap().powi(2)).sum();
        (s / 4.0).sqrt()
    };
    let (coarse, fine) = (disc(48, 64), disc(96, 128));
    let order = (coarse / fine).log2();
    assert!(order >= 1.9, "{coarse} {fine} {order}");
}

#[test]
fn streamed_discrepancy_matches_full() {
    let p = params(3, 16, 4.0, 12, 10.0, 1.0);
    let v = bump_field(&p, 4);
    let ops = CarlemanOperators::new(p);
    let full = bracket_discrepancy(&v, &ops).unwrap();
    let streamed = streamed_bracket_discrepancy(&ops, |m| Ok(v.frame(m).clone())).unwrap();
    assert!((full - streamed).abs() < 1e-12 * full);
}

#[test]
fn batched_discrepancies_match_one_at_a_time() {
    let sets: Vec<CarlemanOperators> =
        [0.0, 1.0, 2.0].iter().map(|&k| CarlemanOperators::new(params(2, 24, 4.0, 16, 10.0, k))).collect();
    let v = bump_field(sets[0].params(), 9);
    let batched = streamed_bracket_discrepancies(&sets, |m| Ok(v.frame(m).clone())).unwrap();
    for (ops, b) in sets.iter().zip(&batched) {
        let full = bracket_discrepancy(&v, ops).unwrap();
        assert!((full - b).abs() < 1e-12 * full);
        let single = streamed_bracket_discrepancy(ops, |m| Ok(v.frame(m).clone())).unwrap();
        assert_eq!(single.to_bits(), b.to_bits());
    }
    let other = CarlemanOperators::new(params(2, 24, 4.0, 32, 10.0, 0.0));
    let mixed = [CarlemanOperators::new(params(2, 24, 4.0, 16, 10.0, 0.0)), other];
    assert!(matches!(streamed_bracket_discrepancies(&mixed, |m| Ok(v.frame(m).clone())), Err(Error::ShapeMismatch(_))));
}

#[test]
fn lattice_operators_satisfy_the_lemma() {
    for seed in 0..4 {
        let p = params(2, 32, 8.0, 32, 10.0, 2.0);
        let v = bump_field(&p, 100 + seed);
        let av = apply_a(&v, &p).unwrap();
        let bracket = apply_bracket_direct(&v, &p).unwrap();
        let lhs = av.inner(&av).unwrap();
        let rhs = bracket.inner(&v).unwrap();
        assert!(lhs >= rhs, "seed {seed}: {lhs} < {rhs}");
    }
}

#[test]
fn transform_round_trips() {
    let p = params(2, 24, 8.0, 16, 3.0, 1.5);
    let u = bump_field(&p, 9);
    let v = v_transform(&u, &p).unwrap();
    assert!(!v.rescaled);
    assert!(rel(&v_inverse(&v, &p).unwrap(), &u) < 1e-13);

    let log_domain = params(2, 24, 8.0, 16, 250.0, 1.5);
    let v = v_transform(&u, &log_domain).unwrap();
    assert!(v.rescaled);
    assert!(rel(&v_inverse(&v, &log_domain).unwrap(), &u) < 1e-12);

    let huge = params(2, 24, 8.0, 16, 1e4, 1.5);
    let v = v_transform(&u, &huge).unwrap();
    assert!(v.rescaled && v.log_scale > 300.0);
    assert!(v.field.max_abs().is_finite() && v.field.max_abs() > 0.0);
}

#[test]
fn transform_with_a_zero_divides_by_h() {
    let p = params(2, 8, 8.0, 4, 0.0, 1.0);
    let u = SpaceTimeField::from_frames(p.grid, p.time_grid, |_, t| ScalarField::from_fn(p.grid, |x| x[0] + t)).unwrap();
    let v = v_transform(&u, &p).unwrap();
    for m in 0..=4 {
        let t = p.time_grid.time(m);
        for (i, x) in p.grid.points().enumerate() {
            let expected = (x[0] + t) * (-t).exp().recip() / t / (1.0 + x[0] * x[0] + x[1] * x[1]);
            assert!((v.field.frame(m).data()[i] - expected).abs() < 1e-12 * expected.abs().max(1.0));
        }
    }
}

#[test]
fn energy_identity_window() {
    for (a, k) in [(1.0, 0.0), (2.0, 1.0)] {
        let p = params(2, 48, 8.0, 256, a, k);
        let u = bump_field(&p, 21);
        let e = energy_comparison(&u, &p).unwrap();
        assert!(e.within_window(1e-2), "{e:?}");
        assert!(!e.rescaled);
    }
}

#[test]
fn long_horizons_and_mismatched_grids_are_rejected() {
    let w = WeightParams::new(1.0, 1.0, SpatialExponent::DoubleK).unwrap();
    let g = Grid::new(2, 8, 4.0).unwrap();
    let long = TimeGrid::exploratory(0.1, 0.9, 8).unwrap();
    assert!(matches!(CarlemanParams::new(w, g, long), Err(Error::InvalidTimeGrid(_))));
    let p = params(2, 8, 4.0, 8, 1.0, 1.0);
    let other = SpaceTimeField::zeros(Grid::new(2, 16, 4.0).unwrap(), p.time_grid);
    assert!(matches!(apply_j(&other, &p), Err(Error::ShapeMismatch(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matrix_lemma_holds(class in 0usize..4, dim in 2usize..=16, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(MatrixClass::ALL[class], dim, &mut rng);
        let report = lemma_commutator_check(&a, 20, seed ^ 0x5eed);
        prop_assert!(report.passed());
        prop_assert!(report.min_normalized_slack >= -1e-9);
    }
}
