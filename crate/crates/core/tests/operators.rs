use std::f64::consts::TAU;

use carlemanlab_core::field::quadrature::InnerProduct;
use carlemanlab_core::field::{Grid, ScalarField, TensorField, VectorField};
use carlemanlab_core::spectral::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rel(a: &ScalarField, b: &ScalarField) -> f64 {
    a.sub(b).unwrap().l2_norm() / b.l2_norm().max(f64::MIN_POSITIVE)
}

fn vrel(a: &VectorField, b: &VectorField) -> f64 {
    a.sub(b).unwrap().l2_norm() / b.l2_norm().max(f64::MIN_POSITIVE)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn tau_box(dim: usize, n: usize) -> Grid {
    Grid::new(dim, n, TAU).unwrap()
}

#[test]
fn laplacian_of_sine_is_eigenfunction() {
    let l = 3.0;
    let g = Grid::new(3, 16, l).unwrap();
    let k = TAU / l;
    let f = ScalarField::from_fn(g, |x| (k * x[0]).sin()).unwrap();
    let lap = laplacian(&f);
    assert!(rel(&lap, &f.scaled(-k * k)) < 1e-12);
}

#[test]
fn divergence_of_gradient_is_laplacian() {
    for dim in [2, 3] {
        let g = Grid::new(dim, 16, 5.0).unwrap();
        let f = random_smooth_field(g, &mut rng(3), 3.0);
        assert!(rel(&divergence(&gradient(&f)), &laplacian(&f)) < 1e-12);
    }
}

#[test]
fn divergence_of_curl_vanishes() {
    let g = Grid::new(3, 16, 5.0).unwrap();
    let u = random_smooth_vector(g, &mut rng(4), 3.0);
    let d = divergence(&curl(&u).unwrap());
    assert!(d.l2_norm() <= 1e-12 * u.l2_norm());
    let g2 = Grid::new(2, 16, 5.0).unwrap();
    assert!(curl(&random_smooth_vector(g2, &mut rng(4), 3.0)).is_err());
}

#[test]
fn curl_of_rotation_field() {
    // u = (-sin y, sin x, 0): curl = (0, 0, cos x + cos y)
    let g = tau_box(3, 16);
    let u = VectorField::from_fn(g, |x| [-x[1].sin(), x[0].sin(), 0.0]).unwrap();
    let expected = VectorField::from_fn(g, |x| [0.0, 0.0, x[0].cos() + x[1].cos()]).unwrap();
    assert!(vrel(&curl(&u).unwrap(), &expected) < 1e-12);
}

#[test]
fn hessian_matches_closed_form() {
    let g = tau_box(2, 16);
    let f = ScalarField::from_fn(g, |x| (x[0]).sin() * (2.0 * x[1]).cos()).unwrap();
    let h = hessian(&f);
    let fxy = ScalarField::from_fn(g, |x| -2.0 * x[0].cos() * (2.0 * x[1]).sin()).unwrap();
    assert!(rel(h.get(0, 1), &fxy) < 1e-12);
    assert!(rel(h.get(1, 0), &fxy) < 1e-12);
    assert!(rel(h.get(1, 1), &f.scaled(-4.0)) < 1e-12);
}

#[test]
fn heat_semigroup_examples() {
    let g = tau_box(3, 16);
    let f = ScalarField::from_fn(g, |x| x[0].sin()).unwrap();
    assert!(rel(&heat(&f, 0.0).unwrap(), &f) < 1e-14);
    assert!(rel(&heat(&f, 0.5).unwrap(), &f.scaled((-0.5f64).exp())) < 1e-12);
    assert!(heat(&f, -0.1).is_err());
    let r = random_smooth_field(g, &mut rng(5), 3.0);
    let two = heat(&heat(&r, 0.1).unwrap(), 0.2).unwrap();
    assert!(rel(&two, &heat(&r, 0.3).unwrap()) < 1e-12);
}

#[test]
fn leray_examples() {
    let g = Grid::new(3, 16, 4.0).unwrap();
    let phi = random_smooth_field(g, &mut rng(6), 3.0);
    let grad = gradient(&phi);
    assert!(leray(&grad).l2_norm() <= 1e-12 * grad.l2_norm());
    let u = random_smooth_vector(g, &mut rng(7), 3.0);
    let pu = leray(&u);
    assert!(vrel(&leray(&pu), &pu) < 1e-12);
    assert!(divergence(&pu).l2_norm() <= 1e-10 * u.l2_norm());
    // constants are divergence-free and pass through
    let c = VectorField::from_fn(g, |_| [1.0, -2.0, 0.5]).unwrap();
    assert!(vrel(&leray(&c), &c) < 1e-14);
}

#[test]
fn riesz_examples() {
    let g = tau_box(3, 16);
    let f = ScalarField::from_fn(g, |x| x[0].sin()).unwrap();
    assert!(rel(&riesz_second(0, 0, &f).unwrap(), &f) < 1e-12);
    assert!(riesz_second(0, 1, &f).unwrap().l2_norm() < 1e-12);
    assert!(riesz_second(0, 3, &f).is_err());
    let r = random_smooth_field(g, &mut rng(8), 3.0).map(|v| v + 0.7).unwrap();
    let mut trace = ScalarField::zeros(g);
    for i in 0..3 {
        trace = trace.add(&riesz_second(i, i, &r).unwrap()).unwrap();
    }
    let mean = r.mean();
    let expected = r.map(|v| v - mean).unwrap();
    assert!(trace.sub(&expected).unwrap().l2_norm() <= 1e-12 * r.l2_norm());
}

#[test]
fn cz_divergence_examples() {
    let g = Grid::new(3, 16, 4.0).unwrap();
    let c = TensorField::scalar_identity(&ScalarField::constant(g, 3.0));
    assert!(cz_divergence(&c).l2_norm() < 1e-12);

    let u = random_smooth_vector(g, &mut rng(9), 3.0);
    let v = random_smooth_vector(g, &mut rng(10), 3.0);
    let big_f = TensorField::outer(&u, &v).unwrap();
    let composed = gradient(&inverse_neg_laplacian(&divergence(&tensor_divergence(&big_f))));
    let direct = cz_divergence(&big_f);
    assert!(vrel(&direct, &composed) < 1e-12);
}

#[test]
fn cz_divergence_on_single_mode() {
    // F_00 = cos θ with θ = x1 + 2 x2 and every other entry 0.
    let g = tau_box(3, 16);
    let theta = |x: [f64; 3]| x[0] + 2.0 * x[1];
    let mut comps = vec![ScalarField::zeros(g); 9];
    comps[0] = ScalarField::from_fn(g, |x| theta(x).cos()).unwrap();
    let out = cz_divergence(&TensorField::new(comps).unwrap());
    // symbol -i xi_i xi_0^2 / |xi|^2 = -i xi_i / 5 maps cos θ to (xi_i / 5) sin θ
    let xi = [1.0, 2.0, 0.0];
    let expected = VectorField::from_fn(g, |x| {
        let s = theta(x).sin();
        [xi[0] / 5.0 * s, xi[1] / 5.0 * s, 0.0]
    })
    .unwrap();
    assert!(vrel(&out, &expected) < 1e-12);
}

#[test]
fn pressure_gradient_examples() {
    let g = tau_box(3, 16);
    let c = VectorField::from_fn(g, |_| [1.0, 2.0, 3.0]).unwrap();
    assert!(pressure_gradient(&c, None).unwrap().l2_norm() < 1e-12);
    let shear = VectorField::from_fn(g, |x| [x[1].sin(), 0.0, 0.0]).unwrap();
    assert!(pressure_gradient(&shear, None).unwrap().l2_norm() < 1e-12);

    // -div(∇p) = d_i d_j(u_i u_j) - div f, up to the mean
    let u = random_smooth_vector(g, &mut rng(11), 2.5);
    let big_f = TensorField::outer(&random_smooth_vector(g, &mut rng(12), 2.5), &u).unwrap();
    let gp = pressure_gradient(&u, Some(&big_f)).unwrap();
    let uu = TensorField::outer(&u, &u).unwrap();
    let lhs = divergence(&gp).scaled(-1.0);
    let rhs = divergence(&tensor_divergence(&uu)).sub(&divergence(&tensor_divergence(&big_f))).unwrap();
    let m = rhs.mean();
    let rhs = rhs.map(|v| v - m).unwrap();
    assert!(lhs.sub(&rhs).unwrap().l2_norm() <= 1e-10 * rhs.l2_norm());
}

#[test]
fn transform_roundtrip_and_parseval() {
    for (dim, n) in [(2, 32), (3, 16)] {
        let g = Grid::new(dim, n, 3.0).unwrap();
        let f = random_smooth_field(g, &mut rng(13), 4.0);
        let h = random_smooth_field(g, &mut rng(14), 4.0);
        assert!(rel(&Spectrum::forward(&f).inverse(), &f) < 1e-12);
        let direct = f.inner(&h).unwrap();
        let spectral = spectral_inner(&f, &h).unwrap();
        assert!((direct - spectral).abs() <= 1e-10 * f.l2_norm() * h.l2_norm());
    }
}

#[test]
fn multiplier_type_roundtrip() {
    let g = Grid::new(2, 16, 2.0).unwrap();
    let heat_m = SpectralMultiplier::real(g, |xi| (-0.1 * (xi[0] * xi[0] + xi[1] * xi[1])).exp());
    assert!(heat_m.is_hermitian(0.0));
    let f = random_smooth_field(g, &mut rng(15), 3.0);
    assert!(rel(&heat_m.apply(&f).unwrap(), &heat(&f, 0.1).unwrap()) < 1e-12);
    let twice = heat_m.compose(&heat_m).unwrap();
    assert!(rel(&twice.apply(&f).unwrap(), &heat(&f, 0.2).unwrap()) < 1e-12);
    assert!(heat_m.max_abs() <= 1.0);
}

/// The operators under test, each as a scalar-to-scalar map.
fn scalar_ops() -> Vec<(&'static str, Box<dyn Fn(&ScalarField) -> ScalarField>)> {
    vec![
        ("laplacian", Box::new(laplacian)),
        ("d0", Box::new(|f| partial(f, 0).unwrap())),
        ("d1", Box::new(|f| partial(f, 1).unwrap())),
        ("heat", Box::new(|f| heat(f, 0.05).unwrap())),
        ("r01", Box::new(|f| riesz_second(0, 1, f).unwrap())),
        ("r22", Box::new(|f| riesz_second(2, 2, f).unwrap())),
        ("inv", Box::new(inverse_neg_laplacian)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn multipliers_commute(seed in any::<u64>()) {
        let g = Grid::new(3, 12, 3.0).unwrap();
        let f = random_smooth_field(g, &mut rng(seed), 3.0);
        let ops = scalar_ops();
        for (i, (na, a)) in ops.iter().enumerate() {
            for (nb, b) in ops.iter().skip(i + 1) {
                let ab = a(&b(&f));
                let ba = b(&a(&f));
                let scale = ab.l2_norm().max(f.l2_norm());
                prop_assert!(ab.sub(&ba).unwrap().l2_norm() <= 1e-12 * scale, "{} vs {}", na, nb);
            }
        }
    }

    #[test]
    fn leray_is_self_adjoint(seed in any::<u64>()) {
        let g = Grid::new(3, 12, 3.0).unwrap();
        let mut r = rng(seed);
        let u = random_smooth_vector(g, &mut r, 3.0);
        let v = random_smooth_vector(g, &mut r, 3.0);
        let a = leray(&u).inner(&v).unwrap();
        let b = u.inner(&leray(&v)).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * u.l2_norm() * v.l2_norm());
    }

    #[test]
    fn heat_is_a_contraction(seed in any::<u64>(), t in 0.0f64..2.0) {
        let g = Grid::new(2, 16, 3.0).unwrap();
        let f = random_smooth_field(g, &mut rng(seed), 4.0);
        prop_assert!(heat(&f, t).unwrap().l2_norm() <= f.l2_norm() * (1.0 + 1e-14));
    }

    #[test]
    fn zeroth_order_operators_have_norm_at_most_one(seed in any::<u64>()) {
        let g = Grid::new(3, 12, 3.0).unwrap();
        let mut r = rng(seed);
        let f = random_smooth_field(g, &mut r, 3.0);
        for i in 0..3 {
            for j in 0..3 {
                let q = riesz_second(i, j, &f).unwrap().l2_norm() / f.l2_norm();
                prop_assert!(q <= 1.0 + 1e-12);
            }
        }
        // ℛ = ∇(-Δ)^{-1}∇· on vectors, a zeroth-order Calderón–Zygmund operator
        let u = random_smooth_vector(g, &mut r, 3.0);
        let ru = gradient(&inverse_neg_laplacian(&divergence(&u)));
        prop_assert!(ru.l2_norm() <= u.l2_norm() * (1.0 + 1e-12));
    }
}
