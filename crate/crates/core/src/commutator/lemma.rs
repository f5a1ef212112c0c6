//! `‖Ax‖^2 >= <[J,K]x, x>` for `J = (A+Aᵀ)/2`, `K = (A-Aᵀ)/2` on finite-dimensional spaces.
//!
//! The slack equals `‖Jx‖^2 + ‖Kx‖^2`, so the inequality is exact up to rounding.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Relative rounding allowance `1e-9 ‖x‖^2 ‖A‖^2`.
pub const LEMMA_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixClass {
    Dense,
    Symmetric,
    Skew,
    Nilpotent,
}

impl MatrixClass {
    pub const ALL: [MatrixClass; 4] = [Self::Dense, Self::Symmetric, Self::Skew, Self::Nilpotent];

    pub fn label(&self) -> &'static str {
        match self {
            Self::Dense => "dense",
            Self::Symmetric => "symmetric",
            Self::Skew => "skew",
            Self::Nilpotent => "nilpotent",
        }
    }
}

/// Entries uniform in `[-1, 1)`; nilpotent matrices are strictly upper
/// triangular matrices conjugated by a random orthogonal matrix.
pub fn random_matrix(class: MatrixClass, dim: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let mut base = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
    match class {
        MatrixClass::Dense => base,
        MatrixClass::Symmetric => (&base + base.transpose()) * 0.5,
        MatrixClass::Skew => (&base - base.transpose()) * 0.5,
        MatrixClass::Nilpotent => {
            for i in 0..dim {
                for j in 0..=i {
                    base[(i, j)] = 0.0;
                }
            }
            let q = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0)).qr().q();
            &q * base * q.transpose()
        }
    }
}

pub fn symmetric_part(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

pub fn skew_part(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a - a.transpose()) * 0.5
}

pub fn commutator(j: &DMatrix<f64>, k: &DMatrix<f64>) -> DMatrix<f64> {
    j * k - k * j
}

/// Largest singular value.
pub fn operator_norm(a: &DMatrix<f64>) -> f64 {
    a.singular_values().max()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub dim: usize,
    pub trials: usize,
    /// Smallest `‖Ax‖^2 - <[J,K]x,x>` seen.
    pub min_slack: f64,
    /// Smallest slack divided by `‖x‖^2 ‖A‖^2`.
    pub min_normalized_slack: f64,
    pub violations: usize,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

pub fn lemma_commutator_check(a: &DMatrix<f64>, trials: usize, rng_seed: u64) -> LemmaReport {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let n = a.nrows();
    let bracket = commutator(&symmetric_part(a), &skew_part(a));
    let norm2 = operator_norm(a).powi(2);
    let mut report = LemmaReport {
        dim: n,
        trials,
        min_slack: f64::INFINITY,
        min_normalized_slack: f64::INFINITY,
        violations: 0,
    };
    for _ in 0..trials {
        let x = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let slack = slack(a, &bracket, &x);
        let scale = x.norm_squared() * norm2;
        report.min_slack = report.min_slack.min(slack);
        if scale > 0.0 {
            report.min_normalized_slack = report.min_normalized_slack.min(slack / scale);
        }
        if slack < -LEMMA_TOLERANCE * scale {
            report.violations += 1;
        }
    }
    report
}

/// `‖Ax‖^2 - <[J,K]x, x>` with the bracket precomputed.
pub fn slack(a: &DMatrix<f64>, bracket: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    (a * x).norm_squared() - (bracket * x).dot(x)
}

/// Aggregate over many random matrices of one class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class: MatrixClass,
    pub matrices: usize,
    pub trials_per_matrix: usize,
    pub min_normalized_slack: f64,
    pub violations: usize,
}

/// Dimensions are drawn uniformly from `min_dim..=max_dim`.
pub fn class_sweep(
    class: MatrixClass,
    matrices: usize,
    trials: usize,
    (min_dim, max_dim): (usize, usize),
    seed: u64,
) -> ClassReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ClassReport { class, matrices, trials_per_matrix: trials, min_normalized_slack: f64::INFINITY, violations: 0 };
    for _ in 0..matrices {
        let dim = rng.random_range(min_dim..=max_dim);
        let a = random_matrix(class, dim, &mut rng);
        let r = lemma_commutator_check(&a, trials, rng.random());
        out.min_normalized_slack = out.min_normalized_slack.min(r.min_normalized_slack);
        out.violations += r.violations;
    }
    out
}
