//! Conjugated heat operator, its symmetric/skew split, and the commutator identity.

pub mod lemma;
pub mod operators;
pub mod params;
pub mod transform;

pub use lemma::{class_sweep, lemma_commutator_check, random_matrix, ClassReport, LemmaReport, MatrixClass};
pub use operators::{
    apply_a, apply_bracket_direct, apply_bracket_explicit, apply_j, apply_k, apply_l, time_derivative,
    CarlemanOperators,
};
pub use params::{v1, v2, CarlemanParams, PotentialProfile};
pub use transform::{energy_comparison, v_inverse, v_transform, EnergyComparison, WeightedField};

use crate::error::{Error, Result};
use crate::field::quadrature::InnerProduct;
use crate::field::{ScalarField, SpaceTimeField};
use operators::{frame_derivatives, is_zero, Derivatives, Want};

/// `‖[J,K]_direct v - [J,K]_explicit v‖ / ‖[J,K]_explicit v‖` in the space-time pairing.
pub fn bracket_discrepancy(v: &SpaceTimeField, ops: &CarlemanOperators) -> Result<f64> {
    let direct = ops.bracket_direct(v)?;
    let explicit = ops.bracket_explicit(v)?;
    let diff = direct.sub(&explicit)?;
    Ok((diff.inner(&diff)? / explicit.inner(&explicit)?).sqrt())
}

/// Same quantity as [`bracket_discrepancy`] with frames of `v` produced on
/// demand; at most three frames of `v` and of `Jv` are alive at once.
pub fn streamed_bracket_discrepancy(
    ops: &CarlemanOperators,
    frame: impl Fn(usize) -> Result<ScalarField>,
) -> Result<f64> {
    Ok(streamed_bracket_discrepancies(std::slice::from_ref(ops), frame)?[0])
}

/// [`streamed_bracket_discrepancy`] for several operator sets on one lattice.
///
/// Each frame of `v` is produced and transformed once; its derivatives are
/// shared by `J`, `K` and the closed form of every operator set.
pub fn streamed_bracket_discrepancies(
    ops: &[CarlemanOperators],
    frame: impl Fn(usize) -> Result<ScalarField>,
) -> Result<Vec<f64>> {
    let Some(first) = ops.first() else {
        return Ok(Vec::new());
    };
    let (grid, tg) = (first.params().grid, first.params().time_grid);
    if ops.iter().any(|o| o.params().grid != grid || o.params().time_grid != tg) {
        return Err(Error::ShapeMismatch("operator sets use different lattices".into()));
    }
    let last = tg.steps();
    // a frame, its derivatives unless it is zero, and J applied to it for each operator set
    type Slot = Option<(ScalarField, Option<Derivatives>, Vec<ScalarField>)>;
    let fetch = |m: usize| -> Result<Slot> {
        if m > last {
            return Ok(None);
        }
        let f = frame(m)?;
        if *f.grid() != grid {
            return Err(Error::ShapeMismatch("frame grid differs from the operator grid".into()));
        }
        if is_zero(&f) {
            let jf = vec![f.clone(); ops.len()];
            return Ok(Some((f, None, jf)));
        }
        let dv = frame_derivatives(&f, Want::ALL);
        let jf = ops.iter().map(|o| o.j_with(&f, &dv, tg.time(m))).collect();
        Ok(Some((f, Some(dv), jf)))
    };
    let mut slots: [Slot; 3] = [None, fetch(0)?, fetch(1)?];
    let (mut diff2, mut ref2) = (vec![0.0; ops.len()], vec![0.0; ops.len()]);
    for m in 0..=last {
        let t = tg.time(m);
        let [prev, cur, next] = &slots;
        let (f, dv, jf) = cur.as_ref().expect("frame m exists");
        let ut = first.time_difference(prev.as_ref().map(|s| &s.0), next.as_ref().map(|s| &s.0));
        for (i, o) in ops.iter().enumerate() {
            let (kv, explicit) = match dv {
                Some(dv) => (o.k_with(&ut, f, dv, t), o.explicit_with(f, dv, t)),
                None => (ut.scaled(t), f.clone()),
            };
            let jk = o.j_frame(&kv, t);
            let kj = o.k_frame(prev.as_ref().map(|s| &s.2[i]), &jf[i], next.as_ref().map(|s| &s.2[i]), t);
            let d = jk.sub(&kj)?.sub(&explicit)?;
            diff2[i] += d.inner(&d)?;
            ref2[i] += explicit.inner(&explicit)?;
        }
        let incoming = fetch(m + 2)?;
        slots = [slots[1].take(), slots[2].take(), incoming];
    }
    Ok(diff2.iter().zip(&ref2).map(|(d, r)| (d / r).sqrt()).collect())
}
