//! Test-function families for the weighted estimate, generated frame by frame.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{make_bump, BumpSampler, BumpSpec, Grid, ScalarField, TemporalSupport, TimeGrid};
use crate::spectral::heat;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MemberKind {
    /// Sum of space-time bumps.
    Bumps { specs: Vec<BumpSpec> },
    /// `φ(t) b(x)`.
    Separable { temporal: TemporalSupport, spatial: BumpSpec },
    /// `χ(t) e^{(T+ - t)Δ} b`: solves the backward heat equation where `χ = 1`,
    /// so `∂t u + Δu = χ'(t) e^{(T+ - t)Δ} b` is small.
    NearCaloric { window: TemporalSupport, spatial: BumpSpec },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub id: String,
    pub seed: Option<u64>,
    pub kind: MemberKind,
}

impl FamilyMember {
    /// Frame `m` on the given lattice.
    pub fn frame(&self, grid: &Grid, time_grid: &TimeGrid, m: usize) -> Result<ScalarField> {
        let t = time_grid.time(m);
        match &self.kind {
            MemberKind::Bumps { specs } => {
                let mut f = ScalarField::zeros(*grid);
                for spec in specs {
                    let temporal = spec
                        .temporal
                        .ok_or_else(|| Error::InvalidParameter("bump member needs a temporal support".into()))?;
                    let c = temporal.value(t);
                    if c != 0.0 {
                        f.axpy(c, &make_bump(spec, grid)?)?;
                    }
                }
                Ok(f)
            }
            MemberKind::Separable { temporal, spatial } => {
                let c = temporal.value(t);
                Ok(make_bump(spatial, grid)?.scaled(c))
            }
            MemberKind::NearCaloric { window, spatial } => {
                let c = window.value(t);
                if c == 0.0 {
                    return Ok(ScalarField::zeros(*grid));
                }
                Ok(heat(&make_bump(spatial, grid)?, time_grid.t_plus() - t)?.scaled(c))
            }
        }
    }

    /// Checks supports against the lattice before any frame is built.
    pub fn validate(&self, grid: &Grid, time_grid: &TimeGrid) -> Result<()> {
        let (spatial, temporal): (Vec<&BumpSpec>, Vec<TemporalSupport>) = match &self.kind {
            MemberKind::Bumps { specs } => (
                specs.iter().collect(),
                specs.iter().map(|s| s.temporal.ok_or_else(|| Error::InvalidParameter("missing temporal support".into()))).collect::<Result<_>>()?,
            ),
            MemberKind::Separable { temporal, spatial } => (vec![spatial], vec![*temporal]),
            MemberKind::NearCaloric { window, spatial } => (vec![spatial], vec![*window]),
        };
        for s in spatial {
            make_bump(s, grid)?;
        }
        if let Some(t) = temporal.iter().find(|t| !t.fits_inside(time_grid)) {
            return Err(Error::Support(format!(
                "temporal support [{}, {}] of member {} leaves ({}, {})",
                t.center - t.halfwidth,
                t.center + t.halfwidth,
                self.id,
                time_grid.t_minus(),
                time_grid.t_plus()
            )));
        }
        Ok(())
    }
}

pub const STANDARD_SUPERPOSITIONS: usize = 10;
pub const STANDARD_SEPARABLE: usize = 3;
pub const STANDARD_NEAR_CALORIC: usize = 2;

/// Ten seeded superpositions, three separable fields and two near-caloric fields.
///
/// Member seeds are drawn from one stream seeded by `seed`, so the family is a
/// pure function of `(seed, grid, time_grid)`.
pub fn standard_family(seed: u64, grid: &Grid, time_grid: &TimeGrid) -> Result<Vec<FamilyMember>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampler = BumpSampler::default();
    let mut out = Vec::new();
    for i in 0..STANDARD_SUPERPOSITIONS {
        let member_seed: u64 = rng.random();
        let specs = sampler.sample(&mut ChaCha8Rng::seed_from_u64(member_seed), grid, time_grid)?;
        out.push(FamilyMember { id: format!("bumps-{i}"), seed: Some(member_seed), kind: MemberKind::Bumps { specs } });
    }
    for i in 0..STANDARD_SEPARABLE + STANDARD_NEAR_CALORIC {
        let member_seed: u64 = rng.random();
        let specs = sampler.sample(&mut ChaCha8Rng::seed_from_u64(member_seed), grid, time_grid)?;
        let spec = specs[0];
        let temporal = spec.temporal.expect("sampler sets temporal supports");
        let spatial = BumpSpec { temporal: None, ..spec };
        let (id, kind) = if i < STANDARD_SEPARABLE {
            (format!("separable-{i}"), MemberKind::Separable { temporal, spatial })
        } else {
            let j = i - STANDARD_SEPARABLE;
            (format!("near-caloric-{j}"), MemberKind::NearCaloric { window: temporal, spatial })
        };
        out.push(FamilyMember { id, seed: Some(member_seed), kind });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_family_shape_and_determinism() {
        let g = Grid::new(2, 16, 8.0).unwrap();
        let tg = TimeGrid::default_with_steps(16).unwrap();
        let a = standard_family(7, &g, &tg).unwrap();
        let b = standard_family(7, &g, &tg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 15);
        assert_ne!(a, standard_family(8, &g, &tg).unwrap());
        for m in &a {
            m.validate(&g, &tg).unwrap();
            assert_eq!(m.frame(&g, &tg, 0).unwrap().max_abs(), 0.0);
            assert_eq!(m.frame(&g, &tg, 16).unwrap().max_abs(), 0.0);
            assert!(m.frame(&g, &tg, 8).unwrap().max_abs() > 0.0);
        }
    }

    #[test]
    fn near_caloric_member_follows_backward_heat_flow() {
        let g = Grid::new(2, 32, 8.0).unwrap();
        let tg = TimeGrid::default_with_steps(16).unwrap();
        let spatial = BumpSpec::spatial([0.0; 3], 1.5, 1.0);
        let window = TemporalSupport { center: 0.06, halfwidth: 0.039, amplitude: 1.0 };
        let m = FamilyMember { id: "nc".into(), seed: None, kind: MemberKind::NearCaloric { window, spatial } };
        let f = m.frame(&g, &tg, 8).unwrap();
        let expected = heat(&make_bump(&spatial, &g).unwrap(), 0.1 - 0.06).unwrap().scaled(window.value(0.06));
        assert!(f.sub(&expected).unwrap().max_abs() < 1e-14);
    }
}
