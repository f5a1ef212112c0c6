//! Both sides of the weighted heat-operator estimate, its cutoff limit, and the
//! weighted Calderón–Zygmund bound, evaluated on test-function families.

pub mod cutoff;
pub mod cz;
pub mod family;
pub mod sweep;
pub mod theorem;

pub use cutoff::{cutoff_convergence_study, CutoffReport, CutoffRow, CUTOFF_CAUCHY_TOL};
pub use cz::{ap_failure_probe, cz_lhs, cz_ratio, cz_rhs, first_axis_tensor, ApProbeReport, ApProbeRow};
pub use family::{standard_family, FamilyMember, MemberKind};
pub use sweep::{log_weight_step, theorem_ratio_sweep, RatioReport, RatioRow, RESOLVED_LOG_WEIGHT_STEP};
pub use theorem::{theorem_lhs, theorem_rhs, TheoremIntegrals};
