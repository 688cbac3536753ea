//! Diagnostics and verification of the scheme.

mod convergence;
mod dmp;
mod monotone;
mod nedelec;
mod norms;

pub use convergence::{convergence_study, write_csv, ConvergenceRecord, StudyOptions, StudyOutcome, CSV_HEADER};
pub use dmp::{dmp_experiment, DmpOutcome};
pub use monotone::{monotonicity_audit, monotonicity_cross_check, EdgeSum, MonotonicityReport};
pub use nedelec::{nedelec_identity_test, NedelecResidual};
pub use norms::{error_norms, ErrorNorms, ExactSolution, NormTriple};
