//! Sparse storage, Krylov and dense solvers, and the M-matrix check.

mod csr;
mod mmatrix;
mod solver;

pub use csr::CsrMatrix;
pub use mmatrix::{mmatrix_check, MMatrixVerdict};
pub use solver::{solve, Preconditioner, SolveReport, SolverOptions};
