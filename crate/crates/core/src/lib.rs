//! Exponentially fitted finite elements for convection-diffusion-reaction
//! problems with full symmetric positive definite diffusion tensors.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`]: simplicial meshes (triangles, tetrahedra), structured
//!   generators, element geometry and the plain-text mesh format.
//! * [`coeff`]: coefficient fields `D`, `b`, `gamma`, `f`, `g`, the
//!   dispersion tensor, the alpha-scaled flux variant and a tiny expression
//!   language for config-defined fields.
//! * [`scheme`]: the edge kernel (Bernoulli weights, edge potentials,
//!   harmonic averages), local matrices and global assembly.
//! * [`linalg`]: compressed sparse rows, restarted GMRES, dense fallback and
//!   the M-matrix check.
//! * [`analysis`]: monotonicity audit, discrete maximum principle runs, the
//!   Nedelec expansion identity, error norms and convergence studies.
//! * [`catalog`]: built-in manufactured problems.

pub mod analysis;
pub mod catalog;
pub mod coeff;
mod error;
pub mod linalg;
pub mod mesh;
pub mod quadrature;
pub mod scheme;
pub mod vtk;

pub use error::{Error, Result};

/// Points and vectors are stored in three components; 2D data keeps `z = 0`.
pub type Point = nalgebra::Vector3<f64>;
/// Small tensors are stored as 3x3; in 2D the third row and column are
/// padded with the identity.
pub type Tensor = nalgebra::Matrix3<f64>;
