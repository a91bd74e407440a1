//! Discrete complex Hessian measures on the flat torus.
//!
//! The crate is organized in layers:
//!
//! - [`hermitian`]: pointwise algebra — Hermitian matrices, generalized
//!   eigenvalues with respect to a positive-definite metric, elementary
//!   symmetric polynomials, Gårding-cone membership, and normalized
//!   (mixed) Hessian densities via polarization.
//! - [`forms`]: an independent brute-force exterior-algebra oracle that
//!   expands top-degree wedge products of (1,1)-forms over all permutation
//!   pairs. It exists to cross-check the polarization route, not for speed.
//! - [`potential`] / [`torus`]: closed-form test potentials, periodic grids,
//!   finite-difference complex Hessians, and gradient norms.
//! - [`measures`]: field-level Hessian and mixed-Hessian densities,
//!   m-subharmonicity verification, masked integration, and the total-mass
//!   conservation check.
//! - [`inequality`]: the mixed Hessian inequality, the comparison principle,
//!   and the domination principle on field instances, with hard hypothesis
//!   refusals distinct from failures.
//! - [`singular`]: regularized log-max potentials, the 2-D radial quadrature
//!   for their singular masses, the k³ ratio law and its violation check,
//!   and the W^{1,2} boundedness table.
//! - [`capacity`]: certified lower bounds on the m-capacity of grid regions
//!   by seeded search over an admissible family.
//! - [`report`] / [`config`] / [`field_io`]: machine-readable check reports,
//!   key-value run configuration, and the binary field interchange format.
//!
//! Convention: the internal dd^c scaling is fixed so that dd^c|z|² equals the
//! identity metric exactly. All externally quoted constants that depend on a
//! d^c normalization are reconciled through a single measured calibration
//! constant `c_conv` (see [`singular::conv_constant_report`]), and
//! acceptance-grade checks bind only to convention-invariant ratios.

pub mod capacity;
pub mod config;
pub mod error;
pub mod field_io;
pub mod forms;
pub mod hermitian;
pub mod inequality;
pub mod measures;
pub mod potential;
pub mod report;
pub mod sampling;
pub mod singular;
pub mod sum;
pub mod svg;
pub mod tol;
pub mod torus;

pub use error::LabError;
pub use report::{CheckOutcome, CheckReport, Provenance};
