//! Structure-preserving model order reduction for second-order mechanical
//! systems of the form
//!
//! ```text
//!     M q''(t) + D q'(t) + K q(t) = Bu u(t)
//!            y(t) = Cp q(t) + Cv q'(t)
//! ```
//!
//! with symmetric positive definite `M`, `K` and symmetric positive
//! semidefinite `D`. The crate provides four reduction families plus the
//! shared infrastructure they need:
//!
//! * [`somddpa`]: modal dominance analysis for modally damped systems,
//! * [`limited_bt`]: frequency- and time-limited balanced truncation with
//!   eight second-order Gramian combinations,
//! * [`prbt`]: positive-real balanced truncation with second-order structure
//!   recovery for co-located velocity outputs,
//! * [`hinf`]: greedy interpolatory reduction steered by an L-infinity error
//!   norm engine, with optional interpolation-point refinement.
//!
//! Supporting modules: [`linalg`] (dense matrix-equation and matrix-function
//! kernels on top of LAPACK), [`models`] (benchmark model generators and
//! matrix file I/O), and [`sos`] (system types, transfer evaluation, norms).

pub mod config;
pub mod limited_bt;
pub mod linalg;
pub mod models;
pub mod prbt;
pub mod somddpa;
pub mod sos;

pub use config::Tolerances;
pub use linalg::{CMat, CVec, DMat, DVec};
pub use sos::{DescriptorSystem, SecondOrderSystem};
