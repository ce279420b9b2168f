//! Dense linear-algebra kernels: Schur forms, Lyapunov and Riccati solvers,
//! matrix exponential/logarithm, and the symmetric-definite generalized
//! eigensolver. Containers are nalgebra matrices; the O(n^3) primitives are
//! delegated to LAPACK (see `backend`), the algorithms on top are local.

pub(crate) mod backend;
mod eig;
mod expm;
mod logm;
mod lyapunov;
mod riccati;
mod schur;

pub use eig::{eig_sym_gen, ScaledModalEigen};
pub use expm::matrix_exp;
pub use logm::matrix_log;
pub use lyapunov::{solve_gen_lyapunov, solve_gen_lyapunov_dual, solve_lyapunov};
pub use riccati::{solve_pr_riccati, RiccatiSolution};
pub use schur::{complex_schur, schur, ComplexSchurForm, SchurForm};

use num_complex::Complex64;
use thiserror::Error;

pub type DMat = nalgebra::DMatrix<f64>;
pub type DVec = nalgebra::DVector<f64>;
pub type CMat = nalgebra::DMatrix<Complex64>;
pub type CVec = nalgebra::DVector<Complex64>;

#[derive(Debug, Error)]
pub enum LinAlgError {
    #[error("iteration failed to converge: {0}")]
    NonConvergence(&'static str),
    #[error("Lyapunov operator is singular: eigenvalue pair sum {value:.3e} below separation tolerance")]
    SingularSeparation { value: f64 },
    #[error("matrix is singular or too ill-conditioned (rcond = {rcond:.3e})")]
    SingularMatrix { rcond: f64 },
    #[error("no stabilizing Riccati solution: {0}")]
    NoStabilizingSolution(&'static str),
    #[error("matrix exponential overflow: scaled norm {0:.3e}")]
    Overflow(f64),
    #[error("matrix logarithm branch cut: eigenvalue {re:.3e}{im:+.3e}i too close to the closed negative real axis")]
    BranchCut { re: f64, im: f64 },
    #[error("matrix expected symmetric positive definite is not ({0})")]
    NotPositiveDefinite(&'static str),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry encountered in {0}")]
    NonFinite(&'static str),
    #[error("LAPACK {routine} failed with info = {info}")]
    Backend { routine: &'static str, info: i32 },
}

/// Frobenius norm shorthand.
pub fn fro(a: &DMat) -> f64 {
    a.norm()
}

/// Frobenius norm of a complex matrix.
pub fn fro_c(a: &CMat) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Returns an error when `a` contains NaN or infinite entries.
pub fn check_finite(a: &DMat, what: &'static str) -> Result<(), LinAlgError> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(LinAlgError::NonFinite(what))
    }
}

/// `(a + a^T) / 2`, used after solves that are symmetric in exact arithmetic.
pub fn symmetrize(a: &DMat) -> DMat {
    let mut s = a.clone();
    let n = a.nrows();
    for j in 0..n {
        for i in 0..j {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    s
}

pub fn is_symmetric(a: &DMat, rel_tol: f64) -> bool {
    if a.nrows() != a.ncols() {
        return false;
    }
    let scale = a.norm().max(1e-300);
    let mut dev: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..j {
            dev = dev.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    dev <= rel_tol * scale
}

/// Real part of a complex matrix.
pub fn re_part(a: &CMat) -> DMat {
    DMat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)].re)
}

/// Imaginary part of a complex matrix.
pub fn im_part(a: &CMat) -> DMat {
    DMat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)].im)
}

/// Lift a real matrix into the complex type.
pub fn to_complex(a: &DMat) -> CMat {
    CMat::from_fn(a.nrows(), a.ncols(), |i, j| Complex64::new(a[(i, j)], 0.0))
}
