//! Second-order mechanical systems and their first-order realizations.
//!
//! The central type is [`SecondOrderSystem`], the sextuple
//! `(M, D, K, B_u, C_p, C_v)` describing
//!
//! ```text
//! M q'' + D q' + K q = B_u u,      y = C_p q + C_v q'.
//! ```
//!
//! Everything downstream works either on the quadratic pencil directly or on
//! one of two first-order realizations built here: the block companion form
//! (always available) and a signature-symmetric form for colocated systems
//! with positive definite `M` and `K`.

mod forms;
mod linf;
mod transfer;

pub use forms::{companion_form, symmetric_form};
pub use linf::{linf_norm_dense, LinfResult};
pub use transfer::{
    error_sweep, error_sweep_cached, log_grid, passivity_margin, passivity_margin_cached,
    sigma_sweep, sigma_sweep_cached, ErrorSweep, FrequencyResponse, PassivityReport,
};

use crate::linalg::{self, DMat, LinAlgError};

/// Orders above which the dense level-set norm computation is not advisable;
/// callers should switch to the subspace iteration beyond this.
pub const DENSE_LINF_MAX_ORDER: usize = 600;

/// Relative tolerance used when classifying `M`, `D`, `K` as symmetric.
const SYMMETRY_REL_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum SosError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix {0} contains a NaN or infinity")]
    NonFinite(&'static str),
    #[error("operation requires a colocated system (C_v = B_u', C_p = 0)")]
    NotColocated,
    #[error("{0} must be symmetric positive definite")]
    NotPositiveDefinite(&'static str),
    #[error("transfer function is singular at s = {re:e} + {im:e}i")]
    SingularAtS { re: f64, im: f64 },
    #[error("{0}")]
    NonConvergence(&'static str),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

/// A second-order system `M q'' + D q' + K q = B_u u`, `y = C_p q + C_v q'`.
///
/// Fields are public; the structural classifications (`is_symmetric_mdk`,
/// `is_colocated`, `is_positions_only`) are recomputed on demand so they can
/// never go stale after a field is replaced.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderSystem {
    pub m: DMat,
    pub d: DMat,
    pub k: DMat,
    pub b_u: DMat,
    pub c_p: DMat,
    pub c_v: DMat,
}

impl SecondOrderSystem {
    /// Validates dimensions and finiteness: `M`, `D`, `K` square `n x n`,
    /// `B_u` is `n x m`, `C_p` and `C_v` are `p x n`.
    pub fn new(
        m: DMat,
        d: DMat,
        k: DMat,
        b_u: DMat,
        c_p: DMat,
        c_v: DMat,
    ) -> Result<Self, SosError> {
        let n = m.nrows();
        for (name, mat) in [("M", &m), ("D", &d), ("K", &k)] {
            if mat.nrows() != n || mat.ncols() != n {
                return Err(SosError::DimensionMismatch(format!(
                    "{} must be {}x{}, got {}x{}",
                    name,
                    n,
                    n,
                    mat.nrows(),
                    mat.ncols()
                )));
            }
        }
        if b_u.nrows() != n {
            return Err(SosError::DimensionMismatch(format!(
                "B_u must have {} rows, got {}",
                n,
                b_u.nrows()
            )));
        }
        if c_p.ncols() != n || c_v.ncols() != n {
            return Err(SosError::DimensionMismatch(format!(
                "C_p and C_v must have {} columns, got {} and {}",
                n,
                c_p.ncols(),
                c_v.ncols()
            )));
        }
        if c_p.nrows() != c_v.nrows() {
            return Err(SosError::DimensionMismatch(format!(
                "C_p and C_v must have the same row count, got {} and {}",
                c_p.nrows(),
                c_v.nrows()
            )));
        }
        for (name, mat) in [
            ("M", &m),
            ("D", &d),
            ("K", &k),
            ("B_u", &b_u),
            ("C_p", &c_p),
            ("C_v", &c_v),
        ] {
            if mat.iter().any(|x| !x.is_finite()) {
                return Err(SosError::NonFinite(name));
            }
        }
        Ok(SecondOrderSystem { m, d, k, b_u, c_p, c_v })
    }

    /// Number of mechanical degrees of freedom.
    pub fn order(&self) -> usize {
        self.m.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.b_u.ncols()
    }

    pub fn n_outputs(&self) -> usize {
        self.c_p.nrows()
    }

    /// True when `M`, `D`, and `K` are all symmetric to relative accuracy
    /// `1e-12`.
    pub fn is_symmetric_mdk(&self) -> bool {
        linalg::is_symmetric(&self.m, SYMMETRY_REL_TOL)
            && linalg::is_symmetric(&self.d, SYMMETRY_REL_TOL)
            && linalg::is_symmetric(&self.k, SYMMETRY_REL_TOL)
    }

    /// True when the outputs are exactly the velocities seen through the
    /// input map: `C_v = B_u'` and `C_p = 0`.
    pub fn is_colocated(&self) -> bool {
        self.c_p.iter().all(|&x| x == 0.0) && self.c_v == self.b_u.transpose()
    }

    /// True when the outputs involve positions only (`C_v = 0`).
    pub fn is_positions_only(&self) -> bool {
        self.c_v.iter().all(|&x| x == 0.0)
    }
}

/// First-order descriptor realization `E x' = A x + B u`, `y = C x`.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorSystem {
    pub e: DMat,
    pub a: DMat,
    pub b: DMat,
    pub c: DMat,
}

impl DescriptorSystem {
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn n_outputs(&self) -> usize {
        self.c.nrows()
    }
}
