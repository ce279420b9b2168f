//! Dense L-infinity norm through the Hamiltonian level-set iteration.
//!
//! For a strictly proper stable rational `H(s) = C (sE - A)^-1 B`, a level
//! `gamma` exceeds the norm exactly when the Hamiltonian
//!
//! ```text
//! M_gamma = [ A~            B~ B~' / gamma ]        A~ = E^-1 A,  B~ = E^-1 B
//!           [ -C'C / gamma  -A~'           ]
//! ```
//!
//! has no purely imaginary eigenvalues. The imaginary eigenvalues at an
//! intermediate level are the frequencies where the gain crosses that level;
//! re-sampling the gain at midpoints of consecutive crossings pushes the
//! lower bound up until the bracket collapses. Convergence is quadratic.

use num_complex::Complex64;

use super::transfer::sigma_max;
use super::{DescriptorSystem, SosError};
use crate::config::Tolerances;
use crate::linalg::backend::{dgeev_values, lu_complex, lu_real};
use crate::linalg::{to_complex, DMat, LinAlgError};

/// Outcome of the level-set norm computation.
#[derive(Debug, Clone, Copy)]
pub struct LinfResult {
    /// The L-infinity norm over the imaginary axis.
    pub norm: f64,
    /// Frequency attaining the reported lower bound.
    pub omega: f64,
    /// Level-set iterations used.
    pub iterations: usize,
}

/// Computes the L-infinity norm of `C (sE - A)^-1 B` along with the peak
/// frequency, to relative accuracy `tol.linf_rel_acc`.
///
/// Requires a regular `E` and no poles on the imaginary axis. Intended for
/// orders up to [`super::DENSE_LINF_MAX_ORDER`]; larger problems should use
/// the subspace iteration instead.
pub fn linf_norm_dense(dsys: &DescriptorSystem, tol: &Tolerances) -> Result<LinfResult, SosError> {
    let n = dsys.order();
    if dsys.e.nrows() != n || dsys.e.ncols() != n || dsys.a.ncols() != n {
        return Err(SosError::DimensionMismatch(format!(
            "descriptor matrices must be square and matched, got E {}x{}, A {}x{}",
            dsys.e.nrows(),
            dsys.e.ncols(),
            dsys.a.nrows(),
            dsys.a.ncols()
        )));
    }
    if n == 0 || dsys.b.ncols() == 0 || dsys.c.nrows() == 0 {
        return Ok(LinfResult { norm: 0.0, omega: 0.0, iterations: 0 });
    }

    let lu_e = lu_real(&dsys.e)?;
    let a_t = lu_e.solve(&dsys.a)?;
    let b_t = lu_e.solve(&dsys.b)?;

    // A pole on the axis makes the norm infinite; refuse up front.
    let poles = dgeev_values(&a_t)?;
    for lam in &poles {
        if lam.re.abs() <= tol.imaginary_axis * lam.norm().max(1.0) {
            return Err(SosError::SingularAtS { re: 0.0, im: lam.im });
        }
    }

    // Initial lower bound from the natural candidate frequencies.
    let mut cand: Vec<f64> = vec![0.0];
    for lam in &poles {
        if lam.im.abs() > 0.0 {
            cand.push(lam.im.abs());
        }
        cand.push(lam.norm());
    }
    let mut lb = 0.0f64;
    let mut at = 0.0f64;
    for &w in &cand {
        let s = gain_at(dsys, w)?;
        if s > lb {
            lb = s;
            at = w;
        }
    }
    if lb == 0.0 {
        // The candidates all miss; fall back to a coarse sweep before
        // declaring the response identically zero.
        for &w in super::transfer::log_grid(1e-8, 1e8, 33).iter() {
            let s = gain_at(dsys, w)?;
            if s > lb {
                lb = s;
                at = w;
            }
        }
        if lb == 0.0 {
            return Ok(LinfResult { norm: 0.0, omega: 0.0, iterations: 0 });
        }
    }

    let bbt = &b_t * b_t.transpose();
    let ctc = dsys.c.transpose() * &dsys.c;
    // Threshold for declaring a Hamiltonian eigenvalue imaginary; eigenvalue
    // accuracy is the limiting factor, not the bracket width.
    let crossing_tol = f64::EPSILON.sqrt();

    for it in 0..tol.linf_max_iter {
        let gamma = lb * (1.0 + tol.linf_rel_acc);
        let mut ham = DMat::zeros(2 * n, 2 * n);
        ham.view_mut((0, 0), (n, n)).copy_from(&a_t);
        ham.view_mut((0, n), (n, n)).copy_from(&(&bbt / gamma));
        ham.view_mut((n, 0), (n, n)).copy_from(&(&ctc / -gamma));
        ham.view_mut((n, n), (n, n)).copy_from(&(-a_t.transpose()));

        let eigs = dgeev_values(&ham)?;
        let mut crossings: Vec<f64> = eigs
            .iter()
            .filter(|lam| lam.re.abs() <= crossing_tol * lam.norm().max(1.0))
            .map(|lam| lam.im.abs())
            .collect();
        crossings.sort_by(|a, b| a.partial_cmp(b).unwrap());
        crossings.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + *b));

        if crossings.len() < 2 {
            return Ok(LinfResult {
                norm: lb * (1.0 + 0.5 * tol.linf_rel_acc),
                omega: at,
                iterations: it,
            });
        }

        let before = lb;
        for pair in crossings.windows(2) {
            let mid = 0.5 * (pair[0] + pair[1]);
            let s = gain_at(dsys, mid)?;
            if s > lb {
                lb = s;
                at = mid;
            }
        }
        if lb <= before * (1.0 + 1e-14) {
            // The bracket cannot tighten further in this arithmetic.
            return Ok(LinfResult {
                norm: lb * (1.0 + 0.5 * tol.linf_rel_acc),
                omega: at,
                iterations: it + 1,
            });
        }
    }
    Err(SosError::NonConvergence("level-set norm iteration hit its iteration cap"))
}

fn gain_at(dsys: &DescriptorSystem, omega: f64) -> Result<f64, SosError> {
    let s = Complex64::new(0.0, omega);
    let pencil = {
        let mut p = to_complex(&dsys.e);
        p.iter_mut().for_each(|x| *x *= s);
        p - to_complex(&dsys.a)
    };
    let lu = lu_complex(&pencil).map_err(|e| match e {
        LinAlgError::SingularMatrix { .. } => SosError::SingularAtS { re: 0.0, im: omega },
        other => SosError::LinAlg(other),
    })?;
    let x = lu.solve(&to_complex(&dsys.b))?;
    sigma_max(&(to_complex(&dsys.c) * x))
}
