//! Positive-real algebraic Riccati equation via the ordered Schur form of
//! the associated Hamiltonian.

use super::backend;
use super::{check_finite, symmetrize, DMat, LinAlgError};
use crate::config::Tolerances;
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct RiccatiSolution {
    pub x: DMat,
    /// Spectrum of `A + B R^{-1} (B^T X - C)`, all in the open left half plane.
    pub closed_loop_eigenvalues: Vec<Complex64>,
    /// Relative residual of the returned solution.
    pub residual: f64,
}

/// Solves `A^T X + X A + (X B - C^T) R^{-1} (B^T X - C) = 0` for the
/// stabilizing solution, with symmetric positive definite `R`.
///
/// The Hamiltonian is
/// `[[A - B R^-1 C, B R^-1 B^T], [-C^T R^-1 C, -(A - B R^-1 C)^T]]`;
/// the stabilizing solution comes from its stable invariant subspace.
pub fn solve_pr_riccati(
    a: &DMat,
    b: &DMat,
    c: &DMat,
    r: &DMat,
    tol: &Tolerances,
) -> Result<RiccatiSolution, LinAlgError> {
    let n = a.nrows();
    let m = b.ncols();
    if a.ncols() != n || b.nrows() != n || c.nrows() != m || c.ncols() != n || r.nrows() != m || r.ncols() != m {
        return Err(LinAlgError::DimensionMismatch(format!(
            "Riccati: A {}x{}, B {}x{}, C {}x{}, R {}x{}",
            a.nrows(), a.ncols(), b.nrows(), b.ncols(), c.nrows(), c.ncols(), r.nrows(), r.ncols()
        )));
    }
    check_finite(a, "Riccati A")?;

    let r_chol = nalgebra::Cholesky::new(r.clone())
        .ok_or(LinAlgError::NotPositiveDefinite("Riccati weight R"))?;
    let rinv_c = r_chol.solve(c); // R^{-1} C
    let rinv_bt = r_chol.solve(&b.transpose()); // R^{-1} B^T

    let a_sh = a - backend::gemm(1.0, b, false, &rinv_c, false); // A - B R^{-1} C
    let g = backend::gemm(1.0, b, false, &rinv_bt, false); // B R^{-1} B^T
    let q = backend::gemm(1.0, &c.transpose(), false, &rinv_c, false); // C^T R^{-1} C

    let two_n = 2 * n;
    let mut h = DMat::zeros(two_n, two_n);
    h.view_mut((0, 0), (n, n)).copy_from(&a_sh);
    h.view_mut((0, n), (n, n)).copy_from(&symmetrize(&g));
    h.view_mut((n, 0), (n, n)).copy_from(&(-symmetrize(&q)));
    h.view_mut((n, n), (n, n)).copy_from(&(-a_sh.transpose()));
    drop(a_sh);

    let s = backend::dgees_full(&h, true)?;
    drop(h);
    if s.sdim != n {
        return Err(LinAlgError::NoStabilizingSolution(
            "stable invariant subspace does not have dimension n",
        ));
    }
    for k in 0..two_n {
        if s.eigs[k].re.abs() <= tol.imaginary_axis {
            return Err(LinAlgError::NoStabilizingSolution(
                "Hamiltonian eigenvalue on the imaginary axis",
            ));
        }
    }
    let closed_loop: Vec<Complex64> = s.eigs[..n].to_vec();

    let u1 = DMat::from(s.q.view((0, 0), (n, n)));
    let u2 = DMat::from(s.q.view((n, 0), (n, n)));
    drop(s);
    // X = U2 U1^{-1}: solve U1^T X^T = U2^T
    let lu = backend::lu_real(&u1).map_err(|_| {
        LinAlgError::NoStabilizingSolution("invariant subspace is not complementary")
    })?;
    let rc = lu.rcond()?;
    if rc < 1.0 / tol.cond_limit {
        return Err(LinAlgError::NoStabilizingSolution(
            "invariant subspace is numerically not complementary",
        ));
    }
    let mut x = symmetrize(&lu.solve_transposed(&u2.transpose())?.transpose());

    // Residual gate on the original equation. For stiff weights (R -> 0 in
    // the Lur'e regularization) the subspace extraction alone loses digits,
    // so the candidate is polished first by Newton-Kleinman steps: each one
    // solves Ac' D + D Ac + F(X) = 0 with the closed loop
    // Ac = A + B R^-1 (B' X - C) and converges quadratically near the
    // solution. The polish targets two orders below the acceptance gate
    // because downstream extrapolation amplifies node errors; solves that
    // are already that accurate skip it entirely.
    let (mut residual, mut f_x, mut feedback) = pr_residual(a, b, c, &r_chol, &x);
    for _ in 0..2 {
        if residual <= 0.01 * tol.riccati_residual {
            break;
        }
        let ac = a + backend::gemm(1.0, b, false, &feedback, false);
        let Ok(delta) = super::solve_lyapunov(&ac.transpose(), &f_x, tol) else {
            break;
        };
        let candidate = symmetrize(&(&x + &delta));
        let (res_new, f_new, feedback_new) = pr_residual(a, b, c, &r_chol, &candidate);
        if res_new >= residual {
            break;
        }
        x = candidate;
        residual = res_new;
        f_x = f_new;
        feedback = feedback_new;
    }
    if residual > tol.riccati_residual {
        return Err(LinAlgError::NoStabilizingSolution(
            "candidate solution fails the residual check",
        ));
    }
    Ok(RiccatiSolution { x, closed_loop_eigenvalues: closed_loop, residual })
}

/// Relative residual of the positive-real Riccati equation at `x`, together
/// with the residual matrix `F(x)` and the feedback `R^-1 (B' x - C)`.
fn pr_residual(
    a: &DMat,
    b: &DMat,
    c: &DMat,
    r_chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>,
    x: &DMat,
) -> (f64, DMat, DMat) {
    let xb_ct = backend::gemm(1.0, x, false, b, false) - c.transpose();
    let feedback = r_chol.solve(&xb_ct.transpose());
    let quad = backend::gemm(1.0, &xb_ct, false, &feedback, false);
    let lin = backend::gemm(1.0, a, true, x, false) + backend::gemm(1.0, x, false, a, false);
    let f = &lin + &quad;
    let denom = (lin.norm() + quad.norm()).max(x.norm()).max(1.0);
    (f.norm() / denom, f, feedback)
}
