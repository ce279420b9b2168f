//! Continuous-time Lyapunov solvers: Schur reduction, quasi-triangular
//! back-substitution, back-transformation (Bartels-Stewart).

use super::backend;
use super::{check_finite, symmetrize, DMat, LinAlgError};
use crate::config::Tolerances;

/// Solves `A X + X A^T + W = 0` for symmetric `W`.
///
/// Fails with `SingularSeparation` when an eigenvalue pair of `A` sums to
/// zero within `eig_separation * ||A||_F`, which makes the operator singular.
pub fn solve_lyapunov(a: &DMat, w: &DMat, tol: &Tolerances) -> Result<DMat, LinAlgError> {
    let n = a.nrows();
    if a.ncols() != n || w.nrows() != n || w.ncols() != n {
        return Err(LinAlgError::DimensionMismatch(format!(
            "Lyapunov: A is {}x{}, W is {}x{}",
            a.nrows(),
            a.ncols(),
            w.nrows(),
            w.ncols()
        )));
    }
    check_finite(a, "Lyapunov coefficient")?;
    check_finite(w, "Lyapunov right-hand side")?;
    if n == 0 {
        return Ok(DMat::zeros(0, 0));
    }

    let s = backend::dgees_full(a, false)?;
    let scale_a = a.norm();
    let mut min_sum = f64::INFINITY;
    for i in 0..n {
        for j in i..n {
            let sum = (s.eigs[i] + s.eigs[j]).norm();
            min_sum = min_sum.min(sum);
        }
    }
    if min_sum <= tol.eig_separation * scale_a.max(1e-300) {
        return Err(LinAlgError::SingularSeparation { value: min_sum });
    }

    // T Y + Y T^T = Q^T (-W) Q, then X = Q Y Q^T / scale
    let wq = backend::gemm(1.0, &backend::gemm(-1.0, &s.q, true, w, false), false, &s.q, false);
    let (y, sc) = backend::dtrsyl_solve(b'N', b'T', 1, &s.t, &s.t, &wq)?;
    let x = backend::gemm(1.0 / sc, &backend::gemm(1.0, &s.q, false, &y, false), false, &s.q, true);
    let x = symmetrize(&x);

    let residual = (backend::gemm(1.0, a, false, &x, false)
        + backend::gemm(1.0, &x, false, a, true)
        + w)
        .norm();
    let denom = (2.0 * scale_a * x.norm() + w.norm()).max(1e-300);
    if residual > tol.lyapunov_residual * denom * 1e3 {
        // far outside the backward-stable regime: treat as effective singularity
        return Err(LinAlgError::SingularSeparation { value: min_sum });
    }
    Ok(x)
}

/// Solves `A X E^T + E X A^T + W = 0` for symmetric `W` and invertible `E`
/// by reducing with `E^{-1}` to the standard equation.
pub fn solve_gen_lyapunov(
    a: &DMat,
    e: &DMat,
    w: &DMat,
    tol: &Tolerances,
) -> Result<DMat, LinAlgError> {
    let lu = backend::lu_real(e)?;
    let rcond = lu.rcond()?;
    if rcond < 1.0 / tol.cond_limit {
        return Err(LinAlgError::SingularMatrix { rcond });
    }
    // F = E^{-1} A,  Wt = E^{-1} W E^{-T}
    let f = lu.solve(a)?;
    let y = lu.solve(w)?;
    let wt = symmetrize(&lu.solve(&y.transpose())?.transpose());
    solve_lyapunov(&f, &wt, tol)
}

/// Solves the dual convention `A^T Q E + E^T Q A + W = 0`.
pub fn solve_gen_lyapunov_dual(
    a: &DMat,
    e: &DMat,
    w: &DMat,
    tol: &Tolerances,
) -> Result<DMat, LinAlgError> {
    let lu = backend::lu_real(e)?;
    let rcond = lu.rcond()?;
    if rcond < 1.0 / tol.cond_limit {
        return Err(LinAlgError::SingularMatrix { rcond });
    }
    // F = A E^{-1}: Q solves F^T Q + Q F + E^{-T} W E^{-1} = 0
    let f = lu.solve_transposed(&a.transpose())?.transpose();
    let y = lu.solve_transposed(w)?;
    let wt = symmetrize(&lu.solve_transposed(&y.transpose())?.transpose());
    solve_lyapunov(&f.transpose(), &wt, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Tolerances;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    // Diagonal oracle: for diagonal A, X_ij = -W_ij / (a_ii + a_jj).
    #[test]
    fn diagonal_closed_form() {
        let a = DMat::from_diagonal(&nalgebra::dvector![-1.0, -2.0, -5.0]);
        let mut w = DMat::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                w[(i, j)] = 1.0 + (i + j) as f64;
            }
        }
        let x = solve_lyapunov(&a, &w, &tol()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = -w[(i, j)] / (a[(i, i)] + a[(j, j)]);
                assert!((x[(i, j)] - expect).abs() <= 1e-13 * expect.abs().max(1.0));
            }
        }
    }

    #[test]
    fn scalar_oracle() {
        // a x + x a + w = 0  =>  x = -w / (2a)
        let a = DMat::from_element(1, 1, -3.0);
        let w = DMat::from_element(1, 1, 6.0);
        let x = solve_lyapunov(&a, &w, &tol()).unwrap();
        assert!((x[(0, 0)] - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn residual_on_random_stable_system() {
        let n = 20;
        let mut seed = 3u64;
        let mut rnd = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let mut a = DMat::from_fn(n, n, |_, _| rnd());
        for i in 0..n {
            a[(i, i)] -= 3.0; // push spectrum into the left half plane
        }
        let g = DMat::from_fn(n, 2, |_, _| rnd());
        let w = &g * g.transpose();
        let x = solve_lyapunov(&a, &w, &tol()).unwrap();
        let res = (&a * &x + &x * a.transpose() + &w).norm();
        assert!(res <= 1e-10 * (2.0 * a.norm() * x.norm() + w.norm()));
        // controllability-type solution of a stable system is PSD
        let eigs = x.clone().symmetric_eigenvalues();
        assert!(eigs.iter().all(|&l| l >= -1e-10 * x.norm()));
    }

    #[test]
    fn opposite_eigenvalues_are_rejected() {
        // eigenvalues +-1 sum to zero: the operator is singular
        let a = DMat::from_diagonal(&nalgebra::dvector![1.0, -1.0]);
        let w = DMat::identity(2, 2);
        match solve_lyapunov(&a, &w, &tol()) {
            Err(LinAlgError::SingularSeparation { .. }) => {}
            other => panic!("expected SingularSeparation, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn generalized_reduces_to_standard_for_identity_e() {
        let a = DMat::from_row_slice(2, 2, &[-1.0, 0.5, 0.0, -2.0]);
        let w = DMat::identity(2, 2);
        let e = DMat::identity(2, 2);
        let x1 = solve_lyapunov(&a, &w, &tol()).unwrap();
        let x2 = solve_gen_lyapunov(&a, &e, &w, &tol()).unwrap();
        assert!((x1 - x2).norm() <= 1e-12);
    }

    #[test]
    fn generalized_scalar_and_diagonal_closed_forms() {
        // scalar: 2 a x e + w = 0 with a = -2, e = 2, w = 4 gives x = 1/2
        let x = solve_gen_lyapunov(
            &DMat::from_element(1, 1, -2.0),
            &DMat::from_element(1, 1, 2.0),
            &DMat::from_element(1, 1, 4.0),
            &tol(),
        )
        .unwrap();
        assert!((x[(0, 0)] - 0.5).abs() <= 1e-13);

        // diagonal data solves entrywise: x_ii = -w_ii / (2 a_ii e_ii)
        use crate::linalg::DVec;
        let a = DMat::from_diagonal(&DVec::from_vec(vec![-1.0, -3.0]));
        let e = DMat::from_diagonal(&DVec::from_vec(vec![1.0, 2.0]));
        let w = DMat::from_diagonal(&DVec::from_vec(vec![2.0, 12.0]));
        let x = solve_gen_lyapunov(&a, &e, &w, &tol()).unwrap();
        assert!((x - DMat::identity(2, 2)).norm() <= 1e-12);
    }

    #[test]
    fn generalized_residual_and_dual_convention() {
        let n = 12;
        let mut seed = 17u64;
        let mut rnd = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let mut a = DMat::from_fn(n, n, |_, _| rnd());
        for i in 0..n {
            a[(i, i)] -= 2.5;
        }
        // well-conditioned definite E
        let es = DMat::from_fn(n, n, |_, _| 0.2 * rnd());
        let e = DMat::identity(n, n) + &es * es.transpose();
        let g = DMat::from_fn(n, 3, |_, _| rnd());
        let w = &g * g.transpose();

        let p = solve_gen_lyapunov(&a, &e, &w, &tol()).unwrap();
        let res_p = (&a * &p * e.transpose() + &e * &p * a.transpose() + &w).norm();
        assert!(res_p <= 1e-9 * (a.norm() * p.norm() * e.norm() * 2.0 + w.norm()));

        let q = solve_gen_lyapunov_dual(&a, &e, &w, &tol()).unwrap();
        let res_q = (a.transpose() * &q * &e + e.transpose() * &q * &a + &w).norm();
        assert!(res_q <= 1e-9 * (a.norm() * q.norm() * e.norm() * 2.0 + w.norm()));
    }

    #[test]
    fn singular_e_is_rejected() {
        let a = DMat::from_diagonal(&nalgebra::dvector![-1.0, -2.0]);
        let e = DMat::from_diagonal(&nalgebra::dvector![1.0, 0.0]);
        let w = DMat::identity(2, 2);
        assert!(matches!(
            solve_gen_lyapunov(&a, &e, &w, &tol()),
            Err(LinAlgError::SingularMatrix { .. })
        ));
    }
}
