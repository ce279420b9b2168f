//! Principal matrix logarithm by inverse scaling and squaring on the
//! complex Schur form.

use super::backend::{self, zgemm};
use super::{CMat, LinAlgError};
use crate::config::Tolerances;
use num_complex::Complex64;

/// Norm bound under which the degree 7 Pade approximant of `log(I + X)`
/// delivers full accuracy.
const THETA_7: f64 = 0.264;

/// Degree 7 Gauss nodes and weights shifted to `[0, 1]`; they give the
/// partial fraction form `log(I + X) = sum w_i X (I + x_i X)^{-1}`.
const PF_NODES: [f64; 7] = [
    0.025446043828620736,
    0.12923440720030277,
    0.29707742431130141,
    0.5,
    0.70292257568869859,
    0.87076559279969723,
    0.97455395617137926,
];
const PF_WEIGHTS: [f64; 7] = [
    0.064742483084434846,
    0.13985269574463832,
    0.19091502525255946,
    0.20897959183673467,
    0.19091502525255946,
    0.13985269574463832,
    0.064742483084434846,
];

/// Computes the principal logarithm of a square complex matrix.
///
/// Eigenvalues on the closed negative real axis have no principal
/// logarithm; they are reported as a branch cut error instead of silently
/// picking a branch.
pub fn matrix_log(a: &CMat, tol: &Tolerances) -> Result<CMat, LinAlgError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(LinAlgError::DimensionMismatch(format!(
            "matrix logarithm needs a square input, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if !a.iter().all(|x| x.re.is_finite() && x.im.is_finite()) {
        return Err(LinAlgError::NonFinite("matrix logarithm input"));
    }
    if n == 0 {
        return Ok(CMat::zeros(0, 0));
    }

    let s = backend::zgees_full(a)?;
    for lam in &s.eigs {
        if lam.norm() == 0.0 {
            return Err(LinAlgError::SingularMatrix { rcond: 0.0 });
        }
        if lam.re < 0.0 && lam.im.abs() <= tol.log_branch_cut * lam.norm() {
            return Err(LinAlgError::BranchCut { re: lam.re, im: lam.im });
        }
    }

    let mut t = s.t.clone();
    let mut k = 0u32;
    while dist_from_identity(&t) > THETA_7 {
        if k >= 60 {
            return Err(LinAlgError::NonConvergence(
                "square root sequence for the matrix logarithm",
            ));
        }
        t = sqrt_upper_triangular(&t)?;
        k += 1;
    }

    // X = T - I, then the partial fraction sum for log(I + X)
    let mut x = t;
    for i in 0..n {
        x[(i, i)] -= Complex64::new(1.0, 0.0);
    }
    let mut r = CMat::zeros(n, n);
    for (&node, &weight) in PF_NODES.iter().zip(PF_WEIGHTS.iter()) {
        let mut denom = &x * Complex64::new(node, 0.0);
        for i in 0..n {
            denom[(i, i)] += Complex64::new(1.0, 0.0);
        }
        let mut y = x.clone();
        backend::ztrsm_left_upper(&denom, &mut y); // (I + x_i X)^{-1} X
        r += y * Complex64::new(weight, 0.0);
    }
    r *= Complex64::new(2f64.powi(k as i32), 0.0);

    let qr = zgemm(Complex64::new(1.0, 0.0), &s.q, b'N', &r, b'N');
    Ok(zgemm(Complex64::new(1.0, 0.0), &qr, b'N', &s.q, b'C'))
}

fn dist_from_identity(t: &CMat) -> f64 {
    let n = t.nrows();
    let mut best: f64 = 0.0;
    for j in 0..n {
        let mut col = 0.0;
        for i in 0..n {
            let v = if i == j { t[(i, j)] - Complex64::new(1.0, 0.0) } else { t[(i, j)] };
            col += v.norm();
        }
        best = best.max(col);
    }
    best
}

/// Principal square root of an upper triangular matrix, computed blockwise:
/// the scalar recurrence inside diagonal blocks, a Sylvester solve per
/// off-diagonal block.
fn sqrt_upper_triangular(t: &CMat) -> Result<CMat, LinAlgError> {
    let n = t.nrows();
    const NB: usize = 64;
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < n {
        let b = NB.min(n - i);
        blocks.push((i, b));
        i += b;
    }
    let nb = blocks.len();
    let mut r = CMat::zeros(n, n);

    for &(s0, bs) in &blocks {
        for j in 0..bs {
            let jj = s0 + j;
            r[(jj, jj)] = t[(jj, jj)].sqrt();
            for i in (0..j).rev() {
                let ii = s0 + i;
                let mut sum = t[(ii, jj)];
                for k in (i + 1)..j {
                    sum -= r[(ii, s0 + k)] * r[(s0 + k, jj)];
                }
                let denom = r[(ii, ii)] + r[(jj, jj)];
                if denom.norm() == 0.0 {
                    return Err(LinAlgError::SingularSeparation { value: 0.0 });
                }
                r[(ii, jj)] = sum / denom;
            }
        }
    }

    let one = Complex64::new(1.0, 0.0);
    for d in 1..nb {
        for bi in 0..(nb - d) {
            let bj = bi + d;
            let (i0, isz) = blocks[bi];
            let (j0, jsz) = blocks[bj];
            let mut c = CMat::from(t.view((i0, j0), (isz, jsz)));
            for bk in (bi + 1)..bj {
                let (k0, ksz) = blocks[bk];
                let rik = CMat::from(r.view((i0, k0), (isz, ksz)));
                let rkj = CMat::from(r.view((k0, j0), (ksz, jsz)));
                c -= zgemm(one, &rik, b'N', &rkj, b'N');
            }
            let rii = CMat::from(r.view((i0, i0), (isz, isz)));
            let rjj = CMat::from(r.view((j0, j0), (jsz, jsz)));
            let (x, scale) = backend::ztrsyl_solve(b'N', b'N', 1, &rii, &rjj, &c)?;
            let x = x / Complex64::new(scale, 0.0);
            r.view_mut((i0, j0), (isz, jsz)).copy_from(&x);
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{im_part, re_part, to_complex, DMat, DVec};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    // Test oracle independent of the production code: plain Taylor series
    // with scaling and squaring, accurate because the scaled norm is below
    // 1/4 and thirty terms are taken.
    fn taylor_exp_c(a: &CMat) -> CMat {
        let n = a.nrows();
        let norm = a.norm();
        let s = if norm > 0.25 { (norm / 0.25).log2().ceil() as i32 } else { 0 };
        let b = a * Complex64::new(2f64.powi(-s), 0.0);
        let mut term = CMat::identity(n, n);
        let mut sum = CMat::identity(n, n);
        for k in 1..30 {
            term = &term * &b * Complex64::new(1.0 / k as f64, 0.0);
            sum += &term;
        }
        let mut e = sum;
        for _ in 0..s {
            e = &e * &e;
        }
        e
    }

    #[test]
    fn log_of_identity_is_zero() {
        let l = matrix_log(&CMat::identity(3, 3), &tol()).unwrap();
        assert!(l.norm() <= 1e-14);
    }

    #[test]
    fn diagonal_matches_scalar_log() {
        let a = to_complex(&DMat::from_diagonal(&DVec::from_vec(vec![
            1.0,
            std::f64::consts::E,
            10.0,
        ])));
        let l = matrix_log(&a, &tol()).unwrap();
        for (i, want) in [0.0f64, 1.0, 10.0f64.ln()].iter().enumerate() {
            assert!((l[(i, i)].re - want).abs() <= 1e-13);
            assert!(l[(i, i)].im.abs() <= 1e-13);
        }
    }

    #[test]
    fn unit_imaginary_scalar() {
        // log(i) = i pi / 2 on the principal branch
        let a = CMat::from_element(1, 1, Complex64::new(0.0, 1.0));
        let l = matrix_log(&a, &tol()).unwrap();
        assert!((l[(0, 0)] - Complex64::new(0.0, std::f64::consts::FRAC_PI_2)).norm() <= 1e-14);
    }

    #[test]
    fn rotation_closed_form() {
        // log([[cos, sin], [-sin, cos]]) = [[0, theta], [-theta, 0]] for
        // |theta| < pi
        let theta = 2.0f64;
        let a = DMat::from_row_slice(
            2,
            2,
            &[theta.cos(), theta.sin(), -theta.sin(), theta.cos()],
        );
        let l = matrix_log(&to_complex(&a), &tol()).unwrap();
        let expect = DMat::from_row_slice(2, 2, &[0.0, theta, -theta, 0.0]);
        assert!((re_part(&l) - expect).norm() <= 1e-12);
        assert!(im_part(&l).norm() <= 1e-12);
    }

    #[test]
    fn unipotent_closed_form() {
        // log([[1, t], [0, 1]]) = [[0, t], [0, 0]]
        let a = to_complex(&DMat::from_row_slice(2, 2, &[1.0, 0.6, 0.0, 1.0]));
        let l = matrix_log(&a, &tol()).unwrap();
        let expect = to_complex(&DMat::from_row_slice(2, 2, &[0.0, 0.6, 0.0, 0.0]));
        assert!((l - expect).norm() <= 1e-13);
    }

    #[test]
    fn log_inverts_the_exponential() {
        let mut seed = 7u64;
        let mut rnd = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        // spectrum stays within the unit disk, well away from the cut
        let a = CMat::from_fn(9, 9, |_, _| Complex64::new(0.2 * rnd(), 0.2 * rnd()));
        let e = taylor_exp_c(&a);
        let l = matrix_log(&e, &tol()).unwrap();
        assert!((&l - &a).norm() <= 1e-11 * a.norm().max(1.0));
    }

    #[test]
    fn exponential_inverts_the_log() {
        // random stable real matrices, spectrum inside the strip |Im| < pi
        let mut seed = 31u64;
        let mut rnd = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        for _ in 0..3 {
            let mut m = DMat::from_fn(5, 5, |_, _| rnd());
            for i in 0..5 {
                m[(i, i)] += 2.0;
            }
            let a = to_complex(&m);
            let l = matrix_log(&a, &tol()).unwrap();
            let back = taylor_exp_c(&l);
            assert!((&back - &a).norm() <= 1e-8 * a.norm());
        }
    }

    #[test]
    fn wide_spectrum_forces_square_roots_and_still_round_trips() {
        // diagonal spread over four orders of magnitude plus coupling:
        // several inverse scaling steps are required
        let n = 20;
        let mut seed = 51u64;
        let mut rnd = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let mut a = DMat::from_fn(n, n, |i, j| if j > i { rnd() } else { 0.0 });
        for i in 0..n {
            a[(i, i)] = 10f64.powf(-2.0 + 4.0 * (i as f64) / (n as f64 - 1.0));
        }
        let ac = to_complex(&a);
        let l = matrix_log(&ac, &tol()).unwrap();
        let back = taylor_exp_c(&l);
        assert!((&back - &ac).norm() <= 1e-9 * ac.norm());
    }

    #[test]
    fn blocked_path_round_trips() {
        // larger than one block so the Sylvester-based off-diagonal path runs
        let n = 100;
        let mut seed = 4242u64;
        let mut rnd = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let a = CMat::from_fn(n, n, |_, _| Complex64::new(0.07 * rnd(), 0.07 * rnd()));
        let e = taylor_exp_c(&a);
        let l = matrix_log(&e, &tol()).unwrap();
        assert!((&l - &a).norm() <= 1e-9 * a.norm().max(1.0));
    }

    #[test]
    fn negative_real_eigenvalue_is_a_branch_cut_error() {
        let a = to_complex(&DMat::from_diagonal(&DVec::from_vec(vec![-1.0, 2.0])));
        match matrix_log(&a, &tol()) {
            Err(LinAlgError::BranchCut { re, .. }) => assert!(re < 0.0),
            other => panic!("expected branch cut error, got {other:?}"),
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = to_complex(&DMat::from_diagonal(&DVec::from_vec(vec![0.0, 2.0])));
        assert!(matches!(
            matrix_log(&a, &tol()),
            Err(LinAlgError::SingularMatrix { .. })
        ));
    }
}
