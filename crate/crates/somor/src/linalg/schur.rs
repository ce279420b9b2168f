//! Schur factorizations with postcondition-friendly result types.

use super::backend;
use super::{CMat, DMat, LinAlgError};
use num_complex::Complex64;

/// Real Schur form `A = Q T Q^T` with orthogonal `Q` and quasi upper
/// triangular `T` (1x1 and 2x2 diagonal blocks).
#[derive(Debug, Clone)]
pub struct SchurForm {
    pub q: DMat,
    pub t: DMat,
    pub eigenvalues: Vec<Complex64>,
}

pub fn schur(a: &DMat) -> Result<SchurForm, LinAlgError> {
    let raw = backend::dgees_full(a, false)?;
    Ok(SchurForm { q: raw.q, t: raw.t, eigenvalues: raw.eigs })
}

/// Complex Schur form `A = Q T Q^H` with unitary `Q` and upper triangular `T`.
#[derive(Debug, Clone)]
pub struct ComplexSchurForm {
    pub q: CMat,
    pub t: CMat,
    pub eigenvalues: Vec<Complex64>,
}

pub fn complex_schur(a: &CMat) -> Result<ComplexSchurForm, LinAlgError> {
    let raw = backend::zgees_full(a)?;
    Ok(ComplexSchurForm { q: raw.q, t: raw.t, eigenvalues: raw.eigs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::to_complex;

    #[test]
    fn diagonal_matrix_is_its_own_schur_form() {
        let a = DMat::from_diagonal(&nalgebra::dvector![3.0, -1.0, 0.5]);
        let s = schur(&a).unwrap();
        assert!((&s.t - &a).norm() <= 1e-14 * a.norm());
        assert!((&s.q * s.q.transpose() - DMat::identity(3, 3)).norm() <= 1e-14);
    }

    #[test]
    fn rotation_block_gives_conjugate_pair() {
        let a = DMat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let s = schur(&a).unwrap();
        let mut ims: Vec<f64> = s.eigenvalues.iter().map(|l| l.im).collect();
        ims.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((ims[0] + 1.0).abs() <= 1e-14 && (ims[1] - 1.0).abs() <= 1e-14);
        assert!(s.eigenvalues.iter().all(|l| l.re.abs() <= 1e-14));
        // single 2x2 block: the subdiagonal entry is nonzero
        assert!(s.t[(1, 0)].abs() > 0.1);
    }

    #[test]
    fn random_reconstruction_and_orthogonality() {
        let n = 10;
        let mut seed = 7u64;
        let mut rnd = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let a = DMat::from_fn(n, n, |_, _| rnd());
        let s = schur(&a).unwrap();
        let rec = &s.q * &s.t * s.q.transpose();
        assert!(
            (rec - &a).norm() <= 1e-13 * a.norm(),
            "reconstruction residual too large"
        );
        assert!((&s.q * s.q.transpose() - DMat::identity(n, n)).norm() <= 1e-13);
        // quasi-triangular: everything below the first subdiagonal vanishes
        for j in 0..n {
            for i in (j + 2)..n {
                assert_eq!(s.t[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn complex_schur_reconstructs_and_is_triangular() {
        let n = 8;
        let mut seed = 11u64;
        let mut rnd = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let a = CMat::from_fn(n, n, |_, _| Complex64::new(rnd(), rnd()));
        let s = complex_schur(&a).unwrap();
        let rec = &s.q * &s.t * s.q.adjoint();
        assert!((rec - &a).norm() <= 1e-13 * a.norm());
        for j in 0..n {
            for i in (j + 1)..n {
                assert_eq!(s.t[(i, j)], Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn real_matrix_through_complex_schur_keeps_real_spectrum_structure() {
        let a = DMat::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 3.0]);
        let s = complex_schur(&to_complex(&a)).unwrap();
        let mut res: Vec<f64> = s.eigenvalues.iter().map(|l| l.re).collect();
        res.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((res[0] - 1.0).abs() <= 1e-14 && (res[1] - 3.0).abs() <= 1e-14);
    }
}
