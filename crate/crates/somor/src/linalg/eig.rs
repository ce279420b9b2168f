//! Symmetric-definite generalized eigensolver with modal scaling.

use super::{backend, check_finite, DMat, DVec, LinAlgError};

/// Modal data of the pencil `(K, M)` with both matrices symmetric positive
/// definite.
#[derive(Debug, Clone)]
pub struct ScaledModalEigen {
    /// Natural frequencies `omega_k = sqrt(lambda_k)`, ascending.
    pub omega: DVec,
    /// Mode shapes scaled so that `X^T M X = diag(1/omega)` and
    /// `X^T K X = diag(omega)`.
    pub x: DMat,
}

/// Solves `K x = lambda M x` and rescales the `M`-orthonormal eigenvectors
/// by `1/sqrt(omega_k)`.
///
/// Column signs are fixed so the entry of largest magnitude in each mode is
/// positive, which makes the output reproducible across runs.
pub fn eig_sym_gen(k: &DMat, m: &DMat) -> Result<ScaledModalEigen, LinAlgError> {
    let n = k.nrows();
    if k.ncols() != n || m.nrows() != n || m.ncols() != n {
        return Err(LinAlgError::DimensionMismatch(format!(
            "modal eigensolver needs square matched matrices, got {}x{} and {}x{}",
            k.nrows(),
            k.ncols(),
            m.nrows(),
            m.ncols()
        )));
    }
    check_finite(k, "stiffness matrix")?;
    check_finite(m, "mass matrix")?;
    let (lambda, mut z) = backend::dsygv(k, m)?;
    if let Some(min) = lambda.iter().cloned().reduce(f64::min) {
        if min <= 0.0 {
            return Err(LinAlgError::NotPositiveDefinite(
                "stiffness matrix has a nonpositive eigenvalue",
            ));
        }
    }
    let omega = DVec::from_iterator(n, lambda.iter().map(|l| l.sqrt()));
    for j in 0..n {
        let mut col = z.column_mut(j);
        let mut pivot = 0;
        let mut best = 0.0f64;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > best {
                best = v.abs();
                pivot = i;
            }
        }
        let scale = if col[pivot] < 0.0 { -1.0 } else { 1.0 } / omega[j].sqrt();
        col *= scale;
    }
    Ok(ScaledModalEigen { omega, x: z })
}
