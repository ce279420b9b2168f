//! Square-root balancing of a Gramian factor pair.

use super::LimitedBtError;
use crate::config::Tolerances;
use crate::linalg::backend;
use crate::linalg::{DMat, DVec};

/// Biorthogonal projection bases from square-root balancing.
#[derive(Debug, Clone)]
pub struct BalancedProjection {
    /// Right basis, `n x r`; spans dominant controllability directions.
    pub v: DMat,
    /// Left basis, `n x r`, with `W' V = I_r`.
    pub w: DMat,
    /// Full singular value spectrum of the factor cross product,
    /// descending; the leading `r` entries were kept.
    pub sigma: DVec,
}

/// Balances the Gramian pair `L_p L_p'` (right, controllability) and
/// `L_q L_q'` (left, observability) and keeps the `r` dominant directions.
///
/// From the SVD `L_q' L_p = Y S Z'` the bases are
/// `V = L_p Z_r S_r^{-1/2}` and `W = L_q Y_r S_r^{-1/2}`, which satisfy
/// `W' V = I_r` and transform both Gramians to `diag(sigma)`.
pub fn balanced_projection(
    left: &DMat,
    right: &DMat,
    r: usize,
    tol: &Tolerances,
) -> Result<BalancedProjection, LimitedBtError> {
    if left.nrows() != right.nrows() {
        return Err(LimitedBtError::DimensionMismatch(format!(
            "factor row counts differ: {} vs {}",
            left.nrows(),
            right.nrows()
        )));
    }
    if r == 0 {
        return Err(LimitedBtError::DimensionMismatch(
            "reduced order must be at least 1".into(),
        ));
    }
    let cross = backend::gemm(1.0, left, true, right, false);
    let (y, sigma, zt) = backend::svd_thin(&cross)?;
    if r > sigma.len() || sigma[0] <= 0.0 {
        return Err(LimitedBtError::RankDeficient { ratio: 0.0 });
    }
    let ratio = sigma[r - 1] / sigma[0];
    if ratio < tol.balance_rank_cutoff {
        return Err(LimitedBtError::RankDeficient { ratio });
    }

    let mut v = right * zt.rows(0, r).transpose();
    let mut w = left * y.columns(0, r);
    for j in 0..r {
        let scale = 1.0 / sigma[j].sqrt();
        v.column_mut(j).scale_mut(scale);
        w.column_mut(j).scale_mut(scale);
    }
    Ok(BalancedProjection { v, w, sigma })
}
