//! Modal dominance analysis for modally damped second-order systems.
//!
//! When `D M^-1 K = K M^-1 D`, the damped system shares its eigenvector
//! basis with the undamped pencil `(K, M)`. Scaling that basis `X` so that
//!
//! ```text
//! X' M X = inv(Omega),   X' K X = Omega,   X' D X = 2 Xi,
//! ```
//!
//! the transfer function splits into rank-one pole-residue terms
//!
//! ```text
//! H(s) = sum_k  omega_k C_p x_k x_k' B_u / ((s - lambda_k+)(s - lambda_k-))
//! ```
//!
//! with the pole pair `lambda_k± = -omega_k xi_k ± omega_k sqrt(xi_k^2 - 1)`.
//! Ranking the terms by their peak contribution and projecting onto the
//! eigenvectors of the strongest pairs yields a reduced model that is again
//! second order, symmetric, and modally damped.

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::linalg::backend::{lu_real, svd_thin};
use crate::linalg::{eig_sym_gen, fro, CMat, CVec, DMat, DVec, LinAlgError};
use crate::sos::{SecondOrderSystem, SosError};

#[derive(Debug, thiserror::Error)]
pub enum SomddpaError {
    #[error(
        "system is not modally damped: scaled commutator {commutator:e} exceeds {threshold:e}"
    )]
    NotModallyDamped { commutator: f64, threshold: f64 },
    #[error("dominance analysis requires position outputs only (C_v = 0)")]
    NotPositionsOnly,
    #[error("reduced order {r} exceeds the model order {n}")]
    InvalidOrder { r: usize, n: usize },
    #[error("{0} must be positive definite")]
    NotPositiveDefinite(&'static str),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
    #[error(transparent)]
    Sos(#[from] SosError),
}

/// Scaled modal decomposition of a modally damped system.
#[derive(Debug, Clone)]
pub struct ModalData {
    /// Undamped natural frequencies, ascending.
    pub omega: DVec,
    /// Modal damping ratios `xi_k`.
    pub xi: DVec,
    /// Scaled eigenvector basis with `X' M X = inv(diag(omega))`.
    pub x: DMat,
    pub lambda_plus: CVec,
    pub lambda_minus: CVec,
    /// Relative Frobenius mass of the off-diagonal part of `X' D X`; zero
    /// for exactly modally damped systems, nonzero when the decomposition
    /// was forced on a nearly modal one.
    pub offdiag_residue: f64,
}

/// Dominance values and the induced mode ordering.
#[derive(Debug, Clone)]
pub struct DominanceRank {
    /// Mode indices sorted most dominant first; undamped modes last.
    pub order: Vec<usize>,
    /// Dominance per mode (original mode numbering); infinite for undamped
    /// modes with a nonzero residue.
    pub dominance: Vec<f64>,
    /// Marks modes whose pole-pair real parts vanish, where the criterion
    /// is undefined.
    pub undamped: Vec<bool>,
}

/// One rank-one term of the pole-residue expansion.
#[derive(Debug, Clone)]
pub struct PoleResidueTerm {
    /// Original mode index.
    pub mode: usize,
    pub omega: f64,
    pub xi: f64,
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    /// `omega_k * C_p x_k x_k' B_u`.
    pub residue: DMat,
}

/// Everything produced by one reduction run.
#[derive(Debug, Clone)]
pub struct SomddpaReduction {
    pub rom: SecondOrderSystem,
    pub modal: ModalData,
    pub rank: DominanceRank,
    /// Pole-residue terms of the retained modes, in ranked order.
    pub terms: Vec<PoleResidueTerm>,
}

/// Denominator products below this are treated as an undamped pole pair.
const UNDAMPED_PRODUCT_TOL: f64 = 1e-14;

/// Scaled commutator norm `||D M^-1 K - K M^-1 D||_F / (||D||_F ||M^-1||_2
/// ||K||_F)` measuring how far the damping is from commuting with the
/// stiffness. Zero numerator (for instance `D = 0`) returns zero; a singular
/// `M` returns infinity.
pub fn check_modal_damping(sys: &SecondOrderSystem) -> Result<f64, SomddpaError> {
    let lu = match lu_real(&sys.m) {
        Ok(lu) => lu,
        Err(LinAlgError::SingularMatrix { .. }) => return Ok(f64::INFINITY),
        Err(e) => return Err(e.into()),
    };
    let mk = lu.solve(&sys.k)?;
    let md = lu.solve(&sys.d)?;
    let commutator = &sys.d * &mk - &sys.k * &md;
    let num = fro(&commutator);
    if num == 0.0 {
        return Ok(0.0);
    }
    let (_, sv, _) = svd_thin(&sys.m)?;
    let smin = sv[sv.len() - 1];
    if smin == 0.0 {
        return Ok(f64::INFINITY);
    }
    let denom = fro(&sys.d) * (1.0 / smin) * fro(&sys.k);
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(num / denom)
}

/// Pole pair of `lambda^2 + 2 omega xi lambda + omega^2 = 0`; the plus
/// member takes the nonnegative root term.
fn pole_pair(omega: f64, xi: f64) -> (Complex64, Complex64) {
    if xi < 1.0 {
        let im = omega * (1.0 - xi * xi).sqrt();
        (
            Complex64::new(-omega * xi, im),
            Complex64::new(-omega * xi, -im),
        )
    } else {
        let root = omega * (xi * xi - 1.0).sqrt();
        (
            Complex64::new(-omega * xi + root, 0.0),
            Complex64::new(-omega * xi - root, 0.0),
        )
    }
}

/// Computes the scaled modal decomposition. Requires SPD `M`, `K` and a
/// commutator below `tol.modal_commutator`; `force` overrides the commutator
/// check and keeps only the diagonal of `X' D X`, recording what was
/// discarded in `offdiag_residue`.
pub fn modal_decompose(
    sys: &SecondOrderSystem,
    tol: &Tolerances,
    force: bool,
) -> Result<ModalData, SomddpaError> {
    let commutator = check_modal_damping(sys)?;
    if !force && commutator > tol.modal_commutator {
        return Err(SomddpaError::NotModallyDamped {
            commutator,
            threshold: tol.modal_commutator,
        });
    }
    let eig = eig_sym_gen(&sys.k, &sys.m).map_err(|e| match e {
        LinAlgError::NotPositiveDefinite(what) => SomddpaError::NotPositiveDefinite(what),
        other => SomddpaError::LinAlg(other),
    })?;
    let n = eig.omega.len();
    let xdx = eig.x.transpose() * (&sys.d * &eig.x);
    let mut off = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                off += xdx[(i, j)] * xdx[(i, j)];
            }
        }
    }
    let total = fro(&xdx).max(1e-300);
    let offdiag_residue = off.sqrt() / total;

    let mut xi = DVec::zeros(n);
    let mut lambda_plus = CVec::from_element(n, Complex64::new(0.0, 0.0));
    let mut lambda_minus = lambda_plus.clone();
    for k in 0..n {
        xi[k] = 0.5 * xdx[(k, k)];
        let (lp, lm) = pole_pair(eig.omega[k], xi[k]);
        lambda_plus[k] = lp;
        lambda_minus[k] = lm;
    }
    Ok(ModalData {
        omega: eig.omega,
        xi,
        x: eig.x,
        lambda_plus,
        lambda_minus,
        offdiag_residue,
    })
}

/// Ranks modes by `||omega_k C_p x_k x_k' B_u||_2 / (Re lambda+ Re lambda-)`,
/// descending. Ties break by ascending frequency, then by mode index.
/// Modes whose real-part product vanishes (undamped) get an undefined
/// criterion: they are flagged and ranked after every damped mode.
pub fn dominance_rank(
    modal: &ModalData,
    b_u: &DMat,
    c_p: &DMat,
) -> Result<DominanceRank, SomddpaError> {
    let n = modal.omega.len();
    let n_in = b_u.ncols();
    let p = c_p.nrows();
    if b_u.nrows() != n || c_p.ncols() != n {
        return Err(SomddpaError::Sos(SosError::DimensionMismatch(format!(
            "maps must match the model order {}, got B {}x{} and C_p {}x{}",
            n,
            b_u.nrows(),
            n_in,
            p,
            c_p.ncols()
        ))));
    }
    let mut dominance = vec![0.0f64; n];
    let mut undamped = vec![false; n];
    for k in 0..n {
        let xk = modal.x.column(k);
        // The 2-norm of the rank-one residue factors into vector norms.
        let num = modal.omega[k] * (c_p * xk).norm() * (b_u.transpose() * xk).norm();
        let product = modal.lambda_plus[k].re * modal.lambda_minus[k].re;
        if product.abs() <= UNDAMPED_PRODUCT_TOL {
            undamped[k] = true;
            dominance[k] = if num > 0.0 { f64::INFINITY } else { 0.0 };
        } else {
            dominance[k] = num / product;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        undamped[a]
            .cmp(&undamped[b])
            .then_with(|| {
                if undamped[a] {
                    // Both undefined: keep the frequency ordering.
                    std::cmp::Ordering::Equal
                } else {
                    dominance[b].partial_cmp(&dominance[a]).unwrap()
                }
            })
            .then_with(|| modal.omega[a].partial_cmp(&modal.omega[b]).unwrap())
            .then_with(|| a.cmp(&b))
    });
    Ok(DominanceRank { order, dominance, undamped })
}

/// Reduces to the `r` most dominant pole pairs by one-sided projection onto
/// their eigenvectors. The reduced model keeps symmetry and modal damping;
/// its transfer function is the truncated pole-residue sum.
pub fn somddpa_reduce(
    sys: &SecondOrderSystem,
    r: usize,
    tol: &Tolerances,
    force: bool,
) -> Result<SomddpaReduction, SomddpaError> {
    if !sys.is_positions_only() {
        return Err(SomddpaError::NotPositionsOnly);
    }
    let n = sys.order();
    if r == 0 || r > n {
        return Err(SomddpaError::InvalidOrder { r, n });
    }
    let modal = modal_decompose(sys, tol, force)?;
    let rank = dominance_rank(&modal, &sys.b_u, &sys.c_p)?;

    let keep = &rank.order[..r];
    let mut v = DMat::zeros(n, r);
    for (col, &k) in keep.iter().enumerate() {
        v.column_mut(col).copy_from(&modal.x.column(k));
    }
    let rom = SecondOrderSystem::new(
        v.transpose() * (&sys.m * &v),
        v.transpose() * (&sys.d * &v),
        v.transpose() * (&sys.k * &v),
        v.transpose() * &sys.b_u,
        &sys.c_p * &v,
        DMat::zeros(sys.n_outputs(), r),
    )?;

    let terms = keep
        .iter()
        .map(|&k| {
            let xk = modal.x.column(k);
            let residue = (&sys.c_p * xk) * (xk.transpose() * &sys.b_u) * modal.omega[k];
            PoleResidueTerm {
                mode: k,
                omega: modal.omega[k],
                xi: modal.xi[k],
                lambda_plus: modal.lambda_plus[k],
                lambda_minus: modal.lambda_minus[k],
                residue,
            }
        })
        .collect();
    Ok(SomddpaReduction { rom, modal, rank, terms })
}

/// Evaluates a pole-residue sum at `s`.
pub fn eval_pole_residue(terms: &[PoleResidueTerm], s: Complex64) -> CMat {
    let (p, m) = terms
        .first()
        .map(|t| (t.residue.nrows(), t.residue.ncols()))
        .unwrap_or((0, 0));
    let mut h = CMat::zeros(p, m);
    for t in terms {
        let gain = ((s - t.lambda_plus) * (s - t.lambda_minus)).inv();
        for j in 0..m {
            for i in 0..p {
                h[(i, j)] += gain * t.residue[(i, j)];
            }
        }
    }
    h
}

/// CSV table of all modes in ranked order:
/// `mode,omega,xi,re_lambda_plus,im_lambda_plus,re_lambda_minus,im_lambda_minus,dominance`.
/// Mode indices are 1-based; floats carry 17 significant digits.
pub fn dominance_csv(modal: &ModalData, rank: &DominanceRank) -> String {
    let mut out = String::from(
        "mode,omega,xi,re_lambda_plus,im_lambda_plus,re_lambda_minus,im_lambda_minus,dominance\n",
    );
    for &k in &rank.order {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            k + 1,
            modal.omega[k],
            modal.xi[k],
            modal.lambda_plus[k].re,
            modal.lambda_plus[k].im,
            modal.lambda_minus[k].re,
            modal.lambda_minus[k].im,
            rank.dominance[k],
        ));
    }
    out
}
