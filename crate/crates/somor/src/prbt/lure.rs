//! Lur'e equation solves through regularized positive-real Riccati equations.
//!
//! The Lur'e system `A'P + PA = -Kc'Kc`, `PB = C'` has no feedthrough term to
//! absorb the constraint, so `P` is computed as the limit of stabilizing
//! Riccati solutions with feedthrough `2*eps*I` as `eps -> 0`. The solutions
//! expand in powers of `sqrt(eps)`, which makes polynomial extrapolation in
//! `sqrt(eps)` over a small ladder of regularizations accurate to roughly the
//! square of the smallest step.

use crate::config::Tolerances;
use crate::linalg::backend::dsyev;
use crate::linalg::{fro, solve_pr_riccati, symmetrize, DMat, LinAlgError};
use crate::sos::DescriptorSystem;

use super::PrbtError;

/// Regularization ladder, strongest first. The endpoints are fixed by the
/// accuracy target (constraint residual around `1e-8` after extrapolation);
/// the interior node supports quadratic extrapolation in `sqrt(eps)`.
pub const EPSILON_SCHEDULE: [f64; 3] = [1e-4, 1e-6, 1e-8];

/// Limit on the relative defect of the dual-solution identity
/// `Q = S_n P S_n` checked at the final regularization.
const DUAL_DEFECT_LIMIT: f64 = 1e-6;

/// Relative threshold below which the damping block counts as exactly zero
/// and the lossless shortcut `P = I` applies.
const LOSSLESS_REL_TOL: f64 = 1e-14;

/// Stabilizing solution of the positive-real Lur'e equations for a
/// signature-symmetric first-order system.
#[derive(Debug, Clone)]
pub struct LureSolution {
    /// Symmetric PSD square root of the solution: `P = L'L = L*L`.
    pub factor: DMat,
    /// Frobenius defect of the constraint, `norm(P*B - C')`.
    pub residual: f64,
    /// Regularization values that entered the extrapolation, strongest
    /// first. Empty for the lossless shortcut.
    pub epsilon_schedule: Vec<f64>,
    /// Relative defect of `Q = S_n P S_n` at the final regularization, with
    /// `Q` the independently solved dual solution. Zero for the shortcut.
    pub dual_defect: f64,
}

impl LureSolution {
    /// Reconstructs `P = L*L` from the stored factor.
    pub fn p(&self) -> DMat {
        &self.factor * &self.factor
    }
}

/// Solves the `eps`-regularized positive-real Riccati equation
/// `A'P + PA + (PB - C')(2 eps I)^-1 (B'P - C) = 0` for its stabilizing
/// solution.
pub fn solve_lure_at(
    sys: &DescriptorSystem,
    epsilon: f64,
    tol: &Tolerances,
) -> Result<DMat, PrbtError> {
    assert!(epsilon > 0.0, "regularization must be positive");
    let m = sys.n_inputs();
    let r = DMat::identity(m, m) * (2.0 * epsilon);
    match solve_pr_riccati(&sys.a, &sys.b, &sys.c, &r, tol) {
        Ok(sol) => Ok(sol.x),
        Err(e @ LinAlgError::NoStabilizingSolution(_)) => {
            Err(PrbtError::NoStabilizingSolution { epsilon, source: e })
        }
        Err(e) => Err(PrbtError::LinAlg(e)),
    }
}

/// Solves the Lur'e equations by the regularization ladder
/// [`EPSILON_SCHEDULE`] with extrapolation to `eps = 0`, and verifies the
/// dual-solution identity `Q = S_n P S_n` at the final regularization.
///
/// For a lossless system (`A` skew-symmetric, `C = B'`) the regularized
/// Riccati equation keeps the undamped spectrum on the imaginary axis and has
/// no stabilizing solution; the exact Lur'e solution `P = I` is returned
/// directly in that case.
pub fn solve_lure(sys: &DescriptorSystem, tol: &Tolerances) -> Result<LureSolution, PrbtError> {
    let n2 = sys.order();
    if n2 % 2 != 0 {
        return Err(PrbtError::DimensionMismatch(format!(
            "signature-symmetric form needs even order, got {}",
            n2
        )));
    }
    if sys.n_inputs() != sys.n_outputs() {
        return Err(PrbtError::DimensionMismatch(format!(
            "positive-real balancing needs a square transfer function, got {}x{}",
            sys.n_outputs(),
            sys.n_inputs()
        )));
    }

    let skew = fro(&(&sys.a + &sys.a.transpose()));
    let constraint = fro(&(&sys.b - &sys.c.transpose()));
    let scale = fro(&sys.a).max(1.0);
    if skew <= LOSSLESS_REL_TOL * scale && constraint <= LOSSLESS_REL_TOL * fro(&sys.b).max(1.0) {
        return Ok(LureSolution {
            factor: DMat::identity(n2, n2),
            residual: constraint,
            epsilon_schedule: Vec::new(),
            dual_defect: 0.0,
        });
    }

    // Equilibrate the input columns to unit norm. Scaling input j by its
    // column norm leaves the Lur'e solution P unchanged (constraint and
    // residual scale columnwise) but shifts the effective regularization by
    // the squared norm, so the fixed ladder below only behaves uniformly on
    // the normalized data.
    let mut scaled = sys.clone();
    for j in 0..scaled.b.ncols() {
        let nb = scaled.b.column(j).norm();
        if nb > 0.0 {
            scaled.b.column_mut(j).scale_mut(1.0 / nb);
            scaled.c.row_mut(j).scale_mut(1.0 / nb);
        }
    }

    let mut nodes: Vec<(f64, DMat)> = Vec::new();
    let mut failure: Option<PrbtError> = None;
    'ladder: for &eps in EPSILON_SCHEDULE.iter() {
        match solve_lure_at(&scaled, eps, tol) {
            Ok(p) => nodes.push((eps, p)),
            Err(e) => {
                // Strong damping can break the stable-subspace split of the
                // smallest regularizations. A rung between the last working
                // value and the failed one preserves the third extrapolation
                // node, which carries several digits of the limit.
                failure = Some(e);
                let mut lo = eps;
                for _ in 0..2 {
                    let Some(&(hi, _)) = nodes.last() else { break };
                    let mid = (hi * lo).sqrt();
                    match solve_lure_at(&scaled, mid, tol) {
                        Ok(p) => {
                            nodes.push((mid, p));
                            break;
                        }
                        Err(e2) => {
                            failure = Some(e2);
                            lo = mid;
                        }
                    }
                }
                break 'ladder;
            }
        }
    }
    let Some((eps_final, p_final)) = nodes.last() else {
        return Err(failure.expect("empty ladder must carry the failure"));
    };

    // Independent dual solve at the final regularization: the dual Riccati
    // solution must equal S_n P S_n by the signature symmetry of the data.
    let q = solve_lure_at(&dual_system(&scaled), *eps_final, tol)?;
    let sps = conjugate_by_signature(p_final, n2 / 2);
    let p_norm = fro(p_final).max(f64::MIN_POSITIVE);
    let dual_defect = fro(&(&q - &sps)) / p_norm;
    if dual_defect > DUAL_DEFECT_LIMIT {
        return Err(PrbtError::DualMismatch { defect: dual_defect, limit: DUAL_DEFECT_LIMIT });
    }

    let p0 = extrapolate_to_zero(&nodes);
    let (factor, p_rebuilt) = psd_sqrt(&p0)?;
    let residual = fro(&(&p_rebuilt * &sys.b - sys.c.transpose()));
    let limit = tol.lure_constraint * fro(&sys.c).max(f64::MIN_POSITIVE);
    if residual > limit {
        return Err(PrbtError::LureResidualLarge { residual, limit });
    }
    Ok(LureSolution {
        factor,
        residual,
        epsilon_schedule: nodes.iter().map(|(e, _)| *e).collect(),
        dual_defect,
    })
}

/// Data of the dual (observability-side) Riccati equation: `(A', C', B')`.
fn dual_system(sys: &DescriptorSystem) -> DescriptorSystem {
    DescriptorSystem {
        e: sys.e.clone(),
        a: sys.a.transpose(),
        b: sys.c.transpose(),
        c: sys.b.transpose(),
    }
}

/// `S_n X S_n` with `S_n = diag(-I_n, I_n)`: flips the sign of the two
/// off-diagonal n x n blocks.
fn conjugate_by_signature(x: &DMat, n: usize) -> DMat {
    let mut y = x.clone();
    y.view_mut((0, n), (n, n)).neg_mut();
    y.view_mut((n, 0), (n, n)).neg_mut();
    y
}

/// Lagrange extrapolation to `eps = 0` on the nodes `x_i = sqrt(eps_i)`,
/// matching the `sqrt(eps)` expansion of the regularized solutions.
fn extrapolate_to_zero(nodes: &[(f64, DMat)]) -> DMat {
    let xs: Vec<f64> = nodes.iter().map(|(e, _)| e.sqrt()).collect();
    let mut p0 = DMat::zeros(nodes[0].1.nrows(), nodes[0].1.ncols());
    for (i, (_, p)) in nodes.iter().enumerate() {
        let mut w = 1.0;
        for (j, &xj) in xs.iter().enumerate() {
            if j != i {
                w *= xj / (xj - xs[i]);
            }
        }
        p0 += p * w;
    }
    symmetrize(&p0)
}

/// Symmetric PSD square root with an eigenvalue floor at `1e-14 * lambda_max`
/// so the factor stays invertible: extrapolation can push tiny eigenvalues
/// slightly negative. Returns the factor and the refloored product `L*L`.
fn psd_sqrt(p: &DMat) -> Result<(DMat, DMat), PrbtError> {
    let (vals, vecs) = dsyev(p).map_err(PrbtError::LinAlg)?;
    let lmax = vals.iter().cloned().fold(0.0f64, f64::max);
    if lmax <= 0.0 {
        return Err(PrbtError::LinAlg(LinAlgError::NotPositiveDefinite(
            "Lur'e solution has no positive eigenvalues",
        )));
    }
    let floor = lmax * 1e-14;
    let mut sqrt_vals = vals.clone();
    for v in sqrt_vals.iter_mut() {
        *v = v.max(floor).sqrt();
    }
    let mut scaled = vecs.clone();
    for (j, s) in sqrt_vals.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*s);
    }
    let factor = symmetrize(&(&scaled * vecs.transpose()));
    let rebuilt = symmetrize(&(&factor * &factor));
    Ok((factor, rebuilt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{gen_triple_chain, TripleChainParams};
    use crate::sos::{symmetric_form, SecondOrderSystem};

    fn oscillator(d: f64) -> DescriptorSystem {
        let one = DMat::from_element(1, 1, 1.0);
        let sys = SecondOrderSystem::new(
            one.clone(),
            DMat::from_element(1, 1, d),
            one.clone(),
            one.clone(),
            DMat::zeros(1, 1),
            one.clone(),
        )
        .unwrap();
        symmetric_form(&sys).unwrap()
    }

    #[test]
    fn oscillator_matches_the_closed_form_at_fixed_epsilon() {
        // For m = k = 1 the regularized solution is c*I with
        // c = 1 + 2*eps*d - 2*sqrt(eps*d*(1 + eps*d)).
        let tol = Tolerances::default();
        for &(eps, d) in [(1e-3, 1.0), (1e-4, 0.5), (1e-5, 2.0)].iter() {
            let p = solve_lure_at(&oscillator(d), eps, &tol).unwrap();
            let c = 1.0 + 2.0 * eps * d - 2.0 * (eps * d * (1.0 + eps * d)).sqrt();
            let err = fro(&(&p - DMat::identity(2, 2) * c));
            assert!(err <= 1e-10, "eps {eps:e} d {d}: defect {err:e} from c = {c}");
        }
    }

    #[test]
    fn oscillator_limit_is_the_energy_matrix() {
        let tol = Tolerances::default();
        let sol = solve_lure(&oscillator(1.0), &tol).unwrap();
        let err = fro(&(sol.p() - DMat::identity(2, 2)));
        assert!(err <= 1e-8, "extrapolated P is {err:e} from I");
        assert!(sol.residual <= 1e-8, "constraint residual {:e}", sol.residual);
        assert!(sol.dual_defect <= 1e-6);
        assert_eq!(sol.epsilon_schedule, EPSILON_SCHEDULE.to_vec());
    }

    #[test]
    fn lossless_shortcut_returns_the_identity() {
        let sol = solve_lure(&oscillator(0.0), &Tolerances::default()).unwrap();
        assert_eq!(sol.factor, DMat::identity(2, 2));
        assert_eq!(sol.residual, 0.0);
        assert!(sol.epsilon_schedule.is_empty());
    }

    #[test]
    fn refinement_ladder_converges_on_the_chain() {
        // Raw solutions follow the sqrt(eps) law P_eps = P0 + sqrt(2 eps) X1
        // + O(eps): consecutive ladder differences shrink by the node ratio
        // (sqrt(1e-4)-sqrt(1e-6)) / (sqrt(1e-6)-sqrt(1e-8)) = 10, and the
        // refined estimate moves by under 1e-4 relative when the last rung
        // is added, which is the convergence signal of the refinement.
        let chain = gen_triple_chain(&TripleChainParams::new(5)).unwrap();
        let dsys = symmetric_form(&chain).unwrap();
        let tol = Tolerances::default();
        let p4 = solve_lure_at(&dsys, 1e-4, &tol).unwrap();
        let p6 = solve_lure_at(&dsys, 1e-6, &tol).unwrap();
        let p8 = solve_lure_at(&dsys, 1e-8, &tol).unwrap();
        let ratio = fro(&(&p4 - &p6)) / fro(&(&p6 - &p8));
        assert!((ratio - 10.0).abs() <= 2.0, "sqrt-law ratio {ratio}");
        let short = extrapolate_to_zero(&[(1e-4, p4), (1e-6, p6)]);
        let sol = solve_lure(&dsys, &tol).unwrap();
        let rel = fro(&(&short - &sol.p())) / fro(&sol.p());
        assert!(rel < 1e-4, "refinement change {rel:e} when adding the last rung");
    }

    #[test]
    fn chain_solution_passes_constraint_and_dual_checks() {
        let chain = gen_triple_chain(&TripleChainParams::new(5)).unwrap();
        let dsys = symmetric_form(&chain).unwrap();
        let sol = solve_lure(&dsys, &Tolerances::default()).unwrap();
        assert!(sol.residual <= 1e-4 * fro(&dsys.c), "residual {:e}", sol.residual);
        assert!(sol.dual_defect <= 1e-6, "dual defect {:e}", sol.dual_defect);
        // The factor squares back to a symmetric positive definite matrix.
        let p = sol.p();
        assert!(fro(&(&p - &p.transpose())) <= 1e-12 * fro(&p));
        let (vals, _) = dsyev(&p).unwrap();
        assert!(vals.iter().all(|&v| v > 0.0));
    }
}
