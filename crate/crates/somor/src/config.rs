//! Centralized numeric tolerances.
//!
//! Every threshold used by the solvers lives here so a caller can tighten or
//! relax them in one place. The defaults are the values the test suite and
//! the command line tool pin.

/// Tolerances shared across the dense kernels and reduction methods.
///
/// All relative tolerances are measured against a norm of the input unless
/// stated otherwise.
#[derive(Debug, Clone)]
pub struct Tolerances {
    /// Relative residual accepted for Lyapunov solutions:
    /// `||A X E' + E X A' + W|| <= lyapunov_residual * (||A|| ||X|| ||E|| + ||W||)`.
    pub lyapunov_residual: f64,
    /// Eigenvalue-pair separation below which a Lyapunov operator is
    /// declared singular (`lambda_i + lambda_j` close to zero).
    pub eig_separation: f64,
    /// Condition-number limit above which a mass/descriptor matrix is
    /// treated as singular.
    pub cond_limit: f64,
    /// Relative residual accepted for Riccati solutions.
    pub riccati_residual: f64,
    /// Half-width of the strip around the imaginary axis inside which a
    /// Hamiltonian eigenvalue blocks the stable/antistable split.
    pub imaginary_axis: f64,
    /// Distance from the closed negative real axis below which the matrix
    /// logarithm refuses an eigenvalue (principal branch undefined).
    pub log_branch_cut: f64,
    /// Gramian eigenvalues below `-psd_clamp * lambda_max` are an error of
    /// the semidefinite solve; eigenvalues in `[-psd_clamp*lambda_max, 0]`
    /// are clamped to zero when factoring.
    pub psd_clamp: f64,
    /// Threshold on the scaled commutator norm `||D M^-1 K - K M^-1 D||`
    /// under which a system is admissible for modal dominance analysis.
    /// Exactly commuting damping (Rayleigh) lands near 1e-16.
    pub modal_commutator: f64,
    /// Relative accuracy of the L-infinity norm computation.
    pub linf_rel_acc: f64,
    /// Iteration cap for the level-set L-infinity iteration.
    pub linf_max_iter: usize,
    /// Iteration cap for the subspace L-infinity iteration.
    pub subspace_max_iter: usize,
    /// Accepted relative violation of the positivity constraint
    /// `||P B - C'|| <= lure_constraint * ||C'||` for Lur'e solutions.
    pub lure_constraint: f64,
    /// Condition number of the structure-recovery transformation above which
    /// the result is flagged as ill-conditioned.
    pub transform_cond_limit: f64,
    /// Relative tolerance on the zero blocks of the structured first-order
    /// form after balancing.
    pub zero_block: f64,
    /// Relative tolerance for Hermite interpolation verification.
    pub hermite_check: f64,
    /// Relative singular-value cutoff below which a balancing cross matrix
    /// is declared rank deficient.
    pub balance_rank_cutoff: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            lyapunov_residual: 1e-10,
            eig_separation: 1e-12,
            cond_limit: 1e14,
            riccati_residual: 1e-8,
            imaginary_axis: 1e-10,
            log_branch_cut: 1e-12,
            psd_clamp: 1e-12,
            modal_commutator: 1e-8,
            linf_rel_acc: 1e-10,
            linf_max_iter: 50,
            subspace_max_iter: 50,
            lure_constraint: 1e-4,
            transform_cond_limit: 1e10,
            zero_block: 1e-8,
            hermite_check: 1e-8,
            balance_rank_cutoff: 1e-14,
        }
    }
}
