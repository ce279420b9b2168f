//! Positive real balanced truncation for co-located second-order systems.
//!
//! The input has velocity outputs through the input map (`C_v = B_u'`,
//! `C_p = 0`), so the transfer function is positive real. The reduction
//! pipeline preserves that property and returns a second-order model again:
//!
//! 1. rewrite the dynamics in the signature-symmetric first-order form,
//! 2. solve the positive-real Lur'e equations through a ladder of
//!    regularized Riccati solves ([`solve_lure`]),
//! 3. truncate in the balanced coordinates of the signed characteristic
//!    values ([`pr_balance_truncate`]),
//! 4. rotate the strictly paired states until the reduced first-order
//!    matrices carry a second-order structure again ([`structure_recovery`]).
//!
//! The truncation comes with the a-priori gap bound `2 * sum of truncated
//! characteristic values`, and the recovered model keeps `M = I`, `K` SPD,
//! and a symmetric (possibly indefinite) damping matrix.

mod balance;
mod lure;
mod recovery;

use crate::linalg::LinAlgError;
use crate::sos::SosError;

pub use balance::{
    pr_balance_truncate, pr_balance_truncate_with, pr_characteristic_values, KeptPair, PairKind,
    SignedCharacteristicValues, StructuredFirstOrderRom,
};
pub use lure::{solve_lure, solve_lure_at, LureSolution, EPSILON_SCHEDULE};
pub use recovery::{structure_recovery, RecoveredRom};

#[derive(Debug, thiserror::Error)]
pub enum PrbtError {
    #[error("regularized Riccati equation has no stabilizing solution at epsilon = {epsilon:.1e}: {source}")]
    NoStabilizingSolution { epsilon: f64, source: LinAlgError },
    #[error("Lur'e constraint residual {residual:.3e} exceeds {limit:.3e} after refinement")]
    LureResidualLarge { residual: f64, limit: f64 },
    #[error("dual Riccati solution breaks the signature identity: defect {defect:.3e} > {limit:.3e}")]
    DualMismatch { defect: f64, limit: f64 },
    #[error("kept characteristic values cannot be paired: {negative} negative vs {positive} positive")]
    SignatureImbalance { negative: usize, positive: usize },
    #[error("characteristic value pair {index} violates interlacing: negative {negative:.6e} vs positive {positive:.6e}")]
    InterlacingViolated { index: usize, negative: f64, positive: f64 },
    #[error("requested order {requested} exceeds the available {available} pairs")]
    OrderTooLarge { requested: usize, available: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
    #[error(transparent)]
    Sos(#[from] SosError),
}
