//! Balanced truncation of second-order systems driven by frequency- or
//! time-limited Gramians of the companion realization.
//!
//! The 2n-dimensional Gramians split into position and velocity blocks, and
//! a balancing formula picks one block (possibly mass-weighted, possibly the
//! sum of both) per side. Square-root balancing of the chosen pair yields a
//! Petrov-Galerkin projection that is applied to all coefficient matrices at
//! once, so the reduced system is second order but need not inherit symmetry
//! or stability; stability is therefore checked and reported, never assumed.

mod balance;
mod gramian;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::linalg::backend;
use crate::sos::{companion_form, SecondOrderSystem, SosError};
use crate::linalg::{DMat, DVec, LinAlgError};

pub use balance::{balanced_projection, BalancedProjection};
pub use gramian::{
    freq_limited_gramians, limited_gramians, time_limited_gramians, unlimited_gramians,
};

#[derive(Debug, thiserror::Error)]
pub enum LimitedBtError {
    #[error("invalid gramian limit: {0}")]
    InvalidLimit(String),
    #[error("pencil is not asymptotically stable: max Re(lambda) = {max_re:.3e}")]
    UnstablePencil { max_re: f64 },
    #[error("characteristic values are rank deficient at the requested order: sigma_r/sigma_1 = {ratio:.3e}")]
    RankDeficient { ratio: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
    #[error(transparent)]
    Sos(#[from] SosError),
}

/// Region of the frequency or time axis a Gramian is restricted to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GramianLimit {
    Unlimited,
    Frequency { lo: f64, hi: f64 },
    Time { t0: f64, tf: f64 },
}

impl fmt::Display for GramianLimit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GramianLimit::Unlimited => write!(f, "unlimited"),
            GramianLimit::Frequency { lo, hi } => write!(f, "frequency [{lo:e}, {hi:e}]"),
            GramianLimit::Time { t0, tf } => write!(f, "time [{t0}, {tf}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GramianSide {
    Controllability,
    Observability,
}

/// Low-rank factor `L` of a positive semi-definite Gramian `L L'`.
///
/// The factor is produced by spectral clamping of the Lyapunov solution:
/// whatever negative mass the limited right-hand side introduced has been
/// discarded (and is recorded), so the represented Gramian is PSD by
/// construction and the column count equals its numerical rank.
#[derive(Debug, Clone)]
pub struct GramianFactor {
    pub l: DMat,
    pub side: GramianSide,
    pub limit: GramianLimit,
    /// Total spectral mass removed by the PSD clamp, `sum |lambda_i|` over
    /// eigenvalues below `-psd_clamp * lambda_max`.
    pub clamped_mass: f64,
}

impl GramianFactor {
    /// Dense Gramian `L L'` represented by this factor.
    pub fn gramian(&self) -> DMat {
        &self.l * self.l.transpose()
    }
}

/// Position and velocity row blocks of a companion-form Gramian factor pair.
///
/// Each field is an `n x k` factor: `p_p p_p'` is the position block of the
/// controllability Gramian, `p_v p_v'` its velocity block, and likewise for
/// the observability side.
#[derive(Debug, Clone)]
pub struct SoGramianBlocks {
    pub p_p: DMat,
    pub p_v: DMat,
    pub q_p: DMat,
    pub q_v: DMat,
}

/// Splits companion-form Gramian factors into their position (rows `1..n`)
/// and velocity (rows `n+1..2n`) blocks by row selection.
pub fn so_gramian_blocks(
    p: &GramianFactor,
    q: &GramianFactor,
    n: usize,
) -> Result<SoGramianBlocks, LimitedBtError> {
    for (factor, name) in [(p, "controllability"), (q, "observability")] {
        if factor.l.nrows() != 2 * n {
            return Err(LimitedBtError::DimensionMismatch(format!(
                "{name} factor has {} rows, expected {} for {} coordinates",
                factor.l.nrows(),
                2 * n,
                n
            )));
        }
    }
    Ok(SoGramianBlocks {
        p_p: p.l.rows(0, n).into_owned(),
        p_v: p.l.rows(n, n).into_owned(),
        q_p: q.l.rows(0, n).into_owned(),
        q_v: q.l.rows(n, n).into_owned(),
    })
}

/// The eight ways of pairing position/velocity Gramian blocks for balancing.
///
/// `m`-suffixed names weight the velocity block by the mass matrix (momentum
/// coordinates), `fv` weights the controllability velocity block instead,
/// and `so` balances the sums of both blocks per side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BalancingFormula {
    P,
    Pm,
    Pv,
    Vp,
    V,
    Vpm,
    Fv,
    So,
}

impl BalancingFormula {
    pub const ALL: [BalancingFormula; 8] = [
        BalancingFormula::P,
        BalancingFormula::Pm,
        BalancingFormula::Pv,
        BalancingFormula::Vp,
        BalancingFormula::V,
        BalancingFormula::Vpm,
        BalancingFormula::Fv,
        BalancingFormula::So,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BalancingFormula::P => "p",
            BalancingFormula::Pm => "pm",
            BalancingFormula::Pv => "pv",
            BalancingFormula::Vp => "vp",
            BalancingFormula::V => "v",
            BalancingFormula::Vpm => "vpm",
            BalancingFormula::Fv => "fv",
            BalancingFormula::So => "so",
        }
    }

    /// Controllability-side and observability-side factors for this formula.
    ///
    /// Mass weighting `M G M'` maps the factor to `M L`; the block sum
    /// `G_p + G_v` concatenates the two factors column-wise.
    fn factor_pair(self, blocks: &SoGramianBlocks, m: &DMat) -> (DMat, DMat) {
        match self {
            BalancingFormula::P => (blocks.p_p.clone(), blocks.q_p.clone()),
            BalancingFormula::Pm => (blocks.p_p.clone(), m * &blocks.q_v),
            BalancingFormula::Pv => (blocks.p_p.clone(), blocks.q_v.clone()),
            BalancingFormula::Vp => (blocks.p_v.clone(), blocks.q_p.clone()),
            BalancingFormula::V => (blocks.p_v.clone(), blocks.q_v.clone()),
            BalancingFormula::Vpm => (blocks.p_v.clone(), m * &blocks.q_v),
            BalancingFormula::Fv => (m * &blocks.p_v, blocks.q_p.clone()),
            BalancingFormula::So => (
                hcat(&blocks.p_p, &blocks.p_v),
                hcat(&blocks.q_p, &blocks.q_v),
            ),
        }
    }
}

impl fmt::Display for BalancingFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BalancingFormula {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        BalancingFormula::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                format!("unknown balancing formula '{s}' (expected one of p, pm, pv, vp, v, vpm, fv, so)")
            })
    }
}

fn hcat(a: &DMat, b: &DMat) -> DMat {
    debug_assert_eq!(a.nrows(), b.nrows());
    let mut out = DMat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// A reduced second-order system together with the balancing metadata.
#[derive(Debug, Clone)]
pub struct LimitedBtReduction {
    pub rom: SecondOrderSystem,
    pub formula: BalancingFormula,
    pub limit: GramianLimit,
    /// Full characteristic value spectrum of the balanced pair, descending.
    pub charvals: DVec,
    /// Whether every pole of the reduced companion pencil satisfies
    /// `Re(lambda) < 0`; balancing does not guarantee this.
    pub stable: bool,
    /// Largest pole real part of the reduced system; `inf` when the reduced
    /// mass matrix is numerically singular.
    pub max_pole_re: f64,
}

/// Reduces `sys` to order `r` with the given limit and balancing formula.
///
/// Computes the limited Gramian pair from scratch; to reuse one pair across
/// several formulas see [`limited_bt_reduce_with`].
pub fn limited_bt_reduce(
    sys: &SecondOrderSystem,
    limit: GramianLimit,
    formula: BalancingFormula,
    r: usize,
    tol: &Tolerances,
) -> Result<LimitedBtReduction, LimitedBtError> {
    let ds = companion_form(sys);
    let (p, q) = limited_gramians(&ds, limit, tol)?;
    limited_bt_reduce_with(sys, &p, &q, formula, r, tol)
}

/// Reduces `sys` with a precomputed companion Gramian factor pair.
pub fn limited_bt_reduce_with(
    sys: &SecondOrderSystem,
    p: &GramianFactor,
    q: &GramianFactor,
    formula: BalancingFormula,
    r: usize,
    tol: &Tolerances,
) -> Result<LimitedBtReduction, LimitedBtError> {
    let blocks = so_gramian_blocks(p, q, sys.order())?;
    let (l_ctrl, l_obs) = formula.factor_pair(&blocks, &sys.m);
    let proj = balanced_projection(&l_obs, &l_ctrl, r, tol)?;
    let (v, w) = (&proj.v, &proj.w);
    let rom = SecondOrderSystem::new(
        w.transpose() * &sys.m * v,
        w.transpose() * &sys.d * v,
        w.transpose() * &sys.k * v,
        w.transpose() * &sys.b_u,
        &sys.c_p * v,
        &sys.c_v * v,
    )?;
    let (stable, max_pole_re) = rom_stability(&rom)?;
    Ok(LimitedBtReduction {
        rom,
        formula,
        limit: p.limit,
        charvals: proj.sigma,
        stable,
        max_pole_re,
    })
}

/// Pole test of the reduced companion pencil via the QZ iteration, which
/// tolerates a singular reduced mass matrix (reported as an infinite pole).
fn rom_stability(rom: &SecondOrderSystem) -> Result<(bool, f64), LimitedBtError> {
    let ds = companion_form(rom);
    let pairs = backend::dggev_values(&ds.a, &ds.e)?;
    let mut stable = true;
    let mut max_re = f64::NEG_INFINITY;
    for (alpha, beta) in pairs {
        let re = if beta.abs() * 1e14 > alpha.norm() {
            alpha.re / beta
        } else {
            f64::INFINITY
        };
        max_re = max_re.max(re);
        if !(re < 0.0) {
            stable = false;
        }
    }
    Ok((stable, max_re))
}

/// Renders characteristic value spectra as `index,sigma,formula` rows.
pub fn charvals_csv(reductions: &[LimitedBtReduction]) -> String {
    let mut out = String::from("index,sigma,formula\n");
    for red in reductions {
        for (i, s) in red.charvals.iter().enumerate() {
            out.push_str(&format!("{},{:.16e},{}\n", i + 1, s, red.formula));
        }
    }
    out
}
