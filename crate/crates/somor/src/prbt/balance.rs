//! Signed characteristic values and signature-balanced truncation.
//!
//! The symmetric first-order form makes the observability Gramian a mirror
//! of the controllability one, `Q = S P S`, so balancing needs only the
//! eigen-decomposition of `L S L` with `P = L L`. The absolute eigenvalues
//! are the characteristic values, their signs split the states into two
//! classes of equal size, and truncation keeps the same number from both.
//! In the balanced coordinates the retained system carries a fixed zero
//! pattern that the second-order recovery step relies on; this module
//! measures how well the computed matrices honor it instead of assuming.

use crate::config::Tolerances;
use crate::linalg::backend::{dsyev, gemm, lu_real};
use crate::linalg::{fro, symmetrize, DMat};
use crate::sos::DescriptorSystem;

use super::{solve_lure, LureSolution, PrbtError};

/// Relative row-norm threshold above which a positive-signature state
/// counts as carrying input weight. The exact-arithmetic dichotomy is
/// all-or-nothing (non-carrying rows vanish identically), so the threshold
/// only has to sit well above the numerical noise floor of the solve.
const INPUT_ROW_REL: f64 = 1e-6;

/// Input weight pins the characteristic value at one; this is how far from
/// one a value may stray (through solve error) and still count as pinned.
/// Classification requires the row test and the pin test together, since
/// either alone can be fooled: noise rows pass the first on badly resolved
/// solves, weakly damped strict pairs crowd toward one and pass the second.
const INPUT_PIN_TOL: f64 = 1e-3;

/// Relative gap below which the two values of a pair count as equal.
const TIED_REL: f64 = 1e-9;

/// Characteristic values of a positive-real transfer function with the
/// signatures inherited from the signed Gramian structure.
///
/// Layout: the positive-signature class first, then the negative class,
/// each sorted descending; `signatures` is aligned with `values` and
/// `pairing[i]` gives the indices of the i-th largest value of each class.
#[derive(Debug, Clone)]
pub struct SignedCharacteristicValues {
    pub values: Vec<f64>,
    pub signatures: Vec<i8>,
    pub pairing: Vec<(usize, usize)>,
}

impl SignedCharacteristicValues {
    /// Number of (positive, negative) pairs.
    pub fn pairs(&self) -> usize {
        self.pairing.len()
    }
}

/// How a kept pair couples in the structured balanced form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    /// The positive-signature state carries input and output weight, which
    /// pins its value at one.
    Input,
    /// Both values of the pair coincide; the pair needs no rotation.
    Tied,
    /// Distinct values, no input weight: the generic case handled by the
    /// hyperbolic rotations of the recovery step.
    Strict,
}

/// One kept pair of characteristic values.
#[derive(Debug, Clone, Copy)]
pub struct KeptPair {
    pub positive: f64,
    pub negative: f64,
    pub kind: PairKind,
}

/// Reduced first-order model in structured balanced coordinates.
///
/// States come in six blocks of sizes `(m, l, p, p, l, m)`: the
/// negative-signature states ordered input-coupled, tied, strict, then the
/// positive-signature states mirrored in reverse type order, so the
/// signature matrix is `S_r = diag(-I_r, I_r)` with `r = m + l + p`. In
/// these coordinates the input matrix is supported on the trailing block,
/// the output matrix is its transpose there, and `a_hat` vanishes on a
/// fixed block pattern. The matrices are stored as computed;
/// `structure_defect` records the worst violation of the pattern.
#[derive(Debug, Clone)]
pub struct StructuredFirstOrderRom {
    pub a_hat: DMat,
    pub b_hat: DMat,
    /// Output matrix as projected; equals `b_hat'` on the trailing block up
    /// to the recorded defect.
    pub c_hat: DMat,
    /// Block sizes `(m, l, p)`: input-coupled, tied, strict pair counts.
    pub blocks: (usize, usize, usize),
    /// Kept pairs in block order (input-coupled, tied, strict), values
    /// descending within each group.
    pub pairs: Vec<KeptPair>,
    /// Sum of all truncated characteristic values over both classes; the
    /// reduction error in the gap metric is at most twice this number.
    pub truncated_sum: f64,
    /// Largest entry violating the structured zero pattern, the signature
    /// symmetry of `a_hat`, or the output/input transposition identity,
    /// relative to the Frobenius norm of the matrix it lives in.
    pub structure_defect: f64,
}

impl StructuredFirstOrderRom {
    /// Number of kept pairs, which is the order of the recovered
    /// second-order model.
    pub fn order_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// First-order realization for transfer evaluations.
    pub fn descriptor(&self) -> DescriptorSystem {
        DescriptorSystem {
            e: DMat::identity(self.a_hat.nrows(), self.a_hat.nrows()),
            a: self.a_hat.clone(),
            b: self.b_hat.clone(),
            c: self.c_hat.clone(),
        }
    }
}

/// Eigen-structure of `L S L` with the states classified by sign.
struct SignedSpectrum {
    theta: Vec<f64>,
    vecs: DMat,
    /// Eigen indices per class, magnitudes descending, exact zeros split
    /// between the classes at the tail.
    neg: Vec<usize>,
    pos: Vec<usize>,
}

fn signed_spectrum(factor: &DMat) -> Result<SignedSpectrum, PrbtError> {
    let n2 = factor.nrows();
    if factor.ncols() != n2 || n2 % 2 != 0 {
        return Err(PrbtError::DimensionMismatch(format!(
            "balancing factor must be square of even size, got {}x{}",
            n2,
            factor.ncols()
        )));
    }
    let n = n2 / 2;
    let mut ls = factor.clone();
    ls.view_mut((0, 0), (n2, n)).neg_mut();
    let z = symmetrize(&gemm(1.0, &ls, false, factor, false));
    let (theta, vecs) = dsyev(&z)?;
    // Ascending eigenvalue order means the negatives already come largest
    // magnitude first, the positives need reversing.
    let mut neg: Vec<usize> = (0..n2).filter(|&j| theta[j] < 0.0).collect();
    let mut pos: Vec<usize> = (0..n2).filter(|&j| theta[j] > 0.0).rev().collect();
    // A singular factor can only lose inertia, never flip it, so exact
    // zeros always suffice to balance the classes.
    let mut zeros: Vec<usize> = (0..n2).filter(|&j| theta[j] == 0.0).collect();
    while neg.len() < n && !zeros.is_empty() {
        neg.push(zeros.remove(0));
    }
    while pos.len() < n && !zeros.is_empty() {
        pos.push(zeros.remove(0));
    }
    if neg.len() != n || pos.len() != n {
        return Err(PrbtError::SignatureImbalance {
            negative: neg.len(),
            positive: pos.len(),
        });
    }
    Ok(SignedSpectrum {
        theta: theta.as_slice().to_vec(),
        vecs,
        neg,
        pos,
    })
}

/// Characteristic values and signatures from a Gramian factor `P = L L`.
pub fn pr_characteristic_values(
    factor: &DMat,
) -> Result<SignedCharacteristicValues, PrbtError> {
    let s = signed_spectrum(factor)?;
    let n = s.pos.len();
    let mut values = Vec::with_capacity(2 * n);
    let mut signatures = Vec::with_capacity(2 * n);
    for &j in &s.pos {
        values.push(s.theta[j].abs());
        signatures.push(1i8);
    }
    for &j in &s.neg {
        values.push(s.theta[j].abs());
        signatures.push(-1i8);
    }
    let pairing = (0..n).map(|i| (i, n + i)).collect();
    Ok(SignedCharacteristicValues {
        values,
        signatures,
        pairing,
    })
}

/// Solves the Lur'e equations and truncates to `keep` pairs per signature
/// class in the balanced coordinates.
pub fn pr_balance_truncate(
    sys: &DescriptorSystem,
    keep: usize,
    tol: &Tolerances,
) -> Result<StructuredFirstOrderRom, PrbtError> {
    let lure = solve_lure(sys, tol)?;
    pr_balance_truncate_with(sys, &lure, keep, tol)
}

/// Truncation with a previously computed Lur'e solution.
pub fn pr_balance_truncate_with(
    sys: &DescriptorSystem,
    lure: &LureSolution,
    keep: usize,
    _tol: &Tolerances,
) -> Result<StructuredFirstOrderRom, PrbtError> {
    let n2 = sys.order();
    if sys.e != DMat::identity(n2, n2) {
        return Err(PrbtError::DimensionMismatch(
            "balancing expects the symmetric form with identity descriptor".into(),
        ));
    }
    if lure.factor.nrows() != n2 {
        return Err(PrbtError::DimensionMismatch(format!(
            "factor order {} does not match the system order {}",
            lure.factor.nrows(),
            n2
        )));
    }
    if keep == 0 {
        return Err(PrbtError::OrderTooLarge {
            requested: 0,
            available: 0,
        });
    }
    let s = signed_spectrum(&lure.factor)?;

    // Exact zeros cannot be balanced (the transform scales by the inverse
    // square root of the value), so only the nonzero head is available.
    let avail_neg = s.neg.iter().take_while(|&&j| s.theta[j] != 0.0).count();
    let avail_pos = s.pos.iter().take_while(|&&j| s.theta[j] != 0.0).count();
    let avail = avail_neg.min(avail_pos);
    if keep > avail {
        if avail_neg != avail_pos {
            return Err(PrbtError::SignatureImbalance {
                negative: avail_neg,
                positive: avail_pos,
            });
        }
        return Err(PrbtError::OrderTooLarge {
            requested: keep,
            available: avail,
        });
    }

    let kn = &s.neg[..keep];
    let kp = &s.pos[..keep];
    let k2 = 2 * keep;

    // Balancing directions, pair order: negatives then positives. The
    // transform is T = L^-1 U |Theta|^(1/2) column-wise with inverse
    // transpose W = L U |Theta|^(-1/2), so T' P T = |Theta| and the
    // signature matrix stays diag(+-1) without ever forming T fully.
    let mut u_k = DMat::zeros(n2, k2);
    for (col, &j) in kn.iter().chain(kp.iter()).enumerate() {
        u_k.set_column(col, &s.vecs.column(j));
    }
    let mut w_k = gemm(1.0, &lure.factor, false, &u_k, false);
    let lu = lu_real(&lure.factor)?;
    let mut v_k = lu.solve(&u_k)?;
    for (col, &j) in kn.iter().chain(kp.iter()).enumerate() {
        let root = s.theta[j].abs().sqrt();
        w_k.column_mut(col).scale_mut(1.0 / root);
        v_k.column_mut(col).scale_mut(root);
    }

    // Classify the pairs through the input rows of the positive states:
    // a nonzero row pins the value at one and routes the pair into the
    // outer blocks, equal values form the tied middle, the rest are the
    // strict pairs the recovery step rotates.
    let b_rows = gemm(1.0, &w_k, true, &sys.b, false);
    let rho: Vec<f64> = (0..keep).map(|i| b_rows.row(keep + i).norm()).collect();
    let rho_max = rho.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut kind = vec![PairKind::Strict; keep];
    for i in 0..keep {
        let vp = s.theta[kp[i]].abs();
        let vn = s.theta[kn[i]].abs();
        let active = rho_max > 0.0 && rho[i] > INPUT_ROW_REL * rho_max;
        if active && (vp - 1.0).abs() <= INPUT_PIN_TOL {
            kind[i] = PairKind::Input;
        } else if (vp - vn).abs() <= TIED_REL * vp.max(vn) {
            kind[i] = PairKind::Tied;
        }
    }
    let input: Vec<usize> = (0..keep).filter(|&i| kind[i] == PairKind::Input).collect();
    let tied: Vec<usize> = (0..keep).filter(|&i| kind[i] == PairKind::Tied).collect();
    let strict: Vec<usize> = (0..keep).filter(|&i| kind[i] == PairKind::Strict).collect();
    let blocks = (input.len(), tied.len(), strict.len());

    // Structured state order: negatives as (input, tied, strict), then the
    // positive partners mirrored as (strict, tied, input). Column c of the
    // pair-ordered matrices holds the negative of pair c below `keep` and
    // the positive of pair c - keep above.
    let mut order: Vec<usize> = Vec::with_capacity(k2);
    order.extend(input.iter().copied());
    order.extend(tied.iter().copied());
    order.extend(strict.iter().copied());
    order.extend(strict.iter().map(|&i| keep + i));
    order.extend(tied.iter().map(|&i| keep + i));
    order.extend(input.iter().map(|&i| keep + i));

    let mut w_ord = DMat::zeros(n2, k2);
    let mut v_ord = DMat::zeros(n2, k2);
    let mut b_hat = DMat::zeros(k2, sys.n_inputs());
    for (col, &src) in order.iter().enumerate() {
        w_ord.set_column(col, &w_k.column(src));
        v_ord.set_column(col, &v_k.column(src));
        b_hat.set_row(col, &b_rows.row(src));
    }
    let av = gemm(1.0, &sys.a, false, &v_ord, false);
    let a_hat = gemm(1.0, &w_ord, true, &av, false);
    let c_hat = gemm(1.0, &sys.c, false, &v_ord, false);

    let mut pairs = Vec::with_capacity(keep);
    for list in [&input, &tied, &strict] {
        for &i in list.iter() {
            pairs.push(KeptPair {
                positive: s.theta[kp[i]].abs(),
                negative: s.theta[kn[i]].abs(),
                kind: kind[i],
            });
        }
    }

    let kept_sum: f64 = kn.iter().chain(kp.iter()).map(|&j| s.theta[j].abs()).sum();
    let total: f64 = s.theta.iter().map(|t| t.abs()).sum();
    let truncated_sum = (total - kept_sum).max(0.0);

    let structure_defect = measure_structure_defect(&a_hat, &b_hat, &c_hat, blocks);

    Ok(StructuredFirstOrderRom {
        a_hat,
        b_hat,
        c_hat,
        blocks,
        pairs,
        truncated_sum,
        structure_defect,
    })
}

/// Largest relative violation of the structured form: zero blocks of `A`,
/// the signature symmetry `A S = S A'`, input rows outside the trailing
/// block, and `C = B'` on the trailing block.
fn measure_structure_defect(
    a_hat: &DMat,
    b_hat: &DMat,
    c_hat: &DMat,
    (m, l, p): (usize, usize, usize),
) -> f64 {
    let r = m + l + p;
    let k2 = 2 * r;
    let sizes = [m, l, p, p, l, m];
    let mut starts = [0usize; 6];
    for i in 1..6 {
        starts[i] = starts[i - 1] + sizes[i - 1];
    }
    // Zero blocks of the structured form, 1-based (row, col).
    const ZERO_BLOCKS: [(usize, usize); 21] = [
        (1, 1), (1, 2), (1, 3), (1, 4), (1, 5),
        (2, 1), (2, 2), (2, 3), (2, 4),
        (3, 1), (3, 2), (3, 5),
        (4, 1), (4, 2), (4, 5),
        (5, 1), (5, 3), (5, 4), (5, 5), (5, 6),
        (6, 5),
    ];
    let a_norm = fro(a_hat).max(1e-300);
    let mut worst = 0.0f64;
    for &(bi, bj) in ZERO_BLOCKS.iter() {
        let view = a_hat.view((starts[bi - 1], starts[bj - 1]), (sizes[bi - 1], sizes[bj - 1]));
        for e in view.iter() {
            worst = worst.max(e.abs() / a_norm);
        }
    }
    // a S = S a' entry-wise: sign(i) a[j,i] = sign(j) a[i,j] with the
    // leading r states negative.
    let sign = |i: usize| if i < r { -1.0 } else { 1.0 };
    for i in 0..k2 {
        for j in 0..k2 {
            let d = (a_hat[(i, j)] * sign(j) - sign(i) * a_hat[(j, i)]).abs();
            worst = worst.max(d / a_norm);
        }
    }
    let b_norm = fro(b_hat).max(1e-300);
    for i in 0..k2 - m {
        for e in b_hat.row(i).iter() {
            worst = worst.max(e.abs() / b_norm);
        }
    }
    let c_norm = fro(c_hat).max(1e-300);
    for i in 0..k2 {
        for o in 0..c_hat.nrows().min(b_hat.ncols()) {
            let d = (c_hat[(o, i)] - sign(i) * b_hat[(i, o)]).abs();
            worst = worst.max(d / c_norm);
        }
    }
    worst
}
