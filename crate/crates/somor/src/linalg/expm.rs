//! Dense matrix exponential by scaling and squaring with a degree 13
//! Padé approximant.

use super::backend::{gemm, lu_real};
use super::{check_finite, DMat, LinAlgError};

const THETA_13: f64 = 5.371920351148152;

const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Computes `exp(A t)` for a square real matrix and scalar `t`.
///
/// The scaling exponent is capped; an input whose norm forces more than 60
/// squarings is reported as an overflow instead of silently losing all
/// accuracy.
pub fn matrix_exp(a: &DMat, t: f64) -> Result<DMat, LinAlgError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(LinAlgError::DimensionMismatch(format!(
            "matrix exponential needs a square input, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    check_finite(a, "matrix exponential input")?;
    if !t.is_finite() {
        return Err(LinAlgError::NonFinite("matrix exponential time scale"));
    }
    if n == 0 {
        return Ok(DMat::zeros(0, 0));
    }
    let at = a * t;

    let norm1 = one_norm(&at);
    let s = if norm1 > THETA_13 {
        (norm1 / THETA_13).log2().ceil() as i64
    } else {
        0
    };
    if s > 60 {
        return Err(LinAlgError::Overflow(norm1));
    }
    let at = at * 2f64.powi(-(s as i32));

    let a2 = gemm(1.0, &at, false, &at, false);
    let a4 = gemm(1.0, &a2, false, &a2, false);
    let a6 = gemm(1.0, &a2, false, &a4, false);
    let id = DMat::identity(n, n);

    // U = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let w1 = &a6 * B13[13] + &a4 * B13[11] + &a2 * B13[9];
    let w2 = &a6 * B13[7] + &a4 * B13[5] + &a2 * B13[3] + &id * B13[1];
    let u = gemm(1.0, &at, false, &(gemm(1.0, &a6, false, &w1, false) + w2), false);
    // V = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let z1 = &a6 * B13[12] + &a4 * B13[10] + &a2 * B13[8];
    let v = gemm(1.0, &a6, false, &z1, false) + &a6 * B13[6] + &a4 * B13[4] + &a2 * B13[2] + &id * B13[0];

    // r = (V - U)^{-1} (V + U)
    let vmu = &v - &u;
    let vpu = &v + &u;
    let lu = lu_real(&vmu)?;
    let mut r = lu.solve(&vpu)?;
    for _ in 0..s {
        r = gemm(1.0, &r, false, &r, false);
    }
    Ok(r)
}

fn one_norm(a: &DMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0f64, f64::max)
}
