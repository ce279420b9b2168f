//! Gramians of a stable descriptor realization, optionally restricted to a
//! frequency band or a time window.
//!
//! The restricted Gramians still solve generalized Lyapunov equations, but
//! the right-hand sides carry a matrix logarithm (frequency band) or matrix
//! exponentials (time window) and are indefinite, so the solutions can dip
//! slightly negative. They are clamped back onto the PSD cone during
//! factorization and the discarded mass is reported on the factor.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{GramianFactor, GramianLimit, GramianSide, LimitedBtError};
use crate::config::Tolerances;
use crate::linalg::backend;
use crate::linalg::{
    im_part, matrix_exp, matrix_log, solve_gen_lyapunov, solve_gen_lyapunov_dual, symmetrize,
    to_complex, DMat, LinAlgError,
};
use crate::sos::DescriptorSystem;

/// A pencil eigenvalue with real part at or above this is treated as
/// unstable; the Gramian integrals do not converge there.
const PENCIL_STABILITY_TOL: f64 = 1e-12;

/// Relative eigenvalue cutoff below which a clamped Gramian direction is
/// numerically zero and dropped from the factor.
const FACTOR_DROP_TOL: f64 = f64::EPSILON;

fn max_pole_real_part(ds: &DescriptorSystem, tol: &Tolerances) -> Result<f64, LimitedBtError> {
    let lu = backend::lu_real(&ds.e)?;
    let rcond = lu.rcond()?;
    if rcond < 1.0 / tol.cond_limit {
        return Err(LimitedBtError::LinAlg(LinAlgError::SingularMatrix { rcond }));
    }
    let f = lu.solve(&ds.a)?;
    let eigs = backend::dgeev_values(&f)?;
    Ok(eigs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max))
}

fn require_stable(ds: &DescriptorSystem, tol: &Tolerances) -> Result<(), LimitedBtError> {
    let max_re = max_pole_real_part(ds, tol)?;
    if max_re >= -PENCIL_STABILITY_TOL {
        return Err(LimitedBtError::UnstablePencil { max_re });
    }
    Ok(())
}

/// Clamps a symmetric Gramian estimate onto the PSD cone and factors it.
///
/// Eigenvalues below `-psd_clamp * lambda_max` are genuinely negative mass
/// introduced by the indefinite right-hand side; they are discarded and
/// summed into `clamped_mass`. Negative values inside that band and
/// positives below machine precision relative to `lambda_max` are treated
/// as zero and contribute neither columns nor mass.
pub(crate) fn clamp_to_factor(
    x: &DMat,
    side: GramianSide,
    limit: GramianLimit,
    tol: &Tolerances,
) -> Result<GramianFactor, LimitedBtError> {
    let xs = symmetrize(x);
    let (vals, vecs) = backend::dsyev(&xs)?;
    let n = xs.nrows();
    let lmax = vals[n - 1].max(0.0);
    let mut clamped_mass = 0.0;
    let mut cols = Vec::new();
    // dsyev orders ascending; walk backwards so columns come out descending
    for i in (0..n).rev() {
        let v = vals[i];
        if v < -tol.psd_clamp * lmax {
            clamped_mass += -v;
        } else if v > lmax * FACTOR_DROP_TOL {
            cols.push(vecs.column(i) * v.sqrt());
        }
    }
    let mut l = DMat::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        l.set_column(j, c);
    }
    Ok(GramianFactor { l, side, limit, clamped_mass })
}

/// Controllability and observability Gramians over the whole axis:
/// `A P E' + E P A' + B B' = 0` and `A' Q E + E' Q A + C' C = 0`.
pub fn unlimited_gramians(
    ds: &DescriptorSystem,
    tol: &Tolerances,
) -> Result<(GramianFactor, GramianFactor), LimitedBtError> {
    require_stable(ds, tol)?;
    let wp = &ds.b * ds.b.transpose();
    let wq = ds.c.transpose() * &ds.c;
    let p = solve_gen_lyapunov(&ds.a, &ds.e, &wp, tol)?;
    let q = solve_gen_lyapunov_dual(&ds.a, &ds.e, &wq, tol)?;
    Ok((
        clamp_to_factor(&p, GramianSide::Controllability, GramianLimit::Unlimited, tol)?,
        clamp_to_factor(&q, GramianSide::Observability, GramianLimit::Unlimited, tol)?,
    ))
}

/// Gramians restricted to the frequency band `w1 < |omega| < w2`.
///
/// `P` solves `A P E' + E P A' + B_o B' + B B_o' = 0` where the selector
/// `B_o = Re((i/pi) log((A + i w2 E)(A + i w1 E)^{-1})) B` carves the band
/// out of the spectrum; `Q` solves the dual equation with
/// `C_o = C Re((i/pi) log((A + i w1 E)^{-1}(A + i w2 E)))`.
pub fn freq_limited_gramians(
    ds: &DescriptorSystem,
    w1: f64,
    w2: f64,
    tol: &Tolerances,
) -> Result<(GramianFactor, GramianFactor), LimitedBtError> {
    if !(w1 > 0.0 && w2 > w1) || !w2.is_finite() {
        return Err(LimitedBtError::InvalidLimit(format!(
            "frequency band [{w1:e}, {w2:e}] must satisfy 0 < lo < hi < inf"
        )));
    }
    require_stable(ds, tol)?;
    let limit = GramianLimit::Frequency { lo: w1, hi: w2 };

    let ec = to_complex(&ds.e);
    let mut f1 = to_complex(&ds.a);
    let mut f2 = f1.clone();
    f1 += &ec * Complex64::new(0.0, w1);
    f2 += &ec * Complex64::new(0.0, w2);
    drop(ec);

    let lu1 = backend::lu_complex(&f1)?;
    // F = (A + i w2 E)(A + i w1 E)^{-1} through the adjoint system:
    // F^H solves (A + i w1 E)^H X = (A + i w2 E)^H
    let fc = lu1.solve_adjoint(&f2.adjoint())?.adjoint();
    drop(f2);
    let lf = matrix_log(&fc, tol)?;
    drop(fc);

    // Re((i/pi) L) = -Im(L)/pi
    let b_omega = im_part(&lf) * (-1.0 / PI) * &ds.b;
    let wp = symmetrize(&(&b_omega * ds.b.transpose() + &ds.b * b_omega.transpose()));
    let p = solve_gen_lyapunov(&ds.a, &ds.e, &wp, tol)?;

    // The reversed product is similar to the first one:
    // log(F1^{-1} F2) = F1^{-1} log(F2 F1^{-1}) F1, because primary matrix
    // functions commute with similarity. Only the product with C is needed,
    // so solve for C F1^{-1} (a transposed system, via conjugation) and
    // multiply through.
    let one = Complex64::new(1.0, 0.0);
    let ct = to_complex(&ds.c.transpose());
    let c_f1inv = lu1.solve_adjoint(&ct)?.map(|z| z.conj()).transpose();
    let psi = backend::zgemm(one, &backend::zgemm(one, &c_f1inv, b'N', &lf, b'N'), b'N', &f1, b'N');
    let c_omega = im_part(&psi) * (-1.0 / PI);
    let wq = symmetrize(&(c_omega.transpose() * &ds.c + ds.c.transpose() * &c_omega));
    let q = solve_gen_lyapunov_dual(&ds.a, &ds.e, &wq, tol)?;

    Ok((
        clamp_to_factor(&p, GramianSide::Controllability, limit, tol)?,
        clamp_to_factor(&q, GramianSide::Observability, limit, tol)?,
    ))
}

/// Gramians restricted to the time window `t0 <= t <= tf`.
///
/// `P` solves `A P E' + E P A' + B_0 B_0' - B_f B_f' = 0` with the
/// propagated inputs `B_t = exp(A E^{-1} t) B`; `Q` solves the dual with
/// `C_t = C exp(E^{-1} A t)`.
pub fn time_limited_gramians(
    ds: &DescriptorSystem,
    t0: f64,
    tf: f64,
    tol: &Tolerances,
) -> Result<(GramianFactor, GramianFactor), LimitedBtError> {
    if !(t0 >= 0.0 && tf > t0) || !tf.is_finite() {
        return Err(LimitedBtError::InvalidLimit(format!(
            "time window [{t0}, {tf}] must satisfy 0 <= t0 < tf < inf"
        )));
    }
    require_stable(ds, tol)?;
    let limit = GramianLimit::Time { t0, tf };

    let lu = backend::lu_real(&ds.e)?;
    // A E^{-1} = (E^{-T} A^T)^T propagates inputs, E^{-1} A propagates outputs
    let fr = lu.solve_transposed(&ds.a.transpose())?.transpose();
    let fl = lu.solve(&ds.a)?;

    let b0 = if t0 == 0.0 { ds.b.clone() } else { matrix_exp(&fr, t0)? * &ds.b };
    let bf = matrix_exp(&fr, tf)? * &ds.b;
    let wp = symmetrize(&(&b0 * b0.transpose() - &bf * bf.transpose()));
    let p = solve_gen_lyapunov(&ds.a, &ds.e, &wp, tol)?;

    let c0 = if t0 == 0.0 { ds.c.clone() } else { &ds.c * matrix_exp(&fl, t0)? };
    let cf = &ds.c * matrix_exp(&fl, tf)?;
    let wq = symmetrize(&(c0.transpose() * &c0 - cf.transpose() * &cf));
    let q = solve_gen_lyapunov_dual(&ds.a, &ds.e, &wq, tol)?;

    Ok((
        clamp_to_factor(&p, GramianSide::Controllability, limit, tol)?,
        clamp_to_factor(&q, GramianSide::Observability, limit, tol)?,
    ))
}

/// Dispatches on the limit kind.
pub fn limited_gramians(
    ds: &DescriptorSystem,
    limit: GramianLimit,
    tol: &Tolerances,
) -> Result<(GramianFactor, GramianFactor), LimitedBtError> {
    match limit {
        GramianLimit::Unlimited => unlimited_gramians(ds, tol),
        GramianLimit::Frequency { lo, hi } => freq_limited_gramians(ds, lo, hi, tol),
        GramianLimit::Time { t0, tf } => time_limited_gramians(ds, t0, tf, tol),
    }
}
