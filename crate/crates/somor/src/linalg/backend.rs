//! Thin safe wrappers over the LAPACK/BLAS routines the crate uses. All
//! matrices are column-major (nalgebra's layout), so slices pass straight
//! through with `lda = nrows`.

use super::{CMat, DMat, DVec, LinAlgError};
use num_complex::Complex64;

fn dims_i32(a: &DMat) -> (i32, i32) {
    (a.nrows() as i32, a.ncols() as i32)
}

/// 1-norm (max column sum), the norm `?gecon` expects.
fn one_norm(a: &DMat) -> f64 {
    let mut best: f64 = 0.0;
    for j in 0..a.ncols() {
        best = best.max(a.column(j).iter().map(|x| x.abs()).sum());
    }
    best
}

fn one_norm_c(a: &CMat) -> f64 {
    let mut best: f64 = 0.0;
    for j in 0..a.ncols() {
        best = best.max(a.column(j).iter().map(|x| x.norm()).sum());
    }
    best
}

pub(crate) struct RealSchurRaw {
    pub q: DMat,
    pub t: DMat,
    pub eigs: Vec<Complex64>,
    /// Number of leading (selected) eigenvalues when sorting was requested.
    pub sdim: usize,
}

extern "C" fn select_negative_real(wr: *const f64, _wi: *const f64) -> i32 {
    // Safety: LAPACK passes valid pointers to the eigenvalue parts.
    unsafe {
        if *wr < 0.0 {
            1
        } else {
            0
        }
    }
}

/// Real Schur factorization `A = Q T Q^T`. With `stable_first` the stable
/// eigenvalues (negative real part) are moved to the leading block and
/// `sdim` reports how many there are.
pub(crate) fn dgees_full(a: &DMat, stable_first: bool) -> Result<RealSchurRaw, LinAlgError> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(LinAlgError::DimensionMismatch(format!(
            "Schur input must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok(RealSchurRaw {
            q: DMat::zeros(0, 0),
            t: DMat::zeros(0, 0),
            eigs: vec![],
            sdim: 0,
        });
    }
    let mut t = a.clone();
    let mut q = DMat::zeros(n, n);
    let (mut wr, mut wi) = (vec![0.0; n], vec![0.0; n]);
    let mut sdim = 0i32;
    let mut info = 0i32;
    let mut bwork = vec![0i32; n];
    let ni = n as i32;
    let (sort, select): (u8, lapack::Select2F64) = if stable_first {
        (b'S', Some(select_negative_real))
    } else {
        (b'N', None)
    };
    let mut work = vec![0.0f64; 1];
    unsafe {
        lapack::dgees(
            b'V', sort, select, ni, t.as_mut_slice(), ni, &mut sdim, &mut wr, &mut wi,
            q.as_mut_slice(), ni, &mut work, -1, &mut bwork, &mut info,
        );
        let lwork = work[0] as i32;
        work = vec![0.0f64; lwork.max(1) as usize];
        lapack::dgees(
            b'V', sort, select, ni, t.as_mut_slice(), ni, &mut sdim, &mut wr, &mut wi,
            q.as_mut_slice(), ni, &mut work, lwork, &mut bwork, &mut info,
        );
    }
    // info == n+1 means roundoff moved an eigenvalue across the selection
    // boundary after reordering; the split is still usable and callers
    // re-verify it. Anything else nonzero is a hard failure.
    if info != 0 && info != ni + 1 {
        if info > 0 && info <= ni {
            return Err(LinAlgError::NonConvergence("QR iteration in real Schur"));
        }
        return Err(LinAlgError::Backend { routine: "dgees", info });
    }
    let eigs = wr
        .iter()
        .zip(wi.iter())
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect();
    Ok(RealSchurRaw { q, t, eigs, sdim: sdim as usize })
}

pub(crate) struct ComplexSchurRaw {
    pub q: CMat,
    pub t: CMat,
    pub eigs: Vec<Complex64>,
}

/// Complex Schur factorization `A = Q T Q^H` with upper triangular `T`.
pub(crate) fn zgees_full(a: &CMat) -> Result<ComplexSchurRaw, LinAlgError> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(LinAlgError::DimensionMismatch(format!(
            "Schur input must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok(ComplexSchurRaw { q: CMat::zeros(0, 0), t: CMat::zeros(0, 0), eigs: vec![] });
    }
    let mut t = a.clone();
    let mut q = CMat::zeros(n, n);
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let (mut sdim, mut info) = (0i32, 0i32);
    let mut rwork = vec![0.0f64; n];
    let mut bwork = vec![0i32; n];
    let ni = n as i32;
    let mut work = vec![Complex64::new(0.0, 0.0); 1];
    unsafe {
        lapack::zgees(
            b'V', b'N', None, ni, t.as_mut_slice(), ni, &mut sdim, &mut w,
            q.as_mut_slice(), ni, &mut work, -1, &mut rwork, &mut bwork, &mut info,
        );
        let lwork = work[0].re as i32;
        work = vec![Complex64::new(0.0, 0.0); lwork.max(1) as usize];
        lapack::zgees(
            b'V', b'N', None, ni, t.as_mut_slice(), ni, &mut sdim, &mut w,
            q.as_mut_slice(), ni, &mut work, lwork, &mut rwork, &mut bwork, &mut info,
        );
    }
    if info != 0 {
        if info > 0 && info <= ni {
            return Err(LinAlgError::NonConvergence("QR iteration in complex Schur"));
        }
        return Err(LinAlgError::Backend { routine: "zgees", info });
    }
    Ok(ComplexSchurRaw { q, t, eigs: w })
}

/// Solves `op(A) X + isgn * X op(B) = scale * C` for quasi-triangular
/// `A`, `B` (real Schur factors). Returns `(X, scale)`.
pub(crate) fn dtrsyl_solve(
    trana: u8,
    tranb: u8,
    isgn: i32,
    ta: &DMat,
    tb: &DMat,
    c: &DMat,
) -> Result<(DMat, f64), LinAlgError> {
    let (m, _) = dims_i32(ta);
    let (n, _) = dims_i32(tb);
    let mut x = c.clone();
    let mut scale = [1.0f64];
    let mut info = 0i32;
    unsafe {
        lapack::dtrsyl(
            trana, tranb, &[isgn], m, n, ta.as_slice(), m.max(1), tb.as_slice(), n.max(1),
            x.as_mut_slice(), m.max(1), &mut scale, &mut info,
        );
    }
    match info {
        0 => Ok((x, scale[0])),
        1 => {
            // Perturbed values were used to avoid overflow: the operator is
            // effectively singular for this data.
            Err(LinAlgError::SingularSeparation { value: 0.0 })
        }
        _ => Err(LinAlgError::Backend { routine: "dtrsyl", info }),
    }
}

/// Symmetric eigendecomposition (divide and conquer), values ascending,
/// vectors as columns.
pub(crate) fn dsyev(a: &DMat) -> Result<(DVec, DMat), LinAlgError> {
    let n = a.nrows();
    if n == 0 {
        return Ok((DVec::zeros(0), DMat::zeros(0, 0)));
    }
    let mut v = a.clone();
    let mut w = vec![0.0f64; n];
    let mut info = 0i32;
    let ni = n as i32;
    let mut work = vec![0.0f64; 1];
    let mut iwork = vec![0i32; 1];
    unsafe {
        lapack::dsyevd(b'V', b'L', ni, v.as_mut_slice(), ni, &mut w, &mut work, -1, &mut iwork, -1, &mut info);
        let (lw, liw) = (work[0] as i32, iwork[0]);
        work = vec![0.0f64; lw.max(1) as usize];
        iwork = vec![0i32; liw.max(1) as usize];
        lapack::dsyevd(b'V', b'L', ni, v.as_mut_slice(), ni, &mut w, &mut work, lw, &mut iwork, liw, &mut info);
    }
    if info != 0 {
        return Err(LinAlgError::Backend { routine: "dsyevd", info });
    }
    Ok((DVec::from_vec(w), v))
}

/// Symmetric-definite generalized eigenproblem `A x = lambda B x` with `B`
/// positive definite; values ascending, vectors `B`-orthonormal columns.
pub(crate) fn dsygv(a: &DMat, b: &DMat) -> Result<(DVec, DMat), LinAlgError> {
    let n = a.nrows();
    if b.nrows() != n || b.ncols() != n || a.ncols() != n {
        return Err(LinAlgError::DimensionMismatch(format!(
            "generalized eigenproblem needs square matched matrices, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if n == 0 {
        return Ok((DVec::zeros(0), DMat::zeros(0, 0)));
    }
    let mut z = a.clone();
    let mut bf = b.clone();
    let mut w = vec![0.0f64; n];
    let mut info = 0i32;
    let ni = n as i32;
    let mut work = vec![0.0f64; 1];
    let mut iwork = vec![0i32; 1];
    unsafe {
        lapack::dsygvd(
            &[1], b'V', b'L', ni, z.as_mut_slice(), ni, bf.as_mut_slice(), ni, &mut w,
            &mut work, -1, &mut iwork, -1, &mut info,
        );
        let (lw, liw) = (work[0] as i32, iwork[0]);
        work = vec![0.0f64; lw.max(1) as usize];
        iwork = vec![0i32; liw.max(1) as usize];
        lapack::dsygvd(
            &[1], b'V', b'L', ni, z.as_mut_slice(), ni, bf.as_mut_slice(), ni, &mut w,
            &mut work, lw, &mut iwork, liw, &mut info,
        );
    }
    if info == 0 {
        Ok((DVec::from_vec(w), z))
    } else if info > ni {
        Err(LinAlgError::NotPositiveDefinite("mass matrix Cholesky failed"))
    } else {
        Err(LinAlgError::Backend { routine: "dsygvd", info })
    }
}

/// LU factorization of a real square matrix, kept for repeated solves.
pub(crate) struct LuReal {
    lu: DMat,
    ipiv: Vec<i32>,
    anorm: f64,
}

pub(crate) fn lu_real(a: &DMat) -> Result<LuReal, LinAlgError> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(LinAlgError::DimensionMismatch(format!(
            "LU input must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let anorm = one_norm(a);
    let mut lu = a.clone();
    let mut ipiv = vec![0i32; n.max(1)];
    let mut info = 0i32;
    let ni = n as i32;
    unsafe {
        lapack::dgetrf(ni, ni, lu.as_mut_slice(), ni.max(1), &mut ipiv, &mut info);
    }
    if info > 0 {
        return Err(LinAlgError::SingularMatrix { rcond: 0.0 });
    }
    if info < 0 {
        return Err(LinAlgError::Backend { routine: "dgetrf", info });
    }
    Ok(LuReal { lu, ipiv, anorm })
}

impl LuReal {
    pub fn solve(&self, rhs: &DMat) -> Result<DMat, LinAlgError> {
        self.solve_impl(rhs, b'N')
    }

    pub fn solve_transposed(&self, rhs: &DMat) -> Result<DMat, LinAlgError> {
        self.solve_impl(rhs, b'T')
    }

    fn solve_impl(&self, rhs: &DMat, trans: u8) -> Result<DMat, LinAlgError> {
        let n = self.lu.nrows();
        if rhs.nrows() != n {
            return Err(LinAlgError::DimensionMismatch(format!(
                "LU solve: rhs has {} rows, expected {}",
                rhs.nrows(),
                n
            )));
        }
        if n == 0 || rhs.ncols() == 0 {
            return Ok(DMat::zeros(n, rhs.ncols()));
        }
        let mut x = rhs.clone();
        let mut info = 0i32;
        unsafe {
            lapack::dgetrs(
                trans, n as i32, rhs.ncols() as i32, self.lu.as_slice(), n as i32,
                &self.ipiv, x.as_mut_slice(), n as i32, &mut info,
            );
        }
        if info != 0 {
            return Err(LinAlgError::Backend { routine: "dgetrs", info });
        }
        Ok(x)
    }

    /// Reciprocal condition estimate in the 1-norm.
    pub fn rcond(&self) -> Result<f64, LinAlgError> {
        let n = self.lu.nrows();
        if n == 0 {
            return Ok(1.0);
        }
        let mut rcond = 0.0f64;
        let mut work = vec![0.0f64; 4 * n];
        let mut iwork = vec![0i32; n];
        let mut info = 0i32;
        unsafe {
            lapack::dgecon(
                b'1', n as i32, self.lu.as_slice(), n as i32, self.anorm, &mut rcond,
                &mut work, &mut iwork, &mut info,
            );
        }
        if info != 0 {
            return Err(LinAlgError::Backend { routine: "dgecon", info });
        }
        Ok(rcond)
    }
}

/// LU factorization of a complex square matrix.
pub(crate) struct LuComplex {
    lu: CMat,
    ipiv: Vec<i32>,
    anorm: f64,
}

pub(crate) fn lu_complex(a: &CMat) -> Result<LuComplex, LinAlgError> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(LinAlgError::DimensionMismatch(format!(
            "LU input must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let anorm = one_norm_c(a);
    let mut lu = a.clone();
    let mut ipiv = vec![0i32; n.max(1)];
    let mut info = 0i32;
    let ni = n as i32;
    unsafe {
        lapack::zgetrf(ni, ni, lu.as_mut_slice(), ni.max(1), &mut ipiv, &mut info);
    }
    if info > 0 {
        return Err(LinAlgError::SingularMatrix { rcond: 0.0 });
    }
    if info < 0 {
        return Err(LinAlgError::Backend { routine: "zgetrf", info });
    }
    Ok(LuComplex { lu, ipiv, anorm })
}

impl LuComplex {
    pub fn solve(&self, rhs: &CMat) -> Result<CMat, LinAlgError> {
        self.solve_impl(rhs, b'N')
    }

    /// Solves with the conjugate transpose of the factored matrix.
    pub fn solve_adjoint(&self, rhs: &CMat) -> Result<CMat, LinAlgError> {
        self.solve_impl(rhs, b'C')
    }

    fn solve_impl(&self, rhs: &CMat, trans: u8) -> Result<CMat, LinAlgError> {
        let n = self.lu.nrows();
        if rhs.nrows() != n {
            return Err(LinAlgError::DimensionMismatch(format!(
                "LU solve: rhs has {} rows, expected {}",
                rhs.nrows(),
                n
            )));
        }
        if n == 0 || rhs.ncols() == 0 {
            return Ok(CMat::zeros(n, rhs.ncols()));
        }
        let mut x = rhs.clone();
        let mut info = 0i32;
        unsafe {
            lapack::zgetrs(
                trans, n as i32, rhs.ncols() as i32, self.lu.as_slice(), n as i32,
                &self.ipiv, x.as_mut_slice(), n as i32, &mut info,
            );
        }
        if info != 0 {
            return Err(LinAlgError::Backend { routine: "zgetrs", info });
        }
        Ok(x)
    }

    pub fn rcond(&self) -> Result<f64, LinAlgError> {
        let n = self.lu.nrows();
        if n == 0 {
            return Ok(1.0);
        }
        let mut rcond = 0.0f64;
        let mut work = vec![Complex64::new(0.0, 0.0); 2 * n];
        let mut rwork = vec![0.0f64; 2 * n];
        let mut info = 0i32;
        unsafe {
            lapack::zgecon(
                b'1', n as i32, self.lu.as_slice(), n as i32, self.anorm, &mut rcond,
                &mut work, &mut rwork, &mut info,
            );
        }
        if info != 0 {
            return Err(LinAlgError::Backend { routine: "zgecon", info });
        }
        Ok(rcond)
    }
}

/// Eigenvalues only of a real square matrix.
pub(crate) fn dgeev_values(a: &DMat) -> Result<Vec<Complex64>, LinAlgError> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(LinAlgError::DimensionMismatch(format!(
            "eigenvalue input must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok(vec![]);
    }
    let mut af = a.clone();
    let (mut wr, mut wi) = (vec![0.0f64; n], vec![0.0f64; n]);
    let mut vl = vec![0.0f64; 1];
    let mut vr = vec![0.0f64; 1];
    let mut info = 0i32;
    let ni = n as i32;
    let mut work = vec![0.0f64; 1];
    unsafe {
        lapack::dgeev(
            b'N', b'N', ni, af.as_mut_slice(), ni, &mut wr, &mut wi, &mut vl, 1, &mut vr, 1,
            &mut work, -1, &mut info,
        );
        let lw = work[0] as i32;
        work = vec![0.0f64; lw.max(1) as usize];
        lapack::dgeev(
            b'N', b'N', ni, af.as_mut_slice(), ni, &mut wr, &mut wi, &mut vl, 1, &mut vr, 1,
            &mut work, lw, &mut info,
        );
    }
    if info != 0 {
        if info > 0 {
            return Err(LinAlgError::NonConvergence("QR iteration in eigenvalues"));
        }
        return Err(LinAlgError::Backend { routine: "dgeev", info });
    }
    Ok(wr.iter().zip(wi.iter()).map(|(&re, &im)| Complex64::new(re, im)).collect())
}

/// Right eigenvectors and eigenvalues of a real square matrix. Complex
/// conjugate pairs are expanded into full complex vectors.
pub(crate) fn dgeev_vectors(a: &DMat) -> Result<(Vec<Complex64>, CMat), LinAlgError> {
    let n = a.nrows();
    if n == 0 {
        return Ok((vec![], CMat::zeros(0, 0)));
    }
    let mut af = a.clone();
    let (mut wr, mut wi) = (vec![0.0f64; n], vec![0.0f64; n]);
    let mut vl = vec![0.0f64; 1];
    let mut vr = DMat::zeros(n, n);
    let mut info = 0i32;
    let ni = n as i32;
    let mut work = vec![0.0f64; 1];
    unsafe {
        lapack::dgeev(
            b'N', b'V', ni, af.as_mut_slice(), ni, &mut wr, &mut wi, &mut vl, 1,
            vr.as_mut_slice(), ni, &mut work, -1, &mut info,
        );
        let lw = work[0] as i32;
        work = vec![0.0f64; lw.max(1) as usize];
        lapack::dgeev(
            b'N', b'V', ni, af.as_mut_slice(), ni, &mut wr, &mut wi, &mut vl, 1,
            vr.as_mut_slice(), ni, &mut work, lw, &mut info,
        );
    }
    if info != 0 {
        if info > 0 {
            return Err(LinAlgError::NonConvergence("QR iteration in eigenvalues"));
        }
        return Err(LinAlgError::Backend { routine: "dgeev", info });
    }
    let mut vals = Vec::with_capacity(n);
    let mut vecs = CMat::zeros(n, n);
    let mut j = 0;
    while j < n {
        if wi[j] == 0.0 {
            vals.push(Complex64::new(wr[j], 0.0));
            for i in 0..n {
                vecs[(i, j)] = Complex64::new(vr[(i, j)], 0.0);
            }
            j += 1;
        } else {
            vals.push(Complex64::new(wr[j], wi[j]));
            vals.push(Complex64::new(wr[j + 1], wi[j + 1]));
            for i in 0..n {
                vecs[(i, j)] = Complex64::new(vr[(i, j)], vr[(i, j + 1)]);
                vecs[(i, j + 1)] = Complex64::new(vr[(i, j)], -vr[(i, j + 1)]);
            }
            j += 2;
        }
    }
    Ok((vals, vecs))
}

/// Generalized eigenvalues of the pencil `(A, E)` as `(alpha, beta)` pairs;
/// the eigenvalue is `alpha / beta` with `beta == 0` marking an infinite one.
pub(crate) fn dggev_values(a: &DMat, e: &DMat) -> Result<Vec<(Complex64, f64)>, LinAlgError> {
    let n = a.nrows();
    if e.nrows() != n || e.ncols() != n || a.ncols() != n {
        return Err(LinAlgError::DimensionMismatch(format!(
            "pencil needs square matched matrices, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            e.nrows(),
            e.ncols()
        )));
    }
    if n == 0 {
        return Ok(vec![]);
    }
    let mut af = a.clone();
    let mut ef = e.clone();
    let mut ar = vec![0.0f64; n];
    let mut ai = vec![0.0f64; n];
    let mut be = vec![0.0f64; n];
    let mut vl = vec![0.0f64; 1];
    let mut vr = vec![0.0f64; 1];
    let mut info = 0i32;
    let ni = n as i32;
    let mut work = vec![0.0f64; 1];
    unsafe {
        lapack::dggev(
            b'N', b'N', ni, af.as_mut_slice(), ni, ef.as_mut_slice(), ni, &mut ar, &mut ai,
            &mut be, &mut vl, 1, &mut vr, 1, &mut work, -1, &mut info,
        );
        let lw = work[0] as i32;
        work = vec![0.0f64; lw.max(1) as usize];
        lapack::dggev(
            b'N', b'N', ni, af.as_mut_slice(), ni, ef.as_mut_slice(), ni, &mut ar, &mut ai,
            &mut be, &mut vl, 1, &mut vr, 1, &mut work, lw, &mut info,
        );
    }
    if info != 0 {
        if info > 0 && info <= ni {
            return Err(LinAlgError::NonConvergence("QZ iteration in pencil eigenvalues"));
        }
        return Err(LinAlgError::Backend { routine: "dggev", info });
    }
    Ok((0..n).map(|k| (Complex64::new(ar[k], ai[k]), be[k])).collect())
}

/// Thin SVD `A = U diag(s) V^T` with `U: m x k`, `V^T: k x n`, `k = min(m, n)`.
pub(crate) fn svd_thin(a: &DMat) -> Result<(DMat, DVec, DMat), LinAlgError> {
    let (m, n) = (a.nrows(), a.ncols());
    let k = m.min(n);
    if k == 0 {
        return Ok((DMat::zeros(m, 0), DVec::zeros(0), DMat::zeros(0, n)));
    }
    let mut af = a.clone();
    let mut s = vec![0.0f64; k];
    let mut u = DMat::zeros(m, k);
    let mut vt = DMat::zeros(k, n);
    let mut iwork = vec![0i32; 8 * k];
    let mut info = 0i32;
    let (mi, ni) = (m as i32, n as i32);
    let mut work = vec![0.0f64; 1];
    unsafe {
        lapack::dgesdd(
            b'S', mi, ni, af.as_mut_slice(), mi, &mut s, u.as_mut_slice(), mi,
            vt.as_mut_slice(), k as i32, &mut work, -1, &mut iwork, &mut info,
        );
        let lw = work[0] as i32;
        work = vec![0.0f64; lw.max(1) as usize];
        lapack::dgesdd(
            b'S', mi, ni, af.as_mut_slice(), mi, &mut s, u.as_mut_slice(), mi,
            vt.as_mut_slice(), k as i32, &mut work, lw, &mut iwork, &mut info,
        );
    }
    if info != 0 {
        return Err(LinAlgError::Backend { routine: "dgesdd", info });
    }
    Ok((u, DVec::from_vec(s), vt))
}

/// Solves `op(A) X + isgn * X op(B) = scale * C` for upper triangular
/// complex `A`, `B`. Returns `(X, scale)`.
pub(crate) fn ztrsyl_solve(
    trana: u8,
    tranb: u8,
    isgn: i32,
    ta: &CMat,
    tb: &CMat,
    c: &CMat,
) -> Result<(CMat, f64), LinAlgError> {
    let m = ta.nrows() as i32;
    let n = tb.nrows() as i32;
    let mut x = c.clone();
    let mut scale = [1.0f64];
    let mut info = 0i32;
    unsafe {
        lapack::ztrsyl(
            trana, tranb, &[isgn], m, n, ta.as_slice(), m.max(1), tb.as_slice(), n.max(1),
            x.as_mut_slice(), m.max(1), &mut scale, &mut info,
        );
    }
    match info {
        0 => Ok((x, scale[0])),
        1 => Err(LinAlgError::SingularSeparation { value: 0.0 }),
        _ => Err(LinAlgError::Backend { routine: "ztrsyl", info }),
    }
}

/// Solves `A X = B` in place for upper triangular complex `A` with unit or
/// general diagonal.
pub(crate) fn ztrsm_left_upper(a: &CMat, b: &mut CMat) {
    let m = b.nrows();
    let n = b.ncols();
    if m == 0 || n == 0 {
        return;
    }
    assert_eq!(a.nrows(), m, "triangular solve dimension mismatch");
    unsafe {
        blas::ztrsm(
            b'L', b'U', b'N', b'N', m as i32, n as i32, Complex64::new(1.0, 0.0),
            a.as_slice(), a.nrows().max(1) as i32, b.as_mut_slice(), m.max(1) as i32,
        );
    }
}

/// Singular values of a complex matrix, descending.
pub(crate) fn zsvd_values(a: &CMat) -> Result<Vec<f64>, LinAlgError> {
    let (m, n) = (a.nrows(), a.ncols());
    let k = m.min(n);
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut af = a.clone();
    let mut s = vec![0.0f64; k];
    let mut u = vec![Complex64::new(0.0, 0.0); 1];
    let mut vt = vec![Complex64::new(0.0, 0.0); 1];
    let mut rwork = vec![0.0f64; 5 * k];
    let mut info = 0i32;
    let (mi, ni) = (m as i32, n as i32);
    let mut work = vec![Complex64::new(0.0, 0.0); 1];
    unsafe {
        lapack::zgesvd(
            b'N', b'N', mi, ni, af.as_mut_slice(), mi, &mut s, &mut u, 1, &mut vt, 1,
            &mut work, -1, &mut rwork, &mut info,
        );
        let lw = work[0].re as i32;
        work = vec![Complex64::new(0.0, 0.0); lw.max(1) as usize];
        lapack::zgesvd(
            b'N', b'N', mi, ni, af.as_mut_slice(), mi, &mut s, &mut u, 1, &mut vt, 1,
            &mut work, lw, &mut rwork, &mut info,
        );
    }
    if info != 0 {
        return Err(LinAlgError::Backend { routine: "zgesvd", info });
    }
    Ok(s)
}

/// Eigenvalues of a Hermitian matrix (lower triangle read), ascending.
pub(crate) fn zheev_values(a: &CMat) -> Result<Vec<f64>, LinAlgError> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut af = a.clone();
    let mut w = vec![0.0f64; n];
    let mut info = 0i32;
    let ni = n as i32;
    let mut work = vec![Complex64::new(0.0, 0.0); 1];
    let mut rwork = vec![0.0f64; 1];
    let mut iwork = vec![0i32; 1];
    unsafe {
        lapack::zheevd(
            b'N', b'L', ni, af.as_mut_slice(), ni, &mut w, &mut work, -1, &mut rwork, -1,
            &mut iwork, -1, &mut info,
        );
        let (lw, lrw, liw) = (work[0].re as i32, rwork[0] as i32, iwork[0]);
        work = vec![Complex64::new(0.0, 0.0); lw.max(1) as usize];
        rwork = vec![0.0f64; lrw.max(1) as usize];
        iwork = vec![0i32; liw.max(1) as usize];
        lapack::zheevd(
            b'N', b'L', ni, af.as_mut_slice(), ni, &mut w, &mut work, lw, &mut rwork, lrw,
            &mut iwork, liw, &mut info,
        );
    }
    if info != 0 {
        return Err(LinAlgError::Backend { routine: "zheevd", info });
    }
    Ok(w)
}

/// `alpha * op(A) op(B)` through BLAS; `ta`/`tb` select the transpose.
pub(crate) fn gemm(alpha: f64, a: &DMat, ta: bool, b: &DMat, tb: bool) -> DMat {
    let (am, ak) = if ta { (a.ncols(), a.nrows()) } else { (a.nrows(), a.ncols()) };
    let (bk, bn) = if tb { (b.ncols(), b.nrows()) } else { (b.nrows(), b.ncols()) };
    assert_eq!(ak, bk, "gemm inner dimensions differ: {} vs {}", ak, bk);
    let mut c = DMat::zeros(am, bn);
    if am == 0 || bn == 0 || ak == 0 {
        return c;
    }
    unsafe {
        blas::dgemm(
            if ta { b'T' } else { b'N' },
            if tb { b'T' } else { b'N' },
            am as i32, bn as i32, ak as i32, alpha,
            a.as_slice(), a.nrows().max(1) as i32,
            b.as_slice(), b.nrows().max(1) as i32,
            0.0, c.as_mut_slice(), am.max(1) as i32,
        );
    }
    c
}

/// Complex `alpha * op(A) op(B)`; `b'N'`, `b'T'`, or `b'C'` per operand.
pub(crate) fn zgemm(alpha: Complex64, a: &CMat, ta: u8, b: &CMat, tb: u8) -> CMat {
    let (am, ak) = if ta == b'N' { (a.nrows(), a.ncols()) } else { (a.ncols(), a.nrows()) };
    let (bk, bn) = if tb == b'N' { (b.nrows(), b.ncols()) } else { (b.ncols(), b.nrows()) };
    assert_eq!(ak, bk, "zgemm inner dimensions differ: {} vs {}", ak, bk);
    let mut c = CMat::zeros(am, bn);
    if am == 0 || bn == 0 || ak == 0 {
        return c;
    }
    unsafe {
        blas::zgemm(
            ta, tb, am as i32, bn as i32, ak as i32, alpha,
            a.as_slice(), a.nrows().max(1) as i32,
            b.as_slice(), b.nrows().max(1) as i32,
            Complex64::new(0.0, 0.0), c.as_mut_slice(), am.max(1) as i32,
        );
    }
    c
}
