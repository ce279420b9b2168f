//! Transfer function evaluation, frequency sweeps, and passivity sampling.

use num_complex::Complex64;

use super::{DescriptorSystem, SecondOrderSystem, SosError};
use crate::linalg::backend::{lu_complex, lu_real, zgemm, zheev_values, zsvd_values, ztrsm_left_upper};
use crate::linalg::{complex_schur, to_complex, CMat, DMat, LinAlgError};

impl SecondOrderSystem {
    /// Evaluates `H(s) = (C_p + s C_v)(s^2 M + s D + K)^-1 B_u` through one
    /// complex LU factorization of the quadratic pencil.
    pub fn eval_transfer(&self, s: Complex64) -> Result<CMat, SosError> {
        let pencil = to_complex(&self.k)
            + to_complex(&self.d).scale_complex(s)
            + to_complex(&self.m).scale_complex(s * s);
        let lu = lu_complex(&pencil).map_err(|e| singular_at(e, s))?;
        let x = lu.solve(&to_complex(&self.b_u))?;
        let c = to_complex(&self.c_p) + to_complex(&self.c_v).scale_complex(s);
        Ok(c * x)
    }
}

impl DescriptorSystem {
    /// Evaluates `H(s) = C (s E - A)^-1 B`.
    pub fn eval_transfer(&self, s: Complex64) -> Result<CMat, SosError> {
        let pencil = to_complex(&self.e).scale_complex(s) - to_complex(&self.a);
        let lu = lu_complex(&pencil).map_err(|e| singular_at(e, s))?;
        let x = lu.solve(&to_complex(&self.b))?;
        Ok(to_complex(&self.c) * x)
    }
}

fn singular_at(e: LinAlgError, s: Complex64) -> SosError {
    match e {
        LinAlgError::SingularMatrix { .. } => SosError::SingularAtS { re: s.re, im: s.im },
        other => SosError::LinAlg(other),
    }
}

trait ScaleComplex {
    fn scale_complex(self, s: Complex64) -> CMat;
}

impl ScaleComplex for CMat {
    fn scale_complex(mut self, s: Complex64) -> CMat {
        self.iter_mut().for_each(|x| *x *= s);
        self
    }
}

/// Logarithmically spaced frequency grid with `count` points from `lo` to
/// `hi` inclusive. Requires `0 < lo <= hi` and `count >= 2` (or `count == 1`
/// with `lo == hi`).
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo, "log grid needs 0 < lo <= hi");
    if count == 1 {
        return vec![lo];
    }
    assert!(count >= 2, "log grid needs at least two points");
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            (llo + t * (lhi - llo)).exp()
        })
        .collect()
}

/// Largest singular value of the frequency response over a grid.
#[derive(Debug, Clone)]
pub struct FrequencyResponse {
    pub omegas: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl FrequencyResponse {
    /// Peak gain over the grid and the frequency attaining it.
    pub fn peak(&self) -> (f64, f64) {
        let mut best = (0.0, f64::NEG_INFINITY);
        for (&w, &s) in self.omegas.iter().zip(&self.sigma) {
            if s > best.1 {
                best = (w, s);
            }
        }
        (best.1, best.0)
    }

    /// CSV rows `omega,sigma_max` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("omega,sigma_max\n");
        for (&w, &s) in self.omegas.iter().zip(&self.sigma) {
            out.push_str(&format!("{:.16e},{:.16e}\n", w, s));
        }
        out
    }
}

/// Pointwise comparison of a full model with a reduced one.
#[derive(Debug, Clone)]
pub struct ErrorSweep {
    pub omegas: Vec<f64>,
    /// Gain of the full model at each frequency.
    pub sigma: Vec<f64>,
    pub abs_err: Vec<f64>,
    pub rel_err: Vec<f64>,
}

impl ErrorSweep {
    pub fn max_abs(&self) -> f64 {
        self.abs_err.iter().cloned().fold(0.0, f64::max)
    }

    pub fn max_rel(&self) -> f64 {
        self.rel_err.iter().cloned().fold(0.0, f64::max)
    }

    /// CSV rows `omega,sigma_max,abs_err,rel_err` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("omega,sigma_max,abs_err,rel_err\n");
        for i in 0..self.omegas.len() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                self.omegas[i], self.sigma[i], self.abs_err[i], self.rel_err[i]
            ));
        }
        out
    }
}

/// Samples `sigma_max(H(i omega))` over the grid.
pub fn sigma_sweep(sys: &SecondOrderSystem, omegas: &[f64]) -> Result<FrequencyResponse, SosError> {
    let mut sigma = Vec::with_capacity(omegas.len());
    for &w in omegas {
        let h = sys.eval_transfer(Complex64::new(0.0, w))?;
        sigma.push(sigma_max(&h)?);
    }
    Ok(FrequencyResponse { omegas: omegas.to_vec(), sigma })
}

/// Samples the full model and the error `sigma_max(H - H_r)` over the grid.
/// The relative error divides by the full model's gain; an exactly zero gain
/// with a nonzero error yields infinity.
pub fn error_sweep(
    full: &SecondOrderSystem,
    rom: &SecondOrderSystem,
    omegas: &[f64],
) -> Result<ErrorSweep, SosError> {
    if full.n_inputs() != rom.n_inputs() || full.n_outputs() != rom.n_outputs() {
        return Err(SosError::DimensionMismatch(format!(
            "error sweep needs matching maps, got {}x{} vs {}x{}",
            full.n_outputs(),
            full.n_inputs(),
            rom.n_outputs(),
            rom.n_inputs()
        )));
    }
    let mut sigma = Vec::with_capacity(omegas.len());
    let mut abs_err = Vec::with_capacity(omegas.len());
    let mut rel_err = Vec::with_capacity(omegas.len());
    for &w in omegas {
        let s = Complex64::new(0.0, w);
        let h = full.eval_transfer(s)?;
        let hr = rom.eval_transfer(s)?;
        let g = sigma_max(&h)?;
        let e = sigma_max(&(&h - &hr))?;
        sigma.push(g);
        abs_err.push(e);
        rel_err.push(if e == 0.0 { 0.0 } else { e / g });
    }
    Ok(ErrorSweep { omegas: omegas.to_vec(), sigma, abs_err, rel_err })
}

pub(crate) fn sigma_max(h: &CMat) -> Result<f64, SosError> {
    let s = zsvd_values(h)?;
    Ok(s.first().copied().unwrap_or(0.0))
}

/// Precomputed complex Schur form of the companion matrix, turning each
/// resolvent solve of a frequency sweep into one triangular solve.
///
/// With `F = E^-1 A` factored as `F = Q T Q^H`, the response is
/// `H(i w) = (C Q) (i w I - T)^-1 (Q^H E^-1 B)`, so the per-point cost drops
/// from a dense LU to `O(n^2)`. Requires a nonsingular (and reasonably
/// conditioned) mass matrix; the plain per-point evaluators remain the
/// reference path.
struct TransferCache {
    /// Upper triangular Schur factor with the diagonal negated in place per
    /// point; `diag` keeps the unshifted diagonal.
    t_neg: CMat,
    diag: Vec<Complex64>,
    cq: CMat,
    qb: CMat,
}

impl TransferCache {
    fn new(sys: &SecondOrderSystem) -> Result<Self, SosError> {
        let n = sys.order();
        let lu = lu_real(&sys.m)?;
        let mk = lu.solve(&sys.k)?;
        let md = lu.solve(&sys.d)?;
        let mb = lu.solve(&sys.b_u)?;
        let mut f = DMat::zeros(2 * n, 2 * n);
        f.view_mut((0, n), (n, n)).fill_with_identity();
        f.view_mut((n, 0), (n, n)).copy_from(&-&mk);
        f.view_mut((n, n), (n, n)).copy_from(&-&md);
        let schur = complex_schur(&to_complex(&f))?;
        let mut c = DMat::zeros(sys.n_outputs(), 2 * n);
        c.view_mut((0, 0), (sys.n_outputs(), n)).copy_from(&sys.c_p);
        c.view_mut((0, n), (sys.n_outputs(), n)).copy_from(&sys.c_v);
        let mut b = DMat::zeros(2 * n, sys.n_inputs());
        b.view_mut((n, 0), (n, sys.n_inputs())).copy_from(&mb);
        let cq = zgemm(Complex64::new(1.0, 0.0), &to_complex(&c), b'N', &schur.q, b'N');
        let qb = zgemm(Complex64::new(1.0, 0.0), &schur.q, b'C', &to_complex(&b), b'N');
        let diag: Vec<Complex64> = (0..2 * n).map(|j| schur.t[(j, j)]).collect();
        let mut t_neg = schur.t;
        t_neg.iter_mut().for_each(|z| *z = -*z);
        Ok(TransferCache { t_neg, diag, cq, qb })
    }

    fn eval(&mut self, omega: f64) -> CMat {
        let s = Complex64::new(0.0, omega);
        let n = self.diag.len();
        for j in 0..n {
            self.t_neg[(j, j)] = s - self.diag[j];
        }
        let mut y = self.qb.clone();
        ztrsm_left_upper(&self.t_neg, &mut y);
        zgemm(Complex64::new(1.0, 0.0), &self.cq, b'N', &y, b'N')
    }
}

/// `sigma_sweep` through a shared Schur factorization; one `O(n^3)` setup,
/// then `O(n^2)` per grid point.
pub fn sigma_sweep_cached(
    sys: &SecondOrderSystem,
    omegas: &[f64],
) -> Result<FrequencyResponse, SosError> {
    let mut cache = TransferCache::new(sys)?;
    let mut sigma = Vec::with_capacity(omegas.len());
    for &w in omegas {
        sigma.push(sigma_max(&cache.eval(w))?);
    }
    Ok(FrequencyResponse { omegas: omegas.to_vec(), sigma })
}

/// `error_sweep` through shared Schur factorizations of both models.
pub fn error_sweep_cached(
    full: &SecondOrderSystem,
    rom: &SecondOrderSystem,
    omegas: &[f64],
) -> Result<ErrorSweep, SosError> {
    if full.n_inputs() != rom.n_inputs() || full.n_outputs() != rom.n_outputs() {
        return Err(SosError::DimensionMismatch(format!(
            "error sweep needs matching maps, got {}x{} vs {}x{}",
            full.n_outputs(),
            full.n_inputs(),
            rom.n_outputs(),
            rom.n_inputs()
        )));
    }
    let mut cache_full = TransferCache::new(full)?;
    let mut cache_rom = TransferCache::new(rom)?;
    let mut sigma = Vec::with_capacity(omegas.len());
    let mut abs_err = Vec::with_capacity(omegas.len());
    let mut rel_err = Vec::with_capacity(omegas.len());
    for &w in omegas {
        let h = cache_full.eval(w);
        let hr = cache_rom.eval(w);
        let g = sigma_max(&h)?;
        let e = sigma_max(&(&h - &hr))?;
        sigma.push(g);
        abs_err.push(e);
        rel_err.push(if e == 0.0 { 0.0 } else { e / g });
    }
    Ok(ErrorSweep { omegas: omegas.to_vec(), sigma, abs_err, rel_err })
}

/// `passivity_margin` through a shared Schur factorization.
pub fn passivity_margin_cached(
    sys: &SecondOrderSystem,
    omegas: &[f64],
) -> Result<PassivityReport, SosError> {
    if sys.n_inputs() != sys.n_outputs() {
        return Err(SosError::DimensionMismatch(format!(
            "passivity needs a square transfer function, got {}x{}",
            sys.n_outputs(),
            sys.n_inputs()
        )));
    }
    let mut cache = TransferCache::new(sys)?;
    let mut margin = f64::INFINITY;
    let mut at = omegas.first().copied().unwrap_or(0.0);
    for &w in omegas {
        let h = cache.eval(w);
        let popov = &h + &h.adjoint();
        let eigs = zheev_values(&popov)?;
        let lo = eigs.first().copied().unwrap_or(0.0);
        if lo < margin {
            margin = lo;
            at = w;
        }
    }
    if !margin.is_finite() {
        margin = 0.0;
    }
    Ok(PassivityReport { margin, omega: at, passive_on_grid: margin >= -PASSIVITY_SLACK })
}

/// Result of sampling the Popov function `H(i w) + H(i w)^H` over a grid.
#[derive(Debug, Clone)]
pub struct PassivityReport {
    /// Smallest eigenvalue of the Popov function found on the grid.
    pub margin: f64,
    /// Frequency where the minimum was attained.
    pub omega: f64,
    /// True when the margin clears `-1e-10`, certifying positive realness
    /// on the sampled grid.
    pub passive_on_grid: bool,
}

/// Tolerance below zero accepted when certifying grid passivity.
const PASSIVITY_SLACK: f64 = 1e-10;

/// Minimum eigenvalue of `H(i w) + H(i w)^H` over the grid; a margin above
/// `-1e-10` certifies passivity at the sampled frequencies only.
pub fn passivity_margin(
    sys: &SecondOrderSystem,
    omegas: &[f64],
) -> Result<PassivityReport, SosError> {
    if sys.n_inputs() != sys.n_outputs() {
        return Err(SosError::DimensionMismatch(format!(
            "passivity needs a square transfer function, got {}x{}",
            sys.n_outputs(),
            sys.n_inputs()
        )));
    }
    let mut margin = f64::INFINITY;
    let mut at = omegas.first().copied().unwrap_or(0.0);
    for &w in omegas {
        let h = sys.eval_transfer(Complex64::new(0.0, w))?;
        let popov = &h + &h.adjoint();
        let eigs = zheev_values(&popov)?;
        let lo = eigs.first().copied().unwrap_or(0.0);
        if lo < margin {
            margin = lo;
            at = w;
        }
    }
    if !margin.is_finite() {
        margin = 0.0;
    }
    Ok(PassivityReport { margin, omega: at, passive_on_grid: margin >= -PASSIVITY_SLACK })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{fro_c, DMat};
    use crate::sos::{companion_form, symmetric_form};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sos(
        m: DMat,
        d: DMat,
        k: DMat,
        b_u: DMat,
        c_p: DMat,
        c_v: DMat,
    ) -> SecondOrderSystem {
        SecondOrderSystem::new(m, d, k, b_u, c_p, c_v).unwrap()
    }

    fn scalar_sos(m: f64, d: f64, k: f64, c_p: f64, c_v: f64) -> SecondOrderSystem {
        sos(
            DMat::from_element(1, 1, m),
            DMat::from_element(1, 1, d),
            DMat::from_element(1, 1, k),
            DMat::from_element(1, 1, 1.0),
            DMat::from_element(1, 1, c_p),
            DMat::from_element(1, 1, c_v),
        )
    }

    #[test]
    fn undamped_oscillator_at_two_i() {
        // 1/(s^2 + 1) at s = 2i is -1/3.
        let sys = scalar_sos(1.0, 0.0, 1.0, 1.0, 0.0);
        let h = sys.eval_transfer(Complex64::new(0.0, 2.0)).unwrap();
        assert!((h[(0, 0)] - Complex64::new(-1.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn static_gain_is_the_compliance() {
        let sys = scalar_sos(2.0, 0.3, 5.0, 1.0, 0.0);
        let h = sys.eval_transfer(Complex64::new(0.0, 0.0)).unwrap();
        assert!((h[(0, 0)] - Complex64::new(0.2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn velocity_output_at_the_resonance() {
        // s/(s^2 + s + 1) at s = i equals 1.
        let sys = scalar_sos(1.0, 1.0, 1.0, 0.0, 1.0);
        let h = sys.eval_transfer(Complex64::new(0.0, 1.0)).unwrap();
        assert!((h[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn evaluation_at_an_undamped_pole_is_singular() {
        let sys = scalar_sos(1.0, 0.0, 1.0, 1.0, 0.0);
        match sys.eval_transfer(Complex64::new(0.0, 1.0)) {
            Err(SosError::SingularAtS { re, im }) => {
                assert_eq!(re, 0.0);
                assert_eq!(im, 1.0);
            }
            other => panic!("expected a singular pencil, got {:?}", other),
        }
    }

    fn random_sos(rng: &mut ChaCha8Rng, n: usize, m_in: usize, p: usize) -> SecondOrderSystem {
        let rand_mat = |rng: &mut ChaCha8Rng, r: usize, c: usize| {
            DMat::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
        };
        let base = rand_mat(rng, n, n);
        let m = &base * base.transpose() + DMat::identity(n, n);
        let kb = rand_mat(rng, n, n);
        let k = &kb * kb.transpose() + DMat::identity(n, n) * 0.5;
        let d = &m * 0.02 + &k * 0.05;
        sos(m, d, k, rand_mat(rng, n, m_in), rand_mat(rng, p, n), rand_mat(rng, p, n))
    }

    #[test]
    fn companion_form_preserves_the_transfer_function() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let sys = random_sos(&mut rng, 7, 2, 3);
        let dsys = companion_form(&sys);
        for &w in log_grid(1e-3, 1e3, 20).iter() {
            let s = Complex64::new(0.0, w);
            let h = sys.eval_transfer(s).unwrap();
            let hd = dsys.eval_transfer(s).unwrap();
            let rel = fro_c(&(&h - &hd)) / fro_c(&h).max(1e-300);
            assert!(rel < 1e-9, "mismatch {:.2e} at omega {:.3e}", rel, w);
        }
    }

    #[test]
    fn symmetric_form_preserves_the_transfer_function() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut sys = random_sos(&mut rng, 6, 2, 2);
        sys.c_p = DMat::zeros(2, 6);
        sys.c_v = sys.b_u.transpose();
        let dsys = symmetric_form(&sys).unwrap();
        for &w in log_grid(1e-3, 1e3, 20).iter() {
            let s = Complex64::new(0.0, w);
            let h = sys.eval_transfer(s).unwrap();
            let hd = dsys.eval_transfer(s).unwrap();
            let rel = fro_c(&(&h - &hd)) / fro_c(&h).max(1e-300);
            assert!(rel < 1e-9, "mismatch {:.2e} at omega {:.3e}", rel, w);
        }
    }

    #[test]
    fn colocated_symmetric_transfer_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut sys = random_sos(&mut rng, 5, 3, 3);
        sys.c_p = DMat::zeros(3, 5);
        sys.c_v = sys.b_u.transpose();
        for &w in [0.1, 1.0, 10.0].iter() {
            let h = sys.eval_transfer(Complex64::new(0.0, w)).unwrap();
            let diff = &h - &h.transpose();
            assert!(fro_c(&diff) <= 1e-12 * fro_c(&h));
        }
    }

    #[test]
    fn log_grid_endpoints_and_size() {
        let g = log_grid(1e-2, 1e2, 5);
        assert_eq!(g.len(), 5);
        assert!((g[0] - 1e-2).abs() < 1e-16);
        assert!((g[4] - 1e2).abs() < 1e-12);
        assert!((g[2] - 1.0).abs() < 1e-14);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn csv_has_seventeen_significant_digits() {
        let fr = FrequencyResponse { omegas: vec![1.0 / 3.0], sigma: vec![2.0 / 7.0] };
        let csv = fr.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("omega,sigma_max"));
        let row = lines.next().unwrap();
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 2);
        assert_eq!(fields[0].parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(fields[1].parse::<f64>().unwrap(), 2.0 / 7.0);
        assert!(fields[0].starts_with("3.3333333333333331"));
    }

    #[test]
    fn error_sweep_of_a_model_against_itself_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sys = random_sos(&mut rng, 4, 2, 2);
        let grid = log_grid(1e-1, 1e1, 7);
        let es = error_sweep(&sys, &sys, &grid).unwrap();
        assert_eq!(es.max_abs(), 0.0);
        assert_eq!(es.max_rel(), 0.0);
    }

    #[test]
    fn velocity_damper_is_passive_on_a_grid() {
        // H(s) = s/(s^2 + 0.4 s + 4): positive real, Re H(iw) >= 0.
        let sys = scalar_sos(1.0, 0.4, 4.0, 0.0, 1.0);
        let report = passivity_margin(&sys, &log_grid(1e-3, 1e3, 200)).unwrap();
        assert!(report.passive_on_grid, "margin {:e}", report.margin);
        assert!(report.margin >= -1e-12);
    }

    #[test]
    fn position_output_system_fails_the_passivity_sample() {
        // H(s) = 1/(s^2 + 0.2 s + 1) has Re H(iw) < 0 past the resonance.
        let sys = scalar_sos(1.0, 0.2, 1.0, 1.0, 0.0);
        let report = passivity_margin(&sys, &log_grid(1e-1, 1e1, 101)).unwrap();
        assert!(!report.passive_on_grid);
        assert!(report.margin < -0.5);
    }

    #[test]
    fn cached_sweep_matches_the_dense_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let sys = random_sos(&mut rng, 9, 2, 3);
        let grid = log_grid(1e-3, 1e3, 40);
        let dense = sigma_sweep(&sys, &grid).unwrap();
        let cached = sigma_sweep_cached(&sys, &grid).unwrap();
        for (a, b) in dense.sigma.iter().zip(cached.sigma.iter()) {
            assert!((a - b).abs() <= 1e-9 * a.max(1.0), "dense {:e} vs cached {:e}", a, b);
        }
    }

    #[test]
    fn cached_error_sweep_matches_the_dense_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        let full = random_sos(&mut rng, 8, 2, 2);
        let rom = random_sos(&mut rng, 3, 2, 2);
        let grid = log_grid(1e-2, 1e2, 30);
        let dense = error_sweep(&full, &rom, &grid).unwrap();
        let cached = error_sweep_cached(&full, &rom, &grid).unwrap();
        for i in 0..grid.len() {
            let scale = dense.abs_err[i].max(1e-12);
            assert!(
                (dense.abs_err[i] - cached.abs_err[i]).abs() <= 1e-8 * scale,
                "abs err mismatch at {:.3e}: {:e} vs {:e}",
                grid[i],
                dense.abs_err[i],
                cached.abs_err[i]
            );
            assert!((dense.rel_err[i] - cached.rel_err[i]).abs() <= 1e-7 * dense.rel_err[i].max(1e-12));
        }
    }

    #[test]
    fn cached_passivity_margin_matches_the_dense_path() {
        let sys = scalar_sos(1.0, 0.4, 4.0, 0.0, 1.0);
        let grid = log_grid(1e-3, 1e3, 200);
        let dense = passivity_margin(&sys, &grid).unwrap();
        let cached = passivity_margin_cached(&sys, &grid).unwrap();
        assert_eq!(dense.omega, cached.omega);
        assert!((dense.margin - cached.margin).abs() <= 1e-10 * dense.margin.abs().max(1.0));
        assert!(cached.passive_on_grid);
    }
}
