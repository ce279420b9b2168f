//! Benchmark model generators and matrix file exchange.
//!
//! Two damped mass-spring generators cover the common test setups: a
//! three-strand coupled chain with velocity outputs at every mass, and a
//! single anchored chain with position outputs at both ends. Systems move
//! between processes as a directory bundle of Matrix Market files plus a
//! small JSON metadata sidecar.

mod bundle;
mod mmio;

pub use bundle::{read_bundle, write_bundle, BundleDims, BundleMeta};
pub use mmio::{read_matrix_market, read_matrix_market_file, write_matrix_market,
    write_matrix_market_file};

use serde::{Deserialize, Serialize};

use crate::linalg::DMat;
use crate::sos::{SecondOrderSystem, SosError};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("invalid parameter {field}: {reason}")]
    InvalidParams { field: &'static str, reason: String },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Inconsistent(String),
    #[error(transparent)]
    Sos(#[from] SosError),
}

fn require_positive(field: &'static str, v: f64) -> Result<(), ModelError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParams { field, reason: format!("must be positive, got {}", v) })
    }
}

fn require_nonnegative(field: &'static str, v: f64) -> Result<(), ModelError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParams {
            field,
            reason: format!("must be nonnegative, got {}", v),
        })
    }
}

/// Parameters of the three-strand coupled spring chain.
///
/// Three chains of `g` masses each hang between a wall and one shared
/// coupling mass that is itself anchored, giving `n = 3g + 1` degrees of
/// freedom. Damping is Rayleigh (`alpha M + beta K`) plus three viscous
/// dampers tying the first mass of each strand to the wall. The input
/// distributes unit force over all masses and the output is the sum of all
/// velocities, making the system symmetric and colocated.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleChainParams {
    /// Masses per strand; the model has `3g + 1` degrees of freedom.
    pub g: usize,
    /// Anchor stiffness of the coupling mass.
    pub k0: f64,
    /// Spring stiffness within strands one, two, three.
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    /// Coupling mass.
    pub m0: f64,
    /// Mass values within strands one, two, three.
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    /// Rayleigh damping coefficients `D = alpha M + beta K + ...`.
    pub alpha: f64,
    pub beta: f64,
    /// Wall dampers on the first mass of each strand.
    pub nu1: f64,
    pub nu2: f64,
    pub nu3: f64,
}

impl TripleChainParams {
    /// Reference parameter set with `g` masses per strand.
    pub fn new(g: usize) -> Self {
        TripleChainParams {
            g,
            k0: 50.0,
            k1: 10.0,
            k2: 20.0,
            k3: 1.0,
            m0: 1.0,
            m1: 1.0,
            m2: 2.0,
            m3: 3.0,
            alpha: 2e-3,
            beta: 2e-3,
            nu1: 5.0,
            nu2: 5.0,
            nu3: 5.0,
        }
    }
}

impl Default for TripleChainParams {
    fn default() -> Self {
        TripleChainParams::new(500)
    }
}

/// Builds the triple chain model; `n = 3g + 1`.
pub fn gen_triple_chain(p: &TripleChainParams) -> Result<SecondOrderSystem, ModelError> {
    if p.g == 0 {
        return Err(ModelError::InvalidParams {
            field: "g",
            reason: "must be at least 1".into(),
        });
    }
    for (f, v) in [
        ("k0", p.k0),
        ("k1", p.k1),
        ("k2", p.k2),
        ("k3", p.k3),
        ("m0", p.m0),
        ("m1", p.m1),
        ("m2", p.m2),
        ("m3", p.m3),
    ] {
        require_positive(f, v)?;
    }
    for (f, v) in [
        ("alpha", p.alpha),
        ("beta", p.beta),
        ("nu1", p.nu1),
        ("nu2", p.nu2),
        ("nu3", p.nu3),
    ] {
        require_nonnegative(f, v)?;
    }

    let g = p.g;
    let n = 3 * g + 1;
    let ks = [p.k1, p.k2, p.k3];
    let ms = [p.m1, p.m2, p.m3];
    let nus = [p.nu1, p.nu2, p.nu3];

    let mut k = DMat::zeros(n, n);
    let mut m = DMat::zeros(n, n);
    for strand in 0..3 {
        let off = strand * g;
        let (ki, mi) = (ks[strand], ms[strand]);
        for j in 0..g {
            k[(off + j, off + j)] = 2.0 * ki;
            if j + 1 < g {
                k[(off + j, off + j + 1)] = -ki;
                k[(off + j + 1, off + j)] = -ki;
            }
            m[(off + j, off + j)] = mi;
        }
        // Spring from the strand's last mass to the coupling mass.
        k[(off + g - 1, n - 1)] = -ki;
        k[(n - 1, off + g - 1)] = -ki;
    }
    k[(n - 1, n - 1)] = p.k1 + p.k2 + p.k3 + p.k0;
    m[(n - 1, n - 1)] = p.m0;

    let mut d = &m * p.alpha + &k * p.beta;
    for strand in 0..3 {
        d[(strand * g, strand * g)] += nus[strand];
    }

    let b_u = DMat::from_element(n, 1, 1.0);
    let c_v = b_u.transpose();
    let c_p = DMat::zeros(1, n);
    Ok(SecondOrderSystem::new(m, d, k, b_u, c_p, c_v)?)
}

/// Parameters of the single anchored spring chain.
///
/// A chain of `n` identical masses fixed to a wall at the first mass and
/// free at the last, with an extra anchor spring and a viscous damper on the
/// first mass. The input forces the first mass; the outputs are the
/// positions of the first and last mass.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleChainParams {
    pub n: usize,
    pub mass: f64,
    pub stiffness: f64,
    /// Extra spring tying the first mass to the wall.
    pub anchor_stiffness: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Viscous damper on the first mass.
    pub nu: f64,
}

impl SingleChainParams {
    /// Reference parameter set with `n` masses.
    pub fn new(n: usize) -> Self {
        SingleChainParams {
            n,
            mass: 1.0,
            stiffness: 1.0,
            anchor_stiffness: 1.0,
            alpha: 2e-3,
            beta: 2e-3,
            nu: 5.0,
        }
    }
}

impl Default for SingleChainParams {
    fn default() -> Self {
        SingleChainParams::new(100)
    }
}

/// Builds the single chain model.
pub fn gen_single_chain(p: &SingleChainParams) -> Result<SecondOrderSystem, ModelError> {
    if p.n == 0 {
        return Err(ModelError::InvalidParams {
            field: "n",
            reason: "must be at least 1".into(),
        });
    }
    require_positive("mass", p.mass)?;
    require_positive("stiffness", p.stiffness)?;
    require_nonnegative("anchor_stiffness", p.anchor_stiffness)?;
    require_nonnegative("alpha", p.alpha)?;
    require_nonnegative("beta", p.beta)?;
    require_nonnegative("nu", p.nu)?;

    let n = p.n;
    let ks = p.stiffness;
    let mut k = DMat::zeros(n, n);
    for j in 0..n {
        k[(j, j)] = if j + 1 < n { 2.0 * ks } else { ks };
        if j + 1 < n {
            k[(j, j + 1)] = -ks;
            k[(j + 1, j)] = -ks;
        }
    }
    k[(0, 0)] += p.anchor_stiffness;

    let m = DMat::identity(n, n) * p.mass;
    let mut d = &m * p.alpha + &k * p.beta;
    d[(0, 0)] += p.nu;

    let mut b_u = DMat::zeros(n, 1);
    b_u[(0, 0)] = 1.0;
    let mut c_p = DMat::zeros(2, n);
    c_p[(0, 0)] = 1.0;
    c_p[(1, n - 1)] = 1.0;
    let c_v = DMat::zeros(2, n);
    Ok(SecondOrderSystem::new(m, d, k, b_u, c_p, c_v)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::backend::{dsyev, lu_real};
    use crate::linalg::backend::dgeev_values;
    use crate::sos::companion_form;
    use proptest::prelude::*;

    #[test]
    fn triple_chain_reference_corner_for_one_mass_per_strand() {
        let sys = gen_triple_chain(&TripleChainParams::new(1)).unwrap();
        assert_eq!(sys.order(), 4);
        let k = DMat::from_row_slice(
            4,
            4,
            &[
                20.0, 0.0, 0.0, -10.0,
                0.0, 40.0, 0.0, -20.0,
                0.0, 0.0, 2.0, -1.0,
                -10.0, -20.0, -1.0, 81.0,
            ],
        );
        assert_eq!(sys.k, k);
        assert_eq!(
            sys.m,
            DMat::from_partial_diagonal(4, 4, &[1.0, 2.0, 3.0, 1.0])
        );
        // Rayleigh part plus the wall dampers on masses 1 to 3.
        assert!((sys.d[(0, 0)] - (0.002 * 1.0 + 0.002 * 20.0 + 5.0)).abs() < 1e-15);
        assert!((sys.d[(3, 3)] - (0.002 * 1.0 + 0.002 * 81.0)).abs() < 1e-15);
        assert!(sys.is_colocated());
        assert!(sys.is_symmetric_mdk());
    }

    #[test]
    fn triple_chain_topology_with_two_masses_per_strand() {
        let mut p = TripleChainParams::new(2);
        (p.k0, p.k1, p.k2, p.k3) = (1.0, 1.0, 1.0, 1.0);
        (p.m0, p.m1, p.m2, p.m3) = (1.0, 1.0, 1.0, 1.0);
        (p.alpha, p.beta) = (0.0, 0.0);
        (p.nu1, p.nu2, p.nu3) = (0.0, 0.0, 0.0);
        let sys = gen_triple_chain(&p).unwrap();
        let k = DMat::from_row_slice(
            7,
            7,
            &[
                2.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0,
                -1.0, 2.0, 0.0, 0.0, 0.0, 0.0, -1.0,
                0.0, 0.0, 2.0, -1.0, 0.0, 0.0, 0.0,
                0.0, 0.0, -1.0, 2.0, 0.0, 0.0, -1.0,
                0.0, 0.0, 0.0, 0.0, 2.0, -1.0, 0.0,
                0.0, 0.0, 0.0, 0.0, -1.0, 2.0, -1.0,
                0.0, -1.0, 0.0, -1.0, 0.0, -1.0, 4.0,
            ],
        );
        assert_eq!(sys.k, k);
        assert_eq!(sys.m, DMat::identity(7, 7));
        assert_eq!(sys.d, DMat::zeros(7, 7));
    }

    #[test]
    fn triple_chain_dimension_scales_as_three_g_plus_one() {
        let sys = gen_triple_chain(&TripleChainParams::new(500)).unwrap();
        assert_eq!(sys.order(), 1501);
        assert_eq!(sys.n_inputs(), 1);
        assert_eq!(sys.n_outputs(), 1);
    }

    #[test]
    fn undamped_triple_chain_is_marginally_stable() {
        let mut p = TripleChainParams::new(2);
        (p.alpha, p.beta) = (0.0, 0.0);
        (p.nu1, p.nu2, p.nu3) = (0.0, 0.0, 0.0);
        let sys = gen_triple_chain(&p).unwrap();
        assert_eq!(sys.d, DMat::zeros(7, 7));
        let dsys = companion_form(&sys);
        let a = lu_real(&dsys.e).unwrap().solve(&dsys.a).unwrap();
        for lam in dgeev_values(&a).unwrap() {
            assert!(lam.re.abs() <= 1e-8, "eigenvalue {} off the axis", lam);
        }
    }

    #[test]
    fn zero_strand_count_is_rejected() {
        let err = gen_triple_chain(&TripleChainParams::new(0)).unwrap_err();
        match err {
            ModelError::InvalidParams { field, .. } => assert_eq!(field, "g"),
            other => panic!("unexpected error {:?}", other),
        }
    }

    #[test]
    fn negative_stiffness_is_rejected_by_name() {
        let mut p = TripleChainParams::new(1);
        p.k2 = -3.0;
        match gen_triple_chain(&p).unwrap_err() {
            ModelError::InvalidParams { field, .. } => assert_eq!(field, "k2"),
            other => panic!("unexpected error {:?}", other),
        }
    }

    #[test]
    fn single_chain_of_three_masses() {
        let mut p = SingleChainParams::new(3);
        (p.alpha, p.beta, p.nu) = (0.0, 0.0, 0.0);
        let sys = gen_single_chain(&p).unwrap();
        let k = DMat::from_row_slice(
            3,
            3,
            &[3.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0],
        );
        assert_eq!(sys.k, k);
        assert_eq!(sys.m, DMat::identity(3, 3));
        assert_eq!(sys.b_u, DMat::from_column_slice(3, 1, &[1.0, 0.0, 0.0]));
        let cp = DMat::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(sys.c_p, cp);
        assert!(sys.is_positions_only());
    }

    #[test]
    fn single_mass_stiffness_adds_the_anchor() {
        let mut p = SingleChainParams::new(1);
        p.stiffness = 1.5;
        p.anchor_stiffness = 0.5;
        let sys = gen_single_chain(&p).unwrap();
        assert_eq!(sys.k, DMat::from_element(1, 1, 2.0));
    }

    proptest! {
        #[test]
        fn generated_chains_are_positive_definite_and_damped(
            g in 1usize..6,
            k in 0.1f64..10.0,
            m in 0.1f64..10.0,
            nu in 0.0f64..10.0,
        ) {
            let mut p = TripleChainParams::new(g);
            p.k1 = k;
            p.m2 = m;
            p.nu3 = nu;
            let sys = gen_triple_chain(&p).unwrap();
            prop_assert!(nalgebra::linalg::Cholesky::new(sys.m.clone()).is_some());
            prop_assert!(nalgebra::linalg::Cholesky::new(sys.k.clone()).is_some());
            let (eigs, _) = dsyev(&sys.d).unwrap();
            let scale = sys.d.norm().max(1e-300);
            prop_assert!(eigs[0] >= -1e-12 * scale);
        }
    }
}
