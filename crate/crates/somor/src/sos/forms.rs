//! First-order realizations of a second-order system.

use super::{DescriptorSystem, SecondOrderSystem, SosError};
use crate::linalg::DMat;

/// Block companion realization of dimension `2n`:
///
/// ```text
/// E = [ I  0 ]      A = [  0   I  ]      B = [ 0  ]      C = [ C_p  C_v ]
///     [ 0  M ]          [ -K  -D  ]          [ B_u ]
/// ```
///
/// Shares the transfer function with the second-order system for any `M`,
/// including singular ones (the realization stays a descriptor system).
pub fn companion_form(sys: &SecondOrderSystem) -> DescriptorSystem {
    let n = sys.order();
    let m_in = sys.n_inputs();
    let p = sys.n_outputs();

    let mut e = DMat::identity(2 * n, 2 * n);
    e.view_mut((n, n), (n, n)).copy_from(&sys.m);

    let mut a = DMat::zeros(2 * n, 2 * n);
    a.view_mut((0, n), (n, n)).copy_from(&DMat::identity(n, n));
    a.view_mut((n, 0), (n, n)).copy_from(&(-&sys.k));
    a.view_mut((n, n), (n, n)).copy_from(&(-&sys.d));

    let mut b = DMat::zeros(2 * n, m_in);
    b.view_mut((n, 0), (n, m_in)).copy_from(&sys.b_u);

    let mut c = DMat::zeros(p, 2 * n);
    c.view_mut((0, 0), (p, n)).copy_from(&sys.c_p);
    c.view_mut((0, n), (p, n)).copy_from(&sys.c_v);

    DescriptorSystem { e, a, b, c }
}

/// Signature-symmetric first-order realization for colocated systems with
/// `M = L L'` and `K = G G'` positive definite (Cholesky factors):
///
/// ```text
/// A = [     0        G' L^-T  ]    B = [    0     ]    C = B'
///     [ -L^-1 G   -L^-1 D L^-T ]        [ L^-1 B_u ]
/// ```
///
/// With the signature `S = diag(-I, I)` this realization satisfies
/// `A S = S A'` and `C' = S B`, which is what the positive-real machinery
/// relies on. `E` is the identity.
pub fn symmetric_form(sys: &SecondOrderSystem) -> Result<DescriptorSystem, SosError> {
    if !sys.is_colocated() {
        return Err(SosError::NotColocated);
    }
    if !sys.is_symmetric_mdk() {
        return Err(SosError::NotPositiveDefinite("M, D, K (symmetry check failed)"));
    }
    let n = sys.order();
    let m_in = sys.n_inputs();

    let chol_m = nalgebra::linalg::Cholesky::new(sys.m.clone())
        .ok_or(SosError::NotPositiveDefinite("mass matrix M"))?;
    let chol_k = nalgebra::linalg::Cholesky::new(sys.k.clone())
        .ok_or(SosError::NotPositiveDefinite("stiffness matrix K"))?;
    let l = chol_m.l();
    let g = chol_k.l();

    // W = L^-1 G, so the off-diagonal blocks are W' and -W.
    let w = l
        .solve_lower_triangular(&g)
        .ok_or(SosError::NotPositiveDefinite("mass matrix M"))?;
    // L^-1 D L^-T computed as L^-1 (L^-1 D)', using symmetry of D.
    let s1 = l
        .solve_lower_triangular(&sys.d)
        .ok_or(SosError::NotPositiveDefinite("mass matrix M"))?;
    let dsym = l
        .solve_lower_triangular(&s1.transpose())
        .ok_or(SosError::NotPositiveDefinite("mass matrix M"))?;
    let b2 = l
        .solve_lower_triangular(&sys.b_u)
        .ok_or(SosError::NotPositiveDefinite("mass matrix M"))?;

    let mut a = DMat::zeros(2 * n, 2 * n);
    a.view_mut((0, n), (n, n)).copy_from(&w.transpose());
    a.view_mut((n, 0), (n, n)).copy_from(&(-&w));
    a.view_mut((n, n), (n, n)).copy_from(&(-&dsym));

    let mut b = DMat::zeros(2 * n, m_in);
    b.view_mut((n, 0), (n, m_in)).copy_from(&b2);

    let c = b.transpose();

    Ok(DescriptorSystem { e: DMat::identity(2 * n, 2 * n), a, b, c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{fro, DMat};

    fn oscillator(m: f64, d: f64, k: f64) -> SecondOrderSystem {
        SecondOrderSystem::new(
            DMat::from_element(1, 1, m),
            DMat::from_element(1, 1, d),
            DMat::from_element(1, 1, k),
            DMat::from_element(1, 1, 1.0),
            DMat::zeros(1, 1),
            DMat::from_element(1, 1, 1.0),
        )
        .unwrap()
    }

    #[test]
    fn companion_blocks_of_the_damped_oscillator() {
        let sys = oscillator(2.0, 3.0, 5.0);
        let dsys = companion_form(&sys);
        let e = DMat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let a = DMat::from_row_slice(2, 2, &[0.0, 1.0, -5.0, -3.0]);
        assert_eq!(dsys.e, e);
        assert_eq!(dsys.a, a);
        assert_eq!(dsys.b, DMat::from_column_slice(2, 1, &[0.0, 1.0]));
        assert_eq!(dsys.c, DMat::from_row_slice(1, 2, &[0.0, 1.0]));
    }

    #[test]
    fn symmetric_form_satisfies_the_signature_identities() {
        // Random-ish colocated system with SPD M and K.
        let n = 5;
        let base = DMat::from_fn(n, n, |i, j| ((3 * i + 5 * j + 1) as f64).sin());
        let m = &base * base.transpose() + DMat::identity(n, n) * 2.0;
        let kbase = DMat::from_fn(n, n, |i, j| ((2 * i + 7 * j + 3) as f64).cos());
        let k = &kbase * kbase.transpose() + DMat::identity(n, n);
        let d = DMat::identity(n, n) * 0.3 + &k * 0.01;
        let b_u = DMat::from_fn(n, 2, |i, j| ((i + 2 * j) as f64).sin());
        let sys = SecondOrderSystem::new(
            m,
            d,
            k,
            b_u.clone(),
            DMat::zeros(2, n),
            b_u.transpose(),
        )
        .unwrap();

        let dsys = symmetric_form(&sys).unwrap();
        let two_n = 2 * n;
        let mut s = DMat::identity(two_n, two_n);
        for i in 0..n {
            s[(i, i)] = -1.0;
        }
        let lhs = &dsys.a * &s;
        let rhs = &s * dsys.a.transpose();
        assert!(fro(&(&lhs - &rhs)) <= 1e-12 * fro(&lhs).max(1.0));
        let cb = &s * &dsys.b;
        assert!(fro(&(&dsys.c.transpose() - &cb)) <= 1e-14);
        assert_eq!(dsys.e, DMat::identity(two_n, two_n));
    }

    #[test]
    fn symmetric_form_rejects_position_outputs() {
        let mut sys = oscillator(1.0, 0.1, 1.0);
        sys.c_p = DMat::from_element(1, 1, 1.0);
        sys.c_v = DMat::zeros(1, 1);
        assert!(matches!(symmetric_form(&sys), Err(SosError::NotColocated)));
    }

    #[test]
    fn symmetric_form_rejects_indefinite_stiffness() {
        let mut sys = oscillator(1.0, 0.1, 1.0);
        sys.k = DMat::from_element(1, 1, -1.0);
        assert!(matches!(
            symmetric_form(&sys),
            Err(SosError::NotPositiveDefinite("stiffness matrix K"))
        ));
    }
}
