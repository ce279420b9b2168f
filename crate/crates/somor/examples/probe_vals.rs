use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use somor::config::Tolerances;
use somor::linalg::DMat;
use somor::prbt::{pr_balance_truncate_with, pr_characteristic_values, solve_lure};
use somor::sos::{symmetric_form, SecondOrderSystem};

fn main() {
    let tol = Tolerances::default();
    let n = 2usize;
    let mut rng = ChaCha8Rng::seed_from_u64(12040604064559420374);
    let mut g = DMat::zeros(n, n);
    for e in g.iter_mut() {
        *e = rng.gen_range(-1.0..1.0);
    }
    let k = &g * g.transpose() + DMat::identity(n, n) * 0.4;
    let d = (DMat::identity(n, n) + &k) * rng.gen_range(2.0..3.0);
    let mut b = DMat::zeros(n, 1);
    for e in b.iter_mut() {
        *e = rng.gen_range(-1.0..1.0);
    }
    let sys = SecondOrderSystem::new(DMat::identity(n, n), d.clone(), k.clone(), b.clone(), DMat::zeros(1, n), b.transpose()).unwrap();
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let mut v = DMat::zeros(n, 1);
        for e in v.iter_mut() { *e = rng.gen_range(-1.0..1.0); }
        let vd = (v.transpose() * &d * &v)[(0, 0)];
        let vk = (v.transpose() * &k * &v)[(0, 0)];
        let vm = (v.transpose() * &v)[(0, 0)];
        worst = worst.min(vd * vd - 4.0 * vm * vk);
    }
    println!("overdamped margin (min over dirs): {worst:.3e}");
    let dsys = symmetric_form(&sys).unwrap();
    let lure = solve_lure(&dsys, &tol).unwrap();
    println!("residual {:.3e}", lure.residual);
    let cv = pr_characteristic_values(&lure.factor).unwrap();
    let np = cv.pairs();
    for i in 0..np {
        println!("pair {i}: pos {:.9e} neg {:.9e}", cv.values[i], cv.values[np + i]);
    }
    let rom = pr_balance_truncate_with(&dsys, &lure, np, &tol).unwrap();
    println!("blocks {:?} defect {:.3e}", rom.blocks, rom.structure_defect);
    let (m, l, p) = rom.blocks;
    let off = m + l;
    let x = rom.a_hat.view((off, off), (2 * p, 2 * p)).clone_owned();
    println!("strict block X = {x:.6}");
    let eig = x.clone().complex_eigenvalues();
    println!("eigs of X: {:?}", eig.iter().collect::<Vec<_>>());
    if p == 1 {
        let (a, bb, c) = (x[(0, 0)], x[(0, 1)], x[(1, 1)]);
        println!("a {a:.6} b {bb:.6} c {c:.6}");
        // alpha*C + bb*S + gamma = 0, C^2 - S^2 = 1, valid branch C >= 1
        let alpha = (a - c) / 2.0;
        let gamma = (a + c) / 2.0;
        let qa = alpha * alpha - bb * bb;
        let qb = 2.0 * bb * gamma;
        let qc = gamma * gamma - alpha * alpha;
        let disc = qb * qb - 4.0 * qa * qc;
        println!("quadratic disc {disc:.6e}");
        if disc >= 0.0 && qa != 0.0 {
            for sgn in [1.0f64, -1.0] {
                let s = (-qb + sgn * disc.sqrt()) / (2.0 * qa);
                let cbig = if alpha != 0.0 { -(gamma + bb * s) / alpha } else { f64::NAN };
                println!("  root S = {s:.6}, C = {cbig:.6}, hyperbola check C^2-S^2 = {:.6}", cbig * cbig - s * s);
            }
        }
    }
}
