use somor::config::Tolerances;
use somor::linalg::{fro, DMat};
use somor::models::{gen_triple_chain, TripleChainParams};
use somor::prbt::{solve_lure, solve_lure_at};
use somor::sos::symmetric_form;

fn main() {
    let chain = gen_triple_chain(&TripleChainParams::new(5)).unwrap();
    let dsys = symmetric_form(&chain).unwrap();
    let tol = Tolerances::default();
    let p4 = solve_lure_at(&dsys, 1e-4, &tol).unwrap();
    let p6 = solve_lure_at(&dsys, 1e-6, &tol).unwrap();
    let p8 = solve_lure_at(&dsys, 1e-8, &tol).unwrap();
    let d46 = fro(&(&p4 - &p6));
    let d68 = fro(&(&p6 - &p8));
    println!("|P4-P6| = {:.4e}  |P6-P8| = {:.4e}  ratio = {:.3}", d46, d68, d46 / d68);
    println!("|P6-P8|/|P8| = {:.4e}", d68 / fro(&p8));

    let sol = solve_lure(&dsys, &tol).unwrap();
    println!("refined residual |PB-C'| = {:.4e}  (|C| = {:.3e})", sol.residual, fro(&dsys.c));
    println!("dual defect = {:.4e}", sol.dual_defect);

    let (x4, x6) = (1e-2f64, 1e-3f64);
    let two = &p4 * (x6 / (x6 - x4)) + &p6 * (x4 / (x4 - x6));
    let three = sol.p();
    println!("two-vs-three node extrap rel diff = {:.4e}", fro(&(&two - &three)) / fro(&three));

    let n = dsys.order() / 2;
    let mut s = DMat::identity(2 * n, 2 * n);
    for j in 0..n {
        s[(j, j)] = -1.0;
    }
    let z = &sol.factor * &s * sol.factor.transpose();
    let eig = nalgebra::SymmetricEigen::new(z);
    let mut theta: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    theta.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let negs: Vec<String> = theta.iter().filter(|&&t| t < 0.0).map(|t| format!("{:.6e}", -t)).collect();
    let poss: Vec<String> = theta.iter().filter(|&&t| t >= 0.0).rev().map(|t| format!("{:.6e}", t)).collect();
    println!("negative class ({}):", negs.len());
    for v in negs.iter() { println!("  -{}", v); }
    println!("positive class ({}):", poss.len());
    for v in poss.iter() { println!("  +{}", v); }

    // B-activity in balanced coordinates: T = L^-T U |Theta|^(1/2), W = T^-T;
    // rows of W' B show which states carry the input.
    let eigv = nalgebra::SymmetricEigen::new(&sol.factor * &s * sol.factor.transpose());
    let u = eigv.eigenvectors.clone();
    let th = eigv.eigenvalues.clone();
    // w_col_j = L * u_j * |theta_j|^(-1/2)
    let mut w = &sol.factor * &u;
    for j in 0..2 * n {
        let sc = th[j].abs().sqrt().recip();
        w.column_mut(j).scale_mut(sc);
    }
    let bhat = w.transpose() * &dsys.b;
    println!("B-activity |row| per state (theta, |b_row|):");
    let mut rows: Vec<(f64, f64)> = (0..2 * n).map(|j| (th[j], bhat.row(j).norm())).collect();
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for (t, bn) in rows.iter() {
        println!("  theta {:+.6e}   |b| {:.3e}", t, bn);
    }
}
