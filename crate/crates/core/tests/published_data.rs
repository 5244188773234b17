//! Full-pipeline comparisons against published coefficient lists.

use xi_lab::matrix_model::{build_potential, jacobi_matrix, q_polynomial, CharPolynomial};
use xi_lab::pipeline::{odd_couplings, run_row, CouplingSource, RunSettings, PUBLISHED_RIEMANN};
use xi_lab::scaling::{double_scaling, GMode};
use xi_lab::{Precision, XReal};

fn prec() -> Precision {
    Precision::DEFAULT
}

fn worst_descending(q: &CharPolynomial, want: &[f64]) -> f64 {
    let n = q.degree();
    want.iter().enumerate().map(|(k, w)| ((q.coeff(n - k).to_f64() - w) / w).abs()).fold(0.0, f64::max)
}

#[test]
fn cosh_q16_coefficients() {
    let run = run_row("kbessel", &RunSettings::new(16, prec())).unwrap();
    let want = [
        1.0, 470.227, 100563.0, 1.29618e7, 1.12484e9, 6.95391e10, 3.16015e12, 1.07377e14, 2.74766e15, 5.29135e16,
        7.60608e17, 8.02664e18, 6.04942e19, 3.11591e20, 1.01997e21, 1.85683e21, 1.36908e21,
    ];
    let w = worst_descending(&run.q, &want);
    assert!(w < 1e-4, "{w}");
    let roots: Vec<f64> = run.roots.real_roots().iter().map(XReal::to_f64).collect();
    assert!((roots[0] + 67.7171).abs() < 1e-3 && (roots[15] + 1.96262).abs() < 1e-4);
}

#[test]
fn eta_gamma_q16_coefficients() {
    let run = run_row("eta_gamma", &RunSettings::new(16, prec())).unwrap();
    let want = [
        1.0, 95.0376, 3997.72, 98185.2, 1.56353e6, 1.69426e7, 1.27431e8, 6.64962e8, 2.35587e9, 5.36099e9, 6.78531e9,
        2.27449e9, -4.40915e9, -3.60649e9, 1.09591e9, 1.06809e9, -3.43796e7,
    ];
    let w = worst_descending(&run.q, &want);
    assert!(w < 1e-3, "{w}");
}

#[test]
fn riemann_q16_roots_with_published_couplings() {
    let mut s = RunSettings::new(16, prec());
    s.couplings = CouplingSource::Published;
    let run = run_row("riemann", &s).unwrap();
    let real: Vec<f64> = run.roots.real_roots().iter().map(XReal::to_f64).collect();
    assert_eq!(real.len(), 14);
    for (got, want) in real.iter().zip([-22.8352, -19.7169, -17.2138, -15.0434]) {
        assert!((got - want).abs() < 1e-3, "{got} vs {want}");
    }
    assert!((real[13] + 1.12636).abs() < 1e-4);
}

#[test]
fn riemann_n8_jacobi_determinant_matches_q8() {
    let s = odd_couplings(&PUBLISHED_RIEMANN, prec()).unwrap();
    let params = double_scaling(7, 8, &s, GMode::Corrected, prec()).unwrap();
    let v = build_potential(&params);
    let q = q_polynomial(&params, &v, 8);
    let det = jacobi_matrix(&params, &v, 8).unwrap().charpoly();
    let tol = prec().tolerance(15).to_f64();
    assert!(det.rel_diff(&q) < tol, "{}", det.rel_diff(&q));
}
