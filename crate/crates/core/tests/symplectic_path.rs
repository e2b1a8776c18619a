mod common;

use std::f64::consts::PI;

use pbm_core::linear::{fundamental_solution, index_of_linear};
use pbm_core::symplectic::{classify, decompose, maslov_index, GammaClass};
use pbm_core::{LinearSystem, MaslovIndex, Mat2, PeriodicMatrixFunction, Tolerances};
use rand::Rng;

fn index(l: Mat2, period: f64) -> MaslovIndex {
    index_of_linear(&LinearSystem::constant(period, l), &Tolerances::default()).unwrap()
}

#[test]
fn closed_form_index_table() {
    assert_eq!(index(Mat2::IDENTITY, PI), MaslovIndex { index: -1, nullity: 0 });
    assert_eq!(index(Mat2::scalar(-1.0), PI), MaslovIndex { index: 1, nullity: 0 });
    assert_eq!(index(Mat2::diag(-1.0, 1.0), 1.0), MaslovIndex { index: 0, nullity: 0 });
    assert_eq!(index(Mat2::diag(0.0, 1.0), 1.0), MaslovIndex { index: -1, nullity: 1 });
    assert_eq!(index(Mat2::scalar(-1.0), 2.0 * PI), MaslovIndex { index: 1, nullity: 2 });
}

#[test]
fn rotation_index_counts_half_turns() {
    // L = w I turns clockwise by w T; the index is -(2k + 1) on (2k pi, (2k + 2) pi).
    for (w, period) in [(1.0, 1.0), (3.0, PI), (5.0, 2.0), (0.5, 20.0)] {
        let theta: f64 = w * period;
        let k = (theta / (2.0 * PI)).floor() as i64;
        assert_eq!(index(Mat2::scalar(w), period).index, -(2 * k + 1), "w = {w}, T = {period}");
    }
}

#[test]
fn endpoint_class_matches_index_parity() {
    let tol = Tolerances::default();
    for m in common::battery(11, 20) {
        let path = fundamental_solution(&m.system, &tol).unwrap();
        let (idx, end) = maslov_index(&path, &tol).unwrap();
        let class = classify(&path.end_matrix(), tol.resonance);
        assert_eq!(class, end.class);
        let expect = if idx.index % 2 == 0 { GammaClass::Minus } else { GammaClass::Plus };
        assert_eq!(class, expect, "{idx:?}");
        assert_eq!(end.k % 2, 0);
    }
}

#[test]
fn decomposition_round_trip_on_integrated_monodromies() {
    let tol = Tolerances::default();
    for m in common::battery(12, 20) {
        let psi = common::system_end(&m.system);
        let c = decompose(&psi, 1e-8, tol.tau_min).unwrap();
        let err = (c.reconstruct() - psi).max_abs();
        assert!(err < 1e-9 * (1.0 + psi.max_abs()), "{err} {} {}", psi.max_abs(), psi.det());
    }
}

#[test]
fn sandwiched_hill_coefficients_share_the_index() {
    let tol = Tolerances::default();
    let mut rng = common::rng(13);
    let (a1, a2, period) = (0.7, 1.3, 1.0);
    let common_index = index(Mat2::diag(a1, 1.0), period);
    assert_eq!(common_index, index(Mat2::diag(a2, 1.0), period));
    for _ in 0..20 {
        let c: [f64; 4] = [rng.gen(), rng.gen(), rng.gen(), rng.gen()];
        let q = move |t: f64| {
            let s = 0.5 + 0.5 * ((2.0 * PI * t).sin() * (c[0] - 0.5) + (4.0 * PI * t).cos() * (c[1] - 0.5));
            a1 + 0.01 + (a2 - a1 - 0.02) * (c[2] * s + (1.0 - c[2]) * c[3]).clamp(0.0, 1.0)
        };
        let sys = LinearSystem::new(PeriodicMatrixFunction::new(period, move |t| Mat2::diag(q(t), 1.0)));
        assert_eq!(index_of_linear(&sys, &tol).unwrap(), common_index);
    }
}
