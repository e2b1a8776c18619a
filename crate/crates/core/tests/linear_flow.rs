mod common;

use std::f64::consts::{PI, TAU};

use pbm_core::degree::{degree_shifted, DegreeOptions, PoincareField};
use pbm_core::lifted::poincare_t;
use pbm_core::linear::{
    closed_form_poincare, g_function, g_function_arccos, quadrant_sequence, verify_properties, Quadrant,
};
use pbm_core::{LiftedPoint, Mat2, Tolerances};

#[test]
fn closed_form_matches_integration_on_battery() {
    let tol = Tolerances::default();
    for m in common::battery(21, 10) {
        let sys = m.system.to_hamiltonian();
        for k in 0..64 {
            let phi = TAU * k as f64 / 64.0;
            let (theta, ratio) = closed_form_poincare(&m.data, phi);
            let rec = poincare_t(&sys, LiftedPoint::new(phi, 1.0), &tol).unwrap();
            assert!((rec.f1 - theta).abs() <= 1e-6, "{} vs {theta}", rec.f1);
            assert!((rec.r_t / rec.r0 - ratio).abs() <= 1e-6 * ratio);
        }
    }
}

#[test]
fn battery_covers_several_indices() {
    let mut seen: Vec<i64> = common::battery(22, 40).iter().map(|m| m.data.index.index).collect();
    seen.sort();
    seen.dedup();
    assert!(seen.len() >= 4, "{seen:?}");
    assert!(seen.iter().any(|i| i % 2 == 0) && seen.iter().any(|i| i % 2 != 0));
}

#[test]
fn g_has_two_agreeing_forms() {
    for m in common::battery(23, 10) {
        for k in 0..100 {
            let alpha = PI * k as f64 / 100.0;
            let a = g_function(&m.data, alpha);
            let b = g_function_arccos(&m.data, alpha);
            assert!((a - b).abs() < 1e-7, "{a} {b}");
        }
    }
}

#[test]
fn properties_hold_on_battery() {
    for m in common::battery(24, 30) {
        let rep = verify_properties(&m.data, 256, 1e-6);
        assert!(rep.all_ok(), "{rep:?}");
    }
}

#[test]
fn resonant_equality_cases() {
    for d in [common::constant(Mat2::diag(0.0, 1.0), 1.0), common::constant(Mat2::scalar(-1.0), 2.0 * PI)] {
        assert!(d.index.is_resonant());
        let rep = verify_properties(&d, 256, 1e-6);
        assert!(rep.all_ok(), "{rep:?}");
        assert!((rep.max_g - rep.theta_bar.abs()).abs() <= 1e-6);
    }
}

#[test]
fn even_index_quadrant_sequence() {
    let mut checked = 0;
    for m in common::battery(25, 60) {
        if m.data.index.index != 0 || m.data.endpoint.theta_bar <= 0.0 {
            continue;
        }
        let seq = quadrant_sequence(&m.data, 1.0, 4000);
        assert_eq!(seq, [Quadrant::IV, Quadrant::I, Quadrant::II, Quadrant::III, Quadrant::IV]);
        checked += 1;
    }
    let d = common::constant(Mat2::symmetric(-0.6, 0.3, 1.2), 1.0);
    assert_eq!(
        quadrant_sequence(&d, 2.0, 4000),
        [Quadrant::IV, Quadrant::I, Quadrant::II, Quadrant::III, Quadrant::IV]
    );
    assert!(checked > 0 || d.index.index == 0);
}

#[test]
fn degree_of_shifted_linear_fields() {
    let tol = Tolerances::default();
    let opts = DegreeOptions::default();
    for m in common::battery(26, 8) {
        let sys = m.system.to_hamiltonian();
        let field = PoincareField::new(&sys, tol);
        let i = m.data.index.index;
        for shift in -3..=3 {
            let expect = if i == 2 * shift { -2 } else { 0 };
            for r in [0.5, 3.0] {
                assert_eq!(degree_shifted(&field, shift, r, &opts).unwrap(), expect, "i = {i}, M = {shift}");
            }
        }
    }
}
