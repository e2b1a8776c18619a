mod common;

use std::f64::consts::TAU;

use pbm_core::catalog::{lookup, NAMES};
use pbm_core::certify::{find_twist_radii, indices, rotation_margin, CertifyOptions};
use pbm_core::lifted::{area_preservation_defect, default_area_step, flow_lifted, limit_agreement, poincare_t, Region};
use pbm_core::{project, LiftedPoint, Tolerances, Vec2};
use rand::Rng;

#[test]
fn area_is_preserved_on_catalog() {
    let tol = Tolerances::default();
    let mut rng = common::rng(31);
    for name in NAMES {
        let sys = lookup(name).unwrap().system;
        for _ in 0..20 {
            let p = LiftedPoint::new(rng.gen_range(0.0..TAU), rng.gen_range(0.2..3.0));
            let d = area_preservation_defect(&sys, p, default_area_step(p.r), &tol).unwrap();
            assert!(d <= 1e-4, "{name}: {d} at {p:?}");
        }
    }
}

#[test]
fn energy_is_conserved_along_lifted_flow() {
    let tol = Tolerances::default();
    for name in ["figure1", "figure2", "figure3"] {
        let sys = lookup(name).unwrap().system;
        let traj = flow_lifted(&sys, LiftedPoint::new(0.7, 1.6), 0.0, 3.0, &tol).unwrap();
        let e0 = sys.energy(0.0, traj.samples[0].point()).unwrap();
        for s in &traj.samples {
            assert!((sys.energy(s.t, s.point()).unwrap() - e0).abs() < 1e-7, "{name}");
            assert!((project(LiftedPoint::new(s.phi, s.r())) - s.point()).norm() < 1e-9 * (1.0 + s.r()));
        }
    }
}

#[test]
fn displacement_is_two_pi_periodic_in_phi() {
    let tol = Tolerances::default();
    let sys = lookup("figure2").unwrap().system;
    for k in 0..8 {
        let phi = TAU * k as f64 / 8.0;
        let a = poincare_t(&sys, LiftedPoint::new(phi, 1.3), &tol).unwrap().displacement();
        let b = poincare_t(&sys, LiftedPoint::new(phi + TAU, 1.3), &tol).unwrap().displacement();
        assert!((a - b).norm() < 1e-8);
    }
}

#[test]
fn linearizations_are_approached() {
    let tol = Tolerances::default();
    for name in ["figure1", "figure2"] {
        let sys = lookup(name).unwrap().system;
        let zero = limit_agreement(&sys, Region::Zero, &[1e-1, 1e-2, 1e-3], 64, &tol).unwrap();
        assert!(zero[0].total() >= 10.0 * zero[2].total(), "{name} {zero:?}");
        assert!(zero.windows(2).all(|w| w[1].total() < w[0].total()), "{name} {zero:?}");
        let inf = limit_agreement(&sys, Region::Infinity, &[1e1, 1e2, 1e3], 64, &tol).unwrap();
        assert!(inf[0].total() >= 10.0 * inf[2].total(), "{name} {inf:?}");
        assert!(inf.windows(2).all(|w| w[1].total() < w[0].total()), "{name} {inf:?}");
    }
}

#[test]
fn rotation_bounds_hold_at_twist_radii() {
    let opts = CertifyOptions::default();
    for name in ["figure1", "figure2", "figure3"] {
        let sys = lookup(name).unwrap().system;
        let (i0, i_inf) = indices(&sys, &opts.tol).unwrap();
        let radii = find_twist_radii(&sys, i0.index, i_inf.index, &opts).unwrap();
        let m0 = rotation_margin(&sys, i0.index, radii.r0, 256, &opts.tol).unwrap();
        let m_inf = rotation_margin(&sys, i_inf.index, radii.r_infty, 256, &opts.tol).unwrap();
        assert!(m0 >= 1e-3 && m_inf >= 1e-3, "{name}: {m0} {m_inf}");
    }
}

#[test]
fn slow_convergence_at_infinity_exhausts_the_radius_scan() {
    // Rotation speed 1 + 3 / ln(e + |z|^2) creeps down to its limit: with
    // T = 6 the twist bound for the limit index -1 needs |z| ~ 1e14.
    let sys = pbm_core::PlanarHamiltonianSystem::new(6.0, |_, z: Vec2| {
        z.scale(1.0 + 3.0 / (std::f64::consts::E + z.dot(z)).ln())
    })
    .with_linearization_at_zero(pbm_core::PeriodicMatrixFunction::constant(6.0, pbm_core::Mat2::scalar(4.0)))
    .with_linearization_at_infinity(pbm_core::PeriodicMatrixFunction::constant(6.0, pbm_core::Mat2::IDENTITY));
    let opts = CertifyOptions {
        tol: Tolerances { angle_grid: 16, ..CertifyOptions::default().tol },
        ..CertifyOptions::default()
    };
    let (i0, i_inf) = indices(&sys, &opts.tol).unwrap();
    assert_eq!(i_inf.index, -1);
    let err = find_twist_radii(&sys, i0.index, i_inf.index, &opts).unwrap_err();
    assert!(matches!(err, pbm_core::Error::TwistRadiiNotFound { at: "infinity", .. }), "{err}");
}
