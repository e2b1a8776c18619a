#![allow(dead_code)]

use std::f64::consts::TAU;

use pbm_core::linear::LinearPoincareData;
use pbm_core::{LinearSystem, Mat2, PeriodicMatrixFunction, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub struct Member {
    pub system: LinearSystem,
    pub data: LinearPoincareData,
}

fn random_symmetric(rng: &mut ChaCha8Rng, diag: (f64, f64), off: f64) -> Mat2 {
    Mat2::symmetric(rng.gen_range(diag.0..diag.1), rng.gen_range(-off..off), rng.gen_range(diag.0..diag.1))
}

/// Seeded nonresonant linear systems `L(t) = S0 + S1 cos(wt) + S2 sin(wt)`
/// with indices spread over several values.
pub fn battery(seed: u64, n: usize) -> Vec<Member> {
    let mut rng = rng(seed);
    let tol = Tolerances::default();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let period = rng.gen_range(0.5..3.0);
        let s0 = random_symmetric(&mut rng, (-2.0, 8.0), 1.5);
        let s1 = random_symmetric(&mut rng, (-0.5, 0.5), 0.5);
        let s2 = random_symmetric(&mut rng, (-0.5, 0.5), 0.5);
        let w = TAU / period;
        let l = PeriodicMatrixFunction::new(period, move |t| s0 + s1.scale((w * t).cos()) + s2.scale((w * t).sin()));
        let system = LinearSystem::new(l);
        let Ok(data) = LinearPoincareData::from_system(&system, &tol) else { continue };
        let m = pbm_core::symplectic::det_i_minus(&system_end(&system));
        if data.index.is_resonant() || m.abs() < 1e-3 {
            continue;
        }
        out.push(Member { system, data });
    }
    out
}

pub fn system_end(system: &LinearSystem) -> Mat2 {
    pbm_core::linear::fundamental_solution(system, &Tolerances::default()).unwrap().end_matrix()
}

pub fn constant(l: Mat2, period: f64) -> LinearPoincareData {
    LinearPoincareData::from_system(&LinearSystem::constant(period, l), &Tolerances::default()).unwrap()
}

/// `x'' + (a + b cos 2t) x = 0` over `T = pi` with `(a, b)` inside the
/// second instability tongue, so the monodromy is positive hyperbolic with
/// a rotation and the index is even and nonzero.
pub fn mathieu_even(seed: u64, n: usize) -> Vec<Member> {
    let mut rng = rng(seed);
    let tol = Tolerances::default();
    let mut out = Vec::with_capacity(n);
    let mut tries = 0;
    while out.len() < n && tries < 50 * n {
        tries += 1;
        let (a, b) = (rng.gen_range(3.8..4.6), rng.gen_range(1.5..2.5));
        let l = PeriodicMatrixFunction::new(std::f64::consts::PI, move |t| Mat2::diag(a + b * (2.0 * t).cos(), 1.0));
        let system = LinearSystem::new(l);
        let Ok(data) = LinearPoincareData::from_system(&system, &tol) else { continue };
        let m = pbm_core::symplectic::det_i_minus(&system_end(&system));
        if data.index.is_resonant() || m.abs() < 1e-3 || data.index.index % 2 != 0 || data.index.index == 0 {
            continue;
        }
        out.push(Member { system, data });
    }
    out
}
