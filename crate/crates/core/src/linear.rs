//! Fundamental solutions of linear periodic systems and their closed-form
//! lifted Poincaré map.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{rem_euclid, Mat2, Vec2};
use crate::ode::{integrate, OdeOptions};
use crate::symplectic::{lift_path, maslov_index, EndpointData, MaslovIndex, SymplecticPath};
use crate::system::{LinearSystem, Tolerances};

/// Integrates `Psi' = J L(t) Psi`, `Psi(0) = I` over one period.
///
/// Sampling is refined until consecutive rotation angles differ by less
/// than `pi/2`.
pub fn fundamental_solution(sys: &LinearSystem, tol: &Tolerances) -> Result<SymplecticPath> {
    let period = sys.period();
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::Precondition("period must be positive".into()));
    }
    let mut h_max = period / 32.0;
    for _ in 0..12 {
        let samples = integrate_samples(sys, 0.0, period, tol, h_max)?;
        match lift_path(&samples, tol) {
            Ok(path) => return Ok(path),
            Err(Error::StepContract { .. }) => h_max /= 2.0,
            Err(e) => return Err(e),
        }
    }
    Err(Error::RefinementExhausted)
}

/// Samples of `Psi` on `[t0, t1]`, with `Psi(t0) = I`.
pub fn integrate_samples(
    sys: &LinearSystem,
    t0: f64,
    t1: f64,
    tol: &Tolerances,
    h_max: f64,
) -> Result<Vec<(f64, Mat2)>> {
    let opts = OdeOptions { abs_tol: tol.ode_abs, rel_tol: tol.ode_rel, h_max, ..OdeOptions::default() };
    let mut out = Vec::new();
    let l = &sys.l;
    integrate(
        |t, p: &[f64; 4]| {
            let m = l.eval(t);
            // J L = (l21 l22; -l11 -l12)
            let jl = Mat2::new(m.a21, m.a22, -m.a11, -m.a12);
            let d = jl * Mat2::new(p[0], p[1], p[2], p[3]);
            [d.a11, d.a12, d.a21, d.a22]
        },
        t0,
        [1.0, 0.0, 0.0, 1.0],
        t1,
        &opts,
        |t, p| {
            let m = Mat2::new(p[0], p[1], p[2], p[3]);
            let drift = (m.det() - 1.0).abs();
            if drift > tol.det_drift {
                return Err(Error::DeterminantDrift { drift });
            }
            out.push((t, m));
            Ok(())
        },
    )?;
    Ok(out)
}

/// Index and endpoint data of a linear system.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearPoincareData {
    pub endpoint: EndpointData,
    pub index: MaslovIndex,
}

impl LinearPoincareData {
    pub fn from_system(sys: &LinearSystem, tol: &Tolerances) -> Result<Self> {
        let path = fundamental_solution(sys, tol)?;
        Self::from_path(&path, tol)
    }

    pub fn from_path(path: &SymplecticPath, tol: &Tolerances) -> Result<Self> {
        let (index, endpoint) = maslov_index(path, tol)?;
        Ok(Self { endpoint, index })
    }

    /// `max g = -min g`, equal to the Gudermannian of `tau_bar`.
    pub fn max_g(&self) -> f64 {
        if self.endpoint.rotation_only {
            0.0
        } else {
            self.endpoint.tau_bar.tanh().asin()
        }
    }

    pub fn g(&self, alpha: f64) -> f64 {
        g_function(self, alpha)
    }

    pub fn poincare(&self, phi: f64) -> (f64, f64) {
        closed_form_poincare(self, phi)
    }

    pub fn field(&self, phi: f64, r: f64) -> Vec2 {
        f_field(self, phi, r)
    }
}

pub fn index_of_linear(sys: &LinearSystem, tol: &Tolerances) -> Result<MaslovIndex> {
    Ok(LinearPoincareData::from_system(sys, tol)?.index)
}

/// Offset of `alpha` from `theta0` reduced to `(-pi/2, pi/2]`.
fn half_period_offset(theta0: f64, alpha: f64) -> f64 {
    let mut u = rem_euclid(alpha - theta0, PI);
    if u > FRAC_PI_2 {
        u -= PI;
    }
    u
}

/// Extra clockwise rotation produced by the hyperbolic factor at angle `alpha`.
pub fn g_function(d: &LinearPoincareData, alpha: f64) -> f64 {
    let e = &d.endpoint;
    if e.rotation_only || e.tau_bar == 0.0 {
        return 0.0;
    }
    let u = half_period_offset(e.theta0, alpha);
    let (y2, y1) = u.sin_cos();
    let (ep, em) = (e.tau_bar.exp(), (-e.tau_bar).exp());
    (y1 * y2 * (ep - em)).atan2(y1 * y1 * em + y2 * y2 * ep)
}

/// `g` on `[theta0, theta0 + pi/2]` from the arccos expression, extended by
/// oddness. Used to cross-check [`g_function`].
pub fn g_function_arccos(d: &LinearPoincareData, alpha: f64) -> f64 {
    let e = &d.endpoint;
    if e.rotation_only {
        return 0.0;
    }
    let u = half_period_offset(e.theta0, alpha);
    let s2 = u.sin().powi(2);
    let num = 1.0 + ((2.0 * e.tau_bar).exp() - 1.0) * s2;
    let den = (1.0 + ((4.0 * e.tau_bar).exp() - 1.0) * s2).sqrt();
    let g = (num / den).min(1.0).acos();
    if u < 0.0 {
        -g
    } else {
        g
    }
}

/// Lifted angle change and radial ratio of the linear Poincaré map at `phi`.
pub fn closed_form_poincare(d: &LinearPoincareData, phi: f64) -> (f64, f64) {
    let e = &d.endpoint;
    let theta = e.theta_bar - e.k as f64 * PI + g_function(d, phi + e.theta_bar);
    let a = phi + e.theta_bar - e.theta0;
    let t = if e.rotation_only { 0.0 } else { e.tau_bar };
    let ratio = ((-2.0 * t).exp() * a.cos().powi(2) + (2.0 * t).exp() * a.sin().powi(2)).sqrt();
    (theta, ratio)
}

/// Displacement `(Theta_T(phi), r (R_T(phi) - 1))`.
pub fn f_field(d: &LinearPoincareData, phi: f64, r: f64) -> Vec2 {
    let (theta, ratio) = closed_form_poincare(d, phi);
    Vec2::new(theta, r * (ratio - 1.0))
}

/// Outcome of checking the structural properties of `g` and `R_T` on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PropertyReport {
    /// Worst violation of oddness about `theta0 + (pi/2) Z` and of `pi`-periodicity.
    pub symmetry_error: f64,
    pub symmetry_ok: bool,
    pub max_abs_g: f64,
    pub bounded_ok: bool,
    /// Analytic `max g`.
    pub max_g: f64,
    pub theta_bar: f64,
    /// Nonresonant, even index: `min(max g - |theta_bar|, pi - max g - |theta_bar|)`.
    /// Nonresonant, odd index: `|theta_bar| - max g`.
    /// Resonant: `-| max g - |theta_bar| |`.
    pub rotation_margin: f64,
    pub rotation_ok: bool,
    /// Worst deviation of `R_T` from its extreme values at the predicted angles.
    pub radial_error: f64,
    pub radial_ok: bool,
}

impl PropertyReport {
    pub fn all_ok(&self) -> bool {
        self.symmetry_ok && self.bounded_ok && self.rotation_ok && self.radial_ok
    }
}

pub fn verify_properties(d: &LinearPoincareData, grid: usize, resonant_tol: f64) -> PropertyReport {
    let e = &d.endpoint;
    let n = grid.max(8);
    let mut symmetry_error = 0.0f64;
    let mut max_abs_g = 0.0f64;
    let mut r_min = f64::INFINITY;
    let mut r_max = 0.0f64;
    for k in 0..n {
        let s = PI * k as f64 / n as f64;
        for centre in [e.theta0, e.theta0 + FRAC_PI_2] {
            let odd = g_function(d, centre + s) + g_function(d, centre - s);
            symmetry_error = symmetry_error.max(odd.abs());
        }
        let a = e.theta0 + s;
        symmetry_error = symmetry_error.max((g_function(d, a + PI) - g_function(d, a)).abs());
        max_abs_g = max_abs_g.max(g_function(d, a).abs());
        let (_, ratio) = closed_form_poincare(d, a - e.theta_bar);
        r_min = r_min.min(ratio);
        r_max = r_max.max(ratio);
    }
    let max_g = d.max_g();
    let tb = e.theta_bar.abs();
    let (rotation_margin, rotation_ok) = if d.index.nullity > 0 {
        let err = (max_g - tb).abs();
        (-err, err <= resonant_tol)
    } else if d.index.index % 2 == 0 {
        let m = (max_g - tb).min(PI - max_g - tb);
        (m, m > 0.0)
    } else {
        let m = tb - max_g;
        (m, m > 0.0)
    };
    let tau = if e.rotation_only { 0.0 } else { e.tau_bar };
    let (_, at_min) = closed_form_poincare(d, e.theta0 - e.theta_bar);
    let (_, at_max) = closed_form_poincare(d, e.theta0 - e.theta_bar + FRAC_PI_2);
    let lo = (-tau).exp();
    let hi = tau.exp();
    let radial_error =
        (at_min - lo).abs().max((at_max - hi).abs()).max((lo - r_min).max(0.0)).max((r_max - hi).max(0.0));
    PropertyReport {
        symmetry_error,
        symmetry_ok: symmetry_error <= 1e-10,
        max_abs_g,
        bounded_ok: max_abs_g < FRAC_PI_2,
        max_g,
        theta_bar: e.theta_bar,
        rotation_margin,
        rotation_ok,
        radial_error,
        radial_ok: radial_error <= 1e-12 * hi,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrant {
    I,
    II,
    III,
    IV,
}

impl Quadrant {
    pub fn of(v: Vec2) -> Option<Quadrant> {
        match (v.x > 0.0, v.x < 0.0, v.y > 0.0, v.y < 0.0) {
            (true, _, true, _) => Some(Quadrant::I),
            (_, true, true, _) => Some(Quadrant::II),
            (_, true, _, true) => Some(Quadrant::III),
            (true, _, _, true) => Some(Quadrant::IV),
            _ => None,
        }
    }

    pub fn opposite(self) -> Quadrant {
        match self {
            Quadrant::I => Quadrant::III,
            Quadrant::II => Quadrant::IV,
            Quadrant::III => Quadrant::I,
            Quadrant::IV => Quadrant::II,
        }
    }
}

/// Quadrants visited by `F(., r)` over `[theta0 - theta_bar, theta0 - theta_bar + pi]`,
/// with repeats collapsed and samples on the axes skipped. A jump between
/// opposite quadrants is bisected to find the quadrant passed in between.
pub fn quadrant_sequence(d: &LinearPoincareData, r: f64, samples: usize) -> Vec<Quadrant> {
    let e = &d.endpoint;
    let start = e.theta0 - e.theta_bar;
    let at = |phi: f64| Quadrant::of(f_field(d, phi, r));
    let mut seq: Vec<Quadrant> = Vec::new();
    let mut last: Option<(f64, Quadrant)> = None;
    for k in 0..=samples {
        let phi = start + PI * k as f64 / samples as f64;
        let Some(q) = at(phi) else { continue };
        if let Some((prev_phi, prev)) = last {
            if prev.opposite() == q {
                let (mut a, mut b) = (prev_phi, phi);
                for _ in 0..80 {
                    let m = 0.5 * (a + b);
                    match at(m) {
                        Some(x) if x == prev => a = m,
                        Some(x) if x == q => b = m,
                        Some(x) => {
                            seq.push(x);
                            break;
                        }
                        None => break,
                    }
                }
            }
        }
        if seq.last() != Some(&q) {
            seq.push(q);
        }
        last = Some((phi, q));
    }
    seq
}
