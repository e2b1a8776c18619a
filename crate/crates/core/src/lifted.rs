//! Nonlinear flows on the covering: lifted trajectories, the displacement
//! `F = P_T - id`, area preservation and agreement with the linearizations.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, TAU};

#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{project, project_symplectic, LiftedPoint, Vec2};
use crate::linear::LinearPoincareData;
use crate::ode::{integrate, OdeOptions};
use crate::system::{LinearSystem, PlanarHamiltonianSystem, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrajectorySample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub phi: f64,
}

impl TrajectorySample {
    pub fn r(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn point(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LiftedTrajectory {
    pub samples: Vec<TrajectorySample>,
}

impl LiftedTrajectory {
    pub fn last(&self) -> TrajectorySample {
        *self.samples.last().expect("trajectory has at least the initial sample")
    }

    pub fn max_abs_x(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.x.abs()))
    }

    pub fn max_r(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.r()))
    }
}

/// `(phi_0, r_0) -> (phi_T, r_T)` together with `F = (phi_T - phi_0, r_T - r_0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LiftedPoincareRecord {
    pub phi0: f64,
    pub r0: f64,
    pub phi_t: f64,
    pub r_t: f64,
    pub f1: f64,
    pub f2: f64,
}

impl LiftedPoincareRecord {
    pub fn displacement(&self) -> Vec2 {
        Vec2::new(self.f1, self.f2)
    }
}

fn augmented(sys: &PlanarHamiltonianSystem) -> impl Fn(f64, &[f64; 3]) -> [f64; 3] + '_ {
    move |t, s| {
        let z = Vec2::new(s[0], s[1]);
        let v = sys.field(t, z);
        let r2 = s[0] * s[0] + s[1] * s[1];
        [v.x, v.y, -(s[0] * v.y - s[1] * v.x) / r2]
    }
}

fn options(tol: &Tolerances, h_max: f64) -> OdeOptions {
    OdeOptions { abs_tol: tol.ode_abs, rel_tol: tol.ode_rel, h_max, ..OdeOptions::default() }
}

fn check_start(p0: LiftedPoint, tol: &Tolerances) -> Result<()> {
    if !(p0.r > tol.r_min) || !p0.phi.is_finite() || !p0.r.is_finite() {
        return Err(Error::NearOrigin { t: 0.0, r: p0.r });
    }
    Ok(())
}

/// Integrates the system together with its lifted clockwise angle over
/// `[t0, t1]`, storing every accepted step.
pub fn flow_lifted(
    sys: &PlanarHamiltonianSystem,
    p0: LiftedPoint,
    t0: f64,
    t1: f64,
    tol: &Tolerances,
) -> Result<LiftedTrajectory> {
    check_start(p0, tol)?;
    let z0 = project(p0);
    let mut h_max = (t1 - t0).abs().max(f64::MIN_POSITIVE) / 32.0;
    for _ in 0..16 {
        let mut samples = Vec::new();
        let mut jump_too_large = false;
        let result = integrate(augmented(sys), t0, [z0.x, z0.y, p0.phi], t1, &options(tol, h_max), |t, s| {
            let r = s[0].hypot(s[1]);
            if !(r > tol.r_min) {
                return Err(Error::NearOrigin { t, r });
            }
            if let Some(prev) = samples.last() {
                let prev: &TrajectorySample = prev;
                if (s[2] - prev.phi).abs() >= FRAC_PI_2 {
                    jump_too_large = true;
                    return Err(Error::StepContract { index: samples.len(), jump: s[2] - prev.phi });
                }
            }
            samples.push(TrajectorySample { t, x: s[0], y: s[1], phi: s[2] });
            Ok(())
        });
        match result {
            Ok(_) => return Ok(LiftedTrajectory { samples }),
            Err(_) if jump_too_large => h_max /= 2.0,
            Err(e) => return Err(e),
        }
    }
    Err(Error::RefinementExhausted)
}

/// Lifted state after one period, without storing the trajectory.
pub fn poincare_t(sys: &PlanarHamiltonianSystem, p0: LiftedPoint, tol: &Tolerances) -> Result<LiftedPoincareRecord> {
    check_start(p0, tol)?;
    let z0 = project(p0);
    let period = sys.period();
    let end = integrate(augmented(sys), 0.0, [z0.x, z0.y, p0.phi], period, &options(tol, period / 8.0), |t, s| {
        let r = s[0].hypot(s[1]);
        if !(r > tol.r_min) || !r.is_finite() {
            return Err(Error::NearOrigin { t, r });
        }
        Ok(())
    })?;
    let r_t = end[0].hypot(end[1]);
    Ok(LiftedPoincareRecord { phi0: p0.phi, r0: p0.r, phi_t: end[2], r_t, f1: end[2] - p0.phi, f2: r_t - p0.r })
}

/// `|det D P_T - 1|` of the Poincaré map in the area-preserving chart
/// `(phi, r_hat)`, by central differences with step `h`.
pub fn area_preservation_defect(
    sys: &PlanarHamiltonianSystem,
    p_hat: LiftedPoint,
    h: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let map = |phi: f64, rh: f64| -> Result<(f64, f64)> {
        let r = project_symplectic(LiftedPoint::new(phi, rh)).norm();
        let rec = poincare_t(sys, LiftedPoint::new(phi, r), tol)?;
        Ok((rec.phi_t, rec.r_t * rec.r_t / 2.0))
    };
    let (p, rh) = (p_hat.phi, p_hat.r);
    let a = map(p + h, rh)?;
    let b = map(p - h, rh)?;
    let c = map(p, rh + h)?;
    let d = map(p, rh - h)?;
    let j11 = (a.0 - b.0) / (2.0 * h);
    let j21 = (a.1 - b.1) / (2.0 * h);
    let j12 = (c.0 - d.0) / (2.0 * h);
    let j22 = (c.1 - d.1) / (2.0 * h);
    Ok((j11 * j22 - j12 * j21 - 1.0).abs())
}

/// Default finite-difference step for [`area_preservation_defect`].
pub fn default_area_step(r_hat: f64) -> f64 {
    1e-5 * r_hat.max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Region {
    Zero,
    Infinity,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::Zero => "zero",
            Region::Infinity => "infinity",
        }
    }
}

/// Discrepancy between the nonlinear displacement and that of a linearization.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LimitRow {
    pub r: f64,
    /// `max |F1(phi, r) - F1_lin(phi)|`.
    pub angle: f64,
    /// `max |F2(phi, r) / r - F2_lin(phi, 1)|`.
    pub radial: f64,
}

impl LimitRow {
    pub fn total(&self) -> f64 {
        self.angle.max(self.radial)
    }
}

pub fn linearization_data(
    sys: &PlanarHamiltonianSystem,
    region: Region,
    tol: &Tolerances,
) -> Result<LinearPoincareData> {
    let lin = match region {
        Region::Zero => sys.linearization_at_zero.as_ref(),
        Region::Infinity => sys.linearization_at_infinity.as_ref(),
    }
    .ok_or(Error::MissingLinearization { at: region.name() })?;
    LinearPoincareData::from_system(&LinearSystem::new(lin.clone()), tol)
}

pub fn limit_agreement(
    sys: &PlanarHamiltonianSystem,
    region: Region,
    radii: &[f64],
    angles: usize,
    tol: &Tolerances,
) -> Result<Vec<LimitRow>> {
    let lin = linearization_data(sys, region, tol)?;
    let n = angles.max(1);
    radii
        .iter()
        .map(|&r| {
            let mut row = LimitRow { r, angle: 0.0, radial: 0.0 };
            for k in 0..n {
                let phi = TAU * k as f64 / n as f64;
                let rec = poincare_t(sys, LiftedPoint::new(phi, r), tol)?;
                let f = lin.field(phi, 1.0);
                row.angle = row.angle.max((rec.f1 - f.x).abs());
                row.radial = row.radial.max((rec.f2 / r - f.y).abs());
            }
            Ok(row)
        })
        .collect()
}
