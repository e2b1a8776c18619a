//! `Sp(1)` decomposition, continuous lifting of paths and the Maslov index.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};

#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{rem_euclid, wrap_pi, Mat2};
use crate::system::Tolerances;

/// Coordinates of `M = P(tau, sigma) R(theta)`.
///
/// `sigma` is `None` when `tau` is too small for the hyperbolic axis to be
/// defined.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecompCoords {
    pub tau: f64,
    pub sigma: Option<f64>,
    pub theta: f64,
}

impl DecompCoords {
    pub fn reconstruct(&self) -> Mat2 {
        Mat2::hyperbolic(self.tau, self.sigma.unwrap_or(0.0)) * Mat2::rotation(self.theta)
    }
}

/// Splits a symplectic matrix into hyperbolic rotation times rotation.
///
/// `det_tol` bounds `|det M - 1|`; `tau_min` decides when `sigma` is unset.
pub fn decompose(m: &Mat2, det_tol: f64, tau_min: f64) -> Result<DecompCoords> {
    let det = m.det();
    if !det.is_finite() || (det - 1.0).abs() > det_tol || det <= 0.0 {
        return Err(Error::NotSymplectic { det });
    }
    let m = m.scale(1.0 / det.sqrt());
    // det(M M^T) = 1 after normalization; computing it would cancel badly.
    let s = m * m.transpose();
    let denom = (s.trace() + 2.0).sqrt();
    let p = (s + Mat2::IDENTITY).scale(1.0 / denom);
    let trace = p.trace();
    if !(trace > 0.0) {
        return Err(Error::CorruptDecomposition { trace });
    }
    // P(tau, sigma) has half-difference sinh(tau) cos(sigma) and off-diagonal
    // sinh(tau) sin(sigma); reading tau from them keeps precision near 0.
    let c = 0.5 * (p.a11 - p.a22);
    let s12 = 0.5 * (p.a12 + p.a21);
    let sh = c.hypot(s12);
    let tau = sh.asinh();
    let axis = s12.atan2(c);
    let sigma = if tau > tau_min { Some(axis) } else { None };
    let r = Mat2::hyperbolic(-tau, axis) * m;
    let mut theta = r.a12.atan2(r.a11);
    if theta >= PI {
        theta -= TAU;
    }
    Ok(DecompCoords { tau, sigma, theta })
}

/// Components of `Sp(1)` cut out by the sign of `det(I - M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum GammaClass {
    Plus,
    Minus,
    Zero,
}

pub fn det_i_minus(m: &Mat2) -> f64 {
    (1.0 - m.a11) * (1.0 - m.a22) - m.a12 * m.a21
}

pub fn classify(m: &Mat2, eps_res: f64) -> GammaClass {
    let d = det_i_minus(m);
    if d.abs() <= eps_res {
        GammaClass::Zero
    } else if d > 0.0 {
        GammaClass::Plus
    } else {
        GammaClass::Minus
    }
}

/// `dim ker(I - M)` under the resonance tolerance.
pub fn nullity(m: &Mat2, eps_res: f64) -> u8 {
    if det_i_minus(m).abs() > eps_res {
        0
    } else if (Mat2::IDENTITY - *m).max_abs() <= eps_res {
        2
    } else {
        1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MaslovIndex {
    pub index: i64,
    pub nullity: u8,
}

impl MaslovIndex {
    pub fn is_resonant(&self) -> bool {
        self.nullity > 0
    }
}

/// Endpoint data of a lifted path, enough to write down its Poincaré map.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EndpointData {
    pub tau_bar: f64,
    pub sigma_bar: Option<f64>,
    /// Lifted `theta(T)`.
    pub theta_end: f64,
    /// Representative of `theta(T)` in `[-pi, pi)`.
    pub theta_bar: f64,
    /// `(theta_bar - theta(T)) / pi`, always even.
    pub k: i64,
    /// Clockwise angle in `[0, pi)` of the contracting eigendirection.
    pub theta0: f64,
    /// `tau_bar` is below `tau_min`: `theta0` is meaningless and reported as 0.
    pub rotation_only: bool,
    pub class: GammaClass,
}

/// Fundamental solution samples with continuously lifted coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticPath {
    pub times: Vec<f64>,
    pub matrices: Vec<Mat2>,
    pub coords: Vec<DecompCoords>,
}

impl SymplecticPath {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn end_matrix(&self) -> Mat2 {
        *self.matrices.last().expect("non-empty path")
    }

    pub fn end_coords(&self) -> DecompCoords {
        *self.coords.last().expect("non-empty path")
    }
}

/// Lifts `theta` (and `sigma` where defined) continuously along the samples.
pub fn lift_path(samples: &[(f64, Mat2)], tol: &Tolerances) -> Result<SymplecticPath> {
    let Some(&(_, first)) = samples.first() else {
        return Err(Error::Precondition("empty path".into()));
    };
    if (first - Mat2::IDENTITY).max_abs() > tol.det_drift.max(1e-12) {
        return Err(Error::Precondition(format!("path does not start at the identity: {first:?}")));
    }
    let mut times = Vec::with_capacity(samples.len());
    let mut matrices = Vec::with_capacity(samples.len());
    let mut coords: Vec<DecompCoords> = Vec::with_capacity(samples.len());
    let mut last_sigma: Option<f64> = None;
    for (index, &(t, m)) in samples.iter().enumerate() {
        let raw = decompose(&m, tol.det_drift, tol.tau_min)?;
        let theta = match coords.last() {
            None => raw.theta,
            Some(prev) => {
                let jump = wrap_pi(raw.theta - prev.theta);
                if jump.abs() >= FRAC_PI_2 {
                    return Err(Error::StepContract { index, jump });
                }
                prev.theta + jump
            }
        };
        let sigma = match (raw.sigma, last_sigma) {
            (Some(s), Some(prev)) => Some(prev + wrap_pi(s - prev)),
            (Some(s), None) => Some(s),
            (None, held) => held,
        };
        last_sigma = sigma;
        times.push(t);
        matrices.push(m);
        coords.push(DecompCoords { tau: raw.tau, sigma, theta });
    }
    Ok(SymplecticPath { times, matrices, coords })
}

/// Clockwise argument in `[0, pi)` of the `e^{-tau}` eigenvector of `P(tau, sigma)`.
pub fn eigen_direction(tau_bar: f64, sigma_bar: f64, tau_min: f64) -> Result<f64> {
    if !(tau_bar > tau_min) {
        return Err(Error::DirectionUndefined { tau_bar });
    }
    let mut th = rem_euclid(FRAC_PI_2 - 0.5 * sigma_bar, PI);
    if th >= PI {
        th = 0.0;
    }
    Ok(th)
}

pub fn maslov_index(path: &SymplecticPath, tol: &Tolerances) -> Result<(MaslovIndex, EndpointData)> {
    if path.is_empty() {
        return Err(Error::Precondition("empty path".into()));
    }
    let m = path.end_matrix();
    let end = path.end_coords();
    let theta_end = end.theta;
    let class = classify(&m, tol.resonance);
    let nu = nullity(&m, tol.resonance);

    let mut theta_bar = theta_end - TAU * ((theta_end + PI) / TAU).floor();
    if nu == 2 {
        // Psi(T) = I: the rotation factor is exactly a multiple of 2 pi.
        theta_bar = 0.0;
    }
    let k_real = (theta_bar - theta_end) / PI;
    let k = k_real.round();
    if (k_real - k).abs() > 1e-6 || (k as i64) % 2 != 0 {
        return Err(Error::LiftCorrupted { k: k_real });
    }
    let k = k as i64;

    let index = match class {
        GammaClass::Minus => k,
        GammaClass::Plus => {
            if theta_bar < 0.0 {
                k + 1
            } else if theta_bar > 0.0 {
                k - 1
            } else {
                return Err(Error::InconsistentEndpoint { theta_bar });
            }
        }
        GammaClass::Zero => {
            if nu == 1 && theta_bar < 0.0 {
                k
            } else {
                k - 1
            }
        }
    };

    let rotation_only = !(end.tau > tol.tau_min) || end.sigma.is_none();
    let theta0 = if rotation_only { 0.0 } else { eigen_direction(end.tau, end.sigma.unwrap_or(0.0), tol.tau_min)? };
    let data =
        EndpointData { tau_bar: end.tau, sigma_bar: end.sigma, theta_end, theta_bar, k, theta0, rotation_only, class };
    Ok((MaslovIndex { index, nullity: nu }, data))
}
