//! Plane vectors, 2x2 matrices and the clockwise polar covering.

use core::f64::consts::{PI, TAU};
use core::ops::{Add, Mul, Neg, Sub};

#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// `x1 * y2 - y1 * x2`.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn scale(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v.scale(self)
    }
}

/// Row-major 2x2 matrix `(a11 a12; a21 a22)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

/// The symplectic unit `J = (0 1; -1 0)`.
pub const J: Mat2 = Mat2::new(0.0, 1.0, -1.0, 0.0);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);
    pub const ZERO: Mat2 = Mat2::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub const fn diag(d1: f64, d2: f64) -> Self {
        Self::new(d1, 0.0, 0.0, d2)
    }

    pub const fn symmetric(a11: f64, a12: f64, a22: f64) -> Self {
        Self::new(a11, a12, a12, a22)
    }

    pub fn scalar(s: f64) -> Self {
        Self::diag(s, s)
    }

    /// Clockwise rotation `R(theta) = (cos sin; -sin cos)`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c, s, -s, c)
    }

    /// Hyperbolic rotation `P(tau, sigma)`: symmetric positive definite,
    /// eigenvalues `e^{+-tau}`.
    pub fn hyperbolic(tau: f64, sigma: f64) -> Self {
        let (ch, sh) = (tau.cosh(), tau.sinh());
        let (s, c) = sigma.sin_cos();
        Self::new(ch + sh * c, sh * s, sh * s, ch - sh * c)
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(Mat2::new(self.a22 / d, -self.a12 / d, -self.a21 / d, self.a11 / d))
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.a11 * v.x + self.a12 * v.y, self.a21 * v.x + self.a22 * v.y)
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.a11.abs().max(self.a12.abs()).max(self.a21.abs()).max(self.a22.abs())
    }

    /// Spectral norm.
    pub fn norm2(&self) -> f64 {
        let s = self.transpose() * *self;
        let tr = s.trace();
        let det = s.det().max(0.0);
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        (tr / 2.0 + disc).max(0.0).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (self.a12 - self.a21).abs() <= tol * (1.0 + self.max_abs())
    }

    pub fn is_symplectic(&self, tol: f64) -> bool {
        (self.det() - 1.0).abs() <= tol
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a11 + o.a11, self.a12 + o.a12, self.a21 + o.a21, self.a22 + o.a22)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a11 - o.a11, self.a12 - o.a12, self.a21 - o.a21, self.a22 - o.a22)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

impl Mul<Vec2> for Mat2 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        self.apply(v)
    }
}

/// A point of the covering `R x (0, inf)`: lifted clockwise angle and radius.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LiftedPoint {
    pub phi: f64,
    pub r: f64,
}

impl LiftedPoint {
    pub fn new(phi: f64, r: f64) -> Self {
        Self { phi, r }
    }

    /// Lift of a plane point, choosing the angle in `[0, 2 pi)`.
    pub fn from_plane(z: Vec2) -> Result<Self> {
        let phi = lift_angle(PI, z)?;
        Ok(Self { phi: reduce_angle(phi), r: z.norm() })
    }
}

/// Covering projection `(phi, r) -> (r cos phi, -r sin phi)`.
pub fn project(p: LiftedPoint) -> Vec2 {
    let (s, c) = p.phi.sin_cos();
    Vec2::new(p.r * c, -p.r * s)
}

/// Area-preserving chart `(phi, r_hat) -> (sqrt(2 r_hat) cos phi, -sqrt(2 r_hat) sin phi)`.
pub fn project_symplectic(p: LiftedPoint) -> Vec2 {
    project(LiftedPoint::new(p.phi, (2.0 * p.r).sqrt()))
}

/// Clockwise angle of `z` in `(-pi, pi]`.
pub fn clockwise_angle(z: Vec2) -> f64 {
    (-z.y).atan2(z.x)
}

/// Lift of the angle of `z` closest to `prev_phi`; exact ties resolve upward.
pub fn lift_angle(prev_phi: f64, z: Vec2) -> Result<f64> {
    if z.x == 0.0 && z.y == 0.0 {
        return Err(Error::ZeroVector);
    }
    let base = clockwise_angle(z);
    let turns = ((prev_phi - base) / TAU).round();
    let mut phi = base + turns * TAU;
    let d = phi - prev_phi;
    if d < -PI || (d - (-PI)).abs() <= 4.0 * f64::EPSILON * (1.0 + prev_phi.abs()) {
        phi += TAU;
    } else if d > PI {
        phi -= TAU;
    }
    Ok(phi)
}

/// `a mod b` in `[0, b)` for `b > 0`.
pub fn rem_euclid(a: f64, b: f64) -> f64 {
    let r = a % b;
    if r < 0.0 {
        r + b
    } else {
        r
    }
}

/// Reduce to `[0, 2 pi)`.
pub fn reduce_angle(phi: f64) -> f64 {
    let r = rem_euclid(phi, TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Wrap an angle difference into `(-pi, pi]`.
pub fn wrap_pi(a: f64) -> f64 {
    let r = rem_euclid(a + PI, TAU) - PI;
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}
