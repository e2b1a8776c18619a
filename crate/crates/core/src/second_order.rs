//! Second order equations `x'' + q(t, x) x = 0` whose coefficient need not
//! converge at zero or infinity, but stays between two Hill coefficients.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;

use crate::certify::{certify_with_indices, Certificate, CertifyOptions};
use crate::error::{Error, Result};
use crate::geometry::{Mat2, Vec2};
use crate::lifted::Region;
use crate::linear::index_of_linear;
use crate::ode::{integrate, OdeOptions};
use crate::symplectic::{lift_path, maslov_index, MaslovIndex};
use crate::system::{LinearSystem, PeriodicMatrixFunction, PlanarHamiltonianSystem, Tolerances};

pub type CoefficientFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type PeriodicFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `q(t, x)`, `T`-periodic in `t`.
#[derive(Clone)]
pub struct ScalarCoefficient {
    q: CoefficientFn,
    period: f64,
}

impl fmt::Debug for ScalarCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarCoefficient").field("period", &self.period).finish()
    }
}

impl ScalarCoefficient {
    pub fn new(period: f64, q: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { q: Arc::new(q), period }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        (self.q)(t, x)
    }

    /// `x' = y, y' = -q x` written as `z' = J grad H` with
    /// `grad H = (q(t, x) x, y)`. `q` need not be defined at `x = 0`.
    pub fn to_planar(&self) -> PlanarHamiltonianSystem {
        let q = self.q.clone();
        PlanarHamiltonianSystem::new(self.period, move |t, z| {
            let fx = if z.x == 0.0 { 0.0 } else { q(t, z.x) * z.x };
            Vec2::new(fx, z.y)
        })
    }
}

/// Hill equation `x'' + a(t) x = 0` as a linear system with `L = diag(a, 1)`.
pub fn hill_system(period: f64, a: PeriodicFn) -> LinearSystem {
    LinearSystem::new(PeriodicMatrixFunction::new(period, move |t| Mat2::diag(a(t), 1.0)))
}

pub fn index_of_hill(period: f64, a: PeriodicFn, tol: &Tolerances) -> Result<MaslovIndex> {
    index_of_linear(&hill_system(period, a), tol)
}

/// `a_lower(t) < q(t, x) < a_upper(t)` for `0 < |x| <= radius` (region zero)
/// or `|x| >= radius` (region infinity), with equal nonresonant indices.
#[derive(Clone)]
pub struct SandwichBounds {
    pub lower: PeriodicFn,
    pub upper: PeriodicFn,
    pub period: f64,
    pub radius: f64,
    pub region: Region,
    pub index: MaslovIndex,
}

impl fmt::Debug for SandwichBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SandwichBounds")
            .field("region", &self.region)
            .field("radius", &self.radius)
            .field("index", &self.index)
            .finish()
    }
}

impl SandwichBounds {
    pub fn new(
        period: f64,
        lower: impl Fn(f64) -> f64 + Send + Sync + 'static,
        upper: impl Fn(f64) -> f64 + Send + Sync + 'static,
        radius: f64,
        region: Region,
        tol: &Tolerances,
    ) -> Result<Self> {
        let lower: PeriodicFn = Arc::new(lower);
        let upper: PeriodicFn = Arc::new(upper);
        if !(radius > 0.0) {
            return Err(Error::Precondition(format!("sandwich radius must be positive, got {radius}")));
        }
        for k in 0..=256 {
            let t = period * k as f64 / 256.0;
            if !(lower(t) < upper(t)) {
                return Err(Error::Precondition(format!("lower bound not below upper bound at t = {t}")));
            }
        }
        let lo = index_of_hill(period, lower.clone(), tol)?;
        let hi = index_of_hill(period, upper.clone(), tol)?;
        if lo != hi || lo.is_resonant() {
            return Err(Error::SandwichIndexMismatch { lower: lo.index, upper: hi.index });
        }
        Ok(Self { lower, upper, period, radius, region, index: lo })
    }

    pub fn constant(
        period: f64,
        lower: f64,
        upper: f64,
        radius: f64,
        region: Region,
        tol: &Tolerances,
    ) -> Result<Self> {
        Self::new(period, move |_| lower, move |_| upper, radius, region, tol)
    }

    pub fn midpoint(&self, t: f64) -> f64 {
        0.5 * ((self.lower)(t) + (self.upper)(t))
    }

    /// Sample points of the region: `x` in `(0, radius]` or `[radius, 1e4 radius]`,
    /// geometric, both signs.
    fn x_samples(&self, n: usize) -> Vec<f64> {
        let half = (n / 2).max(1);
        let (a, b) = match self.region {
            Region::Zero => (self.radius * 1e-4, self.radius),
            Region::Infinity => (self.radius, self.radius * 1e4),
        };
        let mut xs = Vec::with_capacity(2 * half);
        for k in 0..half {
            let x = a * (b / a).powf(k as f64 / (half - 1).max(1) as f64);
            xs.push(x);
            xs.push(-x);
        }
        xs
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SandwichReport {
    /// `min (q - a_lower)` over the grid.
    pub lower_margin: f64,
    /// `min (a_upper - q)` over the grid.
    pub upper_margin: f64,
    pub points: usize,
}

/// Checks the sandwich inequalities on a `(t, x)` grid.
pub fn check_sandwich(q: &ScalarCoefficient, bounds: &SandwichBounds, grid: (usize, usize)) -> Result<SandwichReport> {
    let xs = bounds.x_samples(grid.1);
    let mut report = SandwichReport { lower_margin: f64::INFINITY, upper_margin: f64::INFINITY, points: 0 };
    for i in 0..grid.0.max(1) {
        let t = q.period() * i as f64 / grid.0.max(1) as f64;
        let (lo, hi) = ((bounds.lower)(t), (bounds.upper)(t));
        for &x in &xs {
            let v = q.eval(t, x);
            report.points += 1;
            report.lower_margin = report.lower_margin.min(v - lo);
            report.upper_margin = report.upper_margin.min(hi - v);
            if !(lo < v && v < hi) {
                return Err(Error::SandwichViolation { t, x, value: v, lower: lo, upper: hi });
            }
        }
    }
    Ok(report)
}

/// `q` for `|x| <= r_hat`, the midpoint of the bounds at infinity for
/// `|x| >= r_hat + 1`, and a `3s^2 - 2s^3` blend in between.
pub fn truncate_at_infinity(q: &ScalarCoefficient, bounds: &SandwichBounds, r_hat: f64) -> Result<ScalarCoefficient> {
    if bounds.region != Region::Infinity {
        return Err(Error::Precondition("truncation needs bounds at infinity".into()));
    }
    if r_hat < bounds.radius {
        return Err(Error::Precondition(format!(
            "truncation radius {r_hat} is inside the sandwich radius {}",
            bounds.radius
        )));
    }
    let inner = q.q.clone();
    let lower = bounds.lower.clone();
    let upper = bounds.upper.clone();
    Ok(ScalarCoefficient::new(q.period(), move |t, x| {
        let s = (x.abs() - r_hat).clamp(0.0, 1.0);
        let mu = s * s * (3.0 - 2.0 * s);
        let b = 0.5 * (lower(t) + upper(t));
        if mu == 0.0 {
            inner(t, x)
        } else if mu == 1.0 {
            b
        } else {
            (1.0 - mu) * inner(t, x) + mu * b
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CrossingEstimate {
    /// `max |q|` on `[0, T] x [-r, r]`.
    pub lambda: f64,
    /// `|y|` must exceed `lambda r T + 2 r / T`.
    pub threshold: f64,
    /// Upper bound `2 r / (|y| - lambda r T)` on the time to cross the strip.
    pub bound: f64,
}

/// A solution through `(x1, y1)` at `t1`, `|x1| <= r_bar`, with fast enough
/// speed leaves the strip `|x| <= r_bar` within the returned bound.
pub fn crossing_bound(q: &ScalarCoefficient, r_bar: f64, x1: f64, y1: f64) -> Result<CrossingEstimate> {
    if x1.abs() > r_bar {
        return Err(Error::Precondition(format!("|x1| = {} exceeds r = {r_bar}", x1.abs())));
    }
    let period = q.period();
    let n = 128;
    let mut lambda: f64 = 0.0;
    for i in 0..n {
        let t = period * i as f64 / n as f64;
        for j in 0..=n {
            let x = -r_bar + 2.0 * r_bar * j as f64 / n as f64;
            if x != 0.0 {
                lambda = lambda.max(q.eval(t, x).abs());
            }
        }
    }
    let threshold = lambda * r_bar * period + 2.0 * r_bar / period;
    if y1.abs() <= threshold {
        return Err(Error::Precondition(format!("|y1| = {} does not exceed {threshold}", y1.abs())));
    }
    Ok(CrossingEstimate { lambda, threshold, bound: 2.0 * r_bar / (y1.abs() - lambda * r_bar * period) })
}

/// Time for the solution through `(x1, y1)` at `t1` to reach the side
/// `x = sign(y1) r_bar` of the strip, if it happens before `t1 + horizon`.
pub fn time_to_exit(
    q: &ScalarCoefficient,
    r_bar: f64,
    t1: f64,
    x1: f64,
    y1: f64,
    horizon: f64,
    tol: &Tolerances,
) -> Result<Option<f64>> {
    let planar = q.to_planar();
    let f = |t: f64, s: &[f64; 2]| {
        let v = planar.field(t, Vec2::new(s[0], s[1]));
        [v.x, v.y]
    };
    let opts = OdeOptions::with_tol(tol.ode_abs.min(1e-12)).with_h_max(horizon / 64.0);
    let dir = if y1 < 0.0 { -1.0 } else { 1.0 };
    let mut bracket = None;
    let mut prev = (t1, [x1, y1]);
    let _ = integrate(f, t1, [x1, y1], t1 + horizon, &opts, |t, s| {
        if bracket.is_none() {
            if dir * s[0] >= r_bar && t > t1 {
                bracket = Some((prev, t));
            } else {
                prev = (t, *s);
            }
        }
        Ok(())
    })?;
    let Some(((ta, sa), tb)) = bracket else {
        return Ok(None);
    };
    let (mut lo, mut hi) = (ta, tb);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let s = integrate(f, ta, sa, mid, &opts, |_, _| Ok(()))?;
        if dir * s[0] >= r_bar {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi) - t1))
}

/// Index of the linear equation `w'' + q(t, x(t)) w = 0` frozen along a
/// `T`-periodic solution through `(x0, y0)`.
pub fn frozen_index(q: &ScalarCoefficient, x0: f64, y0: f64, tol: &Tolerances) -> Result<MaslovIndex> {
    let planar = q.to_planar();
    let period = q.period();
    let f = |t: f64, s: &[f64; 6]| {
        let v = planar.field(t, Vec2::new(s[0], s[1]));
        let a = if s[0] == 0.0 { 0.0 } else { q.eval(t, s[0]) };
        // Psi' = J diag(a, 1) Psi
        [v.x, v.y, s[4], s[5], -a * s[2], -a * s[3]]
    };
    let mut h_max = period / 64.0;
    for _ in 0..8 {
        let opts = OdeOptions::with_tol(tol.ode_abs).with_h_max(h_max);
        let mut samples = Vec::new();
        integrate(f, 0.0, [x0, y0, 1.0, 0.0, 0.0, 1.0], period, &opts, |t, s| {
            samples.push((t, Mat2::new(s[2], s[3], s[4], s[5])));
            Ok(())
        })?;
        match lift_path(&samples, tol) {
            Ok(path) => return Ok(maslov_index(&path, tol)?.0),
            Err(Error::StepContract { .. }) => h_max /= 2.0,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Precondition("fundamental solution could not be lifted".into()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearLikeOptions {
    /// Truncation radius; defaults to four times the radius at infinity.
    pub r_hat: Option<f64>,
    pub max_escalations: u32,
    pub certify: CertifyOptions,
}

impl Default for LinearLikeOptions {
    fn default() -> Self {
        Self { r_hat: None, max_escalations: 6, certify: CertifyOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearLikeCertificate {
    pub certificate: Certificate,
    pub r_hat: f64,
    /// Truncation radii that were rejected, with the largest `|x|` reached.
    pub escalations: Vec<(f64, f64)>,
}

/// Certifies `x'' + q(t, x) x = 0` from sandwich bounds at zero and infinity.
/// Solutions of the truncated equation are kept only when they stay inside
/// `|x| < r_hat`; otherwise `r_hat` doubles.
pub fn certify_linear_like(
    q: &ScalarCoefficient,
    at_zero: &SandwichBounds,
    at_infinity: &SandwichBounds,
    opts: &LinearLikeOptions,
) -> Result<LinearLikeCertificate> {
    if at_zero.region != Region::Zero || at_infinity.region != Region::Infinity {
        return Err(Error::Precondition("bounds given for the wrong regions".into()));
    }
    let grid = (128, 128);
    check_sandwich(q, at_zero, grid)?;
    check_sandwich(q, at_infinity, grid)?;
    let mut r_hat = opts.r_hat.unwrap_or(4.0 * at_infinity.radius).max(at_infinity.radius);
    let mut escalations = Vec::new();
    for _ in 0..=opts.max_escalations {
        let truncated = truncate_at_infinity(q, at_infinity, r_hat)?;
        let sys = truncated.to_planar();
        let cert = certify_with_indices(&sys, at_zero.index, at_infinity.index, &opts.certify)?;
        let reach = cert.found.iter().map(|s| s.orbit.max_abs_x()).fold(0.0, f64::max);
        if reach < r_hat {
            return Ok(LinearLikeCertificate { certificate: cert, r_hat, escalations });
        }
        escalations.push((r_hat, reach));
        r_hat *= 2.0;
    }
    Err(Error::BudgetExhausted { evaluations: escalations.len() })
}
