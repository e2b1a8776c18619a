//! Built-in test systems with known indices and periodic solution counts.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;

use crate::error::Result;
use crate::geometry::{Mat2, Vec2};
use crate::lifted::Region;
use crate::second_order::{SandwichBounds, ScalarCoefficient};
use crate::system::{LinearSystem, PeriodicMatrixFunction, PlanarHamiltonianSystem, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Expected {
    pub i0: i64,
    pub i_infty: i64,
    /// Number of `T`-periodic solutions other than the origin.
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LabeledPoint {
    pub label: &'static str,
    pub point: Vec2,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub system: PlanarHamiltonianSystem,
    pub expected: Option<Expected>,
    /// Equilibria other than the origin, to a few digits.
    pub equilibria: Vec<LabeledPoint>,
    /// Global Lipschitz constant of `grad H`.
    pub lipschitz: Option<f64>,
}

impl CatalogEntry {
    /// `T < 2 pi / Lip`, the regime where every `T`-periodic solution of an
    /// autonomous system is an equilibrium.
    pub fn below_periodic_orbit_bound(&self) -> Option<bool> {
        self.lipschitz.map(|l| self.system.period() < 2.0 * PI / l)
    }
}

pub const NAMES: &[&str] = &[
    "figure1",
    "figure2",
    "figure3",
    "rotation-pi",
    "counter-rotation-pi",
    "saddle",
    "hill-negative",
    "shear",
    "double-resonance",
];

pub fn lookup(name: &str) -> Option<CatalogEntry> {
    Some(match name {
        "figure1" => figure1(),
        "figure2" => figure2(),
        "figure3" => figure3(),
        "rotation-pi" => linear("rotation-pi", "rotation by pi: L = I, T = pi", Mat2::IDENTITY, PI, Some(-1)),
        "counter-rotation-pi" => {
            linear("counter-rotation-pi", "counter-rotation by pi: L = -I, T = pi", Mat2::scalar(-1.0), PI, Some(1))
        }
        "saddle" => linear("saddle", "hyperbolic saddle H = xy, T = 1", Mat2::symmetric(0.0, 1.0, 0.0), 1.0, Some(0)),
        "hill-negative" => linear("hill-negative", "x'' = x, T = 1", Mat2::diag(-1.0, 1.0), 1.0, Some(0)),
        "shear" => linear("shear", "resonant shear x'' = 0, T = 1", Mat2::diag(0.0, 1.0), 1.0, None),
        "double-resonance" => {
            linear("double-resonance", "monodromy I: L = -I, T = 2 pi", Mat2::scalar(-1.0), 2.0 * PI, None)
        }
        _ => return None,
    })
}

fn linear(name: &'static str, description: &'static str, l: Mat2, period: f64, index: Option<i64>) -> CatalogEntry {
    let lip = l.norm2();
    CatalogEntry {
        name,
        description,
        system: LinearSystem::constant(period, l).to_hamiltonian(),
        expected: index.map(|i| Expected { i0: i, i_infty: i, count: 0 }),
        equilibria: Vec::new(),
        lipschitz: Some(lip),
    }
}

/// `x'' + V'(x) = 0` with `V'(x) = x (x^2 - 1) / (x^2 + 1)`: a saddle at the
/// origin, centres at `x = +-1`, linear growth at infinity.
pub fn figure1() -> CatalogEntry {
    let system = PlanarHamiltonianSystem::new(1.0, |_, z| {
        let x2 = z.x * z.x;
        Vec2::new(z.x * (x2 - 1.0) / (x2 + 1.0), z.y)
    })
    .with_energy(|_, z| 0.5 * z.y * z.y + 0.5 * z.x * z.x - (1.0 + z.x * z.x).ln())
    .with_linearization_at_zero(PeriodicMatrixFunction::constant(1.0, Mat2::diag(-1.0, 1.0)))
    .with_linearization_at_infinity(PeriodicMatrixFunction::constant(1.0, Mat2::IDENTITY));
    CatalogEntry {
        name: "figure1",
        description: "x'' + x (x^2 - 1) / (x^2 + 1) = 0, T = 1",
        system,
        expected: Some(Expected { i0: 0, i_infty: -1, count: 2 }),
        equilibria: vec![
            LabeledPoint { label: "A", point: Vec2::new(1.0, 0.0) },
            LabeledPoint { label: "B", point: Vec2::new(-1.0, 0.0) },
        ],
        lipschitz: Some(1.25),
    }
}

const F2_RHO_STAR: f64 = 0.5;
const F2_EPS: f64 = 0.2;

/// Radial well `h(rho)` with `h'(rho) = (rho - rho*) / (rho + rho*)`, tilted
/// by `eps x rho e^{-rho}`; `rho = |z|^2 / 2`.
pub fn figure2() -> CatalogEntry {
    let system = PlanarHamiltonianSystem::new(1.0, |_, z| {
        let rho = 0.5 * z.dot(z);
        let dh = (rho - F2_RHO_STAR) / (rho + F2_RHO_STAR);
        let e = (-rho).exp();
        let tilt = z.scale(F2_EPS * z.x * (1.0 - rho) * e) + Vec2::new(F2_EPS * rho * e, 0.0);
        z.scale(dh) + tilt
    })
    .with_energy(|_, z| {
        let rho = 0.5 * z.dot(z);
        rho - 2.0 * F2_RHO_STAR * (rho + F2_RHO_STAR).ln() + F2_EPS * z.x * rho * (-rho).exp()
    })
    .with_linearization_at_zero(PeriodicMatrixFunction::constant(1.0, Mat2::scalar(-1.0)))
    .with_linearization_at_infinity(PeriodicMatrixFunction::constant(1.0, Mat2::IDENTITY));
    CatalogEntry {
        name: "figure2",
        description: "tilted radial well with a maximum and a saddle, T = 1",
        system,
        expected: Some(Expected { i0: 1, i_infty: -1, count: 2 }),
        equilibria: vec![
            LabeledPoint { label: "M", point: Vec2::new(-1.1119, 0.0) },
            LabeledPoint { label: "S", point: Vec2::new(0.8744, 0.0) },
        ],
        lipschitz: Some(1.5),
    }
}

fn figure3_potential_gradient(w: Vec2) -> Vec2 {
    let (u, v) = (w.x, w.y);
    Vec2::new(-u + 2.0 * u * u + 0.5 * v * v - u * u * u, -v + u * v + v * v * v)
}

fn figure3_potential(w: Vec2) -> f64 {
    let (u, v) = (w.x, w.y);
    let s = u * u + v * v;
    -0.5 * s + 2.0 / 3.0 * u * u * u + 0.5 * u * v * v + 0.25 * (v * v - u * u) * s
}

/// `H(z) = P(lambda z)` with `lambda = (1 + |z|^2)^{-1/4}`: a maximum at the
/// origin, a single monkey saddle and a hyperbolic limit at infinity.
pub fn figure3() -> CatalogEntry {
    let system = PlanarHamiltonianSystem::new(1.0, |_, z| {
        let s = 1.0 + z.dot(z);
        let lambda = s.powf(-0.25);
        let grad_p = figure3_potential_gradient(z.scale(lambda));
        // grad H = lambda grad P(w) + grad lambda <z, grad P(w)>
        let dlambda = z.scale(-0.5 * s.powf(-1.25));
        grad_p.scale(lambda) + dlambda.scale(z.dot(grad_p))
    })
    .with_energy(|_, z| figure3_potential(z.scale((1.0 + z.dot(z)).powf(-0.25))))
    .with_linearization_at_zero(PeriodicMatrixFunction::constant(1.0, Mat2::scalar(-1.0)))
    .with_linearization_at_infinity(PeriodicMatrixFunction::constant(1.0, Mat2::diag(-0.5, 0.5)));
    let r_star = (0.5 * (1.0 + 5.0.sqrt())).sqrt();
    CatalogEntry {
        name: "figure3",
        description: "maximum at the origin and a monkey saddle, hyperbolic at infinity, T = 1",
        system,
        expected: Some(Expected { i0: 1, i_infty: 0, count: 1 }),
        equilibria: vec![LabeledPoint { label: "S", point: Vec2::new(r_star, 0.0) }],
        lipschitz: Some(2.1),
    }
}

/// Constant sandwich bounds `(lower, upper, radius)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstantBounds {
    pub lower: f64,
    pub upper: f64,
    pub radius: f64,
}

/// A second order equation `x'' + q(t, x) x = 0` with sandwich bounds.
#[derive(Debug, Clone)]
pub struct LinearLikeEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub q: ScalarCoefficient,
    pub at_zero: ConstantBounds,
    pub at_infinity: ConstantBounds,
    pub i0: i64,
    pub i_infty: i64,
    /// Truncation radius to start from, when the default is not wanted.
    pub r_hat: Option<f64>,
}

impl LinearLikeEntry {
    pub fn bounds(&self, tol: &Tolerances) -> Result<(SandwichBounds, SandwichBounds)> {
        let t = self.q.period();
        let (a, b) = (self.at_zero, self.at_infinity);
        Ok((
            SandwichBounds::constant(t, a.lower, a.upper, a.radius, Region::Zero, tol)?,
            SandwichBounds::constant(t, b.lower, b.upper, b.radius, Region::Infinity, tol)?,
        ))
    }
}

pub const LINEAR_LIKE_NAMES: &[&str] = &["linear-like", "asymptotically-linear", "escalation"];

pub fn linear_like(name: &str) -> Option<LinearLikeEntry> {
    Some(match name {
        // Oscillates without a limit both at zero and at infinity.
        "linear-like" => LinearLikeEntry {
            name: "linear-like",
            description: "q = s (1 + 0.2 sin ln|x|) + (1 - s)(-1 + 0.2 sin x), s = 1 / (1 + (x/2)^4), T = 1",
            q: ScalarCoefficient::new(1.0, |_, x: f64| {
                let s = 1.0 / (1.0 + (0.5 * x).powi(4));
                s * (1.0 + 0.2 * x.abs().ln().sin()) + (1.0 - s) * (-1.0 + 0.2 * x.sin())
            }),
            at_zero: ConstantBounds { lower: 0.7, upper: 1.3, radius: 0.5 },
            at_infinity: ConstantBounds { lower: -1.3, upper: -0.7, radius: 20.0 },
            i0: -1,
            i_infty: 0,
            r_hat: None,
        },
        "asymptotically-linear" => LinearLikeEntry {
            name: "asymptotically-linear",
            description: "q = (x^2 - 1) / (x^2 + 1), T = 1 (figure1 in second order form)",
            q: ScalarCoefficient::new(1.0, |_, x| (x * x - 1.0) / (x * x + 1.0)),
            at_zero: ConstantBounds { lower: -1.5, upper: -0.5, radius: 0.5 },
            at_infinity: ConstantBounds { lower: 0.5, upper: 1.5, radius: 2.0 },
            i0: 0,
            i_infty: -1,
            r_hat: None,
        },
        // Winding-one solutions reach past the first truncation radius.
        "escalation" => LinearLikeEntry {
            name: "escalation",
            description: "q = 1 + x^4 / (1 + x^4) (1 + 0.05 cos(2 pi t / T)), T = 4.8, truncation from 1.4",
            q: ScalarCoefficient::new(ESCALATION_PERIOD, |t, x: f64| {
                let g = x.powi(4) / (1.0 + x.powi(4));
                1.0 + g * (1.0 + 0.05 * (2.0 * PI * t / ESCALATION_PERIOD).cos())
            }),
            at_zero: ConstantBounds { lower: 0.8, upper: 1.2, radius: 0.5 },
            at_infinity: ConstantBounds { lower: 1.72, upper: 2.15, radius: 1.4 },
            i0: -1,
            i_infty: -3,
            r_hat: Some(1.4),
        },
        _ => return None,
    })
}

const ESCALATION_PERIOD: f64 = 4.8;
