//! System descriptions: periodic matrix functions, planar Hamiltonian
//! systems and tolerance settings.

use alloc::format;
use alloc::sync::Arc;
use core::fmt;

use crate::error::{Error, Result};
use crate::geometry::{Mat2, Vec2};

/// Numerical tolerances shared by the whole pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct Tolerances {
    /// Relative tolerance for symmetry and symplecticity predicates.
    pub structure: f64,
    /// Resonance band on `det(I - M)`.
    pub resonance: f64,
    /// Below this `tau` the hyperbolic axis is considered undefined.
    pub tau_min: f64,
    pub ode_abs: f64,
    pub ode_rel: f64,
    /// Allowed `|det Psi - 1|` for integrated fundamental solutions.
    pub det_drift: f64,
    /// Smallest radius a lifted trajectory may reach.
    pub r_min: f64,
    /// Minimum field norm on a loop, scaled by `1 + r`.
    pub eps_min: f64,
    /// Distance under which two zeros are the same.
    pub delta_dup: f64,
    /// Residual a polished zero must reach.
    pub tol_res: f64,
    /// Required margin of the twist bounds, in radians.
    pub margin_min: f64,
    /// Angles sampled when checking twist bounds.
    pub angle_grid: usize,
    /// Field evaluations allowed per search.
    pub budget: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structure: 1e-9,
            resonance: 1e-7,
            tau_min: 1e-8,
            ode_abs: 1e-10,
            ode_rel: 1e-10,
            det_drift: 1e-8,
            r_min: 1e-10,
            eps_min: 1e-9,
            delta_dup: 1e-6,
            tol_res: 1e-10,
            margin_min: 1e-3,
            angle_grid: 256,
            budget: 1_000_000,
        }
    }
}

pub type MatrixFn = Arc<dyn Fn(f64) -> Mat2 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(f64, Vec2) -> Vec2 + Send + Sync>;
pub type EnergyFn = Arc<dyn Fn(f64, Vec2) -> f64 + Send + Sync>;

/// A `T`-periodic symmetric matrix valued function `t -> L(t)`.
#[derive(Clone)]
pub struct PeriodicMatrixFunction {
    eval: MatrixFn,
    period: f64,
}

impl fmt::Debug for PeriodicMatrixFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicMatrixFunction")
            .field("period", &self.period)
            .field("at_zero", &self.eval(0.0))
            .finish()
    }
}

impl PeriodicMatrixFunction {
    pub fn new(period: f64, eval: impl Fn(f64) -> Mat2 + Send + Sync + 'static) -> Self {
        Self { eval: Arc::new(eval), period }
    }

    pub fn constant(period: f64, m: Mat2) -> Self {
        Self::new(period, move |_| m)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn eval(&self, t: f64) -> Mat2 {
        (self.eval)(t)
    }

    /// Checks symmetry and periodicity on `samples` points of `[0, T]`.
    pub fn validate(&self, samples: usize, tol: f64) -> Result<()> {
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::Precondition(format!("period must be positive, got {}", self.period)));
        }
        let n = samples.max(2);
        for k in 0..=n {
            let t = self.period * k as f64 / n as f64;
            let m = self.eval(t);
            if !m.is_finite() {
                return Err(Error::Precondition(format!("non-finite matrix at t = {t}")));
            }
            if !m.is_symmetric(tol) {
                return Err(Error::Precondition(format!("matrix not symmetric at t = {t}")));
            }
            let shifted = self.eval(t + self.period);
            if (shifted - m).max_abs() > tol * (1.0 + m.max_abs()) {
                return Err(Error::Precondition(format!("matrix not periodic at t = {t}")));
            }
        }
        Ok(())
    }
}

/// `z' = J grad H(t, z)` with optional linearizations at zero and infinity.
#[derive(Clone)]
pub struct PlanarHamiltonianSystem {
    gradient: GradientFn,
    period: f64,
    energy: Option<EnergyFn>,
    pub linearization_at_zero: Option<PeriodicMatrixFunction>,
    pub linearization_at_infinity: Option<PeriodicMatrixFunction>,
}

impl fmt::Debug for PlanarHamiltonianSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PlanarHamiltonianSystem")
            .field("period", &self.period)
            .field("linearization_at_zero", &self.linearization_at_zero)
            .field("linearization_at_infinity", &self.linearization_at_infinity)
            .finish()
    }
}

impl PlanarHamiltonianSystem {
    pub fn new(period: f64, gradient: impl Fn(f64, Vec2) -> Vec2 + Send + Sync + 'static) -> Self {
        Self {
            gradient: Arc::new(gradient),
            period,
            energy: None,
            linearization_at_zero: None,
            linearization_at_infinity: None,
        }
    }

    pub fn with_energy(mut self, h: impl Fn(f64, Vec2) -> f64 + Send + Sync + 'static) -> Self {
        self.energy = Some(Arc::new(h));
        self
    }

    pub fn with_linearization_at_zero(mut self, a: PeriodicMatrixFunction) -> Self {
        self.linearization_at_zero = Some(a);
        self
    }

    pub fn with_linearization_at_infinity(mut self, b: PeriodicMatrixFunction) -> Self {
        self.linearization_at_infinity = Some(b);
        self
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn gradient(&self, t: f64, z: Vec2) -> Vec2 {
        (self.gradient)(t, z)
    }

    /// The vector field `J grad H`.
    pub fn field(&self, t: f64, z: Vec2) -> Vec2 {
        let g = self.gradient(t, z);
        Vec2::new(g.y, -g.x)
    }

    pub fn energy(&self, t: f64, z: Vec2) -> Option<f64> {
        self.energy.as_ref().map(|h| h(t, z))
    }

    pub fn has_energy(&self) -> bool {
        self.energy.is_some()
    }

    /// Checks the period and that the field vanishes at the origin when a
    /// linearization at zero is declared.
    pub fn validate(&self, tol: f64) -> Result<()> {
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::Precondition(format!("period must be positive, got {}", self.period)));
        }
        if self.linearization_at_zero.is_some() {
            for k in 0..16 {
                let t = self.period * k as f64 / 16.0;
                let g = self.gradient(t, Vec2::ZERO);
                if g.norm() > tol {
                    return Err(Error::Precondition(format!(
                        "field does not vanish at the origin (t = {t}, |grad H| = {})",
                        g.norm()
                    )));
                }
            }
        }
        for lin in [&self.linearization_at_zero, &self.linearization_at_infinity].into_iter().flatten() {
            if (lin.period() - self.period).abs() > 1e-12 * self.period {
                return Err(Error::Precondition("linearization period differs from system period".into()));
            }
            lin.validate(32, 1e-9)?;
        }
        Ok(())
    }
}

/// Linear `T`-periodic system `z' = J L(t) z`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub l: PeriodicMatrixFunction,
}

impl LinearSystem {
    pub fn new(l: PeriodicMatrixFunction) -> Self {
        Self { l }
    }

    pub fn constant(period: f64, l: Mat2) -> Self {
        Self::new(PeriodicMatrixFunction::constant(period, l))
    }

    pub fn period(&self) -> f64 {
        self.l.period()
    }

    /// The same system as a Hamiltonian system with `H = <L z, z> / 2`,
    /// which is its own linearization at zero and infinity.
    pub fn to_hamiltonian(&self) -> PlanarHamiltonianSystem {
        let l = self.l.clone();
        let l2 = self.l.clone();
        PlanarHamiltonianSystem::new(self.period(), move |t, z| l.eval(t).apply(z))
            .with_energy(move |t, z| 0.5 * l2.eval(t).apply(z).dot(z))
            .with_linearization_at_zero(self.l.clone())
            .with_linearization_at_infinity(self.l.clone())
    }
}
