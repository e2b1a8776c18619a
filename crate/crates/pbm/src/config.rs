//! Run configuration: a TOML file, overridden by command line flags.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use pbm_core::catalog::{self, CatalogEntry, Expected, LabeledPoint};
use pbm_core::lifted::Region;
use pbm_core::second_order::{SandwichBounds, ScalarCoefficient};
use pbm_core::{Mat2, PeriodicMatrixFunction, PlanarHamiltonianSystem, Tolerances, Vec2};
use serde::Deserialize;

use crate::error::CliError;
use crate::expr::{parse_expression, Expr, Var};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub params: Params,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Exactly one of `catalog`, `matrix`, `hamiltonian` or `q` must be given.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub catalog: Option<String>,
    /// Linear system `z' = J L(t) z`, entries are expressions in `t`.
    pub matrix: Option<[[String; 2]; 2]>,
    /// `H(t, x, y)`.
    pub hamiltonian: Option<String>,
    /// `q(t, x)` of `x'' + q(t, x) x = 0`.
    pub q: Option<String>,
    pub period: Option<f64>,
    pub at_zero: Option<Linearization>,
    pub at_infinity: Option<Linearization>,
}

/// One of: a matrix `L(t)`; `hessian = true` (at zero, Hamiltonian systems);
/// a Hill coefficient `a(t)`; constant sandwich bounds for `q`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Linearization {
    pub matrix: Option<[[String; 2]; 2]>,
    pub hessian: Option<bool>,
    pub coefficient: Option<String>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Radius for `poincare` and `degree`.
    pub r: f64,
    /// Shift `M` for `degree` and `find`.
    pub shift: i64,
    pub r1: f64,
    pub r2: f64,
    /// Angles in the `poincare` table.
    pub samples: usize,
    /// `zero` or `infinity`, for `index` on nonlinear systems.
    pub at: String,
    /// Portrait half width; derived from the system when absent.
    pub extent: Option<f64>,
    pub trajectories: usize,
    /// Integration time of each portrait trajectory, in periods.
    pub periods: f64,
    /// Starting truncation radius for second order systems with sandwich bounds.
    pub r_hat: Option<f64>,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            r: 1.0,
            shift: 0,
            r1: 0.5,
            r2: 2.0,
            samples: 256,
            at: "zero".into(),
            extent: None,
            trajectories: 24,
            periods: 4.0,
            r_hat: None,
        }
    }
}

impl Params {
    pub fn region(&self) -> Result<Region, CliError> {
        match self.at.as_str() {
            "zero" => Ok(Region::Zero),
            "infinity" => Ok(Region::Infinity),
            other => Err(CliError::Config(format!("params.at must be `zero` or `infinity`, got `{other}`"))),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Schema checks that do not need any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        let s = &self.system;
        let kinds = [s.catalog.is_some(), s.matrix.is_some(), s.hamiltonian.is_some(), s.q.is_some()];
        match kinds.iter().filter(|k| **k).count() {
            0 => return Err(CliError::Config("no system given (catalog, matrix, hamiltonian or q)".into())),
            1 => {}
            _ => return Err(CliError::Config("more than one system kind given".into())),
        }
        if s.catalog.is_some() {
            if s.period.is_some() || s.at_zero.is_some() || s.at_infinity.is_some() {
                return Err(CliError::Config("catalog systems take no period or linearizations".into()));
            }
        } else {
            match s.period {
                Some(p) if p > 0.0 && p.is_finite() => {}
                Some(p) => return Err(CliError::Config(format!("period must be positive, got {p}"))),
                None => return Err(CliError::Config("period is required".into())),
            }
        }
        let p = &self.params;
        if !(p.r > 0.0) || !(p.r1 > 0.0 && p.r2 > p.r1) {
            return Err(CliError::Config("need r > 0 and 0 < r1 < r2".into()));
        }
        if p.samples == 0 || p.trajectories == 0 || !(p.periods > 0.0) {
            return Err(CliError::Config("samples, trajectories and periods must be positive".into()));
        }
        p.region()?;
        Ok(())
    }
}

fn expr(src: &str, what: &str, allowed: &[Var]) -> Result<Expr, CliError> {
    let e = parse_expression(src).map_err(|e| CliError::Expression { what: what.to_string(), source: e })?;
    for v in [Var::T, Var::X, Var::Y] {
        if e.uses(v) && !allowed.contains(&v) {
            return Err(CliError::Config(format!("{what} may not depend on {}", v.name())));
        }
    }
    Ok(e)
}

fn matrix_function(entries: &[[String; 2]; 2], period: f64, what: &str) -> Result<PeriodicMatrixFunction, CliError> {
    let mut e = Vec::with_capacity(4);
    for (i, row) in entries.iter().enumerate() {
        for (j, src) in row.iter().enumerate() {
            e.push(expr(src, &format!("{what}[{i}][{j}]"), &[Var::T])?);
        }
    }
    let f = PeriodicMatrixFunction::new(period, move |t| {
        Mat2::new(e[0].eval(t, 0.0, 0.0), e[1].eval(t, 0.0, 0.0), e[2].eval(t, 0.0, 0.0), e[3].eval(t, 0.0, 0.0))
    });
    f.validate(64, 1e-9).map_err(|err| CliError::Config(format!("{what}: {err}")))?;
    Ok(f)
}

fn hill(src: &str, period: f64, what: &str) -> Result<PeriodicMatrixFunction, CliError> {
    let a = expr(src, what, &[Var::T])?;
    Ok(PeriodicMatrixFunction::new(period, move |t| Mat2::diag(a.eval(t, 0.0, 0.0), 1.0)))
}

/// A system ready for the library.
pub enum Resolved {
    Planar {
        name: String,
        system: PlanarHamiltonianSystem,
        expected: Option<Expected>,
        equilibria: Vec<LabeledPoint>,
    },
    /// `x'' + q x = 0` with sandwich bounds; `system` is the untruncated planar form.
    LinearLike {
        name: String,
        q: ScalarCoefficient,
        at_zero: SandwichBounds,
        at_infinity: SandwichBounds,
        r_hat: Option<f64>,
        system: PlanarHamiltonianSystem,
    },
}

impl Resolved {
    pub fn system(&self) -> &PlanarHamiltonianSystem {
        match self {
            Resolved::Planar { system, .. } | Resolved::LinearLike { system, .. } => system,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Resolved::Planar { name, .. } | Resolved::LinearLike { name, .. } => name,
        }
    }

    pub fn equilibria(&self) -> &[LabeledPoint] {
        match self {
            Resolved::Planar { equilibria, .. } => equilibria,
            Resolved::LinearLike { .. } => &[],
        }
    }
}

fn from_catalog(entry: CatalogEntry) -> Resolved {
    Resolved::Planar {
        name: entry.name.to_string(),
        system: entry.system,
        expected: entry.expected,
        equilibria: entry.equilibria,
    }
}

pub fn resolve(cfg: &RunConfig) -> Result<Resolved, CliError> {
    cfg.validate()?;
    let s = &cfg.system;
    let tol = &cfg.tolerances;
    if let Some(name) = &s.catalog {
        if let Some(entry) = catalog::lookup(name) {
            return Ok(from_catalog(entry));
        }
        let Some(e) = catalog::linear_like(name) else {
            return Err(CliError::Config(format!("unknown catalog system `{name}`")));
        };
        let (at_zero, at_infinity) = e.bounds(tol)?;
        return Ok(Resolved::LinearLike {
            name: e.name.to_string(),
            system: e.q.to_planar(),
            q: e.q,
            at_zero,
            at_infinity,
            r_hat: cfg.params.r_hat.or(e.r_hat),
        });
    }
    let period = s.period.expect("validated");
    if let Some(m) = &s.matrix {
        if s.at_zero.is_some() || s.at_infinity.is_some() {
            return Err(CliError::Config("a linear system is its own linearization".into()));
        }
        let l = matrix_function(m, period, "matrix")?;
        return Ok(Resolved::Planar {
            name: "linear".into(),
            system: pbm_core::LinearSystem::new(l).to_hamiltonian(),
            expected: None,
            equilibria: Vec::new(),
        });
    }
    if let Some(src) = &s.hamiltonian {
        let h = expr(src, "hamiltonian", &[Var::T, Var::X, Var::Y])?;
        let (hx, hy) = (h.derivative(Var::X), h.derivative(Var::Y));
        let energy = h.clone();
        let mut system =
            PlanarHamiltonianSystem::new(period, move |t, z| Vec2::new(hx.eval(t, z.x, z.y), hy.eval(t, z.x, z.y)))
                .with_energy(move |t, z| energy.eval(t, z.x, z.y));
        for (region, lin) in [(Region::Zero, &s.at_zero), (Region::Infinity, &s.at_infinity)] {
            let Some(lin) = lin else { continue };
            let what = format!("at_{}", region.name());
            let l = match (lin.matrix.as_ref(), lin.hessian) {
                (Some(m), None | Some(false)) => matrix_function(m, period, &what)?,
                (None, Some(true)) if region == Region::Zero => hessian_at_origin(&h, period),
                _ => return Err(CliError::Config(format!("{what}: give `matrix`, or `hessian = true` at zero"))),
            };
            if lin.coefficient.is_some() || lin.lower.is_some() || lin.upper.is_some() || lin.radius.is_some() {
                return Err(CliError::Config(format!("{what}: sandwich bounds apply to second order systems")));
            }
            system = match region {
                Region::Zero => system.with_linearization_at_zero(l),
                Region::Infinity => system.with_linearization_at_infinity(l),
            };
        }
        system.validate(1e-9)?;
        return Ok(Resolved::Planar { name: "hamiltonian".into(), system, expected: None, equilibria: Vec::new() });
    }
    let q_expr = expr(s.q.as_ref().expect("validated"), "q", &[Var::T, Var::X])?;
    let q = ScalarCoefficient::new(period, move |t, x| q_expr.eval(t, x, 0.0));
    let sandwich = |lin: &Linearization| lin.lower.is_some() || lin.upper.is_some() || lin.radius.is_some();
    match (&s.at_zero, &s.at_infinity) {
        (Some(a), Some(b)) if sandwich(a) && sandwich(b) => {
            let bounds = |lin: &Linearization, region: Region| -> Result<SandwichBounds, CliError> {
                let (Some(lo), Some(hi), Some(r)) = (lin.lower, lin.upper, lin.radius) else {
                    return Err(CliError::Config(format!("at_{}: need lower, upper and radius", region.name())));
                };
                Ok(SandwichBounds::constant(period, lo, hi, r, region, tol)?)
            };
            Ok(Resolved::LinearLike {
                name: "second-order".into(),
                system: q.to_planar(),
                at_zero: bounds(a, Region::Zero)?,
                at_infinity: bounds(b, Region::Infinity)?,
                q,
                r_hat: cfg.params.r_hat,
            })
        }
        (a, b) => {
            let mut system = q.to_planar();
            for (region, lin) in [(Region::Zero, a), (Region::Infinity, b)] {
                let Some(lin) = lin else { continue };
                let what = format!("at_{}", region.name());
                let (Some(src), false) = (&lin.coefficient, sandwich(lin) || lin.matrix.is_some()) else {
                    return Err(CliError::Config(format!(
                        "{what}: second order systems take `coefficient`, or sandwich bounds at both ends"
                    )));
                };
                let l = hill(src, period, &what)?;
                system = match region {
                    Region::Zero => system.with_linearization_at_zero(l),
                    Region::Infinity => system.with_linearization_at_infinity(l),
                };
            }
            Ok(Resolved::Planar { name: "second-order".into(), system, expected: None, equilibria: Vec::new() })
        }
    }
}

fn hessian_at_origin(h: &Expr, period: f64) -> PeriodicMatrixFunction {
    let (hx, hy) = (h.derivative(Var::X), h.derivative(Var::Y));
    let parts = Arc::new([hx.derivative(Var::X), hx.derivative(Var::Y), hy.derivative(Var::Y)]);
    PeriodicMatrixFunction::new(period, move |t| {
        let [xx, xy, yy] = parts.as_ref();
        Mat2::symmetric(xx.eval(t, 0.0, 0.0), xy.eval(t, 0.0, 0.0), yy.eval(t, 0.0, 0.0))
    })
}
