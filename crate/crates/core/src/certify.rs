//! Twist radii, winding ranges and certificates of `T`-periodic solutions.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;

use crate::degree::{degree_shifted, locate_zeros, DegreeOptions, PoincareField, ZeroSearch, ZeroSearchOptions};
use crate::error::{Error, Result};
use crate::geometry::LiftedPoint;
use crate::lifted::{flow_lifted, linearization_data, poincare_t, LiftedTrajectory, Region};
use crate::symplectic::MaslovIndex;
use crate::system::{PlanarHamiltonianSystem, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CertifyOptions {
    /// Tolerances for the Poincaré map evaluations (tighter than the defaults
    /// so polished zeros reach `tol_res`).
    pub tol: Tolerances,
    pub r0_start: f64,
    pub r_inf_start: f64,
    pub max_halvings: u32,
    pub max_doublings: u32,
    pub search: ZeroSearchOptions,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        let tol = Tolerances { ode_abs: 1e-12, ode_rel: 1e-12, ..Tolerances::default() };
        Self {
            tol,
            r0_start: 0.5,
            r_inf_start: 2.0,
            max_halvings: 24,
            max_doublings: 16,
            search: ZeroSearchOptions::from_tolerances(&tol),
        }
    }
}

impl CertifyOptions {
    pub fn with_tolerances(tol: Tolerances) -> Self {
        let tol = Tolerances { ode_abs: tol.ode_abs.min(1e-12), ode_rel: tol.ode_rel.min(1e-12), ..tol };
        Self { tol, search: ZeroSearchOptions::from_tolerances(&tol), ..Self::default() }
    }
}

/// Indices of the linearizations at zero and infinity; both must be nonresonant.
pub fn indices(sys: &PlanarHamiltonianSystem, tol: &Tolerances) -> Result<(MaslovIndex, MaslovIndex)> {
    let i0 = linearization_data(sys, Region::Zero, tol)?.index;
    let i_inf = linearization_data(sys, Region::Infinity, tol)?.index;
    if i0.is_resonant() {
        return Err(Error::Resonant { at: "zero", nullity: i0.nullity });
    }
    if i_inf.is_resonant() {
        return Err(Error::Resonant { at: "infinity", nullity: i_inf.nullity });
    }
    Ok((i0, i_inf))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TwistRadii {
    pub r0: f64,
    pub r_infty: f64,
}

/// Worst margin of `(i - 1) pi < -F1(phi, r) < (i + 1) pi` over the angle grid.
pub fn rotation_margin(
    sys: &PlanarHamiltonianSystem,
    index: i64,
    r: f64,
    angles: usize,
    tol: &Tolerances,
) -> Result<f64> {
    let lo = (index - 1) as f64 * PI;
    let hi = (index + 1) as f64 * PI;
    let mut margin = f64::INFINITY;
    for k in 0..angles.max(1) {
        let phi = TAU * k as f64 / angles.max(1) as f64;
        let f1 = poincare_t(sys, LiftedPoint::new(phi, r), tol)?.f1;
        margin = margin.min((-f1 - lo).min(hi + f1));
    }
    Ok(margin)
}

fn radius_admissible(
    sys: &PlanarHamiltonianSystem,
    index: i64,
    radii: [f64; 2],
    opts: &CertifyOptions,
) -> Result<bool> {
    for r in radii {
        match rotation_margin(sys, index, r, opts.tol.angle_grid, &opts.tol) {
            Ok(m) if m >= opts.tol.margin_min => {}
            Ok(_) | Err(Error::NearOrigin { .. }) => return Ok(false),
            Err(e) => return Err(e),
        }
    }
    if index % 2 == 0 {
        let field = PoincareField::new(sys, opts.tol);
        let dopts = DegreeOptions::from_tolerances(&opts.tol);
        for r in radii {
            match degree_shifted(&field, index / 2, r, &dopts) {
                Ok(-2) => {}
                Ok(_) | Err(Error::NearZeroOnLoop { .. }) => return Ok(false),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(true)
}

/// Scans `r <- r/2` and `r <- 2r` until the rotation bounds (and, for even
/// indices, the degree `-2`) hold at `r` and at the next radius of the scan.
pub fn find_twist_radii(
    sys: &PlanarHamiltonianSystem,
    i0: i64,
    i_inf: i64,
    opts: &CertifyOptions,
) -> Result<TwistRadii> {
    let mut r0 = opts.r0_start;
    let mut found0 = None;
    for _ in 0..=opts.max_halvings {
        if radius_admissible(sys, i0, [r0, r0 / 2.0], opts)? {
            found0 = Some(r0);
            break;
        }
        r0 /= 2.0;
    }
    let r0 = found0.ok_or(Error::TwistRadiiNotFound { at: "zero", last_radius: r0 })?;
    let mut r_inf = opts.r_inf_start.max(2.0 * r0);
    let mut found_inf = None;
    for _ in 0..=opts.max_doublings {
        if radius_admissible(sys, i_inf, [r_inf, 2.0 * r_inf], opts)? {
            found_inf = Some(r_inf);
            break;
        }
        r_inf *= 2.0;
    }
    let r_infty = found_inf.ok_or(Error::TwistRadiiNotFound { at: "infinity", last_radius: r_inf })?;
    Ok(TwistRadii { r0, r_infty })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WindingRange {
    pub l_min: i64,
    pub l_max: i64,
}

impl WindingRange {
    /// Integers `l` with `2l` strictly between `i0` and `i_inf`.
    pub fn new(i0: i64, i_inf: i64) -> Self {
        let (lo, hi) = if i0 <= i_inf { (i0, i_inf) } else { (i_inf, i0) };
        Self { l_min: lo.div_euclid(2) + 1, l_max: -((-hi).div_euclid(2)) - 1 }
    }

    pub fn is_empty(&self) -> bool {
        self.l_min > self.l_max
    }
}

pub fn guaranteed_count(i0: i64, i_inf: i64) -> usize {
    let extra = if i0 % 2 == 0 && i0 != i_inf { 1 } else { 0 };
    ((i_inf - i0).unsigned_abs() + extra) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Case {
    /// Twist between the two circles: at least two solutions.
    A,
    /// `i_inf` even: annulus degree `-2`, at least one solution.
    B,
    /// `i0` even: annulus degree `+2`, at least two solutions.
    C,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PeriodicSolutionRecord {
    pub initial: LiftedPoint,
    /// Clockwise turns over one period.
    pub winding: i64,
    pub residual: f64,
    pub case: Case,
    pub orbit: LiftedTrajectory,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CaseReport {
    pub case: Case,
    /// Clockwise turns `M`; zeros of `F + (2 pi s, 0)` with `s = -M`.
    pub winding: i64,
    pub annulus_degree: i64,
    pub required: usize,
    pub found: usize,
    pub evaluations: usize,
    pub unresolved_cells: usize,
    pub ok: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Certificate {
    pub i0: MaslovIndex,
    pub i_infty: MaslovIndex,
    pub guaranteed_count: usize,
    pub twist_radii: Option<TwistRadii>,
    pub winding_range: WindingRange,
    pub found: Vec<PeriodicSolutionRecord>,
    pub case_breakdown: Vec<CaseReport>,
    pub valid: bool,
    pub diagnostics: Vec<String>,
}

pub fn certify(sys: &PlanarHamiltonianSystem, opts: &CertifyOptions) -> Result<Certificate> {
    let (i0, i_inf) = indices(sys, &opts.tol)?;
    certify_with_indices(sys, i0, i_inf, opts)
}

/// The certification pipeline for indices obtained elsewhere (for instance
/// from sandwich bounds).
pub fn certify_with_indices(
    sys: &PlanarHamiltonianSystem,
    i0: MaslovIndex,
    i_inf: MaslovIndex,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    if i0.is_resonant() || i_inf.is_resonant() {
        let (at, nullity) = if i0.is_resonant() { ("zero", i0.nullity) } else { ("infinity", i_inf.nullity) };
        return Err(Error::Resonant { at, nullity });
    }
    let (a, b) = (i0.index, i_inf.index);
    let range = WindingRange::new(a, b);
    let mut cert = Certificate {
        i0,
        i_infty: i_inf,
        guaranteed_count: guaranteed_count(a, b),
        twist_radii: None,
        winding_range: range,
        found: Vec::new(),
        case_breakdown: Vec::new(),
        valid: true,
        diagnostics: Vec::new(),
    };
    if a == b {
        cert.diagnostics.push("equal indices: nothing to certify".into());
        return Ok(cert);
    }
    let radii = find_twist_radii(sys, a, b, opts)?;
    cert.twist_radii = Some(radii);

    let mut plan: Vec<(Case, i64, usize)> = Vec::new();
    if !range.is_empty() {
        for s in range.l_min..=range.l_max {
            plan.push((Case::A, s, 2));
        }
    }
    if b % 2 == 0 {
        plan.push((Case::B, b / 2, 1));
    }
    if a % 2 == 0 {
        plan.push((Case::C, a / 2, 2));
    }

    let field = PoincareField::new(sys, opts.tol);
    for (case, s, required) in plan {
        let search = locate_zeros(&field, s, radii.r0, radii.r_infty, &opts.search)?;
        let report = assemble_case(sys, case, s, required, &search, opts, &mut cert)?;
        if !report.ok {
            cert.valid = false;
        }
        cert.case_breakdown.push(report);
    }
    cert.found.sort_by(|x, y| {
        x.winding.cmp(&y.winding).then(x.initial.phi.partial_cmp(&y.initial.phi).unwrap_or(core::cmp::Ordering::Equal))
    });
    if cert.found.len() < cert.guaranteed_count {
        cert.valid = false;
        cert.diagnostics.push(format!(
            "found {} of {} guaranteed solutions; existence is guaranteed, so the search budget or resolution was insufficient",
            cert.found.len(),
            cert.guaranteed_count
        ));
    }
    Ok(cert)
}

fn assemble_case(
    sys: &PlanarHamiltonianSystem,
    case: Case,
    s: i64,
    required: usize,
    search: &ZeroSearch,
    opts: &CertifyOptions,
    cert: &mut Certificate,
) -> Result<CaseReport> {
    let expected_degree = match case {
        Case::A => 0,
        Case::B => -2,
        Case::C => 2,
    };
    let mut note = None;
    if search.annulus_degree != expected_degree {
        note = Some(format!("annulus degree {} differs from the predicted {}", search.annulus_degree, expected_degree));
    }
    if case == Case::C && search.violates_index_bound() {
        note = Some("degree +2 carried by fewer than two resolved zeros".into());
    }
    let mut verified = 0usize;
    for z in &search.zeros {
        match verify_solution(sys, z.location, s, opts) {
            Ok((orbit, residual)) => {
                verified += 1;
                cert.found.push(PeriodicSolutionRecord { initial: z.location, winding: -s, residual, case, orbit });
            }
            Err(e) => cert.diagnostics.push(format!("zero at {:?} failed re-validation: {e}", z.location)),
        }
    }
    if search.budget_exhausted {
        cert.diagnostics.push(format!(
            "case {case:?} (winding {}): evaluation budget exhausted with {} candidate cells",
            -s,
            search.unresolved.len()
        ));
    }
    let ok = note.is_none() && verified >= required;
    Ok(CaseReport {
        case,
        winding: -s,
        annulus_degree: search.annulus_degree,
        required,
        found: verified,
        evaluations: search.evaluations,
        unresolved_cells: search.unresolved.len(),
        ok,
        note,
    })
}

/// Re-integrates from a polished zero and checks closure and the winding.
pub fn verify_solution(
    sys: &PlanarHamiltonianSystem,
    p: LiftedPoint,
    shift: i64,
    opts: &CertifyOptions,
) -> Result<(LiftedTrajectory, f64)> {
    let orbit = flow_lifted(sys, p, 0.0, sys.period(), &opts.tol)?;
    let end = orbit.last();
    let angle = end.phi - p.phi + TAU * shift as f64;
    let residual = angle.hypot(end.r() - p.r);
    if residual > opts.search.tol_res {
        return Err(Error::Precondition(format!("residual {residual} above tolerance")));
    }
    let turns = (end.phi - p.phi) / TAU;
    if (turns - (-shift) as f64).abs() > 1e-6 {
        return Err(Error::NonIntegerWinding { turns });
    }
    Ok((orbit, residual))
}
