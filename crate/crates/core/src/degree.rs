//! Circle and annulus degrees of angularly periodic fields and the search
//! for zeros of the shifted displacement `F + (2 M pi, 0)`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, TAU};

#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{reduce_angle, wrap_pi, LiftedPoint, Vec2};
use crate::lifted::poincare_t;
use crate::linear::LinearPoincareData;
use crate::system::{PlanarHamiltonianSystem, Tolerances};

/// A field on the covering `(phi, r)`, `2 pi`-periodic in `phi`.
pub trait PlanarField {
    fn eval(&self, phi: f64, r: f64) -> Result<Vec2>;
}

impl<F> PlanarField for F
where
    F: Fn(f64, f64) -> Result<Vec2>,
{
    fn eval(&self, phi: f64, r: f64) -> Result<Vec2> {
        self(phi, r)
    }
}

impl PlanarField for LinearPoincareData {
    fn eval(&self, phi: f64, r: f64) -> Result<Vec2> {
        Ok(self.field(phi, r))
    }
}

/// The displacement `F = P_T - id` of a Hamiltonian system.
#[derive(Debug, Clone)]
pub struct PoincareField<'a> {
    pub sys: &'a PlanarHamiltonianSystem,
    pub tol: Tolerances,
}

impl<'a> PoincareField<'a> {
    pub fn new(sys: &'a PlanarHamiltonianSystem, tol: Tolerances) -> Self {
        Self { sys, tol }
    }
}

impl PlanarField for PoincareField<'_> {
    fn eval(&self, phi: f64, r: f64) -> Result<Vec2> {
        Ok(poincare_t(self.sys, LiftedPoint::new(phi, r), &self.tol)?.displacement())
    }
}

/// `F + (2 M pi, 0)`.
#[derive(Debug, Clone, Copy)]
pub struct Shifted<'a, F: ?Sized> {
    pub inner: &'a F,
    pub shift: i64,
}

impl<F: PlanarField + ?Sized> PlanarField for Shifted<'_, F> {
    fn eval(&self, phi: f64, r: f64) -> Result<Vec2> {
        let v = self.inner.eval(phi, r)?;
        Ok(Vec2::new(v.x + TAU * self.shift as f64, v.y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DegreeOptions {
    /// Minimum admissible `|f|` on a loop is `eps_min * (1 + r)`.
    pub eps_min: f64,
    /// Uniform samples before adaptive refinement.
    pub initial_samples: usize,
    /// Largest accepted angle increment between consecutive samples.
    pub max_angle_step: f64,
    /// Refinement stops (with an error) below this parameter spacing.
    pub min_param_step: f64,
}

impl Default for DegreeOptions {
    fn default() -> Self {
        Self { eps_min: 1e-9, initial_samples: 64, max_angle_step: FRAC_PI_4, min_param_step: 1e-11 }
    }
}

impl DegreeOptions {
    pub fn from_tolerances(tol: &Tolerances) -> Self {
        Self { eps_min: tol.eps_min, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WindingResult {
    /// Counter-clockwise turns of the field along the loop.
    pub winding: i64,
    pub min_norm: f64,
    pub samples_used: usize,
}

/// Memoizing, budgeted field evaluation.
pub struct Evaluator<'a, F: PlanarField + ?Sized> {
    field: &'a F,
    cache: BTreeMap<(u64, u64), Vec2>,
    pub evaluations: usize,
    pub budget: usize,
}

impl<'a, F: PlanarField + ?Sized> Evaluator<'a, F> {
    pub fn new(field: &'a F, budget: usize) -> Self {
        Self { field, cache: BTreeMap::new(), evaluations: 0, budget }
    }

    pub fn at(&mut self, phi: f64, r: f64) -> Result<Vec2> {
        let key = (phi.to_bits(), r.to_bits());
        if let Some(v) = self.cache.get(&key) {
            return Ok(*v);
        }
        if self.evaluations >= self.budget {
            return Err(Error::BudgetExhausted { evaluations: self.evaluations });
        }
        self.evaluations += 1;
        let v = self.field.eval(phi, r)?;
        if !v.is_finite() {
            return Err(Error::Precondition(alloc::format!("non-finite field value at phi = {phi}, r = {r}")));
        }
        self.cache.insert(key, v);
        Ok(v)
    }
}

fn turn(a: Vec2, b: Vec2) -> f64 {
    a.cross(b).atan2(a.dot(b))
}

struct PathAngle {
    angle: f64,
    min_norm: f64,
    samples: usize,
    lo: Vec2,
    hi: Vec2,
}

impl PathAngle {
    fn new() -> Self {
        Self {
            angle: 0.0,
            min_norm: f64::INFINITY,
            samples: 0,
            lo: Vec2::new(f64::INFINITY, f64::INFINITY),
            hi: Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    fn note(&mut self, v: Vec2) {
        self.samples += 1;
        self.min_norm = self.min_norm.min(v.norm());
        self.lo = Vec2::new(self.lo.x.min(v.x), self.lo.y.min(v.y));
        self.hi = Vec2::new(self.hi.x.max(v.x), self.hi.y.max(v.y));
    }

    /// Whether the origin lies in the bounding box of the sampled values.
    fn straddles_origin(&self) -> bool {
        self.lo.x <= 0.0 && self.hi.x >= 0.0 && self.lo.y <= 0.0 && self.hi.y >= 0.0
    }
}

/// Accumulates the angle of `f` along the straight segment from `a` to `b`
/// in the `(phi, r)` plane.
fn segment_angle<F: PlanarField + ?Sized>(
    ev: &mut Evaluator<'_, F>,
    a: (f64, f64),
    b: (f64, f64),
    pieces: usize,
    opts: &DegreeOptions,
    acc: &mut PathAngle,
) -> Result<()> {
    let point = |s: f64| (a.0 + s * (b.0 - a.0), a.1 + s * (b.1 - a.1));
    let value = |ev: &mut Evaluator<'_, F>, s: f64, acc: &mut PathAngle| -> Result<Vec2> {
        let (phi, r) = point(s);
        let v = ev.at(phi, r)?;
        let norm = v.norm();
        if norm < opts.eps_min * (1.0 + r.abs()) {
            return Err(Error::NearZeroOnLoop { phi, r, norm });
        }
        acc.note(v);
        Ok(v)
    };
    let n = pieces.max(1);
    let mut nodes = Vec::with_capacity(n + 8);
    for k in 0..=n {
        let sk = k as f64 / n as f64;
        nodes.push((sk, value(ev, sk, acc)?));
    }
    if n >= 8 {
        // A strongly anisotropic field can dip through the origin's side in a
        // window far narrower than the sample spacing; probe each sampled
        // minimum of |f| so the dip gets a node.
        let mut extra = Vec::new();
        for k in 0..=n {
            let here = nodes[k].1.norm();
            let left = if k > 0 { nodes[k - 1].1.norm() } else { f64::INFINITY };
            let right = if k < n { nodes[k + 1].1.norm() } else { f64::INFINITY };
            if here <= left && here <= right {
                let lo = nodes[k.saturating_sub(1)].0;
                let hi = nodes[(k + 1).min(n)].0;
                let s_min = golden_min(|t| Ok(value(ev, t, acc)?.norm()), lo, hi, opts.min_param_step)?;
                extra.push((s_min, value(ev, s_min, acc)?));
            }
        }
        nodes.extend(extra);
        nodes.sort_by(|x, y| x.0.total_cmp(&y.0));
        nodes.dedup_by(|x, y| x.0 == y.0);
    }
    for w in nodes.windows(2) {
        let ((s_prev, v_prev), (s_next, v_next)) = (w[0], w[1]);
        // explicit stack of sub-intervals, processed left to right
        let mut stack = vec![(s_prev, v_prev, s_next, v_next)];
        while let Some((s0, v0, s1, v1)) = stack.pop() {
            let whole = turn(v0, v1);
            let sm = 0.5 * (s0 + s1);
            let vm = value(ev, sm, acc)?;
            let left = turn(v0, vm);
            let right = turn(vm, v1);
            let consistent = (left + right - whole).abs() < 1e-9
                && left.abs() < opts.max_angle_step
                && right.abs() < opts.max_angle_step;
            if whole.abs() < opts.max_angle_step && consistent {
                acc.angle += left + right;
            } else {
                if (s1 - s0) < opts.min_param_step {
                    return Err(Error::RefinementExhausted);
                }
                stack.push((sm, vm, s1, v1));
                stack.push((s0, v0, sm, vm));
            }
        }
    }
    Ok(())
}

fn golden_min(mut f: impl FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64, width: f64) -> Result<f64> {
    const G: f64 = 0.618_033_988_749_894_9;
    let mut c = b - G * (b - a);
    let mut d = a + G * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..80 {
        if b - a <= width {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - G * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + G * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { c } else { d })
}

fn to_winding(acc: &PathAngle) -> Result<WindingResult> {
    let turns = acc.angle / TAU;
    let w = turns.round();
    if (turns - w).abs() > 1e-6 {
        return Err(Error::NonIntegerWinding { turns });
    }
    Ok(WindingResult { winding: w as i64, min_norm: acc.min_norm, samples_used: acc.samples })
}

/// Counter-clockwise winding of the closed loop `phi -> f(phi)`, `phi` in `[0, 2 pi]`.
pub fn circle_winding(f: impl Fn(f64) -> Result<Vec2>, opts: &DegreeOptions) -> Result<WindingResult> {
    let field = |phi: f64, _r: f64| f(phi);
    let mut ev = Evaluator::new(&field, usize::MAX);
    let mut acc = PathAngle::new();
    segment_angle(&mut ev, (0.0, 0.0), (TAU, 0.0), opts.initial_samples, opts, &mut acc)?;
    to_winding(&acc)
}

fn circle_winding_at<F: PlanarField + ?Sized>(
    ev: &mut Evaluator<'_, F>,
    r: f64,
    opts: &DegreeOptions,
) -> Result<WindingResult> {
    let mut acc = PathAngle::new();
    segment_angle(ev, (0.0, r), (TAU, r), opts.initial_samples, opts, &mut acc)?;
    to_winding(&acc)
}

/// `D(f, r)`: minus the counter-clockwise winding of `phi -> f(phi, r)`.
pub fn degree_d<F: PlanarField + ?Sized>(f: &F, r: f64, opts: &DegreeOptions) -> Result<i64> {
    let mut ev = Evaluator::new(f, usize::MAX);
    Ok(-circle_winding_at(&mut ev, r, opts)?.winding)
}

/// `D(F + (2 M pi, 0), r)`.
pub fn degree_shifted<F: PlanarField + ?Sized>(f: &F, shift: i64, r: f64, opts: &DegreeOptions) -> Result<i64> {
    degree_d(&Shifted { inner: f, shift }, r, opts)
}

/// `D(F + (2 M pi, 0), r2) - D(F + (2 M pi, 0), r1)`.
pub fn annulus_degree<F: PlanarField + ?Sized>(
    f: &F,
    shift: i64,
    r1: f64,
    r2: f64,
    opts: &DegreeOptions,
) -> Result<i64> {
    Ok(degree_shifted(f, shift, r2, opts)? - degree_shifted(f, shift, r1, opts)?)
}

/// A rectangle `[phi0, phi1] x [r0, r1]` of the covering.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CellBox {
    pub phi0: f64,
    pub phi1: f64,
    pub r0: f64,
    pub r1: f64,
    pub depth: u32,
}

impl CellBox {
    pub fn centre(&self) -> (f64, f64) {
        (0.5 * (self.phi0 + self.phi1), 0.5 * (self.r0 + self.r1))
    }

    pub fn contains(&self, phi: f64, r: f64, slack: f64) -> bool {
        let (dp, dr) = ((self.phi1 - self.phi0) * slack, (self.r1 - self.r0) * slack);
        phi >= self.phi0 - dp && phi <= self.phi1 + dp && r >= self.r0 - dr && r <= self.r1 + dr
    }

    fn split(&self) -> [CellBox; 4] {
        let (pm, rm) = self.centre();
        let d = self.depth + 1;
        [
            CellBox { phi0: self.phi0, phi1: pm, r0: self.r0, r1: rm, depth: d },
            CellBox { phi0: pm, phi1: self.phi1, r0: self.r0, r1: rm, depth: d },
            CellBox { phi0: self.phi0, phi1: pm, r0: rm, r1: self.r1, depth: d },
            CellBox { phi0: pm, phi1: self.phi1, r0: rm, r1: self.r1, depth: d },
        ]
    }
}

struct CellScan {
    winding: i64,
    straddles: bool,
}

/// Winding of `f` along the counter-clockwise boundary of the cell in the
/// `(phi, r)` plane; equals the sum of the local indices inside.
fn scan_cell<F: PlanarField + ?Sized>(
    ev: &mut Evaluator<'_, F>,
    c: &CellBox,
    opts: &DegreeOptions,
) -> Result<CellScan> {
    let mut acc = PathAngle::new();
    let corners = [(c.phi0, c.r0), (c.phi1, c.r0), (c.phi1, c.r1), (c.phi0, c.r1), (c.phi0, c.r0)];
    for w in corners.windows(2) {
        segment_angle(ev, w[0], w[1], 2, opts, &mut acc)?;
    }
    let w = to_winding(&acc)?;
    Ok(CellScan { winding: w.winding, straddles: acc.straddles_origin() })
}

pub fn rectangle_winding<F: PlanarField + ?Sized>(f: &F, c: &CellBox, opts: &DegreeOptions) -> Result<WindingResult> {
    let mut ev = Evaluator::new(f, usize::MAX);
    let mut acc = PathAngle::new();
    let corners = [(c.phi0, c.r0), (c.phi1, c.r0), (c.phi1, c.r1), (c.phi0, c.r1), (c.phi0, c.r0)];
    for w in corners.windows(2) {
        segment_angle(&mut ev, w[0], w[1], opts.initial_samples / 4, opts, &mut acc)?;
    }
    to_winding(&acc)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZeroRecord {
    /// Polished zero, `phi` reduced to `[0, 2 pi)`.
    pub location: LiftedPoint,
    pub shift: i64,
    pub residual: f64,
    /// Winding of a small box around the zero (its local index).
    pub cell_degree: i64,
    /// Cells from the initial grid down to the one that produced the zero.
    pub cell_history: Vec<CellBox>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZeroSearchOptions {
    pub grid_phi: usize,
    pub grid_r: usize,
    /// Subdivision depth for cells with nonzero winding.
    pub max_depth: u32,
    /// Subdivision depth for zero-winding cells whose boundary values surround the origin.
    pub max_depth_suspicious: u32,
    pub tol_res: f64,
    pub delta_dup: f64,
    pub budget: usize,
    pub newton_max_iter: usize,
    pub r_min: f64,
    pub degree: DegreeOptions,
}

impl Default for ZeroSearchOptions {
    fn default() -> Self {
        Self::from_tolerances(&Tolerances::default())
    }
}

impl ZeroSearchOptions {
    pub fn from_tolerances(tol: &Tolerances) -> Self {
        Self {
            grid_phi: 32,
            grid_r: 8,
            max_depth: 10,
            max_depth_suspicious: 4,
            tol_res: tol.tol_res,
            delta_dup: tol.delta_dup,
            budget: tol.budget,
            newton_max_iter: 60,
            r_min: tol.r_min,
            degree: DegreeOptions::from_tolerances(tol),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZeroSearch {
    pub shift: i64,
    pub r1: f64,
    pub r2: f64,
    pub degree_inner: i64,
    pub degree_outer: i64,
    pub annulus_degree: i64,
    pub zeros: Vec<ZeroRecord>,
    /// Candidate regions left when the budget ran out or refinement bottomed out.
    pub unresolved: Vec<CellBox>,
    pub evaluations: usize,
    pub budget_exhausted: bool,
}

impl ZeroSearch {
    /// Sum of the local indices of the zeros found.
    pub fn index_sum(&self) -> i64 {
        self.zeros.iter().map(|z| z.cell_degree).sum()
    }

    /// A map whose fixed points have index at most `+1` must have at least
    /// `annulus_degree` zeros when that degree is positive. A single zero
    /// carrying degree `+2` means the search failed to resolve a pair.
    pub fn violates_index_bound(&self) -> bool {
        self.annulus_degree > 0 && (self.zeros.len() as i64) < self.annulus_degree
            || self.zeros.iter().any(|z| z.cell_degree > 1)
    }
}

fn residual<F: PlanarField + ?Sized>(ev: &mut Evaluator<'_, F>, p: (f64, f64)) -> Result<(Vec2, f64)> {
    let v = ev.at(p.0, p.1)?;
    Ok((v, v.norm()))
}

/// Damped Newton in the `(phi, r)` chart with a central-difference Jacobian
/// and a Levenberg–Marquardt step when the Jacobian is near singular.
pub fn newton_polish<F: PlanarField + ?Sized>(
    ev: &mut Evaluator<'_, F>,
    start: (f64, f64),
    opts: &ZeroSearchOptions,
    r_range: (f64, f64),
) -> Result<Option<((f64, f64), f64)>> {
    let mut p = start;
    let (mut v, mut res) = match residual(ev, p) {
        Ok(x) => x,
        Err(Error::NearOrigin { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let mut lambda = 0.0f64;
    // keep polishing below tol_res so degenerate zeros still localize tightly
    let target = opts.tol_res * 1e-4;
    for _ in 0..opts.newton_max_iter {
        if res <= target {
            return Ok(Some((p, res)));
        }
        let hp = 1e-6;
        let hr = 1e-6 * p.1.max(1e-3);
        let fpp = ev.at(p.0 + hp, p.1)?;
        let fpm = ev.at(p.0 - hp, p.1)?;
        let (frp, frm) = if p.1 - hr > opts.r_min {
            (ev.at(p.0, p.1 + hr)?, ev.at(p.0, p.1 - hr)?)
        } else {
            return Ok(None);
        };
        let j11 = (fpp.x - fpm.x) / (2.0 * hp);
        let j21 = (fpp.y - fpm.y) / (2.0 * hp);
        let j12 = (frp.x - frm.x) / (2.0 * hr);
        let j22 = (frp.y - frm.y) / (2.0 * hr);
        let det = j11 * j22 - j12 * j21;
        let scale = (j11 * j11 + j12 * j12 + j21 * j21 + j22 * j22).max(1e-300);
        let step = if det.abs() > 1e-10 * scale && lambda == 0.0 {
            Vec2::new(-(j22 * v.x - j12 * v.y) / det, -(-j21 * v.x + j11 * v.y) / det)
        } else {
            // (J^T J + mu I) d = -J^T v
            let mu = lambda.max(1e-8 * scale);
            let a11 = j11 * j11 + j21 * j21 + mu;
            let a12 = j11 * j12 + j21 * j22;
            let a22 = j12 * j12 + j22 * j22 + mu;
            let g1 = j11 * v.x + j21 * v.y;
            let g2 = j12 * v.x + j22 * v.y;
            let d = a11 * a22 - a12 * a12;
            Vec2::new(-(a22 * g1 - a12 * g2) / d, -(-a12 * g1 + a11 * g2) / d)
        };
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..16 {
            let q = (p.0 + alpha * step.x, p.1 + alpha * step.y);
            if q.1 > r_range.0 * 0.5 && q.1 < r_range.1 * 2.0 && q.1 > opts.r_min {
                if let Ok((vq, rq)) = residual(ev, q) {
                    if rq < res * (1.0 - 1e-4 * alpha) {
                        p = q;
                        v = vq;
                        res = rq;
                        accepted = true;
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        if !accepted && res <= opts.tol_res {
            break;
        }
        if accepted {
            lambda *= 0.1;
            if lambda < 1e-12 * scale {
                lambda = 0.0;
            }
        } else if lambda < 1e6 * scale {
            lambda = (lambda * 10.0).max(1e-6 * scale);
        } else {
            break;
        }
    }
    Ok(if res <= opts.tol_res { Some((p, res)) } else { None })
}

fn same_zero(a: &LiftedPoint, b: &LiftedPoint, delta: f64) -> bool {
    wrap_pi(a.phi - b.phi).hypot(a.r - b.r) < delta
}

/// Local index of a polished zero from the winding of a small box around it.
fn local_degree<F: PlanarField + ?Sized>(
    ev: &mut Evaluator<'_, F>,
    p: (f64, f64),
    opts: &ZeroSearchOptions,
) -> Result<i64> {
    let mut last = Err(Error::RefinementExhausted);
    for size in [1e-4, 1e-3, 3e-5, 1e-2] {
        let hr = size * p.1.clamp(1e-2, 1.0);
        let cell = CellBox { phi0: p.0 - size, phi1: p.0 + size, r0: p.1 - hr, r1: p.1 + hr, depth: 0 };
        let mut acc = PathAngle::new();
        let corners = [
            (cell.phi0, cell.r0),
            (cell.phi1, cell.r0),
            (cell.phi1, cell.r1),
            (cell.phi0, cell.r1),
            (cell.phi0, cell.r0),
        ];
        let mut ok = true;
        for w in corners.windows(2) {
            match segment_angle(ev, w[0], w[1], 4, &opts.degree, &mut acc) {
                Ok(()) => {}
                Err(e @ Error::BudgetExhausted { .. }) => return Err(e),
                Err(e) => {
                    last = Err(e);
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            match to_winding(&acc) {
                Ok(w) => return Ok(w.winding),
                Err(e) => last = Err(e),
            }
        }
    }
    last
}

// Keeps grid lines off symmetry axes, where zeros of symmetric maps sit.
const GRID_JITTER: f64 = 0.0137;

/// Finds zeros of `f + (2 M pi, 0)` in `[0, 2 pi) x [r1, r2]` by recursive
/// cell subdivision guided by boundary windings, then Newton polishing.
pub fn locate_zeros<F: PlanarField + ?Sized>(
    f: &F,
    shift: i64,
    r1: f64,
    r2: f64,
    opts: &ZeroSearchOptions,
) -> Result<ZeroSearch> {
    if !(r1 > 0.0 && r2 > r1) {
        return Err(Error::Precondition(alloc::format!("invalid annulus [{r1}, {r2}]")));
    }
    let shifted = Shifted { inner: f, shift };
    let mut ev = Evaluator::new(&shifted, opts.budget);
    let inner = -circle_winding_at(&mut ev, r1, &opts.degree)?.winding;
    let outer = -circle_winding_at(&mut ev, r2, &opts.degree)?.winding;

    let mut search = ZeroSearch {
        shift,
        r1,
        r2,
        degree_inner: inner,
        degree_outer: outer,
        annulus_degree: outer - inner,
        zeros: Vec::new(),
        unresolved: Vec::new(),
        evaluations: 0,
        budget_exhausted: false,
    };

    let ratio = r2 / r1;
    let radius = |k: usize| {
        if k == 0 {
            r1
        } else if k == opts.grid_r {
            r2
        } else {
            r1 * ratio.powf((k as f64 + GRID_JITTER) / opts.grid_r as f64)
        }
    };
    let mut queue: Vec<(CellBox, Vec<CellBox>)> = Vec::new();
    for j in (0..opts.grid_r).rev() {
        for i in (0..opts.grid_phi).rev() {
            let c = CellBox {
                phi0: TAU * (i as f64 + GRID_JITTER) / opts.grid_phi as f64,
                phi1: TAU * (i as f64 + 1.0 + GRID_JITTER) / opts.grid_phi as f64,
                r0: radius(j),
                r1: radius(j + 1),
                depth: 0,
            };
            queue.push((c, vec![c]));
        }
    }

    let mut candidates: Vec<((f64, f64), Vec<CellBox>)> = Vec::new();
    while let Some((cell, history)) = queue.pop() {
        let step = process_cell(&mut ev, &cell, opts);
        match step {
            Err(Error::BudgetExhausted { .. }) => {
                search.budget_exhausted = true;
                search.unresolved.push(cell);
                search.unresolved.extend(queue.drain(..).map(|(c, _)| c));
                break;
            }
            Err(e) => return Err(e),
            Ok(CellOutcome::Empty) => {}
            Ok(CellOutcome::Zero(p)) => candidates.push((p, history)),
            Ok(CellOutcome::Split(near)) => {
                if let Some(p) = near {
                    candidates.push((p, history.clone()));
                }
                let limit = if near.is_some() || matches!(step, Ok(CellOutcome::Split(_))) {
                    opts.max_depth
                } else {
                    opts.max_depth_suspicious
                };
                if cell.depth < limit {
                    for sub in cell.split().into_iter().rev() {
                        let mut h = history.clone();
                        h.push(sub);
                        queue.push((sub, h));
                    }
                } else {
                    search.unresolved.push(cell);
                }
            }
            Ok(CellOutcome::Suspicious) => {
                if cell.depth < opts.max_depth_suspicious {
                    for sub in cell.split().into_iter().rev() {
                        let mut h = history.clone();
                        h.push(sub);
                        queue.push((sub, h));
                    }
                }
            }
        }
    }

    for (start, history) in candidates {
        let polished = match newton_polish(&mut ev, start, opts, (r1, r2)) {
            Ok(p) => p,
            Err(Error::BudgetExhausted { .. }) => {
                search.budget_exhausted = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let Some(((phi, r), res)) = polished else { continue };
        if r < r1 || r > r2 {
            continue;
        }
        let loc = LiftedPoint::new(reduce_angle(phi), r);
        if search.zeros.iter().any(|z| same_zero(&z.location, &loc, opts.delta_dup)) {
            continue;
        }
        let degree = match local_degree(&mut ev, (phi, r), opts) {
            Ok(d) => d,
            Err(Error::BudgetExhausted { .. }) => {
                search.budget_exhausted = true;
                break;
            }
            Err(_) => 0,
        };
        search.zeros.push(ZeroRecord {
            location: loc,
            shift,
            residual: res,
            cell_degree: degree,
            cell_history: history,
        });
    }
    search.zeros.sort_by(|a, b| {
        a.location
            .phi
            .partial_cmp(&b.location.phi)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.location.r.partial_cmp(&b.location.r).unwrap_or(core::cmp::Ordering::Equal))
    });
    search.evaluations = ev.evaluations;
    Ok(search)
}

enum CellOutcome {
    Empty,
    /// Newton start point for a cell that needs no further subdivision.
    Zero((f64, f64)),
    /// Subdivide; optionally also try Newton from the given point.
    Split(Option<(f64, f64)>),
    /// Zero winding but boundary values surround the origin.
    Suspicious,
}

fn process_cell<F: PlanarField + ?Sized>(
    ev: &mut Evaluator<'_, F>,
    cell: &CellBox,
    opts: &ZeroSearchOptions,
) -> Result<CellOutcome> {
    let scan = match scan_cell(ev, cell, &opts.degree) {
        Ok(s) => s,
        Err(Error::NearZeroOnLoop { phi, r, .. }) => return Ok(CellOutcome::Split(Some((phi, r)))),
        Err(Error::RefinementExhausted) | Err(Error::NonIntegerWinding { .. }) => {
            return Ok(CellOutcome::Split(Some(cell.centre())))
        }
        Err(e) => return Err(e),
    };
    match scan.winding.abs() {
        0 if scan.straddles => {
            if cell.depth + 1 >= opts.max_depth_suspicious {
                Ok(CellOutcome::Zero(cell.centre()))
            } else {
                Ok(CellOutcome::Suspicious)
            }
        }
        0 => Ok(CellOutcome::Empty),
        1 => {
            // accept the cell once Newton from its centre lands inside it
            match newton_polish(ev, cell.centre(), opts, (cell.r0, cell.r1)) {
                Ok(Some(((phi, r), _))) if cell.contains(phi, r, 0.0) => Ok(CellOutcome::Zero((phi, r))),
                Ok(_) => Ok(CellOutcome::Split(None)),
                Err(e) => Err(e),
            }
        }
        _ => Ok(CellOutcome::Split(Some(cell.centre()))),
    }
}
