//! One PASS/FAIL line per acceptance criterion.

mod common;

use std::f64::consts::{PI, TAU};
use std::sync::Arc;
use std::time::{Duration, Instant};

use pbm_core::catalog::{linear_like, lookup, NAMES};
use pbm_core::certify::{certify, find_twist_radii, indices, rotation_margin, CertifyOptions};
use pbm_core::degree::{degree_shifted, locate_zeros, DegreeOptions, PoincareField, ZeroSearchOptions};
use pbm_core::lifted::{area_preservation_defect, default_area_step, limit_agreement, poincare_t, Region};
use pbm_core::linear::{closed_form_poincare, index_of_linear, quadrant_sequence, verify_properties, Quadrant};
use pbm_core::second_order::{
    certify_linear_like, crossing_bound, index_of_hill, time_to_exit, LinearLikeOptions, ScalarCoefficient,
};
use pbm_core::{LiftedPoint, LinearSystem, MaslovIndex, Mat2, Result as CoreResult, Tolerances, Vec2};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn ok<T>(r: CoreResult<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn closed_form_agreement() -> Outcome {
    let start = Instant::now();
    let tol = Tolerances::default();
    let (mut worst_theta, mut worst_ratio) = (0.0f64, 0.0f64);
    for m in common::battery(101, 50) {
        let sys = m.system.to_hamiltonian();
        for k in 0..256 {
            let phi = TAU * k as f64 / 256.0;
            let (theta, ratio) = closed_form_poincare(&m.data, phi);
            let rec = ok(poincare_t(&sys, LiftedPoint::new(phi, 1.0), &tol))?;
            worst_theta = worst_theta.max((rec.f1 - theta).abs());
            worst_ratio = worst_ratio.max((rec.r_t / rec.r0 - ratio).abs() / ratio);
        }
    }
    let elapsed = start.elapsed();
    check(worst_theta <= 1e-6 && worst_ratio <= 1e-6, format!("theta {worst_theta:e}, ratio {worst_ratio:e}"))?;
    check(elapsed <= Duration::from_secs(60), format!("took {elapsed:?}"))?;
    Ok(format!("max |dTheta| = {worst_theta:.1e}, max rel dR = {worst_ratio:.1e}, {elapsed:.1?}"))
}

fn index_table() -> Outcome {
    let tol = Tolerances::default();
    let table = [
        (Mat2::IDENTITY, PI, -1, 0),
        (Mat2::scalar(-1.0), PI, 1, 0),
        (Mat2::diag(-1.0, 1.0), 1.0, 0, 0),
        (Mat2::diag(0.0, 1.0), 1.0, -1, 1),
        (Mat2::scalar(-1.0), 2.0 * PI, 1, 2),
    ];
    for (l, period, index, nullity) in table {
        let got = ok(index_of_linear(&LinearSystem::constant(period, l), &tol))?;
        check(got == MaslovIndex { index, nullity }, format!("{l:?}, T = {period}: {got:?}"))?;
    }
    Ok("5/5 exact".into())
}

fn degree_table() -> Outcome {
    let tol = Tolerances::default();
    let opts = DegreeOptions::default();
    let mut battery = common::battery(103, 24);
    battery.extend(common::mathieu_even(113, 6));
    let mut seen: Vec<i64> = Vec::new();
    let mut checks = 0;
    for m in &battery {
        let sys = m.system.to_hamiltonian();
        let field = PoincareField::new(&sys, tol);
        let i = m.data.index.index;
        seen.push(i);
        for shift in -3..=3 {
            let expect = if i == 2 * shift { -2 } else { 0 };
            for r in [0.5, 3.0] {
                let d = ok(degree_shifted(&field, shift, r, &opts))?;
                check(d == expect, format!("index {i}, M = {shift}, r = {r}: degree {d}"))?;
                checks += 1;
            }
        }
    }
    seen.sort();
    seen.dedup();
    check(seen.iter().any(|i| i % 2 == 0 && *i != 0), "battery has no nonzero even index")?;
    Ok(format!("{checks} degrees exact, indices {seen:?}"))
}

fn property_suite() -> Outcome {
    let mut quadrant_checked = 0;
    let battery = common::battery(104, 60);
    for m in &battery {
        let rep = verify_properties(&m.data, 256, 1e-6);
        check(rep.all_ok(), format!("{rep:?}"))?;
        if m.data.index.index == 0 && m.data.endpoint.theta_bar > 0.0 {
            let seq = quadrant_sequence(&m.data, 1.0, 4000);
            check(
                seq == [Quadrant::IV, Quadrant::I, Quadrant::II, Quadrant::III, Quadrant::IV],
                format!("quadrant sequence {seq:?}"),
            )?;
            quadrant_checked += 1;
        }
    }
    check(quadrant_checked > 0, "no index-0 system with theta_bar > 0 in the battery")?;
    let mut worst: f64 = 0.0;
    for d in [common::constant(Mat2::diag(0.0, 1.0), 1.0), common::constant(Mat2::scalar(-1.0), 2.0 * PI)] {
        let rep = verify_properties(&d, 256, 1e-6);
        check(rep.all_ok(), format!("resonant {rep:?}"))?;
        worst = worst.max((rep.max_g - rep.theta_bar.abs()).abs());
    }
    Ok(format!("{} systems, {quadrant_checked} quadrant sequences, resonant equality {worst:.1e}", battery.len()))
}

fn monotonicity() -> Outcome {
    let tol = Tolerances::default();
    let values = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0];
    let mut pairs = 0;
    for period in [1.0, PI] {
        let idx: Vec<MaslovIndex> = values
            .iter()
            .map(|&a| index_of_hill(period, Arc::new(move |_| a), &tol))
            .collect::<CoreResult<_>>()
            .map_err(|e| e.to_string())?;
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                // the index decreases as the coefficient grows
                let (a, b) = (idx[i], idx[j]);
                check(
                    b.index + b.nullity as i64 <= a.index,
                    format!("T = {period}: a = {} -> {a:?}, b = {} -> {b:?}", values[i], values[j]),
                )?;
                pairs += 1;
            }
        }
    }
    Ok(format!("{pairs} ordered pairs, a < b => i(b) + nu(b) <= i(a)"))
}

fn asymptotic_limits() -> Outcome {
    let opts = CertifyOptions::default();
    let mut notes = Vec::new();
    for name in ["figure1", "figure2"] {
        let sys = lookup(name).unwrap().system;
        let (i0, i_inf) = ok(indices(&sys, &opts.tol))?;
        let radii = ok(find_twist_radii(&sys, i0.index, i_inf.index, &opts))?;
        let m0 = ok(rotation_margin(&sys, i0.index, radii.r0, 256, &opts.tol))?;
        let m_inf = ok(rotation_margin(&sys, i_inf.index, radii.r_infty, 256, &opts.tol))?;
        check(m0 >= 1e-3 && m_inf >= 1e-3, format!("{name}: margins {m0}, {m_inf}"))?;
        let zero = ok(limit_agreement(&sys, Region::Zero, &[1e-1, 1e-3], 64, &opts.tol))?;
        let inf = ok(limit_agreement(&sys, Region::Infinity, &[1e1, 1e3], 64, &opts.tol))?;
        let (fz, fi) = (zero[0].total() / zero[1].total(), inf[0].total() / inf[1].total());
        check(fz >= 10.0 && fi >= 10.0, format!("{name}: reductions {fz:.1}x, {fi:.1}x"))?;
        notes.push(format!("{name} margins {m0:.2}/{m_inf:.2} reductions {fz:.0}x/{fi:.0}x"));
    }
    Ok(notes.join("; "))
}

fn area_preservation() -> Outcome {
    let tol = Tolerances::default();
    let mut rng = common::rng(107);
    let mut worst: f64 = 0.0;
    for name in NAMES {
        let sys = lookup(name).unwrap().system;
        for _ in 0..20 {
            let p = LiftedPoint::new(rng.gen_range(0.0..TAU), rng.gen_range(0.2..3.0));
            worst = worst.max(ok(area_preservation_defect(&sys, p, default_area_step(p.r), &tol))?);
        }
    }
    check(worst <= 1e-4, format!("defect {worst:e}"))?;
    Ok(format!("{} systems x 20 points, max |det - 1| = {worst:.1e}", NAMES.len()))
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let opts = CertifyOptions::default();
    let mut notes = Vec::new();
    for name in ["figure1", "figure2", "figure3"] {
        let entry = lookup(name).unwrap();
        let cert = ok(certify(&entry.system, &opts))?;
        let expected = entry.expected.unwrap();
        check(cert.valid, format!("{name}: invalid, {:?}", cert.diagnostics))?;
        check(
            cert.found.len() == cert.guaranteed_count && cert.guaranteed_count == expected.count,
            format!(
                "{name}: found {} guaranteed {} expected {}",
                cert.found.len(),
                cert.guaranteed_count,
                expected.count
            ),
        )?;
        for s in &cert.found {
            check(s.residual <= 1e-10, format!("{name}: residual {}", s.residual))?;
            let turns = (s.orbit.last().phi - s.orbit.samples[0].phi) / TAU;
            check((turns - s.winding as f64).abs() <= 1e-9, format!("{name}: turns {turns}"))?;
        }
        notes.push(format!("{name} -> {}", cert.found.len()));
    }
    let elapsed = start.elapsed();
    check(elapsed <= Duration::from_secs(300), format!("took {elapsed:?}"))?;
    Ok(format!("{}, {elapsed:.1?}", notes.join(", ")))
}

fn crossing_time_bound() -> Outcome {
    let tol = Tolerances::default();
    let free = ScalarCoefficient::new(1.0, |_, _| 0.0);
    let est = ok(crossing_bound(&free, 1.0, -1.0, 10.0))?;
    let t = ok(time_to_exit(&free, 1.0, 0.0, -1.0, 10.0, 1.0, &tol))?.ok_or("free particle never left")?;
    check((t - est.bound).abs() <= 1e-9, format!("free particle {t} vs {}", est.bound))?;
    let mut rng = common::rng(109);
    let mut worst_slack = f64::INFINITY;
    for _ in 0..100 {
        let (a, c): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(0.0..1.0));
        let q = ScalarCoefficient::new(1.0, move |t, x: f64| a + c * (x * x + (2.0 * PI * t).cos()));
        let r_bar = rng.gen_range(0.5..2.0);
        let x1 = rng.gen_range(-r_bar..r_bar);
        let t1 = rng.gen_range(0.0..1.0);
        let probe = ok(crossing_bound(&q, r_bar, 0.0, 1e9))?;
        let y1 = probe.threshold * rng.gen_range(1.01..3.0) * if rng.gen() { 1.0 } else { -1.0 };
        let est = ok(crossing_bound(&q, r_bar, x1, y1))?;
        let t = ok(time_to_exit(&q, r_bar, t1, x1, y1, 1.0, &tol))?.ok_or("solution did not leave the strip")?;
        check(t <= est.bound, format!("measured {t} > bound {}", est.bound))?;
        worst_slack = worst_slack.min(est.bound - t);
    }
    Ok(format!("100 trials, min slack {worst_slack:.2e}; free particle |t - 0.2| = {:.1e}", (t - 0.2).abs()))
}

fn linear_like_pipeline() -> Outcome {
    let tol = Tolerances::default();
    let e = linear_like("linear-like").unwrap();
    let (b0, bi) = ok(e.bounds(&tol))?;
    let res = ok(certify_linear_like(&e.q, &b0, &bi, &LinearLikeOptions::default()))?;
    let cert = &res.certificate;
    let expected = (e.i_infty - e.i0).unsigned_abs() as usize;
    check(cert.valid, format!("invalid: {:?}", cert.diagnostics))?;
    check(cert.guaranteed_count == expected, format!("guaranteed {}", cert.guaranteed_count))?;
    check(cert.found.len() >= cert.guaranteed_count, format!("found {}", cert.found.len()))?;

    let a = linear_like("asymptotically-linear").unwrap();
    let (b0, bi) = ok(a.bounds(&tol))?;
    let via = ok(certify_linear_like(&a.q, &b0, &bi, &LinearLikeOptions::default()))?.certificate;
    let direct = ok(certify(&lookup("figure1").unwrap().system, &CertifyOptions::default()))?;
    check(via.found.len() == direct.found.len(), "solution counts differ")?;
    for s in &via.found {
        let p = s.orbit.samples[0].point();
        check(
            direct.found.iter().any(|d| d.winding == s.winding && (d.orbit.samples[0].point() - p).norm() <= 1e-6),
            format!("{p:?} not found directly"),
        )?;
    }
    Ok(format!(
        "linear-like: guaranteed {} found {}; asymptotically linear: {} shared solutions",
        cert.guaranteed_count,
        cert.found.len(),
        via.found.len()
    ))
}

fn pair_map(a: Vec2, b: Vec2) -> impl Fn(f64, f64) -> CoreResult<Vec2> {
    move |phi: f64, r: f64| {
        let w = Vec2::new(r * phi.cos(), -r * phi.sin());
        let (p, q) = (w - a, w - b);
        Ok(Vec2::new(p.x * q.x - p.y * q.y, p.x * q.y + p.y * q.x))
    }
}

fn case_c_exclusion() -> Outcome {
    let opts = ZeroSearchOptions::default();
    let mut rng = common::rng(111);
    let (mut resolved, mut flagged) = (0, 0);
    for _ in 0..25 {
        let r = rng.gen_range(0.7..1.3);
        let phi = rng.gen_range(0.0..TAU);
        let sep = 10f64.powf(rng.gen_range(-5.0..-0.5));
        let a = Vec2::new(r * phi.cos(), -r * phi.sin());
        let zs = ok(locate_zeros(&pair_map(a, a + Vec2::new(sep, 0.0)), 0, 0.5, 1.5, &opts))?;
        check(zs.annulus_degree == 2, format!("annulus degree {}", zs.annulus_degree))?;
        let single_success = zs.zeros.len() == 1 && !zs.violates_index_bound();
        check(!single_success, format!("single-zero success at separation {sep:e}"))?;
        if zs.violates_index_bound() {
            flagged += 1;
        } else {
            resolved += 1;
        }
    }
    // (w - 1)^2: one zero carrying degree +2
    let one = Vec2::new(1.0, 0.0);
    let zs = ok(locate_zeros(&pair_map(one, one), 0, 0.5, 1.5, &opts))?;
    check(zs.violates_index_bound(), "degenerate input not flagged")?;
    // (w - 1)^2 - eps^2 with eps = 1e-3: two simple zeros
    let eps = Vec2::new(1e-3, 0.0);
    let zs = ok(locate_zeros(&pair_map(one - eps, one + eps), 0, 0.5, 1.5, &opts))?;
    check(
        zs.zeros.len() == 2 && !zs.violates_index_bound(),
        format!("near-degenerate pair: {} zeros", zs.zeros.len()),
    )?;
    Ok(format!("25 seeded annuli: {resolved} resolved, {flagged} flagged; degenerate input flagged; near-degenerate pair resolved"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("closed-form Poincare map vs integration", closed_form_agreement),
        ("index oracle table", index_table),
        ("degree table of shifted linear fields", degree_table),
        ("property suite and quadrant sequence", property_suite),
        ("index monotonicity", monotonicity),
        ("asymptotic limits and twist margins", asymptotic_limits),
        ("area preservation", area_preservation),
        ("end-to-end certificates", end_to_end),
        ("crossing time bound", crossing_time_bound),
        ("linear-like pipeline", linear_like_pipeline),
        ("degree +2 exclusion", case_c_exclusion),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
