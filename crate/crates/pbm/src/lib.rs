//! Command line front end for `pbm-core`: systems from expressions or the
//! built-in catalog, configuration files, and CSV, JSON and SVG output.

// `!(a > b)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod expr;
pub mod svg;

use std::f64::consts::TAU;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use pbm_core::catalog::{self, LINEAR_LIKE_NAMES, NAMES};
use pbm_core::certify::{certify, indices, CertifyOptions};
use pbm_core::degree::{degree_shifted, locate_zeros, DegreeOptions, PoincareField};
use pbm_core::lifted::{flow_lifted, linearization_data, poincare_t, Region};
use pbm_core::second_order::{certify_linear_like, LinearLikeOptions};
use pbm_core::{project, LiftedPoint, MaslovIndex, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use config::{resolve, Resolved, RunConfig};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "pbm", version, about = "Maslov indices, Poincaré maps and certified periodic solutions")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Catalog system, instead of (or overriding) the configured one.
    #[arg(long, global = true)]
    pub system: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// ODE tolerance (absolute and relative).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maslov index and nullity of a linear system (or of a linearization).
    Index {
        #[arg(long)]
        at: Option<String>,
    },
    /// CSV table `phi,F1,F2` of the lifted Poincaré displacement at radius r.
    Poincare {
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Degree of the shifted displacement on the circle of radius r.
    Degree {
        #[arg(long)]
        r: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        shift: Option<i64>,
    },
    /// Zeros of the shifted displacement in the annulus r1 <= r <= r2.
    Find {
        #[arg(long, allow_hyphen_values = true)]
        shift: Option<i64>,
        #[arg(long)]
        r1: Option<f64>,
        #[arg(long)]
        r2: Option<f64>,
    },
    /// Full certificate of periodic solutions.
    Certify,
    /// SVG phase portrait with the periodic points marked.
    Portrait {
        #[arg(long)]
        extent: Option<f64>,
        #[arg(long)]
        trajectories: Option<usize>,
    },
    /// Built-in systems and their validated metadata.
    Catalog {
        #[arg(long)]
        verify: bool,
    },
}

impl Cli {
    /// Config file merged with the flags.
    pub fn run_config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(name) = &self.system {
            cfg.system = config::SystemConfig { catalog: Some(name.clone()), ..Default::default() };
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(CliError::Config(format!("--tol must lie in (0, 1), got {tol}")));
            }
            cfg.tolerances.ode_abs = tol;
            cfg.tolerances.ode_rel = tol;
        }
        if self.seed.is_some() {
            cfg.seed = self.seed;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        let p = &mut cfg.params;
        match &self.command {
            Command::Index { at } => set(&mut p.at, at.clone()),
            Command::Poincare { r, samples } => {
                set(&mut p.r, *r);
                set(&mut p.samples, *samples);
            }
            Command::Degree { r, shift } => {
                set(&mut p.r, *r);
                set(&mut p.shift, *shift);
            }
            Command::Find { shift, r1, r2 } => {
                set(&mut p.shift, *shift);
                set(&mut p.r1, *r1);
                set(&mut p.r2, *r2);
            }
            Command::Portrait { extent, trajectories } => {
                if extent.is_some() {
                    p.extent = *extent;
                }
                set(&mut p.trajectories, *trajectories);
            }
            Command::Certify | Command::Catalog { .. } => {}
        }
        Ok(cfg)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// What a command produced, and whether it still counts as a failure.
pub struct Output {
    pub body: String,
    pub failure: Option<CliError>,
}

impl Output {
    fn ok(body: String) -> Self {
        Self { body, failure: None }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    let cfg = cli.run_config()?;
    let out = match &cli.command {
        Command::Catalog { verify } => {
            if *verify {
                verify_catalog(&cfg)
            } else {
                Ok(Output::ok(json(&list_catalog())))
            }
        }
        command => {
            let sys = resolve(&cfg)?;
            match command {
                Command::Index { .. } => index(&cfg, &sys),
                Command::Poincare { .. } => poincare(&cfg, &sys),
                Command::Degree { .. } => degree(&cfg, &sys),
                Command::Find { .. } => find(&cfg, &sys),
                Command::Certify => run_certify(&cfg, &sys),
                Command::Portrait { .. } => portrait(&cfg, &sys),
                Command::Catalog { .. } => unreachable!(),
            }
        }
    }?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &out.body)?,
        None => std::io::stdout().write_all(out.body.as_bytes())?,
    }
    Ok(out)
}

/// Parses `argv`, runs, reports errors as JSON on stderr and returns the exit code.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let err = CliError::Config(e.to_string().trim_end().to_string());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("{}", e.to_json());
        return e.exit_code();
    }
    match execute(&cli) {
        Ok(Output { failure: None, .. }) => 0,
        Ok(Output { failure: Some(e), .. }) | Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("PBM_THREADS") else { return Ok(()) };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("PBM_THREADS must be a positive integer, got `{value}`")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn certify_options(cfg: &RunConfig) -> CertifyOptions {
    CertifyOptions::with_tolerances(cfg.tolerances)
}

fn index(cfg: &RunConfig, sys: &Resolved) -> Result<Output, CliError> {
    let region = cfg.params.region()?;
    let idx: MaslovIndex = match sys {
        Resolved::Planar { system, .. } => linearization_data(system, region, &cfg.tolerances)?.index,
        Resolved::LinearLike { at_zero, at_infinity, .. } => match region {
            Region::Zero => at_zero.index,
            Region::Infinity => at_infinity.index,
        },
    };
    Ok(Output::ok(json(&idx)))
}

fn poincare(cfg: &RunConfig, sys: &Resolved) -> Result<Output, CliError> {
    let (r, n) = (cfg.params.r, cfg.params.samples);
    let rows: Vec<_> = (0..n)
        .into_par_iter()
        .map(|k| {
            let phi = TAU * k as f64 / n as f64;
            poincare_t(sys.system(), LiftedPoint::new(phi, r), &cfg.tolerances).map(|rec| (phi, rec.f1, rec.f2))
        })
        .collect::<Result<_, _>>()?;
    let mut body = String::from("phi,F1,F2\n");
    for (phi, f1, f2) in rows {
        body.push_str(&format!("{phi:.16e},{f1:.16e},{f2:.16e}\n"));
    }
    Ok(Output::ok(body))
}

#[derive(Serialize)]
struct DegreeReport {
    r: f64,
    shift: i64,
    degree: i64,
}

fn degree(cfg: &RunConfig, sys: &Resolved) -> Result<Output, CliError> {
    let field = PoincareField::new(sys.system(), cfg.tolerances);
    let (r, shift) = (cfg.params.r, cfg.params.shift);
    let d = degree_shifted(&field, shift, r, &DegreeOptions::from_tolerances(&cfg.tolerances))?;
    Ok(Output::ok(json(&DegreeReport { r, shift, degree: d })))
}

fn find(cfg: &RunConfig, sys: &Resolved) -> Result<Output, CliError> {
    let opts = certify_options(cfg);
    let field = PoincareField::new(sys.system(), opts.tol);
    let p = &cfg.params;
    let search = locate_zeros(&field, p.shift, p.r1, p.r2, &opts.search)?;
    let failure = search
        .budget_exhausted
        .then(|| CliError::Budget(format!("evaluation budget exhausted after {} evaluations", search.evaluations)));
    Ok(Output { body: json(&search), failure })
}

fn run_certify(cfg: &RunConfig, sys: &Resolved) -> Result<Output, CliError> {
    let opts = certify_options(cfg);
    let (body, valid, diagnostics) = match sys {
        Resolved::Planar { system, .. } => {
            let cert = certify(system, &opts)?;
            (json(&cert), cert.valid, cert.diagnostics)
        }
        Resolved::LinearLike { q, at_zero, at_infinity, r_hat, .. } => {
            let lo = LinearLikeOptions { r_hat: *r_hat, certify: opts, ..LinearLikeOptions::default() };
            let cert = certify_linear_like(q, at_zero, at_infinity, &lo)?;
            (json(&cert), cert.certificate.valid, cert.certificate.diagnostics)
        }
    };
    let failure =
        (!valid).then(|| CliError::InvalidCertificate(format!("certificate invalid: {}", diagnostics.join("; "))));
    Ok(Output { body, failure })
}

fn portrait(cfg: &RunConfig, sys: &Resolved) -> Result<Output, CliError> {
    let opts = certify_options(cfg);
    let mut points: Vec<(String, Vec2)> = Vec::new();
    let mut circles = Vec::new();
    let mut note = None;
    let found = match sys {
        Resolved::Planar { system, .. } => certify(system, &opts).map(|c| (c.found, c.twist_radii)),
        Resolved::LinearLike { q, at_zero, at_infinity, r_hat, .. } => {
            let lo = LinearLikeOptions { r_hat: *r_hat, certify: opts, ..LinearLikeOptions::default() };
            certify_linear_like(q, at_zero, at_infinity, &lo).map(|c| (c.certificate.found, c.certificate.twist_radii))
        }
    };
    match found {
        Ok((found, radii)) => {
            if let Some(radii) = radii {
                circles = vec![radii.r0, radii.r_infty];
            }
            let mut unnamed = 0;
            for s in found {
                let p = project(s.initial);
                let label = match sys.equilibria().iter().find(|e| (e.point - p).norm() < 1e-3) {
                    Some(e) => e.label.to_string(),
                    None => {
                        unnamed += 1;
                        format!("P{unnamed}")
                    }
                };
                points.push((label, p));
            }
        }
        Err(e) => {
            note = Some(format!("no certificate: {e}"));
            points.extend(sys.equilibria().iter().map(|e| (e.label.to_string(), e.point)));
        }
    }
    let extent = cfg.params.extent.unwrap_or_else(|| {
        let far = points.iter().map(|(_, p)| p.norm()).fold(1.0, f64::max);
        (1.8 * far).max(2.0)
    });
    if !(extent > 0.0) {
        return Err(CliError::Config(format!("extent must be positive, got {extent}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
    let starts: Vec<Vec2> = (0..cfg.params.trajectories)
        .map(|_| Vec2::new(rng.gen_range(-extent..extent), rng.gen_range(-extent..extent)))
        .collect();
    let horizon = cfg.params.periods * sys.system().period();
    let trajectories: Vec<Vec<Vec2>> = starts
        .par_iter()
        .filter_map(|z| {
            let p = LiftedPoint::new((-z.y).atan2(z.x), z.norm());
            // trajectories that approach the origin or blow up are dropped
            flow_lifted(sys.system(), p, 0.0, horizon, &cfg.tolerances)
                .ok()
                .map(|orbit| orbit.samples.iter().map(|s| s.point()).collect())
        })
        .collect();
    let picture = svg::Portrait { title: sys.name().to_string(), extent, trajectories, points, circles };
    let mut body = picture.render();
    if let Some(note) = note {
        body.push_str(&format!("<!-- {} -->\n", note.replace("--", "- -")));
    }
    Ok(Output::ok(body))
}

#[derive(Serialize)]
struct CatalogRow {
    name: &'static str,
    kind: &'static str,
    description: &'static str,
    i0: Option<i64>,
    i_infty: Option<i64>,
    count: Option<usize>,
    equilibria: Vec<catalog::LabeledPoint>,
}

fn list_catalog() -> Vec<CatalogRow> {
    let mut rows: Vec<CatalogRow> = NAMES
        .iter()
        .map(|n| {
            let e = catalog::lookup(n).expect("listed names resolve");
            CatalogRow {
                name: e.name,
                kind: "planar",
                description: e.description,
                i0: e.expected.map(|x| x.i0),
                i_infty: e.expected.map(|x| x.i_infty),
                count: e.expected.map(|x| x.count),
                equilibria: e.equilibria,
            }
        })
        .collect();
    rows.extend(LINEAR_LIKE_NAMES.iter().map(|n| {
        let e = catalog::linear_like(n).expect("listed names resolve");
        CatalogRow {
            name: e.name,
            kind: "second-order",
            description: e.description,
            i0: Some(e.i0),
            i_infty: Some(e.i_infty),
            count: None,
            equilibria: Vec::new(),
        }
    }));
    rows
}

#[derive(Serialize)]
struct Verification {
    name: &'static str,
    ok: bool,
    detail: String,
}

fn verify_entry(name: &'static str, cfg: &RunConfig) -> Verification {
    let opts = certify_options(cfg);
    let result: Result<(bool, String), pbm_core::Error> = (|| {
        if let Some(e) = catalog::lookup(name) {
            let Some(expected) = e.expected else {
                let i0 = linearization_data(&e.system, Region::Zero, &opts.tol)?.index;
                return Ok((i0.is_resonant(), format!("resonant, nullity {}", i0.nullity)));
            };
            let (i0, i_inf) = indices(&e.system, &opts.tol)?;
            let mut ok = (i0.index, i_inf.index) == (expected.i0, expected.i_infty);
            let mut detail = format!("i0 = {}, i_infty = {}", i0.index, i_inf.index);
            if expected.count > 0 {
                let cert = certify(&e.system, &opts)?;
                ok &= cert.valid && cert.found.len() == expected.count && cert.guaranteed_count == expected.count;
                detail.push_str(&format!(", found {} of {}", cert.found.len(), cert.guaranteed_count));
            }
            return Ok((ok, detail));
        }
        let e = catalog::linear_like(name).expect("listed names resolve");
        let (a, b) = e.bounds(&opts.tol)?;
        let ok = (a.index.index, b.index.index) == (e.i0, e.i_infty);
        Ok((ok, format!("sandwich indices {} and {}", a.index.index, b.index.index)))
    })();
    match result {
        Ok((ok, detail)) => Verification { name, ok, detail },
        Err(e) => Verification { name, ok: false, detail: e.to_string() },
    }
}

fn verify_catalog(cfg: &RunConfig) -> Result<Output, CliError> {
    let names: Vec<&'static str> = NAMES.iter().chain(LINEAR_LIKE_NAMES).copied().collect();
    let rows: Vec<Verification> = names.par_iter().map(|n| verify_entry(n, cfg)).collect();
    let bad: Vec<&str> = rows.iter().filter(|r| !r.ok).map(|r| r.name).collect();
    let failure = (!bad.is_empty())
        .then(|| CliError::InvalidCertificate(format!("catalog metadata not reproduced: {}", bad.join(", "))));
    Ok(Output { body: json(&rows), failure })
}
