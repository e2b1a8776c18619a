use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pbm::{resolve, RunConfig};
use pbm_core::linear::{closed_form_poincare, LinearPoincareData};
use pbm_core::{LinearSystem, Mat2, PeriodicMatrixFunction, Tolerances};
use serde_json::Value;

fn pbm(args: &[&str]) -> Output {
    pbm_env(args, &[])
}

fn pbm_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pbm"));
    cmd.args(args).env_remove("PBM_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_json(out: &Output) -> Value {
    let line = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(line.trim()).unwrap_or_else(|_| panic!("stderr is not JSON: {line}"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn index_of_catalog_rotation() {
    let v = stdout_json(&pbm(&["--system", "rotation-pi", "index"]));
    assert_eq!(v, serde_json::json!({ "index": -1, "nullity": 0 }));
}

#[test]
fn degree_of_saddle() {
    let v = stdout_json(&pbm(&["--system", "saddle", "degree", "--shift", "0"]));
    assert_eq!(v["degree"], -2);
    let v = stdout_json(&pbm(&["--system", "saddle", "degree", "--shift", "-1", "--r", "3"]));
    assert_eq!(v["degree"], 0);
}

#[test]
fn certify_figure2() {
    let v = stdout_json(&pbm(&["--system", "figure2", "certify"]));
    assert_eq!(v["guaranteed_count"], 2);
    assert_eq!(v["found"].as_array().unwrap().len(), 2);
    assert_eq!(v["valid"], true);
}

#[test]
fn expression_system_matches_catalog() {
    let cfg = configs_dir().join("certify.toml");
    let written = stdout_json(&pbm(&["--config", cfg.to_str().unwrap(), "certify"]));
    let builtin = stdout_json(&pbm(&["--system", "figure1", "certify"]));
    let points = |v: &Value| -> Vec<(f64, f64)> {
        let mut p: Vec<(f64, f64)> = v["found"]
            .as_array()
            .unwrap()
            .iter()
            .map(|s| {
                let first = &s["orbit"]["samples"][0];
                (first["x"].as_f64().unwrap(), first["y"].as_f64().unwrap())
            })
            .collect();
        p.sort_by(|a, b| a.partial_cmp(b).unwrap());
        p
    };
    let (a, b) = (points(&written), points(&builtin));
    assert_eq!(a.len(), 2);
    assert_eq!(a.len(), b.len());
    for (p, q) in a.iter().zip(&b) {
        assert!((p.0 - q.0).abs() < 1e-8 && (p.1 - q.1).abs() < 1e-8, "{p:?} vs {q:?}");
    }
}

#[test]
fn second_order_config_uses_sandwich_indices() {
    let cfg = configs_dir().join("certify-second-order.toml");
    let v = stdout_json(&pbm(&["--config", cfg.to_str().unwrap(), "index", "--at", "infinity"]));
    assert_eq!(v["index"], -1);
}

#[test]
fn poincare_table_of_linear_system_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "linear.toml",
        "[system]\nmatrix = [[\"2 + 0.5*cos(2*pi*t)\", \"0.3\"], [\"0.3\", \"1\"]]\nperiod = 1.0\n[params]\nr = 1.7\nsamples = 64\n",
    );
    let out = pbm(&["--config", cfg.to_str().unwrap(), "poincare"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("phi,F1,F2"));
    let l =
        PeriodicMatrixFunction::new(1.0, |t| Mat2::symmetric(2.0 + 0.5 * (std::f64::consts::TAU * t).cos(), 0.3, 1.0));
    let data = LinearPoincareData::from_system(&LinearSystem::new(l), &Tolerances::default()).unwrap();
    let mut rows = 0;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 3);
        for c in &cols {
            // 17 significant digits in scientific notation
            let mantissa = c.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(|ch| ch.is_ascii_digit()).count(), 17, "{c}");
        }
        let v: Vec<f64> = cols.iter().map(|c| c.parse().unwrap()).collect();
        let (theta, ratio) = closed_form_poincare(&data, v[0]);
        assert!((v[1] - theta).abs() <= 1e-6, "F1 at {}: {} vs {theta}", v[0], v[1]);
        assert!((v[2] - 1.7 * (ratio - 1.0)).abs() <= 1e-6, "F2 at {}", v[0]);
        rows += 1;
    }
    assert_eq!(rows, 64);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let poincare = configs_dir().join("poincare.toml");
    let portrait = configs_dir().join("portrait.toml");
    for (cfg, cmd) in [(&poincare, "poincare"), (&portrait, "portrait")] {
        let runs: Vec<Vec<u8>> = [("1", "a"), ("4", "b")]
            .iter()
            .map(|(threads, tag)| {
                let out = dir.path().join(format!("{cmd}-{tag}"));
                let o = pbm_env(
                    &["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), cmd],
                    &[("PBM_THREADS", threads)],
                );
                assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
                assert!(o.stdout.is_empty());
                std::fs::read(out).unwrap()
            })
            .collect();
        assert_eq!(runs[0], runs[1], "{cmd} output depends on the thread count");
    }
    let a = pbm(&["--config", portrait.to_str().unwrap(), "--seed", "1", "portrait"]).stdout;
    let b = pbm(&["--config", portrait.to_str().unwrap(), "--seed", "2", "portrait"]).stdout;
    assert_ne!(a, b);
}

#[test]
fn portrait_marks_labeled_points() {
    let cfg = configs_dir().join("portrait.toml");
    let out = pbm(&["--config", cfg.to_str().unwrap(), "portrait"]);
    assert!(out.status.success());
    let svg = String::from_utf8(out.stdout).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("<polyline"));
    for label in ["M", "S"] {
        assert!(svg.contains(&format!("font-style=\"italic\">{label}</text>")), "label {label} missing");
    }
}

#[test]
fn exit_codes_and_error_json() {
    let dir = tempfile::tempdir().unwrap();

    let bad_expr = write_config(dir.path(), "expr.toml", "[system]\nhamiltonian = \"x^2 +\"\nperiod = 1.0\n");
    let out = pbm(&["--config", bad_expr.to_str().unwrap(), "degree"]);
    assert_eq!(out.status.code(), Some(2));
    let e = stderr_json(&out);
    assert_eq!(e["error"]["class"], "config");
    assert_eq!(e["error"]["offset"], 5);

    let out = pbm(&["--system", "no-such-system", "index"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["code"], 2);

    let typo = write_config(dir.path(), "typo.toml", "[system]\ncatalog = \"figure1\"\nperoid = 1.0\n");
    assert_eq!(pbm(&["--config", typo.to_str().unwrap(), "index"]).status.code(), Some(2));

    let out = pbm(&["--system", "figure1", "index", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    stderr_json(&out);

    let out = pbm_env(&["--system", "saddle", "index"], &[("PBM_THREADS", "zero")]);
    assert_eq!(out.status.code(), Some(2));

    let tiny = write_config(dir.path(), "tiny.toml", "[system]\ncatalog = \"figure1\"\n[tolerances]\nbudget = 300\n");
    let out = pbm(&["--config", tiny.to_str().unwrap(), "certify"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"]["class"], "budget");

    let small =
        write_config(dir.path(), "small.toml", "[system]\ncatalog = \"figure1\"\n[tolerances]\nbudget = 3000\n");
    let out = pbm(&["--config", small.to_str().unwrap(), "certify"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(stderr_json(&out)["error"]["class"], "invalid-certificate");
    // the invalid certificate is still written
    assert_eq!(stdout_json_unchecked(&out)["valid"], false);

    let resonant = pbm(&["--system", "shear", "certify"]);
    assert_eq!(resonant.status.code(), Some(2));
}

fn stdout_json_unchecked(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn catalog_lists_and_verifies() {
    let v = stdout_json(&pbm(&["catalog"]));
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    for n in ["figure1", "figure2", "figure3", "rotation-pi", "linear-like"] {
        assert!(names.contains(&n));
    }
    let v = stdout_json(&pbm(&["catalog", "--verify"]));
    for row in v.as_array().unwrap() {
        assert_eq!(row["ok"], true, "{row}");
    }
}

#[test]
fn shipped_configs_resolve() {
    let mut seen = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        let cfg = RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        if cfg.system.catalog.is_some()
            || cfg.system.matrix.is_some()
            || cfg.system.hamiltonian.is_some()
            || cfg.system.q.is_some()
        {
            resolve(&cfg).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        }
        seen += 1;
    }
    assert!(seen >= 7);
}
