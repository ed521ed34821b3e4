use std::fs;
use std::path::Path;
use std::process::Command as Proc;

use gzk_core::analyticity::{condition2_sigma, continuation_delta, LedgerConstants};
use gzk_core::functionals::m_sigma;
use gzk_lab::commands::{execute, Command, ProbeName};
use gzk_lab::manifest::{RunManifest, RunStatus, MANIFEST_NAME};
use gzk_lab::{parse_config, LabError};

const SMALL: &str = r#"
[grid]
n_x = 32
n_y = 32
l_x = 20.0
l_y = 20.0
[integrator]
dt = 0.002
t_end = 0.2
diag_stride = 10
snapshot_stride = 10
[initial_data]
kind = "gaussian"
amplitude = 1.0
width = 1.5
"#;

fn body(path: &Path) -> String {
    fs::read_to_string(path).unwrap()
}

fn manifest(dir: &Path) -> RunManifest {
    serde_json::from_str(&body(&dir.join(MANIFEST_NAME))).unwrap()
}

/// Every file under `dir` (recursively) except manifests appears in exactly one manifest.
fn assert_manifests_cover(dir: &Path) {
    let mut listed = Vec::new();
    let mut found = Vec::new();
    fn visit(root: &Path, dir: &Path, listed: &mut Vec<String>, found: &mut Vec<String>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                visit(root, &p, listed, found);
            } else if p.file_name().unwrap() == MANIFEST_NAME {
                let m: RunManifest = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
                let base = p.parent().unwrap().strip_prefix(root).unwrap();
                listed.extend(m.files.iter().map(|f| base.join(f).to_string_lossy().into_owned()));
            } else {
                found.push(p.strip_prefix(root).unwrap().to_string_lossy().into_owned());
            }
        }
    }
    visit(dir, dir, &mut listed, &mut found);
    listed.sort();
    found.sort();
    assert_eq!(listed, found);
}

#[test]
fn zero_horizon_gives_one_row() {
    let d = tempfile::tempdir().unwrap();
    let mut cfg = parse_config(SMALL).unwrap();
    cfg.integrator.t_end = 0.0;
    let m = execute(&Command::Simulate, &cfg, d.path(), false).unwrap();
    assert_eq!(m.status, RunStatus::Completed);
    let csv = body(&d.path().join("diagnostics.csv"));
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# schema: zk-diagnostics"));
    assert_eq!(lines.len(), 3);
    assert_manifests_cover(d.path());
}

#[test]
fn simulate_is_deterministic_and_guards_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut cfg = parse_config(SMALL).unwrap();
    cfg.initial_data = toml::from_str("kind = \"random\"\namplitude = 0.5").unwrap();
    execute(&Command::Simulate, &cfg, a.path(), false).unwrap();
    execute(&Command::Simulate, &cfg, b.path(), false).unwrap();
    assert_eq!(body(&a.path().join("diagnostics.csv")), body(&b.path().join("diagnostics.csv")));
    assert_eq!(manifest(a.path()).config_hash, manifest(b.path()).config_hash);
    assert!(matches!(execute(&Command::Simulate, &cfg, a.path(), false), Err(LabError::OutputExists(_))));
    assert!(execute(&Command::Simulate, &cfg, a.path(), true).is_ok());
}

#[test]
fn soliton_summary_reports_shape_error() {
    let d = tempfile::tempdir().unwrap();
    let cfg = parse_config(
        r#"
[equation]
form = "original"
[grid]
n_x = 128
n_y = 8
l_x = 40.0
l_y = 4.0
[integrator]
dt = 0.005
t_end = 0.5
[initial_data]
kind = "soliton"
kappa = 0.5
"#,
    )
    .unwrap();
    let m = execute(&Command::Simulate, &cfg, d.path(), false).unwrap();
    let line = m.summary.iter().find(|l| l.starts_with("soliton shape error")).unwrap();
    let err: f64 = line.split_whitespace().nth(3).unwrap().parse().unwrap();
    assert!(err < 1e-6, "{line}");
}

#[test]
fn blow_up_keeps_partial_outputs() {
    let d = tempfile::tempdir().unwrap();
    let mut cfg = parse_config(SMALL).unwrap();
    cfg.integrator.dt = 0.9;
    cfg.integrator.t_end = 2.0;
    let m = execute(&Command::Simulate, &cfg, d.path(), false).unwrap();
    assert_eq!(m.status, RunStatus::Failed);
    assert!(d.path().join("diagnostics.csv").exists());
}

#[test]
fn radius_track_columns() {
    let d = tempfile::tempdir().unwrap();
    let cfg = parse_config(SMALL).unwrap();
    let m = execute(&Command::RadiusTrack, &cfg, d.path(), false).unwrap();
    assert_eq!(m.status, RunStatus::Completed, "{:?}", m.summary);
    let csv = body(&d.path().join("radius_track.csv"));
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('T'))
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 10);
    let u0 = cfg.initial_field().unwrap();
    let consts = LedgerConstants::default();
    let m0 = m_sigma(&u0, consts.sigma0).unwrap();
    let delta = continuation_delta(m0, consts.c0, 24.0).unwrap();
    for r in &rows {
        assert_eq!(r[4], condition2_sigma(r[0], delta, m0, consts.theta, consts.c).unwrap().min(consts.sigma0));
    }
    for w in rows.windows(2) {
        assert!(w[1][2] <= w[0][2] && w[1][3] <= w[0][3]);
    }
    let fit = csv.lines().find(|l| l.starts_with("# fit:")).unwrap();
    let exponent: f64 = fit.split_whitespace().nth(2).unwrap().trim_start_matches("exponent=").parse().unwrap();
    assert!(exponent >= -0.5, "{fit}");
}

#[test]
fn sweep_isolates_failures_and_is_deterministic() {
    let d = tempfile::tempdir().unwrap();
    let cfg = parse_config(SMALL).unwrap();
    let values: Vec<String> = ["0.01", "0.02", "0.05", "0.1"].iter().map(|s| s.to_string()).collect();
    let cmd = Command::Sweep { axis: "ledger.sigma0".into(), values: values.clone() };
    let m = execute(&cmd, &cfg, &d.path().join("a"), false).unwrap();
    assert_eq!(m.status, RunStatus::Completed, "{:?}", m.summary);
    let subs = fs::read_dir(d.path().join("a")).unwrap().filter(|e| e.as_ref().unwrap().path().is_dir()).count();
    assert_eq!(subs, 4);
    for v in &values {
        assert_eq!(manifest(&d.path().join("a").join(format!("ledger.sigma0={v}"))).status, RunStatus::Completed);
    }
    execute(&cmd, &cfg, &d.path().join("b"), false).unwrap();
    assert_eq!(body(&d.path().join("a/sweep.csv")), body(&d.path().join("b/sweep.csv")));
    assert_manifests_cover(&d.path().join("a"));

    let bad = Command::Sweep {
        axis: "integrator.dt".into(),
        values: ["0.002", "0.9", "0.001", "0.004"].iter().map(|s| s.to_string()).collect(),
    };
    let m = execute(&bad, &cfg, &d.path().join("c"), false).unwrap();
    assert_eq!(m.status, RunStatus::Failed);
    let agg = body(&d.path().join("c/sweep.csv"));
    assert_eq!(agg.lines().filter(|l| l.contains(",ok,")).count(), 3);
    assert!(agg.lines().any(|l| l.starts_with("0.9,failed,")));

    let m = execute(
        &Command::Sweep { axis: "gevrey.sigmas".into(), values: vec!["0.1".into()] },
        &cfg,
        &d.path().join("e"),
        false,
    )
    .unwrap();
    assert_eq!(m.status, RunStatus::Failed);
}

#[test]
fn probe_reports_are_written() {
    let d = tempfile::tempdir().unwrap();
    let mut cfg = parse_config(SMALL).unwrap();
    cfg.probes.band = 4;
    cfg.probes.trials = 3;
    let m = execute(&Command::Probe(ProbeName::Commutator), &cfg, d.path(), false).unwrap();
    assert_eq!(m.status, RunStatus::Completed, "{:?}", m.summary);
    let v: serde_json::Value = serde_json::from_str(&body(&d.path().join("probe_commutator.json"))).unwrap();
    assert_eq!(v["schema"], "zk-probe v1");
    assert!(v["reports"][0]["slope"].as_f64().unwrap() > 0.2);
    let e = tempfile::tempdir().unwrap();
    let m = execute(&Command::Probe(ProbeName::Trilinear), &cfg, e.path(), false).unwrap();
    assert_eq!(m.status, RunStatus::Failed);
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_gzk-lab");
    let d = tempfile::tempdir().unwrap();
    let out = Proc::new(exe).args(["probe", "scalar", "--out"]).arg(d.path().join("s")).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&body(&d.path().join("s/probe_scalar.json"))).unwrap();
    assert_eq!(v["schema"], "zk-probe v1");
    assert!(v["reports"].as_array().unwrap().iter().all(|r| r["violation_count"] == 0));
    let bad = Proc::new(exe).args(["probe", "nonsense"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let cfg = d.path().join("k3.toml");
    fs::write(&cfg, "[equation]\nk = 3\n").unwrap();
    let out = Proc::new(exe).args(["simulate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("k must be 1 or 2"));
}
