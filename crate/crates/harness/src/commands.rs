//! The four subcommands. Each writes into an [`OutputDir`] and reports an
//! [`Outcome`]; the caller writes the manifest.

use std::fmt::Write as _;
use std::path::Path;

use gzk_core::analyticity::{
    estimate_radius, fit_decay_exponent, BoundCurve, BoundKind, ContinuationLedger, LedgerKind,
};
use gzk_core::dynamics::{EquationSpec, Form};
use gzk_core::functionals::{
    e_sigma, m_sigma, modified_energy, strichartz_ql_probe, Diagnostics, DiagnosticsConfig, DiagnosticsRecord,
    GevreyParams, DIAGNOSTICS_SCHEMA,
};
use gzk_core::initial::soliton_shape_error;
use gzk_core::integrator::{evolve, write_checkpoint, Trajectory};
use gzk_core::probes::{
    almost_conservation_probe, bilinear_probe, commutator_scaling_probe, exp_minus_one_check, min_exp_inequality_check,
    trilinear_probe, CommutatorKind, ConservationKind, ConservationRun, ProbeReport,
};
use gzk_core::spectral::SpectralField2D;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{check_axis, with_override, InitialData, RunConfig};
use crate::error::{LabError, Result};
use crate::manifest::{now, OutputDir, RunManifest, RunStatus};

pub const RADIUS_SCHEMA: &str = "# schema: zk-radius v1";
pub const RADIUS_TRACK_SCHEMA: &str = "# schema: zk-radius-track v1";
pub const SWEEP_SCHEMA: &str = "# schema: zk-sweep v1";
pub const PROBE_SCHEMA: &str = "zk-probe v1";

/// Samples per exact scalar inequality.
pub const SCALAR_SAMPLES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ProbeName {
    Scalar,
    Bilinear,
    Trilinear,
    Commutator,
    AlmostConservation,
    Strichartz,
}

impl ProbeName {
    pub fn file_stem(self) -> &'static str {
        match self {
            ProbeName::Scalar => "probe_scalar",
            ProbeName::Bilinear => "probe_bilinear",
            ProbeName::Trilinear => "probe_trilinear",
            ProbeName::Commutator => "probe_commutator",
            ProbeName::AlmostConservation => "probe_almost_conservation",
            ProbeName::Strichartz => "probe_strichartz",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Simulate,
    RadiusTrack,
    Probe(ProbeName),
    Sweep { axis: String, values: Vec<String> },
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Simulate => "simulate".into(),
            Command::RadiusTrack => "radius-track".into(),
            Command::Probe(p) => format!("probe {}", p.file_stem().trim_start_matches("probe_")),
            Command::Sweep { axis, .. } => format!("sweep {axis}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: RunStatus,
    pub summary: Vec<String>,
    pub final_record: Option<DiagnosticsRecord>,
}

impl Outcome {
    fn new(status: RunStatus, summary: Vec<String>) -> Self {
        Self { status, summary, final_record: None }
    }
}

/// Runs `cmd` into `root` and writes its manifest. Failures after the directory
/// exists are recorded in the manifest rather than returned.
pub fn execute(cmd: &Command, cfg: &RunConfig, root: &Path, force: bool) -> Result<RunManifest> {
    execute_with(cmd, cfg, root, force).map(|p| p.0)
}

fn execute_with(cmd: &Command, cfg: &RunConfig, root: &Path, force: bool) -> Result<(RunManifest, Outcome)> {
    let started = now();
    let mut out = OutputDir::create(root, force)?;
    out.write("config.toml", &cfg.to_toml()?)?;
    let outcome = match cmd {
        Command::Simulate => simulate(cfg, &mut out),
        Command::RadiusTrack => radius_track(cfg, &mut out),
        Command::Probe(p) => probe(cfg, *p, &mut out),
        Command::Sweep { axis, values } => sweep(cfg, axis, values, &mut out, force),
    };
    let outcome = outcome.unwrap_or_else(|e| Outcome::new(RunStatus::Failed, vec![format!("error: {e}")]));
    log::info!("{} finished: {:?}", cmd.name(), outcome.status);
    let m = out.finish(&cmd.name(), cfg, started, outcome.status, outcome.summary.clone())?;
    Ok((m, outcome))
}

fn diagnostics_for(cfg: &RunConfig) -> Diagnostics {
    let g = &cfg.gevrey;
    Diagnostics::new(
        cfg.grid,
        cfg.equation,
        DiagnosticsConfig {
            sigmas: g.sigmas.clone(),
            gevrey: g.sigmas.iter().map(|&sigma| GevreyParams { sigma, s: g.s }).collect(),
            radius: g.track_radius.then_some(cfg.radius),
        },
    )
}

/// Evolves from the configured data; a failure keeps the partial trajectory.
fn run_trajectory(
    cfg: &RunConfig,
    mut hook: impl FnMut(&SpectralField2D),
) -> Result<(SpectralField2D, Trajectory, Option<String>)> {
    let u0 = cfg.initial_field()?;
    let res = evolve(&u0, &cfg.equation, &cfg.integrator, |f, _| hook(f));
    Ok(match res {
        Ok(t) => (u0, t, None),
        Err(f) => (u0, f.partial, Some(f.error.to_string())),
    })
}

pub fn simulate(cfg: &RunConfig, out: &mut OutputDir) -> Result<Outcome> {
    let diag = diagnostics_for(cfg);
    let mut csv = format!("{DIAGNOSTICS_SCHEMA}\n{}\n", diag.csv_header());
    let mut records: Vec<DiagnosticsRecord> = Vec::new();
    let mut diag_err: Option<String> = None;
    let (u0, traj, err) = run_trajectory(cfg, |f| {
        if diag_err.is_some() {
            return;
        }
        match diag.record(f) {
            Ok(r) => records.push(r),
            Err(e) => diag_err = Some(format!("diagnostics at t = {}: {e}", f.time)),
        }
    })?;
    for r in &records {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    out.write("diagnostics.csv", &csv)?;

    let mut radius = format!("{RADIUS_SCHEMA}\nt,sigma_hat,floor_hit,residual\n");
    for (i, snap) in traj.snapshots.iter().enumerate() {
        let stem = format!("checkpoint_{i:04}");
        write_checkpoint(&out.path(&stem), snap, &cfg.equation)?;
        out.record(&format!("{stem}.modes"));
        out.record(&format!("{stem}.json"));
        let est = estimate_radius(snap, &cfg.radius)?;
        let _ = writeln!(radius, "{:?},{:?},{},{:?}", snap.time, est.sigma_hat, est.floor_hit, est.residual);
    }
    out.write("radius.csv", &radius)?;

    let fin = &traj.final_state;
    let mut summary = vec![format!("steps: {}, dt: {}, final t: {}", traj.steps, traj.dt, fin.time)];
    if let (Some(a), Some(b)) = (records.first(), records.last()) {
        summary.push(format!("mass relative drift: {:e}", rel(a.mass, b.mass)));
        if let (Some(x), Some(y)) = (a.modified_energy, b.modified_energy) {
            summary.push(format!("modified energy relative drift: {:e}", rel(x, y)));
        }
    }
    if cfg.equation.form() == Form::Symmetrized {
        let e0 = modified_energy(&u0, &cfg.equation)?;
        summary.push(format!("modified energy at t = 0: {e0}"));
    }
    if let InitialData::Soliton { kappa, x0 } = cfg.initial_data {
        let (shift, e) = soliton_shape_error(fin, kappa, x0)?;
        summary.push(format!("soliton shape error: {e:e} (recentred by {shift:e})"));
    }
    let failure = err.or(diag_err);
    let status = match &failure {
        Some(e) => {
            summary.push(format!("error: {e}"));
            RunStatus::Failed
        }
        None => RunStatus::Completed,
    };
    Ok(Outcome { status, summary, final_record: records.last().cloned() })
}

fn rel(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        (b - a).abs()
    } else {
        ((b - a) / a).abs()
    }
}

/// Row of the radius-track table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackRow {
    pub t: f64,
    pub sigma_hat: f64,
    pub bound_zk: f64,
    pub bound_mzk: f64,
    pub ledger_sigma: f64,
}

fn ledger_for(cfg: &RunConfig, u0: &SpectralField2D, horizons: &[f64]) -> Result<ContinuationLedger> {
    let spec: &EquationSpec = &cfg.equation;
    let s0 = cfg.ledger.sigma0;
    let (kind, norm0) = match spec.k() {
        1 => (LedgerKind::Zk, m_sigma(u0, s0)?),
        _ => {
            if spec.form() != Form::Symmetrized || spec.mu() >= 0.0 {
                return Err(LabError::Config(
                    "radius-track with k = 2 needs the defocusing symmetrized equation (mu = -1)".into(),
                ));
            }
            (LedgerKind::Mzk, e_sigma(u0, s0, spec)?)
        }
    };
    Ok(ContinuationLedger::build(kind, cfg.ledger, norm0, horizons)?)
}

pub fn radius_track(cfg: &RunConfig, out: &mut OutputDir) -> Result<Outcome> {
    if cfg.integrator.snapshot_stride.is_none() {
        return Err(LabError::Config("radius-track needs integrator.snapshot_stride".into()));
    }
    let (u0, traj, err) = run_trajectory(cfg, |_| {})?;
    let mut horizons: Vec<f64> = traj.snapshots.iter().map(|s| s.time).filter(|t| *t > 0.0).collect();
    horizons.extend(cfg.bounds.horizons.iter().copied());
    horizons.sort_by(|a, b| a.total_cmp(b));
    horizons.dedup();
    let ledger = ledger_for(cfg, &u0, &horizons)?;
    out.write("ledger.json", &serde_json::to_string_pretty(&ledger)?)?;
    let zk = BoundCurve::new(BoundKind::ZkMinus4Eps, cfg.bounds.c, cfg.bounds.eps, cfg.ledger.sigma0)?;
    let mzk = BoundCurve::new(BoundKind::MzkMinus4Thirds, cfg.bounds.c, cfg.bounds.eps, cfg.ledger.sigma0)?;
    let mut rows = Vec::new();
    for snap in traj.snapshots.iter().filter(|s| s.time > 0.0) {
        let t = snap.time;
        let row = ledger.rows.iter().find(|r| r.t == t).expect("snapshot time is a ledger horizon");
        rows.push(TrackRow {
            t,
            sigma_hat: estimate_radius(snap, &cfg.radius)?.sigma_hat,
            bound_zk: zk.eval(t),
            bound_mzk: mzk.eval(t),
            ledger_sigma: row.sigma,
        });
    }
    let mut csv = format!("{RADIUS_TRACK_SCHEMA}\nT,sigma_hat,bound_zk,bound_mzk,ledger_sigma\n");
    for r in &rows {
        let _ = writeln!(csv, "{:?},{:?},{:?},{:?},{:?}", r.t, r.sigma_hat, r.bound_zk, r.bound_mzk, r.ledger_sigma);
    }
    let mut summary = vec![format!("snapshots tracked: {}", rows.len())];
    let series: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.sigma_hat)).collect();
    match fit_decay_exponent(&series) {
        Ok(fit) => {
            let line = format!("fit: exponent={} prefactor={} r2={}", fit.exponent, fit.prefactor, fit.r2);
            let _ = writeln!(csv, "# {line}");
            summary.push(line);
        }
        Err(e) => {
            let _ = writeln!(csv, "# fit: skipped ({e})");
            summary.push(format!("fit skipped: {e}"));
        }
    }
    out.write("radius_track.csv", &csv)?;
    let status = match err {
        Some(e) => {
            summary.push(format!("error: {e}"));
            RunStatus::Failed
        }
        None => RunStatus::Completed,
    };
    Ok(Outcome::new(status, summary))
}

#[derive(Serialize)]
struct ProbeFile<'a, T: Serialize> {
    schema: &'static str,
    probe: &'a str,
    reports: &'a [T],
}

fn write_reports(out: &mut OutputDir, name: ProbeName, reports: &[ProbeReport]) -> Result<()> {
    let stem = name.file_stem();
    let file = ProbeFile { schema: PROBE_SCHEMA, probe: stem, reports };
    out.write(&format!("{stem}.json"), &serde_json::to_string_pretty(&file)?)?;
    for (i, r) in reports.iter().enumerate() {
        out.write(&format!("{stem}_hist_{i}.csv"), &r.histogram_csv())?;
    }
    Ok(())
}

fn scalar_suite(cfg: &RunConfig) -> Result<Vec<ProbeReport>> {
    let seed = cfg.probes.seed;
    let mut reports = Vec::new();
    for a in [0.0, 0.3, 0.75, 1.0] {
        reports.push(exp_minus_one_check(a, SCALAR_SAMPLES, seed)?);
    }
    for th in [0.0, cfg.probes.theta, 0.5, 1.0] {
        for sigma in [1e-3, 0.1, 1.0, 10.0] {
            reports.push(min_exp_inequality_check(th, sigma, SCALAR_SAMPLES.div_ceil(16), seed)?);
        }
    }
    Ok(reports)
}

pub fn probe(cfg: &RunConfig, name: ProbeName, out: &mut OutputDir) -> Result<Outcome> {
    let p = &cfg.probes;
    let reports = match name {
        ProbeName::Scalar => scalar_suite(cfg)?,
        ProbeName::Bilinear => vec![bilinear_probe(p)?],
        ProbeName::Trilinear => vec![trilinear_probe(p)?],
        ProbeName::Commutator => {
            let kind = if cfg.equation.k() == 1 { CommutatorKind::F } else { CommutatorKind::G };
            vec![commutator_scaling_probe(kind, p)?]
        }
        ProbeName::AlmostConservation => {
            let (kind, exp) =
                if cfg.equation.k() == 1 { (ConservationKind::M, p.theta) } else { (ConservationKind::E, p.alpha) };
            let run = ConservationRun { spec: cfg.equation, integrator: cfg.integrator, u0: cfg.initial_field()? };
            vec![almost_conservation_probe(kind, &run, &p.sigma_list, exp)?]
        }
        ProbeName::Strichartz => {
            let r = strichartz_ql_probe(4.0, p.trials, p.seed)?;
            let stem = name.file_stem();
            let file = ProbeFile { schema: PROBE_SCHEMA, probe: stem, reports: std::slice::from_ref(&r) };
            out.write(&format!("{stem}.json"), &serde_json::to_string_pretty(&file)?)?;
            let summary = vec![format!(
                "strichartz p = {}: max ratio {:e}, stability factor {:.3}{}",
                r.p,
                r.max_ratio,
                r.stability_factor,
                if r.flagged { " (flagged)" } else { "" }
            )];
            return Ok(Outcome::new(RunStatus::Completed, summary));
        }
    };
    write_reports(out, name, &reports)?;
    let mut summary = Vec::new();
    for r in &reports {
        let mut line = format!(
            "{}: samples {}, max ratio {:e}, violations {}",
            r.probe, r.samples, r.max_ratio, r.violation_count
        );
        if let (Some(s), Some(t)) = (r.slope, r.threshold) {
            let _ = write!(line, ", slope {s:.4} (threshold {t:.4})");
        }
        if let Some(f) = r.stability_factor {
            let _ = write!(line, ", stability {f:.3}{}", if r.flagged { " (flagged)" } else { "" });
        }
        if !r.passed {
            line.push_str(" FAILED");
        }
        summary.push(line);
    }
    let ok = reports.iter().all(|r| r.passed);
    Ok(Outcome::new(if ok { RunStatus::Completed } else { RunStatus::AssertionFailed }, summary))
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || ".-_=".contains(c) { c } else { '_' }).collect()
}

pub fn sweep(cfg: &RunConfig, axis: &str, values: &[String], out: &mut OutputDir, force: bool) -> Result<Outcome> {
    if values.is_empty() {
        return Err(LabError::Usage("sweep needs at least one value".into()));
    }
    check_axis(cfg, axis)?;
    let root = out.root().to_path_buf();
    let results: Vec<(String, std::result::Result<Outcome, String>)> = values
        .par_iter()
        .map(|v| {
            let dir = sanitize(&format!("{axis}={v}"));
            let res = with_override(cfg, axis, v)
                .and_then(|c| execute_with(&Command::Simulate, &c, &root.join(&dir), force))
                .map_err(|e| e.to_string())
                .and_then(|(_, o)| match o.status {
                    RunStatus::Completed => Ok(o),
                    _ => Err(o.summary.last().map(|l| l.trim_start_matches("error: ").to_string()).unwrap_or_default()),
                });
            (v.clone(), res)
        })
        .collect();
    let mut csv = format!("{SWEEP_SCHEMA}\n{axis},status,t,mass,energy,mod_energy,sigma_hat,note\n");
    let mut summary = Vec::new();
    let mut failures = 0;
    for (v, r) in &results {
        match r {
            Ok(o) => {
                let rec = o.final_record.as_ref();
                let f = |x: Option<f64>| x.map(|v| format!("{v:?}")).unwrap_or_default();
                let _ = writeln!(
                    csv,
                    "{v},ok,{},{},{},{},{},",
                    f(rec.map(|r| r.t)),
                    f(rec.map(|r| r.mass)),
                    f(rec.map(|r| r.energy)),
                    f(rec.and_then(|r| r.modified_energy)),
                    f(rec.and_then(|r| r.sigma_hat)),
                );
            }
            Err(e) => {
                failures += 1;
                let note = e.replace([',', '\n'], ";");
                let _ = writeln!(csv, "{v},failed,,,,,,{note}");
                summary.push(format!("{axis} = {v} failed: {e}"));
            }
        }
    }
    out.write("sweep.csv", &csv)?;
    summary.insert(0, format!("{} runs, {failures} failed", values.len()));
    let status = if failures == 0 { RunStatus::Completed } else { RunStatus::Failed };
    Ok(Outcome::new(status, summary))
}
