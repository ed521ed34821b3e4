//! Run configuration: TOML sections mirroring the library types.

use std::path::PathBuf;

use gzk_core::analyticity::{LedgerConstants, RadiusFitConfig};
use gzk_core::dynamics::EquationSpec;
use gzk_core::initial::{self, Taper};
use gzk_core::integrator::{read_checkpoint, IntegratorConfig};
use gzk_core::probes::ProbeParams;
use gzk_core::spectral::{Grid2D, SpectralField2D};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GevreySection {
    /// Radii for `M_σ` / `E_σ` columns.
    pub sigmas: Vec<f64>,
    /// Sobolev index of the `G^{σ,s}` columns.
    pub s: f64,
    /// Track the fitted radius in the diagnostics.
    pub track_radius: bool,
}

impl Default for GevreySection {
    fn default() -> Self {
        Self { sigmas: vec![0.01, 0.1], s: 0.0, track_radius: true }
    }
}

/// Prefactor and `ε` of the reference curves, plus ledger horizons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsSection {
    pub c: f64,
    pub eps: f64,
    /// Extra horizons for the ledger; snapshot times are always included.
    pub horizons: Vec<f64>,
}

impl Default for BoundsSection {
    fn default() -> Self {
        Self { c: 1.0, eps: 1e-3, horizons: Vec::new() }
    }
}

fn one() -> f64 {
    1.0
}
fn default_width() -> f64 {
    1.5
}
fn default_kappa() -> f64 {
    0.5
}
fn default_taper() -> Taper {
    Taper::Gaussian
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialData {
    Gaussian {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "default_width")]
        width: f64,
    },
    Soliton {
        #[serde(default = "default_kappa")]
        kappa: f64,
        #[serde(default)]
        x0: f64,
    },
    Random {
        /// Falls back to the run seed.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default = "default_taper")]
        taper: Taper,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Checkpoint stem (`<stem>.json` + `<stem>.modes`).
    File { path: PathBuf },
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::Gaussian { amplitude: 1.0, width: 1.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub equation: EquationSpec,
    pub grid: Grid2D,
    pub integrator: IntegratorConfig,
    pub gevrey: GevreySection,
    pub radius: RadiusFitConfig,
    pub probes: ProbeParams,
    pub ledger: LedgerConstants,
    pub bounds: BoundsSection,
    pub initial_data: InitialData,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: PathBuf::from("runs/latest"),
            equation: EquationSpec::default(),
            grid: Grid2D::default(),
            integrator: IntegratorConfig::default(),
            gevrey: GevreySection::default(),
            radius: RadiusFitConfig::default(),
            probes: ProbeParams::default(),
            ledger: LedgerConstants::default(),
            bounds: BoundsSection::default(),
            initial_data: InitialData::default(),
        }
    }
}

fn keyed(key: &str, e: gzk_core::Error) -> LabError {
    LabError::Config(format!("{key}: {e}"))
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate().map_err(|e| keyed("grid", e))?;
        self.integrator.validate().map_err(|e| keyed("integrator", e))?;
        self.probes.validate().map_err(|e| keyed("probes", e))?;
        self.ledger.validate().map_err(|e| keyed("ledger", e))?;
        if let Some(s) = self.gevrey.sigmas.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return Err(LabError::Config(format!("gevrey.sigmas: {s} must be finite and >= 0")));
        }
        if !(self.bounds.c > 0.0 && self.bounds.eps > 0.0) {
            return Err(LabError::Config("bounds.c and bounds.eps must be positive".into()));
        }
        if let Some(t) = self.bounds.horizons.iter().find(|t| !(**t > 0.0)) {
            return Err(LabError::Config(format!("bounds.horizons: {t} must be positive")));
        }
        match &self.initial_data {
            InitialData::Gaussian { width, .. } if !(*width > 0.0) => {
                Err(LabError::Config(format!("initial_data.width = {width} must be positive")))
            }
            InitialData::Soliton { kappa, .. } if !(*kappa > 0.0) => {
                Err(LabError::Config(format!("initial_data.kappa = {kappa} must be positive")))
            }
            _ => Ok(()),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Builds the initial state named by `initial_data`.
    pub fn initial_field(&self) -> Result<SpectralField2D> {
        let g = self.grid;
        let f = match &self.initial_data {
            InitialData::Gaussian { amplitude, width } => initial::gaussian(g, *amplitude, *width)?,
            InitialData::Soliton { kappa, x0 } => initial::line_soliton(g, *kappa, *x0, 0.0)?,
            InitialData::Random { seed, taper, amplitude } => {
                initial::random_smooth(g, seed.unwrap_or(self.seed), *amplitude, *taper)?
            }
            InitialData::File { path } => {
                let (f, meta) = read_checkpoint(path)?;
                if meta.grid != g {
                    return Err(LabError::Config(format!(
                        "initial_data.path: checkpoint grid {:?} differs from [grid] {:?}",
                        meta.grid, g
                    )));
                }
                f
            }
        };
        Ok(f)
    }
}

/// Parses and validates; every error names the offending key.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Dotted keys the text leaves at their default, with the values used.
pub fn defaulted_keys(text: &str, cfg: &RunConfig) -> Result<Vec<(String, String)>> {
    let given: toml::Table = toml::from_str(text)?;
    let full: toml::Table = toml::from_str(&cfg.to_toml()?)?;
    let mut out = Vec::new();
    walk(&full, Some(&given), "", &mut out);
    Ok(out)
}

fn walk(full: &toml::Table, given: Option<&toml::Table>, prefix: &str, out: &mut Vec<(String, String)>) {
    for (k, v) in full {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        let g = given.and_then(|t| t.get(k));
        match (v, g) {
            (toml::Value::Table(sub), Some(toml::Value::Table(gs))) => walk(sub, Some(gs), &key, out),
            (toml::Value::Table(sub), None) => walk(sub, None, &key, out),
            (_, None) => out.push((key, v.to_string())),
            _ => {}
        }
    }
}

fn section<'a>(table: &'a mut toml::Table, key: &str) -> Result<(&'a mut toml::Table, String)> {
    let parts: Vec<&str> = key.split('.').collect();
    let (last, path) = parts.split_last().ok_or_else(|| LabError::Usage("empty sweep axis".into()))?;
    let mut cur = table;
    for p in path {
        cur = match cur.get_mut(*p) {
            Some(toml::Value::Table(t)) => t,
            _ => return Err(LabError::Usage(format!("sweep axis {key}: no section {p}"))),
        };
    }
    Ok((cur, last.to_string()))
}

/// Errors unless `key` names a scalar config key.
pub fn check_axis(cfg: &RunConfig, key: &str) -> Result<()> {
    let mut table: toml::Table = toml::from_str(&cfg.to_toml()?)?;
    let (cur, last) = section(&mut table, key)?;
    match cur.get(&last) {
        Some(toml::Value::Table(_)) | Some(toml::Value::Array(_)) => {
            Err(LabError::Usage(format!("sweep axis {key} is not a scalar key")))
        }
        Some(_) => Ok(()),
        // optional keys are absent from the serialised form
        None => {
            cur.insert(last, toml::Value::Integer(1));
            match toml::from_str::<RunConfig>(&toml::to_string(&table)?) {
                Err(e) if e.to_string().contains("unknown field") => {
                    Err(LabError::Usage(format!("unknown sweep axis {key}")))
                }
                _ => Ok(()),
            }
        }
    }
}

/// Sets the scalar at a dotted `key` in the serialised config and re-parses.
pub fn with_override(cfg: &RunConfig, key: &str, value: &str) -> Result<RunConfig> {
    check_axis(cfg, key)?;
    let mut table: toml::Table = toml::from_str(&cfg.to_toml()?)?;
    let (cur, last) = section(&mut table, key)?;
    let mut parsed = parse_scalar(value);
    if let Some(old) = cur.get(&last) {
        match (old, &parsed) {
            (toml::Value::Float(_), toml::Value::Integer(i)) => parsed = toml::Value::Float(*i as f64),
            (o, p) if std::mem::discriminant(o) != std::mem::discriminant(p) => {
                return Err(LabError::Config(format!("sweep value {value} does not match the type of {key}")))
            }
            _ => {}
        }
    }
    cur.insert(last, parsed);
    let text = toml::to_string(&table)?;
    parse_config(&text).map_err(|e| LabError::Config(format!("{key} = {value}: {e}")))
}

fn parse_scalar(v: &str) -> toml::Value {
    let wrapped = format!("x = {v}");
    match toml::from_str::<toml::Table>(&wrapped).ok().and_then(|mut t| t.remove("x")) {
        Some(x) => x,
        None => toml::Value::String(v.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_all_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, RunConfig::default());
        let d = defaulted_keys("", &c).unwrap();
        assert!(d.iter().any(|(k, _)| k == "integrator.dt"));
        assert!(d.iter().any(|(k, _)| k == "equation.k"));
    }

    #[test]
    fn rejects_bad_k_and_unknown_keys() {
        let e = parse_config("[equation]\nk = 3\n").unwrap_err().to_string();
        assert!(e.contains("k must be 1 or 2"), "{e}");
        let e = parse_config("[integrator]\nsteps = 3\n").unwrap_err().to_string();
        assert!(e.contains("steps"), "{e}");
        let e = parse_config("[grid]\nn_x = 100\n").unwrap_err().to_string();
        assert!(e.contains("grid"), "{e}");
        let e = parse_config("[integrator]\ndt = \"fast\"\n").unwrap_err().to_string();
        assert!(e.contains("dt"), "{e}");
    }

    #[test]
    fn round_trip_full_config() {
        let mut c = RunConfig {
            seed: 17,
            initial_data: InitialData::Random { seed: Some(4), taper: Taper::Algebraic, amplitude: 0.5 },
            ..Default::default()
        };
        c.integrator.snapshot_stride = Some(25);
        c.ledger.d = Some(30.0);
        c.bounds.horizons = vec![2.0, 4.0];
        let text = c.to_toml().unwrap();
        assert_eq!(parse_config(&text).unwrap(), c);
    }

    #[test]
    fn overrides() {
        let c = RunConfig::default();
        assert_eq!(with_override(&c, "integrator.dt", "0.002").unwrap().integrator.dt, 0.002);
        assert_eq!(with_override(&c, "grid.l_x", "20").unwrap().grid.l_x, 20.0);
        assert_eq!(with_override(&c, "seed", "9").unwrap().seed, 9);
        assert!(with_override(&c, "gevrey.sigmas", "0.1").is_err());
        assert!(with_override(&c, "integrator.dt", "\"x\"").is_err());
        assert!(with_override(&c, "nope.dt", "1").is_err());
        assert!(matches!(check_axis(&c, "integrator.dtt"), Err(LabError::Usage(_))));
        assert!(check_axis(&c, "ledger.d").is_ok());
        assert_eq!(with_override(&c, "integrator.snapshot_stride", "5").unwrap().integrator.snapshot_stride, Some(5));
    }
}
