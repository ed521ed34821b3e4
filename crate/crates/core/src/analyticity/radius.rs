//! Radius of analyticity from the exponential decay of `|f̂|` along `|γ|₁` shells.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{SpectralField2D, EXP_GUARD};

/// Shape fitted to the log-envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `log A - σ k`.
    Exponential,
    /// `log A - σ k + p log k`; absorbs the algebraic factor in front of the
    /// exponential, which otherwise biases σ on moderate bands.
    AlgebraicExponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadiusFitConfig {
    /// Shells below `floor_rel · max` end the usable run.
    pub floor_rel: f64,
    pub drop_low: f64,
    pub drop_high: f64,
    pub model: FitModel,
    pub min_shells: usize,
}

impl Default for RadiusFitConfig {
    fn default() -> Self {
        Self { floor_rel: 1e-13, drop_low: 0.2, drop_high: 0.1, model: FitModel::AlgebraicExponential, min_shells: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    pub sigma_hat: f64,
    /// First and last shell index used by the fit.
    pub window: (usize, usize),
    /// RMS of the log-envelope residual.
    pub residual: f64,
    /// Too few shells above the noise floor; `sigma_hat` is a fallback.
    pub floor_hit: bool,
    pub warning: Option<String>,
    /// Fitted algebraic exponent, when the model has one.
    pub power: Option<f64>,
}

/// Shell envelope: max `|f̂|` per `|γ|₁` band of one lattice unit.
pub fn shell_envelope(f: &SpectralField2D) -> (f64, Vec<f64>) {
    let g = &f.grid;
    let unit = g.dxi().min(g.deta());
    let mut env: Vec<f64> = Vec::new();
    for (i, c) in f.coeffs.iter().enumerate() {
        let s = (g.wave_vector(i).l1() / unit).round() as usize;
        if env.len() <= s {
            env.resize(s + 1, 0.0);
        }
        env[s] = env[s].max(c.norm());
    }
    (unit, env)
}

/// Least squares on columns `cols` against `y`; returns coefficients and RMS residual.
#[allow(clippy::needless_range_loop)]
fn lstsq(cols: &[Vec<f64>], y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let p = cols.len();
    let mut a = vec![vec![0.0; p + 1]; p];
    for i in 0..p {
        for j in 0..p {
            a[i][j] = cols[i].iter().zip(&cols[j]).map(|(x, z)| x * z).sum();
        }
        a[i][p] = cols[i].iter().zip(y).map(|(x, z)| x * z).sum();
    }
    for c in 0..p {
        let piv = (c..p).max_by(|&r, &s| a[r][c].abs().total_cmp(&a[s][c].abs()))?;
        if a[piv][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, piv);
        for r in 0..p {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..=p {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    let coef: Vec<f64> = (0..p).map(|i| a[i][p] / a[i][i]).collect();
    let n = y.len() as f64;
    let ss: f64 = (0..y.len())
        .map(|r| {
            let fit: f64 = (0..p).map(|i| coef[i] * cols[i][r]).sum();
            (y[r] - fit).powi(2)
        })
        .sum();
    Some((coef, (ss / n).sqrt()))
}

pub fn estimate_radius(f: &SpectralField2D, cfg: &RadiusFitConfig) -> Result<RadiusEstimate> {
    let (unit, env) = shell_envelope(f);
    let peak_val = env.iter().copied().fold(0.0, f64::max);
    if peak_val == 0.0 {
        return Err(Error::domain("radius estimate needs a nonzero field"));
    }
    let peak = env.iter().position(|&v| v == peak_val).unwrap_or(0);
    let floor = cfg.floor_rel * peak_val;
    let mut end = peak;
    while end < env.len() && env[end] > floor {
        end += 1;
    }
    let cliff = end < env.len();
    let cap = EXP_GUARD / f.grid.max_l1();
    let run = end - peak;

    let (lo, hi) = if run >= cfg.min_shells {
        let lo = peak + (cfg.drop_low * run as f64).floor() as usize;
        let hi = end - (cfg.drop_high * run as f64).floor() as usize;
        (lo, hi)
    } else {
        (peak, end)
    };
    let need = match cfg.model {
        FitModel::Exponential => 2,
        FitModel::AlgebraicExponential => 3,
    };
    let shells: Vec<usize> = (lo..hi).filter(|&s| !(cfg.model == FitModel::AlgebraicExponential && s == 0)).collect();

    if (run < cfg.min_shells || shells.len() < need) && (cliff || shells.len() < need) {
        return Ok(RadiusEstimate {
            sigma_hat: cap,
            window: (peak, end.saturating_sub(1)),
            residual: 0.0,
            floor_hit: true,
            warning: Some(format!("only {run} shells above the noise floor; spectrum is effectively band-limited")),
            power: None,
        });
    }

    let k: Vec<f64> = shells.iter().map(|&s| s as f64 * unit).collect();
    let y: Vec<f64> = shells.iter().map(|&s| env[s].ln()).collect();
    let mut cols = vec![vec![1.0; k.len()], k.iter().map(|v| -v).collect::<Vec<_>>()];
    if cfg.model == FitModel::AlgebraicExponential {
        cols.push(k.iter().map(|v| v.ln()).collect());
    }
    let (coef, residual) = lstsq(&cols, &y).ok_or_else(|| Error::domain("degenerate radius fit"))?;
    let floor_hit = run < cfg.min_shells;
    Ok(RadiusEstimate {
        sigma_hat: coef[1].max(0.0),
        window: (shells[0], *shells.last().expect("nonempty")),
        residual,
        floor_hit,
        warning: floor_hit.then(|| format!("fit uses only {run} shells")),
        power: coef.get(2).copied(),
    })
}
