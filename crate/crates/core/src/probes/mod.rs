//! Randomised stress tests of the exponential, multilinear, commutator and
//! almost-conservation inequalities.

mod commutator;
mod conservation;
mod multilinear;
mod scalar;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use commutator::{commutator_scaling_probe, CommutatorKind};
pub use conservation::{almost_conservation_probe, ConservationKind, ConservationRun};
pub use multilinear::{
    bilinear_probe, multilinear_probe, single_mode_closed_form, single_mode_ratio, trilinear_probe, ProbeLattice,
    SingleMode,
};
pub use scalar::{exp_minus_one_check, min_exp_inequality_check, SCALAR_SLACK};

/// Largest factor by which a max ratio may move between resolutions before the
/// report is flagged.
pub const STABILITY_LIMIT: f64 = 4.0;

/// Allowance below the claimed exponent for fitted σ slopes.
pub const SLOPE_ALLOWANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeParams {
    pub trials: usize,
    pub seed: u64,
    /// Largest active mode per axis.
    pub band: usize,
    pub sigma_list: Vec<f64>,
    pub theta: f64,
    pub alpha: f64,
    pub s: f64,
}

impl Default for ProbeParams {
    fn default() -> Self {
        Self {
            trials: 20,
            seed: 0,
            band: 8,
            sigma_list: vec![1e-3, 10f64.powf(-2.5), 1e-2, 10f64.powf(-1.5), 1e-1],
            theta: 0.25 - 1e-3,
            alpha: 0.75,
            s: 0.0,
        }
    }
}

impl ProbeParams {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("probes.trials must be >= 1"));
        }
        if self.band == 0 {
            return Err(Error::config("probes.band must be >= 1"));
        }
        if !(self.theta >= 0.0 && self.theta < 0.25) {
            return Err(Error::config(format!("probes.theta = {} must lie in [0, 1/4)", self.theta)));
        }
        if !(self.alpha >= 0.0 && self.alpha <= 0.75) {
            return Err(Error::config(format!("probes.alpha = {} must lie in [0, 3/4]", self.alpha)));
        }
        if !(self.s > -0.25) {
            return Err(Error::config(format!("probes.s = {} must exceed -1/4", self.s)));
        }
        if self.sigma_list.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(Error::config("probes.sigma_list entries must be finite and >= 0"));
        }
        Ok(())
    }

    /// Positive σ values spanning at least two decades.
    pub(crate) fn sigma_sweep(&self) -> Result<Vec<f64>> {
        let v: Vec<f64> = self.sigma_list.iter().copied().filter(|s| *s > 0.0).collect();
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(0.0, f64::max);
        if v.len() < 2 || hi / lo < 100.0 * (1.0 - 1e-9) {
            return Err(Error::config("probes.sigma_list must span at least two decades"));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub probe: String,
    pub samples: usize,
    /// Trials dropped for a vanishing denominator.
    pub skipped: usize,
    pub max_ratio: f64,
    /// `(q, value)` pairs at q = 0.5, 0.9, 0.99.
    pub ratio_quantiles: Vec<(f64, f64)>,
    pub violation_count: usize,
    pub slope: Option<f64>,
    pub threshold: Option<f64>,
    /// Max ratio at each resolution, in increasing order.
    pub per_resolution: Vec<(usize, f64)>,
    pub stability_factor: Option<f64>,
    /// Report-only: the stability factor exceeded its limit.
    pub flagged: bool,
    /// `(σ, value)` series behind a slope fit.
    pub series: Vec<(f64, f64)>,
    pub notes: Vec<String>,
    /// Every hard assertion of the probe held.
    pub passed: bool,
    pub histogram: Vec<HistogramBin>,
}

impl ProbeReport {
    pub(crate) fn from_ratios(probe: &str, ratios: &[f64], skipped: usize) -> Self {
        let mut sorted: Vec<f64> = ratios.iter().copied().filter(|r| r.is_finite()).collect();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let quant = |q: f64| {
            if sorted.is_empty() {
                0.0
            } else {
                sorted[((q * (sorted.len() - 1) as f64).round() as usize).min(sorted.len() - 1)]
            }
        };
        Self {
            probe: probe.to_string(),
            samples: ratios.len(),
            skipped,
            max_ratio: sorted.last().copied().unwrap_or(0.0),
            ratio_quantiles: [0.5, 0.9, 0.99].iter().map(|&q| (q, quant(q))).collect(),
            violation_count: 0,
            slope: None,
            threshold: None,
            per_resolution: Vec::new(),
            stability_factor: None,
            flagged: false,
            series: Vec::new(),
            notes: Vec::new(),
            passed: true,
            histogram: histogram(&sorted, 20),
        }
    }

    pub(crate) fn set_stability(&mut self, per_resolution: Vec<(usize, f64)>) {
        let hi = per_resolution.iter().map(|p| p.1).fold(0.0, f64::max);
        let lo = per_resolution.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let f = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        self.per_resolution = per_resolution;
        self.stability_factor = Some(f);
        self.flagged = !(f <= STABILITY_LIMIT);
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `lo,hi,count` rows under a schema tag.
    pub fn histogram_csv(&self) -> String {
        let mut s = String::from("# schema: zk-probe-histogram v1\nlo,hi,count\n");
        for b in &self.histogram {
            s.push_str(&format!("{:e},{:e},{}\n", b.lo, b.hi, b.count));
        }
        s
    }
}

fn histogram(sorted: &[f64], bins: usize) -> Vec<HistogramBin> {
    let (Some(&lo), Some(&hi)) = (sorted.first(), sorted.last()) else {
        return Vec::new();
    };
    if hi == lo {
        return vec![HistogramBin { lo, hi, count: sorted.len() }];
    }
    let w = (hi - lo) / bins as f64;
    let mut out: Vec<HistogramBin> =
        (0..bins).map(|b| HistogramBin { lo: lo + b as f64 * w, hi: lo + (b + 1) as f64 * w, count: 0 }).collect();
    for &r in sorted {
        let b = (((r - lo) / w) as usize).min(bins - 1);
        out[b].count += 1;
    }
    out
}

/// Least-squares slope of `log y` on `log x` over positive pairs.
pub(crate) fn loglog_slope(series: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = series.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
