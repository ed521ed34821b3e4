//! Growth of `M_σ` and `E_σ` along a short run, against σ and data amplitude.

use serde::{Deserialize, Serialize};

use super::{loglog_slope, ProbeReport, SLOPE_ALLOWANCE};
use crate::dynamics::EquationSpec;
use crate::error::{Error, Result};
use crate::functionals::{e_sigma, m_sigma};
use crate::integrator::{evolve, IntegratorConfig};
use crate::spectral::SpectralField2D;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConservationKind {
    M,
    E,
}

/// Largest factor allowed between amplitude-normalised deviations.
pub const AMPLITUDE_FACTOR: f64 = 8.0;

#[derive(Debug, Clone)]
pub struct ConservationRun {
    pub spec: EquationSpec,
    pub integrator: IntegratorConfig,
    pub u0: SpectralField2D,
}

fn quantity(kind: ConservationKind, f: &SpectralField2D, sigma: f64, spec: &EquationSpec) -> Result<f64> {
    match kind {
        ConservationKind::M => m_sigma(f, sigma),
        ConservationKind::E => e_sigma(f, sigma, spec),
    }
}

fn normaliser(kind: ConservationKind, q0: f64) -> f64 {
    match kind {
        ConservationKind::M => q0.max(0.0).powf(1.5),
        ConservationKind::E => q0 * q0 * (1.0 + q0),
    }
}

/// `(sup_t |Q_σ(t) - Q_σ(0)|, Q_σ(0))` per σ.
fn deviations(kind: ConservationKind, run: &ConservationRun, scale: f64, sigmas: &[f64]) -> Result<Vec<(f64, f64)>> {
    let u0 = run.u0.scaled(scale);
    let mut first: Option<Vec<f64>> = None;
    let mut sup = vec![0.0f64; sigmas.len()];
    let mut err: Option<Error> = None;
    let hook = |f: &SpectralField2D, _: &_| {
        if err.is_some() {
            return;
        }
        let q: Result<Vec<f64>> = sigmas.iter().map(|&s| quantity(kind, f, s, &run.spec)).collect();
        match q {
            Ok(q) => match &first {
                None => first = Some(q),
                Some(q0) => {
                    for ((m, a), b) in sup.iter_mut().zip(&q).zip(q0) {
                        *m = m.max((a - b).abs());
                    }
                }
            },
            Err(e) => err = Some(e),
        }
    };
    evolve(&u0, &run.spec, &run.integrator, hook).map_err(|f| f.error)?;
    if let Some(e) = err {
        return Err(e);
    }
    let q0 = first.ok_or_else(|| Error::domain("run produced no diagnostics"))?;
    Ok(sup.into_iter().zip(q0).collect())
}

/// Runs at amplitudes 1 and 2; passes when the σ slope at amplitude 1 reaches
/// `exponent - 0.05` and normalised deviations agree within a factor 8.
pub fn almost_conservation_probe(
    kind: ConservationKind,
    run: &ConservationRun,
    sigma_list: &[f64],
    exponent: f64,
) -> Result<ProbeReport> {
    if sigma_list.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
        return Err(Error::config("sigma_list entries must be finite and >= 0"));
    }
    if sigma_list.is_empty() {
        return Err(Error::config("sigma_list is empty"));
    }
    let base = deviations(kind, run, 1.0, sigma_list)?;
    let doubled = deviations(kind, run, 2.0, sigma_list)?;
    let mut normalised = Vec::new();
    let mut amp_ok = true;
    let mut notes = Vec::new();
    for (i, &s) in sigma_list.iter().enumerate() {
        let (d1, q1) = base[i];
        let (d2, q2) = doubled[i];
        let n1 = d1 / normaliser(kind, q1);
        let n2 = d2 / normaliser(kind, q2);
        normalised.push(n1);
        if s > 0.0 && n1 > 0.0 {
            let f = n2 / n1;
            if !(1.0 / AMPLITUDE_FACTOR..=AMPLITUDE_FACTOR).contains(&f) {
                amp_ok = false;
            }
            notes.push(format!("σ = {s:e}: deviation {d1:.3e}, amplitude-2 normalised factor {f:.3}"));
        } else {
            notes.push(format!("σ = {s:e}: deviation {d1:.3e}"));
        }
    }
    let series: Vec<(f64, f64)> =
        sigma_list.iter().copied().zip(base.iter().map(|p| p.0)).filter(|p| p.0 > 0.0).collect();
    let mut rep = ProbeReport::from_ratios(&format!("almost_conservation_{kind:?}"), &normalised, 0);
    rep.slope = loglog_slope(&series);
    rep.threshold = Some(exponent - SLOPE_ALLOWANCE);
    rep.passed = amp_ok && rep.slope.is_some_and(|s| s >= exponent - SLOPE_ALLOWANCE);
    rep.series = series;
    rep.notes = notes;
    Ok(rep)
}
