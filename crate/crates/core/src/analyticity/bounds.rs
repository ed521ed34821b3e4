//! Lower-bound curves for σ(T) and power-law fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `c T^{-4+ε}`.
    ZkMinus4Eps,
    /// `c T^{-4/3}`.
    MzkMinus4Thirds,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub kind: BoundKind,
    pub c: f64,
    pub eps: f64,
    pub sigma0: f64,
}

impl BoundCurve {
    pub fn new(kind: BoundKind, c: f64, eps: f64, sigma0: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::domain(format!("bound prefactor c = {c} must be positive")));
        }
        if kind == BoundKind::ZkMinus4Eps && !(eps > 0.0) {
            return Err(Error::domain(format!("ε = {eps} must be positive")));
        }
        if !(sigma0 > 0.0) {
            return Err(Error::domain(format!("σ₀ = {sigma0} must be positive")));
        }
        Ok(Self { kind, c, eps, sigma0 })
    }

    pub fn exponent(&self) -> f64 {
        match self.kind {
            BoundKind::ZkMinus4Eps => -4.0 + self.eps,
            BoundKind::MzkMinus4Thirds => -4.0 / 3.0,
        }
    }

    /// `min(σ₀, c T^{exponent})`.
    pub fn eval(&self, t: f64) -> f64 {
        self.sigma0.min(self.c * t.powf(self.exponent()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r2: f64,
}

/// Least squares of `log σ` on `log T`.
pub fn fit_decay_exponent(series: &[(f64, f64)]) -> Result<DecayFit> {
    if series.len() < 4 {
        return Err(Error::domain(format!("decay fit needs >= 4 points, got {}", series.len())));
    }
    if series.iter().any(|&(t, s)| !(t > 0.0 && s > 0.0)) {
        return Err(Error::domain("decay fit needs positive T and σ"));
    }
    let n = series.len() as f64;
    let x: Vec<f64> = series.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = series.iter().map(|p| p.1.ln()).collect();
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("decay fit needs distinct T values"));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ss_res: f64 = x.iter().zip(&y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(DecayFit { exponent: slope, prefactor: icpt.exp(), r2 })
}
