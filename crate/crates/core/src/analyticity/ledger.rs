//! Lifespan, continuation step and the smallness condition fixing σ(T).

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use super::epsilon::default_d;
use crate::error::{Error, Result};

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {v} must be positive")))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {v} must be >= 0")))
    }
}

/// `T₀ = c₀ / (1 + ‖u₀‖²)^d`.
pub fn lifespan_t0(norm_sq: f64, c0: f64, d: f64) -> Result<f64> {
    nonnegative("norm_sq", norm_sq)?;
    positive("c0", c0)?;
    if !(d > 1.0) {
        return Err(Error::domain(format!("d = {d} must exceed 1")));
    }
    Ok(c0 / (1.0 + norm_sq).powf(d))
}

/// `δ = c₀ / (1 + 2 M_{σ₀}(0))^d`.
pub fn continuation_delta(m0: f64, c0: f64, d: f64) -> Result<f64> {
    nonnegative("M0", m0)?;
    positive("c0", c0)?;
    Ok(c0 / (1.0 + 2.0 * m0).powf(d))
}

/// `δ = c₀ / (1 + 4 E_{σ₀}(0))^d` for the cubic equation.
pub fn continuation_delta_mzk(e0: f64, c0: f64, d: f64) -> Result<f64> {
    nonnegative("E0", e0)?;
    positive("c0", c0)?;
    Ok(c0 / (1.0 + 4.0 * e0).powf(d))
}

/// Left side of `(2T/δ) C σ^θ 2^{3/2} M₀^{1/2} = 1`.
pub fn condition2_lhs(sigma: f64, t: f64, delta: f64, m0: f64, theta: f64, c: f64) -> f64 {
    2.0 * t / delta * c * sigma.powf(theta) * 2f64.powf(1.5) * m0.sqrt()
}

/// σ solving the quadratic-case smallness condition with equality.
pub fn condition2_sigma(t: f64, delta: f64, m0: f64, theta: f64, c: f64) -> Result<f64> {
    positive("T", t)?;
    positive("delta", delta)?;
    positive("M0", m0)?;
    positive("C", c)?;
    if !(theta > 0.0 && theta < 0.25) {
        return Err(Error::domain(format!("θ = {theta} must lie in (0, 1/4)")));
    }
    Ok((delta / (2.0 * t * c * 2f64.powf(1.5) * m0.sqrt())).powf(1.0 / theta))
}

/// Left side of `2⁴ (T/δ) C σ^α E₀² (1 + E₀) = 1`.
pub fn condition2_lhs_mzk(sigma: f64, t: f64, delta: f64, e0: f64, alpha: f64, c: f64) -> f64 {
    16.0 * t / delta * c * sigma.powf(alpha) * e0 * e0 * (1.0 + e0)
}

/// σ solving the cubic-case smallness condition with equality.
pub fn condition2_sigma_mzk(t: f64, delta: f64, e0: f64, alpha: f64, c: f64) -> Result<f64> {
    positive("T", t)?;
    positive("delta", delta)?;
    positive("E0", e0)?;
    positive("C", c)?;
    if !(alpha > 0.0 && alpha <= 0.75) {
        return Err(Error::domain(format!("α = {alpha} must lie in (0, 3/4]")));
    }
    Ok((delta / (16.0 * t * c * e0 * e0 * (1.0 + e0))).powf(1.0 / alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LedgerKind {
    /// Quadratic equation, driven by `M_{σ₀}(0)` at `s = 0`.
    Zk,
    /// Defocusing cubic equation, driven by `E_{σ₀}(0)` at `s = 1`.
    Mzk,
}

impl LedgerKind {
    pub fn sobolev_index(self) -> i64 {
        match self {
            LedgerKind::Zk => 0,
            LedgerKind::Mzk => 1,
        }
    }
}

/// Unspecified constants of the continuation argument, all explicit inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LedgerConstants {
    #[serde(rename = "C")]
    pub c: f64,
    pub c0: f64,
    /// `None` uses `1/ε(s)`.
    pub d: Option<f64>,
    pub theta: f64,
    pub alpha: f64,
    pub sigma0: f64,
}

impl Default for LedgerConstants {
    fn default() -> Self {
        Self { c: 1.0, c0: 1.0, d: None, theta: 0.25 - 1e-3, alpha: 0.75, sigma0: 1.0 }
    }
}

impl LedgerConstants {
    pub fn resolved_d(&self, kind: LedgerKind) -> Result<f64> {
        match self.d {
            Some(d) => Ok(d),
            None => {
                let d: Rational64 = default_d(Rational64::from_integer(kind.sobolev_index()))?;
                Ok(*d.numer() as f64 / *d.denom() as f64)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("ledger.C", self.c)?;
        positive("ledger.c0", self.c0)?;
        positive("ledger.sigma0", self.sigma0)?;
        if let Some(d) = self.d {
            if !(d > 1.0) {
                return Err(Error::config(format!("ledger.d = {d} must exceed 1")));
            }
        }
        if !(self.theta > 0.0 && self.theta < 0.25) {
            return Err(Error::config(format!("ledger.theta = {} must lie in (0, 1/4)", self.theta)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 0.75) {
            return Err(Error::config(format!("ledger.alpha = {} must lie in (0, 3/4]", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub t: f64,
    /// `n` with `n δ <= T < (n + 1) δ`; a float because `T/δ` can exceed `u64`.
    pub n_steps: f64,
    /// Unclamped solution of the smallness condition.
    pub sigma_star: f64,
    /// `min(σ₀, σ*)`.
    pub sigma: f64,
    /// Condition left side evaluated at `sigma_star`.
    pub condition_lhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationLedger {
    pub kind: LedgerKind,
    pub constants: LedgerConstants,
    pub d: f64,
    /// `M_{σ₀}(0)` or `E_{σ₀}(0)`.
    pub norm0: f64,
    pub t0: f64,
    pub delta: f64,
    pub rows: Vec<LedgerRow>,
    /// Largest `|lhs - 1|` over the rows.
    pub condition2_margin: f64,
}

impl ContinuationLedger {
    pub fn build(kind: LedgerKind, constants: LedgerConstants, norm0: f64, horizons: &[f64]) -> Result<Self> {
        constants.validate()?;
        let d = constants.resolved_d(kind)?;
        let c0 = constants.c0;
        let (t0, delta) = match kind {
            LedgerKind::Zk => (lifespan_t0(norm0, c0, d)?, continuation_delta(norm0, c0, d)?),
            // E bounds half the squared G^{σ,1} norm from above in the defocusing case.
            LedgerKind::Mzk => (lifespan_t0(2.0 * norm0, c0, d)?, continuation_delta_mzk(norm0, c0, d)?),
        };
        let mut ts = horizons.to_vec();
        ts.sort_by(|a, b| a.total_cmp(b));
        let mut rows = Vec::with_capacity(ts.len());
        let mut margin: f64 = 0.0;
        for t in ts {
            let (sigma_star, lhs) = match kind {
                LedgerKind::Zk => {
                    let s = condition2_sigma(t, delta, norm0, constants.theta, constants.c)?;
                    (s, condition2_lhs(s, t, delta, norm0, constants.theta, constants.c))
                }
                LedgerKind::Mzk => {
                    let s = condition2_sigma_mzk(t, delta, norm0, constants.alpha, constants.c)?;
                    (s, condition2_lhs_mzk(s, t, delta, norm0, constants.alpha, constants.c))
                }
            };
            margin = margin.max((lhs - 1.0).abs());
            rows.push(LedgerRow {
                t,
                n_steps: (t / delta).floor(),
                sigma_star,
                sigma: sigma_star.min(constants.sigma0),
                condition_lhs: lhs,
            });
        }
        Ok(Self { kind, constants, d, norm0, t0, delta, rows, condition2_margin: margin })
    }

    pub fn sigma_schedule(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.t, r.sigma)).collect()
    }
}
