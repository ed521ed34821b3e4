//! σ-scaling of the Gevrey commutators on a fixed smooth field.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{loglog_slope, ProbeParams, ProbeReport, SLOPE_ALLOWANCE};
use crate::dynamics::{EquationSpec, Form, RhsEvaluator};
use crate::error::{Error, Result};
use crate::initial::{random_smooth, Taper};
use crate::spectral::{Grid2D, SpectralField2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CommutatorKind {
    /// Quadratic commutator; slope compared with θ.
    F,
    /// Cubic commutator; slope compared with α.
    G,
}

impl CommutatorKind {
    pub fn spec(self) -> EquationSpec {
        match self {
            CommutatorKind::F => EquationSpec::new(1, 1, Form::Symmetrized),
            CommutatorKind::G => EquationSpec::new(2, -1, Form::Symmetrized),
        }
        .expect("fixed specs are valid")
    }
}

/// Smooth random field with Gaussian spectrum whose mode `band` sits at `|ξ| = 4`.
fn probe_field(p: &ProbeParams) -> Result<SpectralField2D> {
    let n = (4 * p.band).next_power_of_two().max(16);
    let grid = Grid2D::square(n, PI * p.band as f64 / 2.0)?;
    random_smooth(grid, p.seed, 1.0, Taper::Gaussian)
}

/// `‖F(U)‖_{L²}` (or `G`) against σ over `p.sigma_list`; passes when the
/// log-log slope is at least the claimed exponent minus the allowance.
pub fn commutator_scaling_probe(kind: CommutatorKind, p: &ProbeParams) -> Result<ProbeReport> {
    p.validate()?;
    let sigmas = p.sigma_sweep()?;
    let u = probe_field(p)?;
    let norm_u = u.l2_norm();
    if norm_u == 0.0 {
        return Err(Error::domain("degenerate probe field"));
    }
    let eval = RhsEvaluator::new(u.grid, kind.spec());
    let mut series = Vec::with_capacity(sigmas.len());
    for &s in &sigmas {
        series.push((s, eval.commutator(&u, s)?.l2_norm()));
    }
    let power = match kind {
        CommutatorKind::F => 2,
        CommutatorKind::G => 3,
    };
    let ratios: Vec<f64> = series.iter().map(|(s, v)| v / (s * norm_u.powi(power))).collect();
    let exponent = match kind {
        CommutatorKind::F => p.theta,
        CommutatorKind::G => p.alpha,
    };
    let mut rep = ProbeReport::from_ratios(&format!("commutator_{kind:?}"), &ratios, 0);
    rep.slope = loglog_slope(&series);
    rep.threshold = Some(exponent - SLOPE_ALLOWANCE);
    rep.passed = rep.slope.is_some_and(|s| s >= exponent - SLOPE_ALLOWANCE);
    rep.series = series;
    rep.notes.push(format!("ratios are ‖·‖/(σ‖U‖^{power}); grid {}²", u.grid.n_x));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slopes_meet_thresholds() {
        let p = ProbeParams { band: 4, ..Default::default() };
        for kind in [CommutatorKind::F, CommutatorKind::G] {
            let r = commutator_scaling_probe(kind, &p).unwrap();
            assert!(r.passed, "{kind:?}: {:?}", r.slope);
            assert!((r.slope.unwrap() - 1.0).abs() < 0.1, "{:?}", r.slope);
        }
    }

    #[test]
    fn zero_sigma_vanishes_and_cubic_homogeneity() {
        let p = ProbeParams { band: 4, seed: 3, ..Default::default() };
        let u = probe_field(&p).unwrap();
        let eval = RhsEvaluator::new(u.grid, CommutatorKind::G.spec());
        assert_eq!(eval.commutator(&u, 0.0).unwrap().l2_norm(), 0.0);
        let a = eval.commutator(&u, 0.05).unwrap().l2_norm();
        let b = eval.commutator(&u.scaled(2.0), 0.05).unwrap().l2_norm();
        assert!((b / a - 8.0).abs() < 1e-10);
    }

    #[test]
    fn narrow_sweep_rejected() {
        let p = ProbeParams { sigma_list: vec![0.01, 0.05], ..Default::default() };
        assert!(commutator_scaling_probe(CommutatorKind::F, &p).is_err());
    }
}
