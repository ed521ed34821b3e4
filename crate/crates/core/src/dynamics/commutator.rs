//! Gevrey commutators `coef · D[U^p - e^{σ|D|}((e^{-σ|D|}U)^p)]`.

use num_complex::Complex64;

use super::{EquationSpec, RhsEvaluator};
use crate::error::{Error, Result};
use crate::spectral::{check_exp_guard, exp_smooth, Smoothing, SpectralField2D};

impl RhsEvaluator {
    /// Commutator for the evaluator's nonlinearity, `p = k + 1`.
    pub fn commutator(&self, u: &SpectralField2D, sigma: f64) -> Result<SpectralField2D> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!("radius {sigma} must be finite and >= 0")));
        }
        let g = *self.grid();
        if u.grid != g {
            return Err(Error::config("field grid differs from evaluator grid"));
        }
        let mut out = SpectralField2D { grid: g, coeffs: vec![Complex64::new(0.0, 0.0); g.len()], time: u.time };
        if sigma == 0.0 {
            return Ok(out);
        }
        let p = self.spec().k() as usize + 1;
        let direct = self.transformer().power(&u.coeffs, p);
        let damped = exp_smooth(u, sigma, Smoothing::Damp)?;
        let inner = SpectralField2D { grid: g, coeffs: self.transformer().power(&damped.coeffs, p), time: u.time };
        check_exp_guard(&inner, sigma)?;
        let regrown = exp_smooth(&inner, sigma, Smoothing::Grow)?;
        let coef = self.spec().nonlinear_coef();
        for (i, o) in out.coeffs.iter_mut().enumerate() {
            let s = self.spec().derivative_symbol(g.odd_wave_vector(i));
            *o = Complex64::new(0.0, coef * s) * (direct[i] - regrown.coeffs[i]);
        }
        Ok(out)
    }
}

fn checked(u: &SpectralField2D, spec: &EquationSpec, k: u32, name: &str) -> Result<RhsEvaluator> {
    if spec.k() != k {
        return Err(Error::SpecMismatch(format!("{name} needs k = {k}, got k = {}", spec.k())));
    }
    Ok(RhsEvaluator::new(u.grid, *spec))
}

/// Quadratic commutator `F(U)`.
pub fn commutator_f(u: &SpectralField2D, sigma: f64, spec: &EquationSpec) -> Result<SpectralField2D> {
    checked(u, spec, 1, "F")?.commutator(u, sigma)
}

/// Cubic commutator `G(U)`.
pub fn commutator_g(u: &SpectralField2D, sigma: f64, spec: &EquationSpec) -> Result<SpectralField2D> {
    checked(u, spec, 2, "G")?.commutator(u, sigma)
}
