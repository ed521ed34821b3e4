use num_complex::Complex64;

use super::EquationSpec;
use crate::error::{Error, Result};
use crate::spectral::{Grid2D, SpectralField2D, Transformer};

/// Cached symbols and transforms for repeated right-hand-side evaluations.
#[derive(Debug)]
pub struct RhsEvaluator {
    spec: EquationSpec,
    transformer: Transformer,
    omega: Vec<f64>,
    /// `-coef · s(γ)`, so the nonlinear term is `i · deriv · FT(u^{k+1})`.
    deriv: Vec<f64>,
}

impl RhsEvaluator {
    pub fn new(grid: Grid2D, spec: EquationSpec) -> Self {
        let coef = spec.nonlinear_coef();
        let omega = (0..grid.len()).map(|i| spec.dispersion(grid.odd_wave_vector(i))).collect();
        let deriv = (0..grid.len()).map(|i| -coef * spec.derivative_symbol(grid.odd_wave_vector(i))).collect();
        Self { spec, transformer: Transformer::new(grid), omega, deriv }
    }

    pub fn spec(&self) -> &EquationSpec {
        &self.spec
    }

    pub fn grid(&self) -> &Grid2D {
        self.transformer.grid()
    }

    pub fn transformer(&self) -> &Transformer {
        &self.transformer
    }

    /// `ω(γ)` per flat index; the linear part of the flow is `i ω û`.
    pub fn dispersion(&self) -> &[f64] {
        &self.omega
    }

    /// Nonlinear part of `du/dt`, dealiased for the next product.
    pub fn nonlinear(&self, coeffs: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
        let g = *self.grid();
        let mut out = if self.spec.mu() == 0.0 {
            vec![Complex64::new(0.0, 0.0); g.len()]
        } else {
            self.transformer.power(coeffs, self.spec.k() as usize + 1)
        };
        let degree = self.spec.degree();
        for (i, c) in out.iter_mut().enumerate() {
            if !(c.re.is_finite() && c.im.is_finite()) {
                let (mx, my) = g.modes(i);
                return Err(Error::BlowUp { t, msg: format!("non-finite product at mode ({mx}, {my})") });
            }
            let (mx, my) = g.modes(i);
            if degree.keeps(mx, g.n_x) && degree.keeps(my, g.n_y) {
                *c *= Complex64::new(0.0, self.deriv[i]);
            } else {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        Ok(out)
    }

    /// Full `du/dt` for a dealiased field.
    pub fn rhs(&self, field: &SpectralField2D) -> Result<SpectralField2D> {
        if field.grid != *self.grid() {
            return Err(Error::config("field grid differs from evaluator grid"));
        }
        let mut out = self.nonlinear(&field.coeffs, field.time)?;
        for ((o, c), w) in out.iter_mut().zip(&field.coeffs).zip(&self.omega) {
            *o += Complex64::new(0.0, *w) * c;
        }
        Ok(SpectralField2D { grid: field.grid, coeffs: out, time: field.time })
    }
}

/// One-shot `du/dt`.
pub fn rhs(field: &SpectralField2D, spec: &EquationSpec) -> Result<SpectralField2D> {
    RhsEvaluator::new(field.grid, *spec).rhs(field)
}
