//! Equation data, the symmetrising change of variables and right-hand sides.

mod b_theta;
mod commutator;
mod rhs;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{DealiasDegree, WaveVector};

pub use b_theta::{b_theta_apply, min_kernel_ratio, KernelMetric};
pub use commutator::{commutator_f, commutator_g};
pub use rhs::{rhs, RhsEvaluator};

/// Which way the equation is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    /// `u_t + ∂_x Δu + μ ∂_x u^{k+1} = 0`.
    Original,
    /// `u_t + (∂_x³ + ∂_y³) u + μ a (∂_x + ∂_y) u^{k+1} = 0`.
    Symmetrized,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawSpec {
    k: u32,
    mu: f64,
    form: Form,
}

/// Nonlinearity index `k`, sign `μ` and form of the equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct EquationSpec {
    k: u32,
    mu: f64,
    form: Form,
}

impl Default for RawSpec {
    fn default() -> Self {
        RawSpec { k: 1, mu: 1.0, form: Form::Symmetrized }
    }
}

impl Default for EquationSpec {
    fn default() -> Self {
        Self { k: 1, mu: 1.0, form: Form::Symmetrized }
    }
}

impl TryFrom<RawSpec> for EquationSpec {
    type Error = Error;
    fn try_from(r: RawSpec) -> Result<Self> {
        if r.mu == 0.0 {
            return Self::linear_only(r.k, r.form);
        }
        if r.mu != 1.0 && r.mu != -1.0 {
            return Err(Error::config(format!("mu must be -1 or +1, got {}", r.mu)));
        }
        Self::new(r.k, r.mu as i32, r.form)
    }
}

impl From<EquationSpec> for RawSpec {
    fn from(s: EquationSpec) -> Self {
        RawSpec { k: s.k, mu: s.mu, form: s.form }
    }
}

/// `a = 2^{-2/3}`.
pub fn coef_a() -> f64 {
    2f64.powf(-2.0 / 3.0)
}

/// `b = 3^{1/2} 2^{-2/3}`.
pub fn coef_b() -> f64 {
    3f64.sqrt() * 2f64.powf(-2.0 / 3.0)
}

impl EquationSpec {
    pub fn new(k: u32, mu: i32, form: Form) -> Result<Self> {
        check_k(k)?;
        if mu != 1 && mu != -1 {
            return Err(Error::config(format!("mu must be -1 or +1, got {mu}")));
        }
        Ok(Self { k, mu: mu as f64, form })
    }

    /// Purely dispersive flow (`μ = 0`), used to isolate the linear part.
    pub fn linear_only(k: u32, form: Form) -> Result<Self> {
        check_k(k)?;
        Ok(Self { k, mu: 0.0, form })
    }

    pub fn k(&self) -> u32 {
        self.k
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn form(&self) -> Form {
        self.form
    }
    pub fn a(&self) -> f64 {
        coef_a()
    }
    pub fn b_coef(&self) -> f64 {
        coef_b()
    }

    pub fn degree(&self) -> DealiasDegree {
        match self.k {
            1 => DealiasDegree::Quadratic,
            _ => DealiasDegree::Cubic,
        }
    }

    /// Real coefficient in front of the derivative of `u^{k+1}`.
    pub fn nonlinear_coef(&self) -> f64 {
        match self.form {
            Form::Original => self.mu,
            Form::Symmetrized => self.mu * coef_a(),
        }
    }

    /// `s(γ)` with the derivative in the nonlinearity acting as `i s(γ)`.
    #[inline]
    pub fn derivative_symbol(&self, w: WaveVector) -> f64 {
        match self.form {
            Form::Original => w.xi,
            Form::Symmetrized => w.xi + w.eta,
        }
    }

    /// Phase rate `ω(γ)` of the free flow `û(t) = e^{iω t} û(0)`.
    #[inline]
    pub fn dispersion(&self, w: WaveVector) -> f64 {
        match self.form {
            Form::Original => w.xi * (w.xi * w.xi + w.eta * w.eta),
            Form::Symmetrized => w.cubic(),
        }
    }
}

fn check_k(k: u32) -> Result<()> {
    if k == 1 || k == 2 {
        Ok(())
    } else {
        Err(Error::config("k must be 1 or 2"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapDirection {
    Forward,
    Inverse,
}

/// The change of variables `x ↦ a x + b y`, `y ↦ a x - b y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateMap {
    pub forward: [[f64; 2]; 2],
    pub inverse: [[f64; 2]; 2],
    pub det: f64,
}

impl Default for CoordinateMap {
    fn default() -> Self {
        let a = coef_a();
        let b = coef_b();
        Self { forward: [[a, b], [a, -b]], inverse: [[0.5 / a, 0.5 / a], [0.5 / b, -0.5 / b]], det: -2.0 * a * b }
    }
}

impl CoordinateMap {
    pub fn apply(&self, p: (f64, f64), dir: MapDirection) -> (f64, f64) {
        let m = match dir {
            MapDirection::Forward => &self.forward,
            MapDirection::Inverse => &self.inverse,
        };
        (m[0][0] * p.0 + m[0][1] * p.1, m[1][0] * p.0 + m[1][1] * p.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients() {
        assert!((coef_a() - 0.6299605249474366).abs() < 1e-15);
        let m = CoordinateMap::default();
        assert_eq!(m.apply((1.0, 0.0), MapDirection::Forward), (coef_a(), coef_a()));
        assert!((m.det.abs() - 1.374729637).abs() < 1e-9);
        assert!((m.det.abs() - 3f64.sqrt() * 2f64.powf(-1.0 / 3.0)).abs() < 1e-14);
        for i in 0..2 {
            for j in 0..2 {
                let v: f64 = (0..2).map(|k| m.forward[i][k] * m.inverse[k][j]).sum();
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        let p = (0.3, -1.7);
        let q = m.apply(m.apply(p, MapDirection::Inverse), MapDirection::Forward);
        assert!((q.0 - p.0).abs() < 1e-14 && (q.1 - p.1).abs() < 1e-14);
    }

    #[test]
    fn spec_validation() {
        assert!(EquationSpec::new(3, 1, Form::Symmetrized).unwrap_err().to_string().contains("k must be 1 or 2"));
        assert!(EquationSpec::new(1, 2, Form::Symmetrized).is_err());
        let s = EquationSpec::new(2, -1, Form::Symmetrized).unwrap();
        assert_eq!(s.degree(), DealiasDegree::Cubic);
        assert!((s.nonlinear_coef() + coef_a()).abs() < 1e-16);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<EquationSpec>(&json).unwrap(), s);
        assert!(serde_json::from_str::<EquationSpec>(r#"{"k":1,"mu":0.5,"form":"original"}"#).is_err());
    }

    #[test]
    fn dispersion_matches_change_of_variables() {
        // The original symbol at γ equals the symmetric one at Mᵀ-image frequencies.
        let m = CoordinateMap::default();
        let orig = EquationSpec::new(1, 1, Form::Original).unwrap();
        let sym = EquationSpec::new(1, 1, Form::Symmetrized).unwrap();
        for &(xi, eta) in &[(1.0, 0.0), (0.3, -2.0), (-1.1, 0.7)] {
            // u(x) = v(Mx) gives ∇_x = Mᵀ ∇_X, so γ = Mᵀ Γ.
            let inv = m.inverse;
            let big = WaveVector::new(inv[0][0] * xi + inv[1][0] * eta, inv[0][1] * xi + inv[1][1] * eta);
            let w = WaveVector::new(xi, eta);
            assert!((orig.dispersion(w) - sym.dispersion(big)).abs() < 1e-12);
            assert!(
                (orig.derivative_symbol(w) * orig.nonlinear_coef() - sym.derivative_symbol(big) * sym.nonlinear_coef())
                    .abs()
                    < 1e-12
            );
        }
    }
}
