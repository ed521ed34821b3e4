//! Pointwise Fourier multipliers, dealiasing and frequency projections.

use num_complex::Complex64;

use super::{Grid2D, ProjectionSpec, SpectralField2D, WaveVector};
use crate::error::{Error, Result};
use crate::window::WindowFn;

/// Exponent ceiling for `e^{σ|γ|}` before double precision runs out of room.
pub const EXP_GUARD: f64 = 700.0;

/// Multiplies every coefficient by `m(γ)`.
pub fn apply_multiplier<M>(field: &SpectralField2D, m: M) -> Result<SpectralField2D>
where
    M: Fn(WaveVector) -> Complex64,
{
    let mut out = field.clone();
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        let v = m(field.grid.wave_vector(i));
        if !(v.re.is_finite() && v.im.is_finite()) {
            let (mx, my) = field.grid.modes(i);
            return Err(Error::NonFinite { mx, my, msg: format!("multiplier value {v}") });
        }
        *c *= v;
    }
    Ok(out)
}

/// Direction of the Gevrey operator `e^{±σ|D|}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    /// `e^{+σ|D|}`: moves a field into the analytic frame.
    Grow,
    /// `e^{-σ|D|}`.
    Damp,
}

/// Scales each coefficient by `e^{±σ(|ξ|+|η|)}`.
pub fn exp_smooth(field: &SpectralField2D, sigma: f64, dir: Smoothing) -> Result<SpectralField2D> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("radius {sigma} must be finite and >= 0")));
    }
    if sigma == 0.0 {
        return Ok(field.clone());
    }
    if dir == Smoothing::Grow {
        check_exp_guard(field, sigma)?;
    }
    let sign = if dir == Smoothing::Grow { 1.0 } else { -1.0 };
    let mut out = field.clone();
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        *c *= (sign * sigma * field.grid.wave_vector(i).l1()).exp();
    }
    Ok(out)
}

/// Fails if `σ|γ|₁` exceeds the guard on any mode carrying a nonzero coefficient.
pub fn check_exp_guard(field: &SpectralField2D, sigma: f64) -> Result<()> {
    let mut worst: f64 = 0.0;
    for (i, c) in field.coeffs.iter().enumerate() {
        if *c != Complex64::new(0.0, 0.0) {
            worst = worst.max(field.grid.wave_vector(i).l1());
        }
    }
    if sigma * worst > EXP_GUARD {
        return Err(Error::range(format!(
            "e^(σ|γ|) overflows: σ·max|γ|₁ = {:.1} > {EXP_GUARD}; use a smaller σ or truncate \
             the spectrum at the noise floor",
            sigma * worst
        )));
    }
    Ok(())
}

/// Degree of the nonlinear product a field is about to enter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DealiasDegree {
    Quadratic,
    Cubic,
}

impl DealiasDegree {
    pub fn from_power(p: u32) -> Result<Self> {
        match p {
            2 => Ok(Self::Quadratic),
            3 => Ok(Self::Cubic),
            _ => Err(Error::config(format!("no dealias rule for degree {p}"))),
        }
    }

    pub fn power(self) -> u32 {
        match self {
            Self::Quadratic => 2,
            Self::Cubic => 3,
        }
    }

    /// Whether mode `m` on an axis of length `n` survives: `|m| / (n/2) <= cutoff`.
    #[inline]
    pub fn keeps(self, m: i64, n: usize) -> bool {
        let m = m.unsigned_abs() as usize;
        match self {
            Self::Quadratic => 3 * m <= n,
            Self::Cubic => 4 * m <= n,
        }
    }

    /// Largest retained `|m|` on an axis of length `n`.
    pub fn band(self, n: usize) -> usize {
        match self {
            Self::Quadratic => n / 3,
            Self::Cubic => n / 4,
        }
    }

    pub(crate) fn truncate(self, g: &Grid2D, c: &mut [Complex64]) {
        for (i, v) in c.iter_mut().enumerate() {
            let (mx, my) = g.modes(i);
            if !(self.keeps(mx, g.n_x) && self.keeps(my, g.n_y)) {
                *v = Complex64::new(0.0, 0.0);
            }
        }
    }
}

pub fn dealias(field: &SpectralField2D, degree: DealiasDegree) -> SpectralField2D {
    let mut out = field.clone();
    degree.truncate(&field.grid, &mut out.coeffs);
    out
}

/// Littlewood-Paley piece `ψ_N(‖γ‖) f̂`.
pub fn project_pn(field: &SpectralField2D, spec: ProjectionSpec) -> SpectralField2D {
    let psi = WindowFn::default();
    let mut out = field.clone();
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        *c *= psi.dyadic(spec.n as f64, field.grid.wave_vector(i).norm());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_rng;
    use crate::spectral::{forward_transform, inverse_transform};
    use rand::Rng;
    use std::f64::consts::PI;

    fn random_field(g: Grid2D, seed: u64) -> SpectralField2D {
        let mut r = trial_rng(seed, 0);
        let s: Vec<f64> = (0..g.len()).map(|_| r.random_range(-1.0..1.0)).collect();
        forward_transform(&s, g).unwrap()
    }

    #[test]
    fn identity_multiplier() {
        let f = random_field(Grid2D::square(16, 5.0).unwrap(), 4);
        assert_eq!(apply_multiplier(&f, |_| Complex64::new(1.0, 0.0)).unwrap(), f);
    }

    #[test]
    fn derivative_of_cosine() {
        let g = Grid2D::square(16, 6.0).unwrap();
        let k = 2.0 * PI / g.l_x;
        let s: Vec<f64> = (0..g.len()).map(|i| (k * g.x(i % 16)).cos()).collect();
        let f = forward_transform(&s, g).unwrap();
        let d = apply_multiplier(&f, |w| Complex64::new(0.0, w.xi)).unwrap();
        let back = inverse_transform(&d).unwrap();
        for (i, v) in back.iter().enumerate() {
            assert!((v + k * (k * g.x(i % 16)).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn dispersion_symbol_on_unit_mode() {
        // -((iξ)³ + (iη)³) at ξ = η = 1
        let w = WaveVector::new(1.0, 1.0);
        let i = Complex64::new(0.0, 1.0);
        let sym = -(i * w.xi).powi(3) - (i * w.eta).powi(3);
        assert!((sym - Complex64::new(0.0, 2.0)).norm() < 1e-15);
        assert_eq!(Complex64::new(0.0, w.cubic()), sym);
    }

    #[test]
    fn non_finite_multiplier_names_mode() {
        let f = random_field(Grid2D::square(8, 1.0).unwrap(), 5);
        let e = apply_multiplier(&f, |w| Complex64::new(1.0 / w.xi, 0.0)).unwrap_err();
        assert!(matches!(e, Error::NonFinite { mx: 0, .. }));
    }

    #[test]
    fn exp_smooth_cases() {
        let g = Grid2D::square(16, 2.0 * PI).unwrap();
        let f = random_field(g, 6);
        assert_eq!(exp_smooth(&f, 0.0, Smoothing::Grow).unwrap(), f);
        let up = exp_smooth(&f, 0.5, Smoothing::Grow).unwrap();
        let i = g.index_of(1, 2).unwrap();
        assert!((up.coeffs[i] - f.coeffs[i] * 1.5f64.exp()).norm() < 1e-13 * f.coeffs[i].norm());
        let back = exp_smooth(&up, 0.5, Smoothing::Damp).unwrap();
        for (a, b) in back.coeffs.iter().zip(&f.coeffs) {
            assert!((a - b).norm() < 1e-10 * f.max_abs());
        }
        let small = exp_smooth(&f, 0.1, Smoothing::Grow).unwrap();
        for (a, b) in small.coeffs.iter().zip(&up.coeffs) {
            assert!(a.norm() <= b.norm());
        }
        assert!(matches!(exp_smooth(&f, 100.0, Smoothing::Grow), Err(Error::Range(_))));
        assert!(exp_smooth(&f, 100.0, Smoothing::Damp).is_ok());
        assert!(exp_smooth(&f, -1.0, Smoothing::Damp).is_err());
    }

    #[test]
    fn dealias_rules() {
        let g = Grid2D::square(16, 2.0 * PI).unwrap();
        let f = random_field(g, 7);
        let d = dealias(&f, DealiasDegree::Quadratic);
        assert_eq!(dealias(&d, DealiasDegree::Quadratic), d);
        assert_eq!(dealias(&d, DealiasDegree::Quadratic), dealias(&d, DealiasDegree::Quadratic));
        assert_eq!(d.get(5, 5), f.get(5, 5));
        assert_eq!(d.get(6, 0), Complex64::new(0.0, 0.0));
        let c = dealias(&f, DealiasDegree::Cubic);
        assert_eq!(c.get(4, -4), f.get(4, -4));
        assert_eq!(c.get(5, 0), Complex64::new(0.0, 0.0));
        let mut top = SpectralField2D::zeros(g);
        top.coeffs[g.index_of(-8, -8).unwrap()] = Complex64::new(1.0, 0.0);
        assert!(dealias(&top, DealiasDegree::Quadratic).coeffs.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn dyadic_pieces_resum() {
        let g = Grid2D::square(32, 2.0 * PI).unwrap();
        let f = random_field(g, 8);
        let mut acc = SpectralField2D::zeros(g);
        let mut n = 1u64;
        while (n as f64) < 2.0 * g.max_l1() {
            acc = acc.add(&project_pn(&f, ProjectionSpec::new(n, 1).unwrap())).unwrap();
            n *= 2;
        }
        for (a, b) in acc.coeffs.iter().zip(&f.coeffs) {
            assert!((a - b).norm() < 1e-10 * f.max_abs());
        }
        let mut single = SpectralField2D::zeros(g);
        single.set_real_pair(8, 0, Complex64::new(1.0, 0.0));
        let p1 = project_pn(&single, ProjectionSpec::new(1, 1).unwrap());
        let p8 = project_pn(&p1, ProjectionSpec::new(8, 1).unwrap());
        assert!(p8.max_abs() == 0.0);
        let low = project_pn(&single, ProjectionSpec::new(8, 1).unwrap());
        assert!(low.max_abs() > 0.99);
    }
}
