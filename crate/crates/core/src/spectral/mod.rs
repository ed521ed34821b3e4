//! Grids, spectral fields and the transforms between samples and coefficients.

mod fft;
mod ops;
mod transform;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fft::{fft_friendly, mode_index, signed_mode, PlanCache};
pub use ops::{
    apply_multiplier, check_exp_guard, dealias, exp_smooth, project_pn, DealiasDegree, Smoothing, EXP_GUARD,
};
pub use transform::{forward_transform, inverse_transform, Transformer};

/// Periodic box `[-L/2, L/2)^2` sampled with `n_x × n_y` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid2D {
    pub n_x: usize,
    pub n_y: usize,
    pub l_x: f64,
    pub l_y: f64,
}

impl Default for Grid2D {
    fn default() -> Self {
        Self { n_x: 128, n_y: 128, l_x: 16.0 * PI, l_y: 16.0 * PI }
    }
}

impl Grid2D {
    pub fn new(n_x: usize, n_y: usize, l_x: f64, l_y: f64) -> Result<Self> {
        let g = Self { n_x, n_y, l_x, l_y };
        g.validate()?;
        Ok(g)
    }

    pub fn square(n: usize, l: f64) -> Result<Self> {
        Self::new(n, n, l, l)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("n_x", self.n_x), ("n_y", self.n_y)] {
            if n < 8 || !n.is_power_of_two() {
                return Err(Error::config(format!("{name} = {n} must be a power of two >= 8")));
            }
        }
        for (name, l) in [("l_x", self.l_x), ("l_y", self.l_y)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::config(format!("{name} = {l} must be positive")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_y
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.l_x
    }

    pub fn deta(&self) -> f64 {
        2.0 * PI / self.l_y
    }

    pub fn dx(&self) -> f64 {
        self.l_x / self.n_x as f64
    }

    pub fn dy(&self) -> f64 {
        self.l_y / self.n_y as f64
    }

    /// Lattice cell area in frequency space; `‖f‖²_{L²} = w Σ |c_m|²`.
    pub fn plancherel_weight(&self) -> f64 {
        self.dxi() * self.deta()
    }

    pub fn x(&self, j: usize) -> f64 {
        -0.5 * self.l_x + j as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        -0.5 * self.l_y + j as f64 * self.dy()
    }

    /// Signed mode pair stored at flat index `idx = iy * n_x + ix`.
    #[inline]
    pub fn modes(&self, idx: usize) -> (i64, i64) {
        (signed_mode(idx % self.n_x, self.n_x), signed_mode(idx / self.n_x, self.n_y))
    }

    #[inline]
    pub fn wave_vector(&self, idx: usize) -> WaveVector {
        let (mx, my) = self.modes(idx);
        WaveVector::new(mx as f64 * self.dxi(), my as f64 * self.deta())
    }

    pub fn index_of(&self, mx: i64, my: i64) -> Option<usize> {
        Some(mode_index(my, self.n_y)? * self.n_x + mode_index(mx, self.n_x)?)
    }

    /// Flat index of the mirror mode `-m` (Nyquist rows map onto themselves).
    #[inline]
    pub fn conj_index(&self, idx: usize) -> usize {
        let ix = idx % self.n_x;
        let iy = idx / self.n_x;
        ((self.n_y - iy) % self.n_y) * self.n_x + (self.n_x - ix) % self.n_x
    }

    /// Whether the mode at `idx` lies on a Nyquist row or column.
    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        idx % self.n_x == self.n_x / 2 || idx / self.n_x == self.n_y / 2
    }

    /// Wave vector with Nyquist components set to zero, for odd symbols such as
    /// derivatives whose Nyquist value would break Hermitian symmetry.
    #[inline]
    pub fn odd_wave_vector(&self, idx: usize) -> WaveVector {
        let (mx, my) = self.modes(idx);
        let xi = if mx == -((self.n_x / 2) as i64) { 0.0 } else { mx as f64 * self.dxi() };
        let eta = if my == -((self.n_y / 2) as i64) { 0.0 } else { my as f64 * self.deta() };
        WaveVector::new(xi, eta)
    }

    /// Same box with different mode counts.
    pub fn resized(&self, n_x: usize, n_y: usize) -> Grid2D {
        Grid2D { n_x, n_y, l_x: self.l_x, l_y: self.l_y }
    }

    /// Largest `|γ|₁` on the lattice.
    pub fn max_l1(&self) -> f64 {
        (self.n_x / 2) as f64 * self.dxi() + (self.n_y / 2) as f64 * self.deta()
    }
}

/// Frequency pair `γ = (ξ, η)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveVector {
    pub xi: f64,
    pub eta: f64,
}

impl WaveVector {
    pub fn new(xi: f64, eta: f64) -> Self {
        Self { xi, eta }
    }

    /// `|γ| = |ξ| + |η|`, the weight used by every Gevrey factor.
    #[inline]
    pub fn l1(&self) -> f64 {
        self.xi.abs() + self.eta.abs()
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.xi.hypot(self.eta)
    }

    /// `⟨γ⟩ = (1 + ‖γ‖²)^{1/2}`.
    #[inline]
    pub fn bracket(&self) -> f64 {
        (1.0 + self.xi * self.xi + self.eta * self.eta).sqrt()
    }

    /// Symbol of the symmetric dispersion, `ξ³ + η³`.
    #[inline]
    pub fn cubic(&self) -> f64 {
        self.xi.powi(3) + self.eta.powi(3)
    }
}

/// Fourier coefficients of a field on a [`Grid2D`], indexed `iy * n_x + ix`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField2D {
    pub grid: Grid2D,
    pub coeffs: Vec<Complex64>,
    pub time: f64,
}

impl SpectralField2D {
    pub fn zeros(grid: Grid2D) -> Self {
        Self { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.len()], time: 0.0 }
    }

    pub fn from_coeffs(grid: Grid2D, coeffs: Vec<Complex64>, time: f64) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::config(format!(
                "{} coefficients supplied for a {}x{} grid",
                coeffs.len(),
                grid.n_x,
                grid.n_y
            )));
        }
        Ok(Self { grid, coeffs, time })
    }

    pub fn get(&self, mx: i64, my: i64) -> Complex64 {
        self.grid.index_of(mx, my).map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    /// Sets mode `m` and its mirror so the field stays real.
    pub fn set_real_pair(&mut self, mx: i64, my: i64, c: Complex64) {
        if let Some(i) = self.grid.index_of(mx, my) {
            self.coeffs[i] = c;
            let j = self.grid.conj_index(i);
            if j == i {
                self.coeffs[i] = Complex64::new(c.re, 0.0);
            } else {
                self.coeffs[j] = c.conj();
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Relative Hermitian defect `max |c(m) - conj c(-m)| / max |c|`.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            let d = (c - self.coeffs[self.grid.conj_index(i)].conj()).norm();
            worst = worst.max(d);
        }
        worst / scale
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    /// `‖f‖_{L²}` via Plancherel.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.plancherel_weight() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::config("fields live on different grids"));
        }
        Ok(())
    }

    /// Point value of the represented trigonometric polynomial; Nyquist
    /// entries act as cosines, matching how products pad them.
    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        let g = &self.grid;
        let factor = |m: i64, n: usize, k: f64, p: f64| {
            if m == -((n / 2) as i64) {
                Complex64::new((k * p).cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, k * p)
            }
        };
        let mut acc = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let (mx, my) = g.modes(i);
            let fx = factor(mx, g.n_x, mx as f64 * g.dxi(), x);
            let fy = factor(my, g.n_y, my as f64 * g.deta(), y);
            acc += (c * fx * fy).re;
        }
        acc * g.plancherel_weight() / (2.0 * PI)
    }

    /// Largest `max(|m_x|, |m_y|)`-type band that carries a nonzero coefficient, per axis.
    pub fn support_band(&self) -> (usize, usize) {
        let mut bx = 0;
        let mut by = 0;
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c != Complex64::new(0.0, 0.0) {
                let (mx, my) = self.grid.modes(i);
                bx = bx.max(mx.unsigned_abs() as usize);
                by = by.max(my.unsigned_abs() as usize);
            }
        }
        (bx, by)
    }
}

/// Dyadic levels for frequency (`n`) and modulation (`l`) projections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionSpec {
    pub n: u64,
    pub l: u64,
}

impl ProjectionSpec {
    pub fn new(n: u64, l: u64) -> Result<Self> {
        for (name, v) in [("N", n), ("L", l)] {
            if v == 0 || !v.is_power_of_two() {
                return Err(Error::config(format!("dyadic level {name} = {v} must be a power of two")));
            }
        }
        Ok(Self { n, l })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid2D::square(64, 10.0).is_ok());
        assert!(Grid2D::square(4, 10.0).is_err());
        assert!(Grid2D::square(48, 10.0).is_err());
        assert!(Grid2D::new(16, 16, 0.0, 1.0).is_err());
    }

    #[test]
    fn wave_vector_invariants() {
        let w = WaveVector::new(-3.0, 4.0);
        assert_eq!(w.l1(), 7.0);
        assert_eq!(w.norm(), 5.0);
        assert_eq!(w.bracket(), 26f64.sqrt());
        assert!(w.l1() >= w.norm() && w.bracket() >= w.norm() && w.bracket() >= 1.0);
    }

    #[test]
    fn mirror_index() {
        let g = Grid2D::square(8, 2.0 * PI).unwrap();
        for i in 0..g.len() {
            let (mx, my) = g.modes(i);
            let j = g.conj_index(i);
            let (nx, ny) = g.modes(j);
            if mx != -4 {
                assert_eq!(nx, -mx);
            }
            if my != -4 {
                assert_eq!(ny, -my);
            }
        }
        assert_eq!(g.index_of(-4, 0).map(|i| g.conj_index(i)), g.index_of(-4, 0));
    }

    #[test]
    fn projection_spec_levels() {
        assert!(ProjectionSpec::new(8, 1).is_ok());
        assert!(ProjectionSpec::new(0, 1).is_err());
        assert!(ProjectionSpec::new(8, 3).is_err());
    }
}
