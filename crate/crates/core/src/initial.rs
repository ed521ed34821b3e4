//! Initial data: Gaussians, line solitons and smooth random fields.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{complex_gaussian, trial_rng};
use crate::spectral::{apply_multiplier, Grid2D, SpectralField2D, Transformer};

/// Samples `f(x, y)` at the grid points and transforms.
pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: Grid2D, f: F) -> Result<SpectralField2D> {
    let mut s = Vec::with_capacity(grid.len());
    for iy in 0..grid.n_y {
        for ix in 0..grid.n_x {
            s.push(f(grid.x(ix), grid.y(iy)));
        }
    }
    Transformer::new(grid).forward(&s, 0.0)
}

/// `A exp(-(x² + y²) / w²)`.
pub fn gaussian(grid: Grid2D, amplitude: f64, width: f64) -> Result<SpectralField2D> {
    if !(width > 0.0) {
        return Err(Error::config(format!("gaussian width {width} must be positive")));
    }
    from_fn(grid, |x, y| amplitude * (-(x * x + y * y) / (width * width)).exp())
}

/// `sech²(z)`, written to stay finite for large `|z|`.
pub fn sech2(z: f64) -> f64 {
    let e = (-2.0 * z.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// Line soliton of the original-form ZK equation with `k = 1`, `μ = +1`:
/// `6K² sech²(K(x - 4K²t - x₀))`, shifted periodically to the nearest image.
pub fn line_soliton_profile(grid: &Grid2D, kappa: f64, x0: f64, t: f64) -> impl Fn(f64, f64) -> f64 {
    let l = grid.l_x;
    let c = x0 + 4.0 * kappa * kappa * t;
    move |x, _y| {
        let d = x - c;
        let d = d - l * (d / l).round();
        6.0 * kappa * kappa * sech2(kappa * d)
    }
}

pub fn line_soliton(grid: Grid2D, kappa: f64, x0: f64, t: f64) -> Result<SpectralField2D> {
    if !(kappa > 0.0) {
        return Err(Error::config(format!("soliton K = {kappa} must be positive")));
    }
    let p = line_soliton_profile(&grid, kappa, x0, t);
    let mut f = from_fn(grid, p)?;
    f.time = t;
    Ok(f)
}

/// Relative L² distance from the exact soliton at `field.time` after undoing the
/// translation read off the phase of the `(1, 0)` mode. Returns `(shift, error)`.
pub fn soliton_shape_error(field: &SpectralField2D, kappa: f64, x0: f64) -> Result<(f64, f64)> {
    let exact = line_soliton(field.grid, kappa, x0, field.time)?;
    let (a, b) = (field.get(1, 0), exact.get(1, 0));
    if a.norm() == 0.0 || b.norm() == 0.0 {
        return Err(Error::domain("soliton has no first Fourier mode to align"));
    }
    let dxi = field.grid.dxi();
    let shift = -(a / b).arg() / dxi;
    let back = apply_multiplier(field, |w| Complex64::from_polar(1.0, w.xi * shift))?;
    Ok((shift, back.sub(&exact)?.l2_norm() / exact.l2_norm()))
}

/// Spectral envelope applied to random coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Taper {
    /// `⟨γ⟩^{-2}`.
    Algebraic,
    /// `e^{-‖γ‖²/2}`, giving entire data.
    Gaussian,
}

impl Taper {
    pub fn weight(self, w: crate::spectral::WaveVector) -> f64 {
        match self {
            Taper::Algebraic => 1.0 / w.bracket().powi(2),
            Taper::Gaussian => (-0.5 * w.norm().powi(2)).exp(),
        }
    }
}

/// Real random field with tapered complex Gaussian spectrum, zero mean and zero
/// Nyquist modes, scaled so `max |u| = amplitude`.
pub fn random_smooth(grid: Grid2D, seed: u64, amplitude: f64, taper: Taper) -> Result<SpectralField2D> {
    let mut r = trial_rng(seed, 0);
    let mut f = SpectralField2D::zeros(grid);
    for i in 0..grid.len() {
        let j = grid.conj_index(i);
        if j < i || grid.is_nyquist(i) || i == 0 {
            continue;
        }
        let z = complex_gaussian(&mut r) * taper.weight(grid.wave_vector(i));
        if i == j {
            f.coeffs[i] = Complex64::new(z.re, 0.0);
        } else {
            f.coeffs[i] = z;
            f.coeffs[j] = z.conj();
        }
    }
    let s = Transformer::new(grid).inverse(&f)?;
    let peak = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(Error::config("random field vanished; grid too coarse for the taper"));
    }
    Ok(f.scaled(amplitude / peak))
}
