//! Space-time fields over the `(ξ, η, τ)` lattice and the Bourgain norm.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{mode_index, signed_mode, Grid2D, PlanCache, ProjectionSpec, WaveVector, EXP_GUARD};
use crate::window::WindowFn;

/// Lattice for space-time fields on `[-L_x/2, L_x/2) × [-L_y/2, L_y/2) × [-T/2, T/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeGrid {
    pub n_x: usize,
    pub n_y: usize,
    pub n_t: usize,
    pub l_x: f64,
    pub l_y: f64,
    pub t_window: f64,
}

impl SpaceTimeGrid {
    pub fn new(n_x: usize, n_y: usize, n_t: usize, l_x: f64, l_y: f64, t_window: f64) -> Result<Self> {
        for (name, n) in [("n_x", n_x), ("n_y", n_y), ("n_t", n_t)] {
            if n < 2 || n % 2 != 0 {
                return Err(Error::config(format!("{name} = {n} must be even and >= 2")));
            }
        }
        for (name, l) in [("l_x", l_x), ("l_y", l_y), ("t_window", t_window)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::config(format!("{name} = {l} must be positive")));
            }
        }
        Ok(Self { n_x, n_y, n_t, l_x, l_y, t_window })
    }

    pub fn from_grid(g: &Grid2D, n_t: usize, t_window: f64) -> Result<Self> {
        Self::new(g.n_x, g.n_y, n_t, g.l_x, g.l_y, t_window)
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_y * self.n_t
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.n_t, self.n_y, self.n_x]
    }

    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.l_x
    }
    pub fn deta(&self) -> f64 {
        2.0 * PI / self.l_y
    }
    pub fn dtau(&self) -> f64 {
        2.0 * PI / self.t_window
    }
    pub fn dt(&self) -> f64 {
        self.t_window / self.n_t as f64
    }

    pub fn weight(&self) -> f64 {
        self.dxi() * self.deta() * self.dtau()
    }

    pub fn t(&self, j: usize) -> f64 {
        -0.5 * self.t_window + j as f64 * self.dt()
    }

    /// Signed `(m_x, m_y, m_t)` at flat index `(it * n_y + iy) * n_x + ix`.
    #[inline]
    pub fn modes(&self, idx: usize) -> (i64, i64, i64) {
        let ix = idx % self.n_x;
        let iy = (idx / self.n_x) % self.n_y;
        let it = idx / (self.n_x * self.n_y);
        (signed_mode(ix, self.n_x), signed_mode(iy, self.n_y), signed_mode(it, self.n_t))
    }

    #[inline]
    pub fn freq(&self, idx: usize) -> (WaveVector, f64) {
        let (mx, my, mt) = self.modes(idx);
        (WaveVector::new(mx as f64 * self.dxi(), my as f64 * self.deta()), mt as f64 * self.dtau())
    }

    pub fn index_of(&self, mx: i64, my: i64, mt: i64) -> Option<usize> {
        let ix = mode_index(mx, self.n_x)?;
        let iy = mode_index(my, self.n_y)?;
        let it = mode_index(mt, self.n_t)?;
        Some((it * self.n_y + iy) * self.n_x + ix)
    }

    pub fn conj_index(&self, idx: usize) -> usize {
        let ix = idx % self.n_x;
        let iy = (idx / self.n_x) % self.n_y;
        let it = idx / (self.n_x * self.n_y);
        let cx = (self.n_x - ix) % self.n_x;
        let cy = (self.n_y - iy) % self.n_y;
        let ct = (self.n_t - it) % self.n_t;
        (ct * self.n_y + cy) * self.n_x + cx
    }

    pub fn is_nyquist(&self, idx: usize) -> bool {
        let (mx, my, mt) = self.modes(idx);
        mx == -((self.n_x / 2) as i64) || my == -((self.n_y / 2) as i64) || mt == -((self.n_t / 2) as i64)
    }
}

/// Space-time Fourier coefficients, `û(γ, τ) ≈ (2π)^{-3/2} ∫ e^{-i(x·γ + tτ)} u`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    pub grid: SpaceTimeGrid,
    pub coeffs: Vec<Complex64>,
}

fn checkerboard(buf: &mut [Complex64], g: &SpaceTimeGrid, scale: f64) {
    for (i, c) in buf.iter_mut().enumerate() {
        let ix = i % g.n_x;
        let iy = (i / g.n_x) % g.n_y;
        let it = i / (g.n_x * g.n_y);
        *c *= if (ix + iy + it) & 1 == 0 { scale } else { -scale };
    }
}

impl SpaceTimeField {
    pub fn zeros(grid: SpaceTimeGrid) -> Self {
        Self { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Transform of samples `u[(it * n_y + iy) * n_x + ix]` at the centred lattice points.
    pub fn from_samples(grid: SpaceTimeGrid, samples: &[Complex64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::config("space-time sample count does not match lattice"));
        }
        let mut buf = samples.to_vec();
        PlanCache::new().fft_nd(&mut buf, &grid.shape(), false);
        let scale = (grid.l_x / grid.n_x as f64) * (grid.l_y / grid.n_y as f64) * grid.dt() / (2.0 * PI).powf(1.5);
        checkerboard(&mut buf, &grid, scale);
        Ok(Self { grid, coeffs: buf })
    }

    /// Complex samples; real fields come back with vanishing imaginary parts.
    pub fn to_samples(&self) -> Vec<Complex64> {
        let mut buf = self.coeffs.clone();
        checkerboard(&mut buf, &self.grid, self.grid.weight() / (2.0 * PI).powf(1.5));
        PlanCache::new().fft_nd(&mut buf, &self.grid.shape(), true);
        buf
    }

    /// Samples of `ψ(t / scale) · u(t)` where `u` is given on each time slice.
    pub fn from_slices<F>(grid: SpaceTimeGrid, window: Option<(WindowFn, f64)>, mut slice: F) -> Result<Self>
    where
        F: FnMut(f64) -> Result<Vec<f64>>,
    {
        let plane = grid.n_x * grid.n_y;
        let mut samples = vec![Complex64::new(0.0, 0.0); grid.len()];
        for it in 0..grid.n_t {
            let t = grid.t(it);
            let w = window.map_or(1.0, |(psi, s)| psi.scaled(t, s));
            if w == 0.0 {
                continue;
            }
            let vals = slice(t)?;
            if vals.len() != plane {
                return Err(Error::config("time slice has the wrong size"));
            }
            for (dst, v) in samples[it * plane..(it + 1) * plane].iter_mut().zip(vals) {
                *dst = Complex64::new(w * v, 0.0);
            }
        }
        Self::from_samples(grid, &samples)
    }

    pub fn l2_norm(&self) -> f64 {
        (self.grid.weight() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::config("space-time fields live on different lattices"));
        }
        Ok(())
    }

    /// Mirrors the field into a real one: `c(m) ← (c(m) + conj c(-m)) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.coeffs.len() {
            let j = self.grid.conj_index(i);
            out.coeffs[i] = 0.5 * (self.coeffs[i] + self.coeffs[j].conj());
        }
        out
    }
}

/// Weights of the `X^{σ,s,b}` norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BourgainParams {
    pub sigma: f64,
    pub s: f64,
    pub b: f64,
    /// The `ε` of `b = 1/2 + ε` when the weights come from the bilinear estimates.
    pub eps: f64,
}

impl BourgainParams {
    pub fn new(sigma: f64, s: f64, b: f64) -> Result<Self> {
        let p = Self { sigma, s, b, eps: b - 0.5 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) {
            return Err(Error::domain(format!("σ = {} must be >= 0", self.sigma)));
        }
        if !(self.b > -1.0 && self.b < 1.0) {
            return Err(Error::domain(format!("b = {} must lie in (-1, 1)", self.b)));
        }
        Ok(())
    }

    /// Single-mode weight `e^{σ|γ|} ⟨γ⟩^s ⟨τ - ξ³ - η³⟩^b`.
    #[inline]
    pub fn weight(&self, w: WaveVector, tau: f64) -> f64 {
        let m = tau - w.cubic();
        (self.sigma * w.l1()).exp() * w.bracket().powf(self.s) * (1.0 + m * m).powf(0.5 * self.b)
    }
}

pub fn xsb_norm(f: &SpaceTimeField, p: &BourgainParams) -> Result<f64> {
    p.validate()?;
    let g = &f.grid;
    let mut worst: f64 = 0.0;
    let mut acc = 0.0;
    for (i, c) in f.coeffs.iter().enumerate() {
        if c.re == 0.0 && c.im == 0.0 {
            continue;
        }
        let (w, tau) = g.freq(i);
        worst = worst.max(w.l1());
        acc += (p.weight(w, tau) * c.norm()).powi(2);
    }
    if p.sigma * worst > EXP_GUARD {
        return Err(Error::range(format!("σ·max|γ|₁ = {:.1} exceeds {EXP_GUARD}", p.sigma * worst)));
    }
    Ok((g.weight() * acc).sqrt())
}

/// Modulation piece `ψ_L(τ - ξ³ - η³) û`.
pub fn project_ql(f: &SpaceTimeField, spec: ProjectionSpec) -> SpaceTimeField {
    let psi = WindowFn::default();
    let mut out = f.clone();
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        let (w, tau) = f.grid.freq(i);
        *c *= psi.dyadic(spec.l as f64, tau - w.cubic());
    }
    out
}
