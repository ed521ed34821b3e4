//! Sample ↔ coefficient transforms and alias-free pseudo-spectral products.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::fft::{mode_index, PlanCache};
use super::ops::DealiasDegree;
use super::{Grid2D, SpectralField2D};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-10;

/// Transforms for one grid plus the padded grids used by products.
#[derive(Debug)]
pub struct Transformer {
    grid: Grid2D,
    plans: PlanCache,
}

impl Transformer {
    pub fn new(grid: Grid2D) -> Self {
        Self { grid, plans: PlanCache::new() }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn forward(&self, samples: &[f64], time: f64) -> Result<SpectralField2D> {
        if samples.len() != self.grid.len() {
            return Err(Error::config(format!(
                "{} samples supplied for a {}x{} grid",
                samples.len(),
                self.grid.n_x,
                self.grid.n_y
            )));
        }
        let coeffs = self.forward_on(&self.grid, samples);
        Ok(SpectralField2D { grid: self.grid, coeffs, time })
    }

    pub fn inverse(&self, field: &SpectralField2D) -> Result<Vec<f64>> {
        if field.grid != self.grid {
            return Err(Error::config("field grid differs from transformer grid"));
        }
        let defect = field.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::Integrity(format!("Hermitian symmetry broken (relative defect {defect:e})")));
        }
        Ok(self.inverse_on(&self.grid, &field.coeffs))
    }

    pub(crate) fn forward_on(&self, g: &Grid2D, samples: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        self.plans.fft_nd(&mut buf, &[g.n_y, g.n_x], false);
        let scale = g.dx() * g.dy() / (2.0 * PI);
        apply_checkerboard(&mut buf, g, scale);
        buf
    }

    pub(crate) fn inverse_on(&self, g: &Grid2D, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        apply_checkerboard(&mut buf, g, g.plancherel_weight() / (2.0 * PI));
        self.plans.fft_nd(&mut buf, &[g.n_y, g.n_x], true);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Coefficients of the pointwise product of `factors` (two or three of them).
    ///
    /// Each factor is first cut to the dealias band of the product degree, so
    /// every returned mode equals the exact lattice convolution.
    pub fn product(&self, factors: &[&[Complex64]]) -> Vec<Complex64> {
        let degree = match factors.len() {
            2 => DealiasDegree::Quadratic,
            3 => DealiasDegree::Cubic,
            n => panic!("product of {n} factors is not supported"),
        };
        let g = &self.grid;
        let big = g.resized(3 * g.n_x / 2, 3 * g.n_y / 2);
        let mut acc: Option<Vec<f64>> = None;
        for f in factors {
            let mut c = f.to_vec();
            degree.truncate(g, &mut c);
            let s = self.inverse_on(&big, &pad(g, &big, &c));
            acc = Some(match acc {
                None => s,
                Some(mut a) => {
                    a.iter_mut().zip(&s).for_each(|(x, y)| *x *= y);
                    a
                }
            });
        }
        let prod = self.forward_on(&big, &acc.expect("at least two factors"));
        extract(&big, g, &prod)
    }

    pub fn power(&self, coeffs: &[Complex64], p: usize) -> Vec<Complex64> {
        let refs: Vec<&[Complex64]> = (0..p).map(|_| coeffs).collect();
        self.product(&refs)
    }

    /// `∫ u^p` over the box, exact for the trigonometric polynomial the field represents.
    pub fn integral_of_power(&self, field: &SpectralField2D, p: u32) -> f64 {
        let g = &field.grid;
        let (bx, by) = field.support_band();
        let target = |b: usize, n: usize| (p as usize * b + 1).next_power_of_two().max(n);
        let big = g.resized(target(bx, g.n_x), target(by, g.n_y));
        let samples = self.inverse_on(&big, &pad(g, &big, &field.coeffs));
        let sum: f64 = samples.iter().map(|v| v.powi(p as i32)).sum();
        sum * big.dx() * big.dy()
    }
}

/// Multiplies entry `(iy, ix)` by `scale · (-1)^{ix+iy}`; this carries the
/// centred-box phase since every axis length is even.
fn apply_checkerboard(buf: &mut [Complex64], g: &Grid2D, scale: f64) {
    for (i, c) in buf.iter_mut().enumerate() {
        let parity = (i % g.n_x + i / g.n_x) & 1;
        *c *= if parity == 0 { scale } else { -scale };
    }
}

/// Embeds coefficients into a larger lattice with the same box; Nyquist
/// entries are split evenly between `±n/2`.
pub(crate) fn pad(small: &Grid2D, big: &Grid2D, c: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); big.len()];
    let hx = (small.n_x / 2) as i64;
    let hy = (small.n_y / 2) as i64;
    let same_x = big.n_x == small.n_x;
    let same_y = big.n_y == small.n_y;
    for (i, v) in c.iter().enumerate() {
        if *v == Complex64::new(0.0, 0.0) {
            continue;
        }
        let (mx, my) = small.modes(i);
        let xs: &[i64] = if mx == -hx && !same_x { &[-hx, hx] } else { &[mx] };
        let ys: &[i64] = if my == -hy && !same_y { &[-hy, hy] } else { &[my] };
        let share = 1.0 / (xs.len() * ys.len()) as f64;
        for &x in xs {
            for &y in ys {
                let j = big.index_of(x, y).expect("padded lattice holds the mode");
                out[j] += v * share;
            }
        }
    }
    out
}

/// Restricts to a smaller lattice, folding `±n/2` onto the Nyquist entry.
pub(crate) fn extract(big: &Grid2D, small: &Grid2D, c: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); small.len()];
    let hx = (small.n_x / 2) as i64;
    let hy = (small.n_y / 2) as i64;
    for (i, v) in c.iter().enumerate() {
        let (mx, my) = big.modes(i);
        if mx.abs() > hx || my.abs() > hy {
            continue;
        }
        let fx = if mx == hx { -hx } else { mx };
        let fy = if my == hy { -hy } else { my };
        let ix = mode_index(fx, small.n_x).expect("in range");
        let iy = mode_index(fy, small.n_y).expect("in range");
        out[iy * small.n_x + ix] += v;
    }
    out
}

/// One-shot forward transform of row-major samples `f[iy * n_x + ix]` taken at
/// `x_j = -L_x/2 + j Δx`.
pub fn forward_transform(samples: &[f64], grid: Grid2D) -> Result<SpectralField2D> {
    Transformer::new(grid).forward(samples, 0.0)
}

pub fn inverse_transform(field: &SpectralField2D) -> Result<Vec<f64>> {
    Transformer::new(field.grid).inverse(field)
}
