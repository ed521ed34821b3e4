//! Bilinear operator with the `min(|γ - γ₁|, |γ₁|)^θ` frequency weight.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::functionals::SpaceTimeField;
use crate::spectral::WaveVector;

/// Lattice convolution
/// `Σ_{γ₁,τ₁} min(|γ-γ₁|₁, |γ₁|₁)^θ û(γ-γ₁, τ-τ₁) v̂(γ₁, τ₁) Δξ Δη Δτ`,
/// with `0⁰ = 1`. Output modes outside the lattice are dropped.
pub fn b_theta_apply(u: &SpaceTimeField, v: &SpaceTimeField, theta: f64) -> Result<SpaceTimeField> {
    u.check_grid(v)?;
    if !(0.0..0.25).contains(&theta) {
        return Err(Error::domain(format!("θ = {theta} must lie in [0, 1/4)")));
    }
    let g = u.grid;
    let nz = |f: &SpaceTimeField| -> Vec<(i64, i64, i64, Complex64)> {
        f.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
            .map(|(i, c)| {
                let (a, b, t) = g.modes(i);
                (a, b, t, *c)
            })
            .collect()
    };
    let (nu, nv) = (nz(u), nz(v));
    let w = g.weight();
    let mut out = SpaceTimeField::zeros(g);
    for &(ax, ay, at, cu) in &nu {
        let la = (ax as f64 * g.dxi()).abs() + (ay as f64 * g.deta()).abs();
        for &(bx, by, bt, cv) in &nv {
            let Some(j) = g.index_of(ax + bx, ay + by, at + bt) else { continue };
            let lb = (bx as f64 * g.dxi()).abs() + (by as f64 * g.deta()).abs();
            let m = la.min(lb);
            let k = if theta == 0.0 { 1.0 } else { m.powf(theta) };
            out.coeffs[j] += cu * cv * (k * w);
        }
    }
    Ok(out)
}

/// Distance used for the `min` in the kernel bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMetric {
    L1,
    Euclidean,
}

/// `min(|γ-γ₁|, |γ₁|) ⟨γ⟩ / (⟨γ-γ₁⟩ ⟨γ₁⟩)`; bounded by 2√2 for `ℓ¹` and 2 for Euclidean.
pub fn min_kernel_ratio(gamma: WaveVector, gamma1: WaveVector, metric: KernelMetric) -> f64 {
    let diff = WaveVector::new(gamma.xi - gamma1.xi, gamma.eta - gamma1.eta);
    let size = |w: WaveVector| match metric {
        KernelMetric::L1 => w.l1(),
        KernelMetric::Euclidean => w.norm(),
    };
    size(diff).min(size(gamma1)) * gamma.bracket() / (diff.bracket() * gamma1.bracket())
}
