//! Bilinear and trilinear `X^{σ,s,b}` ratio probes on a band-limited space-time lattice.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{ProbeParams, ProbeReport};
use crate::analyticity::epsilon_of_s_f64;
use crate::error::{Error, Result};
use crate::functionals::{xsb_norm, BourgainParams, SpaceTimeField, SpaceTimeGrid};
use crate::rng::{complex_gaussian, trial_rng};
use crate::spectral::{fft_friendly, PlanCache};

/// Memory ceiling for the padded convolution buffers.
const MEMORY_LIMIT: usize = 1 << 30;

/// Band-limited lattice: modes `|m| <= band` on every axis, with the spatial
/// frequencies filling `|ξ|, |η| <= XI_MAX` and temporal ones `|τ| <= TAU_MAX`
/// whatever the band, so doubling the band refines the same box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeLattice {
    pub band: usize,
    pub grid: SpaceTimeGrid,
}

impl ProbeLattice {
    pub const XI_MAX: f64 = 2.0;
    pub const TAU_MAX: f64 = 2.0 * Self::XI_MAX * Self::XI_MAX * Self::XI_MAX;

    pub fn new(band: usize) -> Result<Self> {
        if band == 0 {
            return Err(Error::config("band must be >= 1"));
        }
        let n = 2 * band + 2;
        let l = 2.0 * PI * band as f64 / Self::XI_MAX;
        let tw = 2.0 * PI * band as f64 / Self::TAU_MAX;
        Ok(Self { band, grid: SpaceTimeGrid::new(n, n, n, l, l, tw)? })
    }

    /// Real field with spectrum `z(γ,τ) ⟨γ⟩^{-2}`, `z` complex Gaussian.
    pub fn random_field<R: rand::Rng>(&self, r: &mut R) -> SpaceTimeField {
        let g = self.grid;
        let mut f = SpaceTimeField::zeros(g);
        for (i, c) in f.coeffs.iter_mut().enumerate() {
            let z = complex_gaussian(r);
            if !g.is_nyquist(i) {
                *c = z / g.freq(i).0.bracket().powi(2);
            }
        }
        f.hermitian_part()
    }

    fn product_grid(&self, factors: usize) -> Result<SpaceTimeGrid> {
        let p = fft_friendly(2 * factors * self.band + 1);
        if p * p * p * 2 * std::mem::size_of::<Complex64>() > MEMORY_LIMIT {
            return Err(Error::Memory(format!("padded lattice {p}³ for {factors} factors exceeds the memory guard")));
        }
        SpaceTimeGrid::new(p, p, p, self.grid.l_x, self.grid.l_y, self.grid.t_window)
    }
}

/// One space-time mode `(m_x, m_y, m_t)` with its coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleMode {
    pub m: (i64, i64, i64),
    pub c: Complex64,
}

fn embed(f: &SpaceTimeField, out: &SpaceTimeGrid) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); out.len()];
    for (i, c) in f.coeffs.iter().enumerate() {
        if c.re != 0.0 || c.im != 0.0 {
            let (mx, my, mt) = f.grid.modes(i);
            let j = out.index_of(mx, my, mt).expect("padded lattice holds the band");
            buf[j] = *c;
        }
    }
    buf
}

/// Coefficients of the pointwise product, by cyclic convolution on a lattice
/// wide enough that nothing wraps.
fn product(fields: &[&SpaceTimeField], out: SpaceTimeGrid, plans: &PlanCache) -> SpaceTimeField {
    let shape = out.shape();
    let mut acc = embed(fields[0], &out);
    plans.fft_nd(&mut acc, &shape, false);
    for f in &fields[1..] {
        let mut b = embed(f, &out);
        plans.fft_nd(&mut b, &shape, false);
        for (a, v) in acc.iter_mut().zip(&b) {
            *a *= v;
        }
    }
    plans.fft_nd(&mut acc, &shape, true);
    let conv = (out.weight() / (2.0 * PI).powf(1.5)).powi(fields.len() as i32 - 1) / out.len() as f64;
    for a in acc.iter_mut() {
        *a *= conv;
    }
    SpaceTimeField { grid: out, coeffs: acc }
}

/// `‖(∂_x+∂_y) w‖` in `X^{σ,s,b}`.
fn derivative_norm(f: &SpaceTimeField, p: &BourgainParams) -> Result<f64> {
    let mut d = f.clone();
    for (i, c) in d.coeffs.iter_mut().enumerate() {
        let (w, _) = f.grid.freq(i);
        *c *= (w.xi + w.eta).abs();
    }
    xsb_norm(&d, p)
}

fn weights(s: f64, sigma: f64) -> Result<(BourgainParams, BourgainParams)> {
    let eps = epsilon_of_s_f64(s)?;
    let input = BourgainParams { sigma, s, b: 0.5 + eps, eps };
    let output = BourgainParams { sigma, s, b: -0.5 + 2.0 * eps, eps };
    input.validate()?;
    Ok((input, output))
}

/// `‖(∂_x+∂_y)(u₁⋯u_k)‖_{X^{σ,s,-1/2+2ε}} / ∏‖u_i‖_{X^{σ,s,1/2+ε}}`; `None` when a factor vanishes.
fn ratio(fields: &[&SpaceTimeField], out: SpaceTimeGrid, plans: &PlanCache, s: f64, sigma: f64) -> Result<Option<f64>> {
    let (pin, pout) = weights(s, sigma)?;
    let mut den = 1.0;
    for f in fields {
        den *= xsb_norm(f, &pin)?;
    }
    if den == 0.0 {
        return Ok(None);
    }
    let num = derivative_norm(&product(fields, out, plans), &pout)?;
    let r = num / den;
    Ok(r.is_finite().then_some(r))
}

/// Runs the machinery on single-mode (complex) inputs.
pub fn single_mode_ratio(lattice: &ProbeLattice, modes: &[SingleMode], s: f64, sigma: f64) -> Result<Option<f64>> {
    let g = lattice.grid;
    let mut fields = Vec::with_capacity(modes.len());
    for sm in modes {
        let mut f = SpaceTimeField::zeros(g);
        let i = g
            .index_of(sm.m.0, sm.m.1, sm.m.2)
            .filter(|&i| !g.is_nyquist(i))
            .ok_or_else(|| Error::range(format!("mode {:?} outside the band", sm.m)))?;
        f.coeffs[i] = sm.c;
        fields.push(f);
    }
    let refs: Vec<&SpaceTimeField> = fields.iter().collect();
    ratio(&refs, lattice.product_grid(modes.len())?, &PlanCache::new(), s, sigma)
}

/// One-term value of the same ratio:
/// `|ξ+η| W'(γ,τ) (w/(2π)^{3/2})^{k-1} w^{1/2} / (w^{k/2} ∏ W(γ_i,τ_i))` with `(γ,τ)` the summed mode.
pub fn single_mode_closed_form(lattice: &ProbeLattice, modes: &[SingleMode], s: f64, sigma: f64) -> Result<f64> {
    let (pin, pout) = weights(s, sigma)?;
    let g = lattice.grid;
    let freq = |m: (i64, i64, i64)| {
        (crate::spectral::WaveVector::new(m.0 as f64 * g.dxi(), m.1 as f64 * g.deta()), m.2 as f64 * g.dtau())
    };
    let mut den = 1.0;
    let mut tot = (0, 0, 0);
    for sm in modes {
        let (w, tau) = freq(sm.m);
        den *= pin.weight(w, tau);
        tot = (tot.0 + sm.m.0, tot.1 + sm.m.1, tot.2 + sm.m.2);
    }
    let (w, tau) = freq(tot);
    let k = modes.len() as i32;
    let wt = g.weight();
    Ok((w.xi + w.eta).abs() * pout.weight(w, tau) * (wt / (2.0 * PI).powf(1.5)).powi(k - 1) * wt.sqrt()
        / (wt.powf(0.5 * k as f64) * den))
}

fn ratios_at(factors: usize, p: &ProbeParams, band: usize, sigma: f64) -> Result<(Vec<f64>, usize)> {
    let lat = ProbeLattice::new(band)?;
    let out = lat.product_grid(factors)?;
    let plans = PlanCache::new();
    let res: Vec<Result<Option<f64>>> = (0..p.trials)
        .into_par_iter()
        .map(|trial| {
            let mut r = trial_rng(p.seed, ((band as u64) << 32) | trial as u64);
            let fields: Vec<SpaceTimeField> = (0..factors).map(|_| lat.random_field(&mut r)).collect();
            let refs: Vec<&SpaceTimeField> = fields.iter().collect();
            ratio(&refs, out, &plans, p.s, sigma)
        })
        .collect();
    let mut ratios = Vec::with_capacity(p.trials);
    let mut skipped = 0;
    for r in res {
        match r? {
            Some(v) => ratios.push(v),
            None => skipped += 1,
        }
    }
    Ok((ratios, skipped))
}

/// Random `factors`-linear ratios at `band` and `2·band`; the report carries the
/// finer-band sample and the stability factor between the two maxima.
pub fn multilinear_probe(factors: usize, p: &ProbeParams, sigma: f64) -> Result<ProbeReport> {
    p.validate()?;
    if !(2..=3).contains(&factors) {
        return Err(Error::config(format!("{factors}-linear probe unsupported")));
    }
    let mut per_res = Vec::new();
    let mut last = (Vec::new(), 0);
    for band in [p.band, 2 * p.band] {
        let (r, skipped) = ratios_at(factors, p, band, sigma)?;
        per_res.push((band, r.iter().copied().fold(0.0, f64::max)));
        last = (r, skipped);
    }
    let name = if factors == 2 { "bilinear" } else { "trilinear" };
    let mut rep = ProbeReport::from_ratios(name, &last.0, last.1);
    rep.set_stability(per_res);
    rep.notes.push(format!("s = {}, σ = {sigma}, ε = {}", p.s, epsilon_of_s_f64(p.s)?));
    rep.passed = rep.max_ratio.is_finite();
    Ok(rep)
}

pub fn bilinear_probe(p: &ProbeParams) -> Result<ProbeReport> {
    multilinear_probe(2, p, 0.0)
}

pub fn trilinear_probe(p: &ProbeParams) -> Result<ProbeReport> {
    if p.s < 0.25 {
        return Err(Error::config(format!("trilinear probe needs s >= 1/4, got {}", p.s)));
    }
    multilinear_probe(3, p, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sm(m: (i64, i64, i64), re: f64, im: f64) -> SingleMode {
        SingleMode { m, c: Complex64::new(re, im) }
    }

    #[test]
    fn single_mode_matches_closed_form() {
        let lat = ProbeLattice::new(4).unwrap();
        for (modes, s, sigma) in [
            (vec![sm((1, 2, -3), 0.7, 0.2), sm((-3, 1, 4), -1.1, 0.5)], 0.0, 0.0),
            (vec![sm((2, 2, 1), 1.0, 0.0), sm((1, -4, 0), 0.0, 2.0)], 0.5, 0.3),
            (vec![sm((1, 0, 0), 1.0, 0.0), sm((0, 1, 2), 1.0, 1.0), sm((-2, 3, -4), 0.3, 0.0)], 0.25, 0.0),
        ] {
            let got = single_mode_ratio(&lat, &modes, s, sigma).unwrap().unwrap();
            let want = single_mode_closed_form(&lat, &modes, s, sigma).unwrap();
            assert!((got - want).abs() <= 1e-10 * want, "{got} vs {want}");
        }
    }

    #[test]
    fn zero_factor_skipped() {
        let lat = ProbeLattice::new(3).unwrap();
        let modes = [sm((1, 1, 1), 1.0, 0.0), sm((0, 1, 1), 0.0, 0.0)];
        assert_eq!(single_mode_ratio(&lat, &modes, 0.0, 0.0).unwrap(), None);
        assert!(single_mode_ratio(&lat, &[sm((9, 0, 0), 1.0, 0.0), sm((0, 0, 0), 1.0, 0.0)], 0.0, 0.0).is_err());
    }

    #[test]
    fn random_fields_real_and_band_limited() {
        let lat = ProbeLattice::new(3).unwrap();
        let f = lat.random_field(&mut trial_rng(1, 0));
        for s in f.to_samples() {
            assert!(s.im.abs() < 1e-12);
        }
        for (i, c) in f.coeffs.iter().enumerate() {
            if lat.grid.is_nyquist(i) {
                assert_eq!(c.norm(), 0.0);
            }
        }
    }

    #[test]
    fn probes_finite_and_deterministic() {
        let p = ProbeParams { trials: 4, band: 3, seed: 5, ..Default::default() };
        let a = bilinear_probe(&p).unwrap();
        assert!(a.max_ratio.is_finite() && a.max_ratio > 0.0);
        assert_eq!(a.per_resolution.len(), 2);
        assert_eq!(a, bilinear_probe(&p).unwrap());
        assert!(trilinear_probe(&p).is_err());
        let t = trilinear_probe(&ProbeParams { s: 0.25, band: 2, ..p }).unwrap();
        assert!(t.max_ratio.is_finite() && t.max_ratio > 0.0);
    }
}
