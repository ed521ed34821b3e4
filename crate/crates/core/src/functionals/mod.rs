//! Norms and conserved or almost-conserved functionals.

mod spacetime;
mod strichartz;

use serde::{Deserialize, Serialize};

use crate::analyticity::{estimate_radius, RadiusFitConfig};
use crate::dynamics::{EquationSpec, Form};
use crate::error::{Error, Result};
use crate::spectral::{check_exp_guard, exp_smooth, Grid2D, Smoothing, SpectralField2D, Transformer};

pub use spacetime::{project_ql, xsb_norm, BourgainParams, SpaceTimeField, SpaceTimeGrid};
pub use strichartz::{strichartz_exponent, strichartz_ql_probe, StrichartzReport};

/// First line of every diagnostics CSV.
pub const DIAGNOSTICS_SCHEMA: &str = "# schema: zk-diagnostics v1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevreyParams {
    pub sigma: f64,
    pub s: f64,
}

impl GevreyParams {
    pub fn new(sigma: f64, s: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!("σ = {sigma} must be >= 0")));
        }
        Ok(Self { sigma, s })
    }
}

/// `‖f‖_{G^{σ,s}} = ‖e^{σ|γ|} ⟨γ⟩^s f̂‖_{ℓ²}` with the Plancherel weight.
pub fn gevrey_norm(f: &SpectralField2D, p: GevreyParams) -> Result<f64> {
    GevreyParams::new(p.sigma, p.s)?;
    check_exp_guard(f, p.sigma)?;
    let g = &f.grid;
    let mut acc = 0.0;
    for (i, c) in f.coeffs.iter().enumerate() {
        let w = g.wave_vector(i);
        let weight = (p.sigma * w.l1()).exp() * w.bracket().powf(p.s);
        acc += (weight * c.norm()).powi(2);
    }
    Ok((g.plancherel_weight() * acc).sqrt())
}

/// Smallest `C` with `‖f‖_{G^{σ',s'}} <= C ‖f‖_{G^{σ,s}}` on the lattice (`σ' <= σ`).
pub fn embedding_constant(grid: &Grid2D, to: GevreyParams, from: GevreyParams) -> f64 {
    (0..grid.len())
        .map(|i| {
            let w = grid.wave_vector(i);
            ((to.sigma - from.sigma) * w.l1()).exp() * w.bracket().powf(to.s - from.s)
        })
        .fold(0.0, f64::max)
}

/// `∫ u²`.
pub fn mass(f: &SpectralField2D) -> f64 {
    f.l2_norm().powi(2)
}

fn weighted_sum<W: Fn(crate::spectral::WaveVector) -> f64>(f: &SpectralField2D, w: W) -> f64 {
    let g = &f.grid;
    g.plancherel_weight() * f.coeffs.iter().enumerate().map(|(i, c)| w(g.wave_vector(i)) * c.norm_sqr()).sum::<f64>()
}

/// `½ ∫ |∇u|² - μ/(k+2) ∫ u^{k+2}`.
pub fn energy(f: &SpectralField2D, spec: &EquationSpec) -> f64 {
    energy_with(&Transformer::new(f.grid), f, spec)
}

fn energy_with(t: &Transformer, f: &SpectralField2D, spec: &EquationSpec) -> f64 {
    let grad = weighted_sum(f, |w| w.xi * w.xi + w.eta * w.eta);
    let p = spec.k() + 2;
    0.5 * grad - spec.mu() / p as f64 * t.integral_of_power(f, p)
}

/// `½ ∫ |∇u|² - ½ ∫ u_x u_y - μa/(k+2) ∫ u^{k+2}`, conserved by the symmetrized flow.
pub fn modified_energy(f: &SpectralField2D, spec: &EquationSpec) -> Result<f64> {
    modified_energy_with(&Transformer::new(f.grid), f, spec)
}

fn modified_energy_with(t: &Transformer, f: &SpectralField2D, spec: &EquationSpec) -> Result<f64> {
    if spec.form() != Form::Symmetrized {
        return Err(Error::SpecMismatch("modified energy needs the symmetrized form".into()));
    }
    let quad = weighted_sum(f, |w| w.xi * w.xi + w.eta * w.eta - w.xi * w.eta);
    let p = spec.k() + 2;
    Ok(0.5 * quad - spec.mu() * spec.a() / p as f64 * t.integral_of_power(f, p))
}

/// `M_σ = ‖u‖²_{G^{σ,0}}`.
pub fn m_sigma(f: &SpectralField2D, sigma: f64) -> Result<f64> {
    Ok(gevrey_norm(f, GevreyParams::new(sigma, 0.0)?)?.powi(2))
}

/// `E_σ = ‖u‖²_{G^{σ,1}} - ∫ U_x U_y - (μa/2) ∫ U⁴` with `U = e^{σ|D|} u` (cubic case).
pub fn e_sigma(f: &SpectralField2D, sigma: f64, spec: &EquationSpec) -> Result<f64> {
    e_sigma_with(&Transformer::new(f.grid), f, sigma, spec)
}

fn e_sigma_with(t: &Transformer, f: &SpectralField2D, sigma: f64, spec: &EquationSpec) -> Result<f64> {
    if spec.k() != 2 || spec.form() != Form::Symmetrized {
        return Err(Error::SpecMismatch("E_σ is defined for the symmetrized cubic equation".into()));
    }
    let u = exp_smooth(f, sigma, Smoothing::Grow)?;
    let quad = weighted_sum(&u, |w| 1.0 + w.xi * w.xi + w.eta * w.eta - w.xi * w.eta);
    Ok(quad - 0.5 * spec.mu() * spec.a() * t.integral_of_power(&u, 4))
}

/// What to record at each diagnostic step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    pub sigmas: Vec<f64>,
    pub gevrey: Vec<GevreyParams>,
    pub radius: Option<RadiusFitConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub modified_energy: Option<f64>,
    pub m_sigma: Vec<f64>,
    /// Empty unless the equation is the symmetrized cubic one.
    pub e_sigma: Vec<f64>,
    pub gevrey: Vec<f64>,
    pub sigma_hat: Option<f64>,
}

/// Reusable evaluator holding transform plans.
#[derive(Debug)]
pub struct Diagnostics {
    spec: EquationSpec,
    cfg: DiagnosticsConfig,
    transformer: Transformer,
}

impl Diagnostics {
    pub fn new(grid: Grid2D, spec: EquationSpec, cfg: DiagnosticsConfig) -> Self {
        Self { spec, cfg, transformer: Transformer::new(grid) }
    }

    fn has_e_sigma(&self) -> bool {
        self.spec.k() == 2 && self.spec.form() == Form::Symmetrized
    }

    pub fn record(&self, f: &SpectralField2D) -> Result<DiagnosticsRecord> {
        let t = &self.transformer;
        let modified_energy = match self.spec.form() {
            Form::Symmetrized => Some(modified_energy_with(t, f, &self.spec)?),
            Form::Original => None,
        };
        let m = self.cfg.sigmas.iter().map(|&s| m_sigma(f, s)).collect::<Result<Vec<_>>>()?;
        let e = if self.has_e_sigma() {
            self.cfg.sigmas.iter().map(|&s| e_sigma_with(t, f, s, &self.spec)).collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        let gv = self.cfg.gevrey.iter().map(|&p| gevrey_norm(f, p)).collect::<Result<Vec<_>>>()?;
        let sigma_hat = match &self.cfg.radius {
            Some(rc) => Some(estimate_radius(f, rc)?.sigma_hat),
            None => None,
        };
        Ok(DiagnosticsRecord {
            t: f.time,
            mass: mass(f),
            energy: energy_with(t, f, &self.spec),
            modified_energy,
            m_sigma: m,
            e_sigma: e,
            gevrey: gv,
            sigma_hat,
        })
    }

    pub fn csv_header(&self) -> String {
        let mut cols = vec!["t".to_string(), "mass".into(), "energy".into(), "mod_energy".into()];
        cols.extend(self.cfg.sigmas.iter().map(|s| format!("M_sigma@{s}")));
        if self.has_e_sigma() {
            cols.extend(self.cfg.sigmas.iter().map(|s| format!("E_sigma@{s}")));
        }
        cols.extend(self.cfg.gevrey.iter().map(|p| format!("G@{}:{}", p.sigma, p.s)));
        cols.push("sigma_hat".into());
        cols.join(",")
    }
}

impl DiagnosticsRecord {
    pub fn csv_row(&self) -> String {
        // `{:?}` is the shortest round-trip form and switches to exponents for tiny values
        let num = |x: &f64| format!("{x:?}");
        let opt = |v: Option<f64>| v.as_ref().map(num).unwrap_or_default();
        let mut cols = vec![num(&self.t), num(&self.mass), num(&self.energy), opt(self.modified_energy)];
        cols.extend(self.m_sigma.iter().map(num));
        cols.extend(self.e_sigma.iter().map(num));
        cols.extend(self.gevrey.iter().map(num));
        cols.push(opt(self.sigma_hat));
        cols.join(",")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::{self, Taper};
    use crate::spectral::{SpectralField2D, Transformer};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn l2_and_parseval() {
        let g = Grid2D::square(32, 7.0).unwrap();
        let f = initial::random_smooth(g, 2, 1.0, Taper::Algebraic).unwrap();
        let s = Transformer::new(g).inverse(&f).unwrap();
        let l2 = s.iter().map(|v| v * v).sum::<f64>() * g.dx() * g.dy();
        let n = gevrey_norm(&f, GevreyParams::new(0.0, 0.0).unwrap()).unwrap();
        assert!((n * n - l2).abs() < 1e-10 * l2);
        assert!((mass(&f) - n * n).abs() < 1e-12 * l2);
    }

    #[test]
    fn single_mode_gevrey() {
        let g = Grid2D::square(16, 2.0 * PI).unwrap();
        let mut f = SpectralField2D::zeros(g);
        f.coeffs[g.index_of(1, 2).unwrap()] = Complex64::new(0.3, 0.4);
        let n = gevrey_norm(&f, GevreyParams::new(0.5, 1.0).unwrap()).unwrap();
        let expect = 0.5 * 1.5f64.exp() * 6f64.sqrt() * g.plancherel_weight().sqrt();
        assert!((n - expect).abs() < 1e-13 * expect);
    }

    #[test]
    fn gaussian_spectrum_matches_quadrature() {
        // the weight e^{2σ|ξ|} has a kink at 0, so the lattice sum converges at second order
        let sigma = 0.3;
        let a0 = simpson(|x| (2.0 * sigma * x.abs() - 2.0 * x * x).exp(), -12.0, 12.0, 200_000);
        let a2 = simpson(|x| x * x * (2.0 * sigma * x.abs() - 2.0 * x * x).exp(), -12.0, 12.0, 200_000);
        let want = (a0 * a0 + 2.0 * a0 * a2).sqrt();
        let err = |n: usize, l: f64| {
            let g = Grid2D::square(n, l).unwrap();
            let mut f = SpectralField2D::zeros(g);
            for i in 0..g.len() {
                f.coeffs[i] = Complex64::new((-g.wave_vector(i).norm().powi(2)).exp(), 0.0);
            }
            (gevrey_norm(&f, GevreyParams::new(sigma, 1.0).unwrap()).unwrap() - want).abs() / want
        };
        let (e1, e2) = (err(256, 64.0), err(512, 128.0));
        assert!(e1 < 1e-3, "{e1}");
        assert!(e2 < e1 / 3.5, "{e1} -> {e2}");
    }

    #[test]
    fn embedding_constant_holds() {
        let g = Grid2D::square(32, 2.0 * PI).unwrap();
        let f = initial::random_smooth(g, 3, 1.0, Taper::Algebraic).unwrap();
        let hi = GevreyParams::new(0.4, 1.0).unwrap();
        let lo = GevreyParams::new(0.1, 2.0).unwrap();
        let c = embedding_constant(&g, lo, hi);
        assert!(gevrey_norm(&f, lo).unwrap() <= c * gevrey_norm(&f, hi).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn energy_of_single_cosine() {
        let g = Grid2D::square(16, 2.0 * PI).unwrap();
        let spec = EquationSpec::new(1, 1, Form::Original).unwrap();
        let mut f = SpectralField2D::zeros(g);
        f.set_real_pair(2, 1, Complex64::new(0.2, 0.1));
        let grad = 0.5 * 5.0 * mass(&f);
        assert!((energy(&f, &spec) - grad).abs() < 1e-12 * grad);
        assert_eq!(energy(&SpectralField2D::zeros(g), &spec), 0.0);
    }

    #[test]
    fn energy_matches_real_space_quadrature() {
        let g = Grid2D::square(64, 10.0).unwrap();
        let spec = EquationSpec::new(2, -1, Form::Symmetrized).unwrap();
        let f = initial::random_smooth(g, 4, 1.0, Taper::Gaussian).unwrap();
        let t = Transformer::new(g);
        let u = t.inverse(&f).unwrap();
        let dx = |m: fn(crate::spectral::WaveVector) -> f64| {
            let d = crate::spectral::apply_multiplier(&f, |w| Complex64::new(0.0, m(w))).unwrap();
            t.inverse(&d).unwrap()
        };
        let ux = dx(|w| w.xi);
        let uy = dx(|w| w.eta);
        let area = g.dx() * g.dy();
        let mut e = 0.0;
        let mut me = 0.0;
        for i in 0..g.len() {
            let grad = ux[i] * ux[i] + uy[i] * uy[i];
            e += 0.5 * grad - spec.mu() / 4.0 * u[i].powi(4);
            me += 0.5 * grad - 0.5 * ux[i] * uy[i] - spec.mu() * spec.a() / 4.0 * u[i].powi(4);
        }
        assert!((energy(&f, &spec) - e * area).abs() < 1e-8 * (e * area).abs());
        assert!((modified_energy(&f, &spec).unwrap() - me * area).abs() < 1e-8 * (me * area).abs());
    }

    #[test]
    fn modified_energy_cases() {
        let g = Grid2D::square(16, 2.0 * PI).unwrap();
        let spec = EquationSpec::new(2, 1, Form::Symmetrized).unwrap();
        assert_eq!(modified_energy(&SpectralField2D::zeros(g), &spec).unwrap(), 0.0);
        let mut f = SpectralField2D::zeros(g);
        f.set_real_pair(3, 0, Complex64::new(0.1, 0.0));
        let quad = weighted_sum(&f, |w| w.xi * w.eta);
        assert_eq!(quad, 0.0);
        let orig = EquationSpec::new(2, 1, Form::Original).unwrap();
        assert!(matches!(modified_energy(&f, &orig), Err(Error::SpecMismatch(_))));
    }

    #[test]
    fn sigma_functionals_at_zero() {
        let g = Grid2D::square(32, 8.0).unwrap();
        let spec = EquationSpec::new(2, -1, Form::Symmetrized).unwrap();
        let f = initial::random_smooth(g, 5, 1.0, Taper::Gaussian).unwrap();
        assert!((m_sigma(&f, 0.0).unwrap() - mass(&f)).abs() < 1e-12 * mass(&f));
        let e0 = e_sigma(&f, 0.0, &spec).unwrap();
        let want = mass(&f) + 2.0 * modified_energy(&f, &spec).unwrap();
        assert!((e0 - want).abs() < 1e-12 * want.abs());
    }

    #[test]
    fn single_mode_e_sigma_closed_form() {
        let g = Grid2D::square(16, 2.0 * PI).unwrap();
        let spec = EquationSpec::new(2, 1, Form::Symmetrized).unwrap();
        let mut f = SpectralField2D::zeros(g);
        let c = 0.05;
        f.set_real_pair(1, 1, Complex64::new(c, 0.0));
        let sigma: f64 = 0.2;
        let w = g.plancherel_weight();
        // U = A cos(x + y), A = 2 c e^{2σ} w / 2π
        let amp = 2.0 * c * (2.0 * sigma).exp() * w / (2.0 * PI);
        let area = g.l_x * g.l_y;
        let quad = 2.0 * (c * (2.0 * sigma).exp()).powi(2) * w * (1.0 + 2.0 - 1.0);
        let quartic = 0.375 * amp.powi(4) * area;
        let want = quad - 0.5 * spec.a() * quartic;
        assert!((e_sigma(&f, sigma, &spec).unwrap() - want).abs() < 1e-12 * want.abs());
    }

    #[test]
    fn defocusing_coercivity() {
        let g = Grid2D::square(32, 8.0).unwrap();
        let spec = EquationSpec::new(2, -1, Form::Symmetrized).unwrap();
        for seed in 0..100 {
            let f = initial::random_smooth(g, seed, 2.0, Taper::Algebraic).unwrap();
            let sigma = 0.05 * (seed % 5) as f64;
            let e = e_sigma(&f, sigma, &spec).unwrap();
            let n = gevrey_norm(&f, GevreyParams::new(sigma, 1.0).unwrap()).unwrap();
            assert!(e >= 0.5 * n * n);
        }
    }

    #[test]
    fn translation_invariance() {
        let g = Grid2D::square(32, 8.0).unwrap();
        let spec = EquationSpec::new(2, -1, Form::Symmetrized).unwrap();
        let f = initial::random_smooth(g, 6, 1.0, Taper::Gaussian).unwrap();
        let shifted =
            crate::spectral::apply_multiplier(&f, |w| Complex64::from_polar(1.0, 0.7 * w.xi - 0.3 * w.eta)).unwrap();
        let d = Diagnostics::new(
            g,
            spec,
            DiagnosticsConfig {
                sigmas: vec![0.0, 0.1],
                gevrey: vec![GevreyParams::new(0.1, 1.0).unwrap()],
                radius: None,
            },
        );
        let a = d.record(&f).unwrap();
        let b = d.record(&shifted).unwrap();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-10 * x.abs().max(1e-300);
        assert!(close(a.mass, b.mass) && close(a.energy, b.energy));
        assert!(close(a.modified_energy.unwrap(), b.modified_energy.unwrap()));
        for (x, y) in a.e_sigma.iter().zip(&b.e_sigma) {
            assert!(close(*x, *y));
        }
    }

    #[test]
    fn csv_shape() {
        let g = Grid2D::square(16, 8.0).unwrap();
        let spec = EquationSpec::new(1, 1, Form::Symmetrized).unwrap();
        let d = Diagnostics::new(g, spec, DiagnosticsConfig { sigmas: vec![0.01, 0.1], gevrey: vec![], radius: None });
        let h = d.csv_header();
        assert_eq!(h, "t,mass,energy,mod_energy,M_sigma@0.01,M_sigma@0.1,sigma_hat");
        let r = d.record(&initial::gaussian(g, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(r.csv_row().split(',').count(), h.split(',').count());
    }
}
