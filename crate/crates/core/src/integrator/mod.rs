//! Exact linear propagator and integrating-factor RK4 time stepping.

mod checkpoint;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{EquationSpec, RhsEvaluator};
use crate::error::{Error, Result};
use crate::spectral::{dealias, Grid2D, SpectralField2D};

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, CHECKPOINT_FORMAT_VERSION};

/// Largest admissible `dt · ρ`, with `ρ` the nonlinear rate bound.
pub const NONLINEAR_STEP_LIMIT: f64 = 0.5;
/// Top-octave median above this fraction of the peak flags under-resolution.
pub const RESOLUTION_RATIO: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Scales the nonlinear step limit; in `(0, 1]`.
    pub safety: f64,
    pub diag_stride: usize,
    /// Keep a copy of the state every this many steps (`None`: first and last only).
    pub snapshot_stride: Option<usize>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { dt: 1e-3, t_end: 1.0, safety: 1.0, diag_stride: 10, snapshot_stride: None }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config(format!("integrator.dt = {} must be positive", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::config(format!("integrator.t_end = {} must be >= 0", self.t_end)));
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(Error::config(format!("integrator.safety = {} must lie in (0, 1]", self.safety)));
        }
        if self.diag_stride == 0 {
            return Err(Error::config("integrator.diag_stride must be >= 1"));
        }
        if self.snapshot_stride == Some(0) {
            return Err(Error::config("integrator.snapshot_stride must be >= 1"));
        }
        Ok(())
    }

    /// Step count and the evenly dividing step actually used.
    pub fn schedule(&self) -> (usize, f64) {
        if self.t_end == 0.0 {
            return (0, self.dt);
        }
        let n = ((self.t_end / self.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        (n, self.t_end / n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub t: f64,
    pub max_coeff: f64,
    /// Median `|coefficient|` over the top octave of the retained band.
    pub noise_floor: f64,
    pub nan_flag: bool,
    pub resolution_warning: bool,
    /// `dt · ρ` drifted past the nonlinear step limit after the start.
    pub step_warning: bool,
}

/// Unit-modulus `e^{iθ}`, renormalised so `|p| = 1` holds to the last bit.
#[inline]
pub fn unit_phase(theta: f64) -> Complex64 {
    let (s, c) = theta.sin_cos();
    let h = c.hypot(s);
    Complex64::new(c / h, s / h)
}

/// `W(t) f`: multiplies each coefficient by `e^{i t (ξ³ + η³)}`.
pub fn linear_propagator(field: &SpectralField2D, t: f64) -> SpectralField2D {
    let mut out = field.clone();
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        *c *= unit_phase(t * field.grid.odd_wave_vector(i).cubic());
    }
    out.time = field.time + t;
    out
}

/// Integrating-factor RK4 for a fixed grid, equation and step.
#[derive(Debug)]
pub struct Stepper {
    eval: RhsEvaluator,
    dt: f64,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
    top_octave: Vec<usize>,
}

impl Stepper {
    pub fn new(grid: Grid2D, spec: EquationSpec, dt: f64) -> Self {
        let eval = RhsEvaluator::new(grid, spec);
        let half = eval.dispersion().iter().map(|w| unit_phase(0.5 * dt * w)).collect();
        let full = eval.dispersion().iter().map(|w| unit_phase(dt * w)).collect();
        let deg = spec.degree();
        let (kx, ky) = (deg.band(grid.n_x) as f64, deg.band(grid.n_y) as f64);
        let top_octave = (0..grid.len())
            .filter(|&i| {
                let (mx, my) = grid.modes(i);
                let r = (mx.abs() as f64 / kx).max(my.abs() as f64 / ky);
                r > 0.5 && r <= 1.0
            })
            .collect();
        Self { eval, dt, half, full, top_octave }
    }

    pub fn evaluator(&self) -> &RhsEvaluator {
        &self.eval
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn mul(e: &[Complex64], x: &[Complex64]) -> Vec<Complex64> {
        e.iter().zip(x).map(|(a, b)| a * b).collect()
    }

    /// Advances one step of size `dt`.
    pub fn step(&self, u: &SpectralField2D) -> Result<(SpectralField2D, StepReport)> {
        let t = u.time;
        let dt = self.dt;
        let n = |x: &[Complex64], tt: f64| self.eval.nonlinear(x, tt);
        let e = &self.half;
        let e2 = &self.full;
        let c = &u.coeffs;

        let k1 = n(c, t)?;
        let a: Vec<Complex64> = c.iter().zip(&k1).map(|(x, k)| x + 0.5 * dt * k).collect();
        let k2 = n(&Self::mul(e, &a), t + 0.5 * dt)?;
        let ec = Self::mul(e, c);
        let b: Vec<Complex64> = ec.iter().zip(&k2).map(|(x, k)| x + 0.5 * dt * k).collect();
        let k3 = n(&b, t + 0.5 * dt)?;
        let e2c = Self::mul(e2, c);
        let d: Vec<Complex64> = e2c.iter().zip(e.iter().zip(&k3)).map(|(x, (p, k))| x + dt * p * k).collect();
        let k4 = n(&d, t + dt)?;

        let mut next = Vec::with_capacity(c.len());
        for i in 0..c.len() {
            let v = e2c[i] + dt / 6.0 * (e2[i] * k1[i] + 2.0 * e[i] * (k2[i] + k3[i]) + k4[i]);
            next.push(v);
        }
        let out = dealias(&SpectralField2D { grid: u.grid, coeffs: next, time: t + dt }, self.eval.spec().degree());
        let report = self.report(&out);
        if report.nan_flag {
            return Err(Error::BlowUp { t: out.time, msg: "non-finite coefficient after step".into() });
        }
        Ok((out, report))
    }

    pub fn report(&self, f: &SpectralField2D) -> StepReport {
        let nan_flag = f.coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite()));
        let max_coeff = f.max_abs();
        let mut top: Vec<f64> = self.top_octave.iter().map(|&i| f.coeffs[i].norm()).collect();
        let noise_floor = median(&mut top);
        StepReport {
            t: f.time,
            max_coeff,
            noise_floor,
            nan_flag,
            resolution_warning: noise_floor > RESOLUTION_RATIO * max_coeff,
            step_warning: false,
        }
    }

    /// `dt · ρ` with `ρ = (k+1) |coef| max|u|^k max|s(γ)|` over the retained band.
    pub fn step_ratio(&self, f: &SpectralField2D) -> Result<f64> {
        let spec = self.eval.spec();
        let samples = self.eval.transformer().inverse(f)?;
        let umax = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let g = f.grid;
        let deg = spec.degree();
        let smax = (0..g.len())
            .filter(|&i| {
                let (mx, my) = g.modes(i);
                deg.keeps(mx, g.n_x) && deg.keeps(my, g.n_y)
            })
            .map(|i| spec.derivative_symbol(g.wave_vector(i)).abs())
            .fold(0.0, f64::max);
        let rho = (spec.k() + 1) as f64 * spec.nonlinear_coef().abs() * umax.powi(spec.k() as i32) * smax;
        Ok(self.dt * rho)
    }
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// One step of the integrating-factor scheme.
pub fn step_ifrk4(field: &SpectralField2D, spec: &EquationSpec, dt: f64) -> Result<(SpectralField2D, StepReport)> {
    Stepper::new(field.grid, *spec, dt).step(field)
}

/// States and reports gathered during one [`evolve`] call.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Reports at the diagnostic stride, starting with `t = 0`.
    pub reports: Vec<StepReport>,
    pub snapshots: Vec<SpectralField2D>,
    pub final_state: SpectralField2D,
    pub steps: usize,
    pub dt: f64,
}

/// A run that stopped early; `partial` ends at the last good state.
#[derive(Debug)]
pub struct EvolveFailure {
    pub partial: Trajectory,
    pub error: Error,
}

impl std::fmt::Display for EvolveFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (last good t = {})", self.error, self.partial.final_state.time)
    }
}

impl std::error::Error for EvolveFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Steps `u0` to `cfg.t_end`, calling `hook` at step 0, every `diag_stride`
/// steps and at the final step. The error keeps the partial trajectory.
#[allow(clippy::result_large_err)]
pub fn evolve<H>(
    u0: &SpectralField2D,
    spec: &EquationSpec,
    cfg: &IntegratorConfig,
    mut hook: H,
) -> std::result::Result<Trajectory, EvolveFailure>
where
    H: FnMut(&SpectralField2D, &StepReport),
{
    let start = dealias(u0, spec.degree());
    let (n, dt) = cfg.schedule();
    let stepper = Stepper::new(start.grid, *spec, dt);
    let mut traj =
        Trajectory { reports: Vec::new(), snapshots: vec![start.clone()], final_state: start.clone(), steps: 0, dt };
    let fail = |traj: Trajectory, error| Err(EvolveFailure { partial: traj, error });
    if let Err(e) = cfg.validate() {
        return fail(traj, e);
    }
    if spec.mu() != 0.0 && n > 0 {
        match stepper.step_ratio(&start) {
            Ok(r) if r > NONLINEAR_STEP_LIMIT * cfg.safety => {
                let e = Error::config(format!(
                    "dt·ρ = {r:.3} exceeds {}; reduce integrator.dt",
                    NONLINEAR_STEP_LIMIT * cfg.safety
                ));
                return fail(traj, e);
            }
            Err(e) => return fail(traj, e),
            Ok(_) => {}
        }
    }
    let first = stepper.report(&start);
    hook(&start, &first);
    traj.reports.push(first);

    let mut u = start;
    for s in 1..=n {
        match stepper.step(&u) {
            Ok((next, mut rep)) => {
                u = next;
                traj.steps = s;
                if s % cfg.diag_stride == 0 || s == n {
                    if spec.mu() != 0.0 {
                        rep.step_warning =
                            stepper.step_ratio(&u).map_or(true, |r| r > NONLINEAR_STEP_LIMIT * cfg.safety);
                    }
                    hook(&u, &rep);
                    traj.reports.push(rep);
                }
                if cfg.snapshot_stride.is_some_and(|k| s % k == 0) || s == n {
                    traj.snapshots.push(u.clone());
                }
            }
            Err(e) => {
                traj.final_state = u;
                return fail(traj, e);
            }
        }
    }
    traj.final_state = u;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Form;
    use crate::initial;
    use std::f64::consts::PI;

    #[test]
    fn propagator_basics() {
        let g = Grid2D::square(16, 2.0 * PI).unwrap();
        let u = initial::random_smooth(g, 3, 1.0, initial::Taper::Algebraic).unwrap();
        assert_eq!(linear_propagator(&u, 0.0), u);
        let back = linear_propagator(&linear_propagator(&u, 0.37), -0.37);
        for (a, b) in back.coeffs.iter().zip(&u.coeffs) {
            assert!((a - b).norm() < 1e-14 * u.max_abs());
        }
        let mut m = SpectralField2D::zeros(g);
        m.coeffs[g.index_of(1, 0).unwrap()] = Complex64::new(1.0, 0.0);
        let p = linear_propagator(&m, PI).get(1, 0);
        assert!((p - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn linear_step_equals_propagator() {
        let g = Grid2D::square(32, 2.0 * PI).unwrap();
        let spec = EquationSpec::linear_only(1, Form::Symmetrized).unwrap();
        let u = dealias(&initial::random_smooth(g, 4, 1.0, initial::Taper::Algebraic).unwrap(), spec.degree());
        let (s, rep) = step_ifrk4(&u, &spec, 0.01).unwrap();
        let w = linear_propagator(&u, 0.01);
        for (a, b) in s.coeffs.iter().zip(&w.coeffs) {
            assert!((a - b).norm() < 1e-14 * u.max_abs());
        }
        assert!(!rep.nan_flag);
    }

    #[test]
    fn schedule_rounding() {
        let c = IntegratorConfig { dt: 1e-3, t_end: 1.0, ..Default::default() };
        assert_eq!(c.schedule().0, 1000);
        let c = IntegratorConfig { dt: 0.3, t_end: 1.0, ..Default::default() };
        let (n, dt) = c.schedule();
        assert_eq!(n, 4);
        assert!((dt - 0.25).abs() < 1e-15);
        assert!(IntegratorConfig { diag_stride: 0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn zero_horizon_returns_initial_state() {
        let g = Grid2D::square(16, 2.0 * PI).unwrap();
        let spec = EquationSpec::new(1, 1, Form::Symmetrized).unwrap();
        let u = dealias(&initial::random_smooth(g, 5, 0.1, initial::Taper::Gaussian).unwrap(), spec.degree());
        let cfg = IntegratorConfig { t_end: 0.0, ..Default::default() };
        let mut calls = 0;
        let tr = evolve(&u, &spec, &cfg, |_, _| calls += 1).unwrap();
        assert_eq!(tr.final_state, u);
        assert_eq!(tr.reports.len(), 1);
        assert_eq!(calls, 1);
    }

    #[test]
    fn oversized_step_rejected() {
        let g = Grid2D::square(16, 2.0 * PI).unwrap();
        let spec = EquationSpec::new(1, 1, Form::Symmetrized).unwrap();
        let u = initial::random_smooth(g, 5, 50.0, initial::Taper::Gaussian).unwrap();
        let cfg = IntegratorConfig { dt: 0.5, t_end: 1.0, ..Default::default() };
        let err = evolve(&u, &spec, &cfg, |_, _| {}).unwrap_err();
        assert!(matches!(err.error, Error::Config(_)));
        assert_eq!(err.partial.steps, 0);
    }

    #[test]
    fn time_reversal_of_linear_flow() {
        let g = Grid2D::square(16, 2.0 * PI).unwrap();
        let spec = EquationSpec::linear_only(2, Form::Symmetrized).unwrap();
        let u = dealias(&initial::random_smooth(g, 6, 1.0, initial::Taper::Algebraic).unwrap(), spec.degree());
        let (f, _) = step_ifrk4(&u, &spec, 0.02).unwrap();
        let (b, _) = step_ifrk4(&f, &spec, -0.02).unwrap();
        for (x, y) in b.coeffs.iter().zip(&u.coeffs) {
            assert!((x - y).norm() < 1e-14 * u.max_abs());
        }
    }
}
