//! Sampling checks of the two scalar exponential inequalities.

use rand::Rng;
use rayon::prelude::*;

use super::ProbeReport;
use crate::error::{Error, Result};
use crate::rng::trial_rng;

/// Relative slack allowed on exact inequalities.
pub const SCALAR_SLACK: f64 = 1e-12;

/// Ratios kept per stream for quantiles; max and violations use every sample.
const KEEP: usize = 50_000;

fn log_uniform<R: Rng>(r: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + r.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

struct Tally {
    max: f64,
    violations: usize,
    kept: Vec<f64>,
    skipped: usize,
    cases: [usize; 3],
}

impl Tally {
    fn new() -> Self {
        Self { max: 0.0, violations: 0, kept: Vec::new(), skipped: 0, cases: [0; 3] }
    }

    fn push(&mut self, lhs: f64, rhs: f64) {
        if lhs > rhs * (1.0 + SCALAR_SLACK) {
            self.violations += 1;
        }
        if rhs > 0.0 {
            let r = lhs / rhs;
            self.max = self.max.max(r);
            if self.kept.len() < KEEP {
                self.kept.push(r);
            }
        } else {
            self.skipped += 1;
        }
    }

    fn merge(mut self, o: Tally) -> Tally {
        self.max = self.max.max(o.max);
        self.violations += o.violations;
        self.kept.extend(o.kept);
        self.skipped += o.skipped;
        for (a, b) in self.cases.iter_mut().zip(o.cases) {
            *a += b;
        }
        self
    }

    fn report(self, name: &str, total: usize) -> ProbeReport {
        let mut rep = ProbeReport::from_ratios(name, &self.kept, self.skipped);
        rep.samples = total;
        rep.max_ratio = self.max;
        rep.violation_count = self.violations;
        rep.passed = self.violations == 0;
        rep
    }
}

/// `e^x - 1 <= x^α e^x` at `x = 0` and at `samples` log-uniform points of `[1e-8, 1e2]`.
pub fn exp_minus_one_check(alpha: f64, samples: usize, seed: u64) -> Result<ProbeReport> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain(format!("α = {alpha} must lie in [0, 1]")));
    }
    let chunks = 16usize;
    let per = samples.div_ceil(chunks);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = trial_rng(seed, c as u64);
            let mut t = Tally::new();
            for _ in 0..per {
                let x = log_uniform(&mut r, 1e-8, 1e2);
                t.push(x.exp_m1(), x.powf(alpha) * x.exp());
            }
            t
        })
        .reduce(Tally::new, Tally::merge);
    let mut t = tally;
    // x = 0: both sides vanish (0^0 = 1 for α = 0 leaves 0 <= 1)
    t.push(0f64.exp_m1(), 0f64.powf(alpha));
    let mut rep = t.report(&format!("exp_minus_one(alpha={alpha})"), per * chunks + 1);
    rep.notes.push("x log-uniform over [1e-8, 1e2] plus x = 0".into());
    Ok(rep)
}

/// Sign pattern bits: x₁, x₂, y₁, y₂ negative when set.
fn signed(v: f64, neg: bool) -> f64 {
    if neg {
        -v
    } else {
        v
    }
}

/// `|x+y|₁ - |x|₁ - |y|₁`, evaluated exactly per component.
fn l1_defect(x: [f64; 2], y: [f64; 2]) -> f64 {
    let mut d = 0.0;
    for i in 0..2 {
        if x[i] * y[i] < 0.0 {
            d -= 2.0 * x[i].abs().min(y[i].abs());
        }
    }
    d
}

/// `e^{σ|x|}e^{σ|y|} - e^{σ|x+y|} <= [2σ min(|x|,|y|)]^θ e^{σ|x|}e^{σ|y|}` over ℝ² with the
/// ℓ¹ norm, both sides divided by `e^{σ(|x|+|y|)}`. Each of the 16 sign patterns of
/// `(x₁, x₂, y₁, y₂)` receives `samples` pairs; a tenth of them place `y` on `-x`
/// scaled, and a tenth zero one component.
pub fn min_exp_inequality_check(theta: f64, sigma: f64, samples: usize, seed: u64) -> Result<ProbeReport> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::domain(format!("θ = {theta} must lie in [0, 1]")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("σ = {sigma} must be positive")));
    }
    let tally = (0u64..16)
        .into_par_iter()
        .map(|pat| {
            let mut r = trial_rng(seed, pat);
            let mut t = Tally::new();
            let neg = [pat & 1 != 0, pat & 2 != 0, pat & 4 != 0, pat & 8 != 0];
            for i in 0..samples {
                let mut m = [0.0; 4];
                for v in m.iter_mut() {
                    *v = log_uniform(&mut r, 1e-6, 1e2);
                }
                match i % 10 {
                    0 => {
                        let s = log_uniform(&mut r, 1e-3, 1e3);
                        m[2] = m[0] * s;
                        m[3] = m[1] * s;
                    }
                    1 => m[(i / 10) % 4] = 0.0,
                    _ => {}
                }
                let x = [signed(m[0], neg[0]), signed(m[1], neg[1])];
                let y = [signed(m[2], neg[2]), signed(m[3], neg[3])];
                let opposite = (0..2).filter(|&k| x[k] * y[k] < 0.0).count();
                t.cases[opposite] += 1;
                let lhs = -(sigma * l1_defect(x, y)).exp_m1();
                let mn = (x[0].abs() + x[1].abs()).min(y[0].abs() + y[1].abs());
                let rhs = (2.0 * sigma * mn).powf(theta);
                t.push(lhs, rhs);
            }
            t
        })
        .reduce(Tally::new, Tally::merge);
    let cases = tally.cases;
    let mut rep = tally.report(&format!("min_exp(theta={theta},sigma={sigma})"), 16 * samples);
    rep.notes
        .push(format!("pairs by opposite-sign components: none {}, one {}, both {}", cases[0], cases[1], cases[2]));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_minus_one_small_runs() {
        for a in [0.0, 0.3, 0.75, 1.0] {
            let r = exp_minus_one_check(a, 20_000, 1).unwrap();
            assert_eq!(r.violation_count, 0, "α = {a}");
            assert!(r.max_ratio <= 1.0 + SCALAR_SLACK);
        }
        assert!(exp_minus_one_check(1.5, 10, 0).is_err());
        // α = 1, x = 1: e - 1 <= e
        assert!(1f64.exp_m1() <= 1f64.exp());
    }

    #[test]
    fn min_exp_covers_cases() {
        for th in [0.0, 0.249, 1.0] {
            let r = min_exp_inequality_check(th, 0.7, 2_000, 3).unwrap();
            assert_eq!(r.violation_count, 0, "θ = {th}");
            assert_eq!(r.samples, 32_000);
            assert!(!r.notes[0].contains(" 0"), "{}", r.notes[0]);
        }
    }

    #[test]
    fn same_sign_pairs_give_zero() {
        assert_eq!(l1_defect([1.0, 2.0], [3.0, 0.5]), 0.0);
        assert_eq!(l1_defect([1.0, -2.0], [-3.0, 0.5]), -3.0);
        assert_eq!(l1_defect([-1.0, -2.0], [3.0, 0.5]), -3.0);
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            min_exp_inequality_check(0.2, 0.1, 500, 9).unwrap(),
            min_exp_inequality_check(0.2, 0.1, 500, 9).unwrap()
        );
    }
}
