//! Smooth time and frequency cut-offs.

use serde::{Deserialize, Serialize};

/// Plateau-and-support cut-off `ψ`: one on `|t| <= plateau`, zero on `|t| >= support`.
///
/// The transition is the C^∞ step `h(s) = f(s) / (f(s) + f(1 - s))` with
/// `f(s) = e^{-1/s}`, so every derivative vanishes at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowFn {
    pub plateau: f64,
    pub support: f64,
}

impl Default for WindowFn {
    fn default() -> Self {
        Self { plateau: 1.0, support: 2.0 }
    }
}

fn bump_tail(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let a = bump_tail(s);
    a / (a + bump_tail(1.0 - s))
}

impl WindowFn {
    pub fn eval(&self, t: f64) -> f64 {
        let a = t.abs();
        if a <= self.plateau {
            1.0
        } else if a >= self.support {
            0.0
        } else {
            smooth_step((self.support - a) / (self.support - self.plateau))
        }
    }

    /// `ψ_T(t) = ψ(t / T)`.
    pub fn scaled(&self, t: f64, scale: f64) -> f64 {
        self.eval(t / scale)
    }

    /// Dyadic piece: `ψ_1 = ψ`, `ψ_N(t) = ψ(t/N) - ψ(2t/N)` for `N >= 2`.
    pub fn dyadic(&self, n: f64, t: f64) -> f64 {
        if n <= 1.0 {
            self.eval(t)
        } else {
            self.eval(t / n) - self.eval(2.0 * t / n)
        }
    }
}
