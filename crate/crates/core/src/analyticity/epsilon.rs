use num_rational::Rational64;

use crate::error::{Error, Result};

/// `ε(s) = min(1/24, s/6 + 1/24)` for `s > -1/4`, in exact arithmetic.
pub fn epsilon_of_s(s: Rational64) -> Result<Rational64> {
    if s <= Rational64::new(-1, 4) {
        return Err(Error::domain(format!("ε(s) needs s > -1/4, got {s}")));
    }
    let cap = Rational64::new(1, 24);
    Ok(cap.min(s / 6 + cap))
}

pub fn epsilon_of_s_f64(s: f64) -> Result<f64> {
    if !(s > -0.25) {
        return Err(Error::domain(format!("ε(s) needs s > -1/4, got {s}")));
    }
    Ok((1.0f64 / 24.0).min(s / 6.0 + 1.0 / 24.0))
}

/// Lifespan exponent `d = 1/(b' - b) = 1/ε(s)`.
pub fn default_d(s: Rational64) -> Result<Rational64> {
    Ok(epsilon_of_s(s)?.recip())
}
