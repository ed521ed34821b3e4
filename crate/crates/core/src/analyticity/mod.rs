//! Radius-of-analyticity estimation, the ε(s) law, the continuation ledger and
//! the lower-bound curves for σ(T).

mod bounds;
mod epsilon;
mod ledger;
mod radius;

pub use bounds::{fit_decay_exponent, BoundCurve, BoundKind, DecayFit};
pub use epsilon::{default_d, epsilon_of_s, epsilon_of_s_f64};
pub use ledger::{
    condition2_lhs, condition2_lhs_mzk, condition2_sigma, condition2_sigma_mzk, continuation_delta,
    continuation_delta_mzk, lifespan_t0, ContinuationLedger, LedgerConstants, LedgerKind, LedgerRow,
};
pub use radius::{estimate_radius, FitModel, RadiusEstimate, RadiusFitConfig};
