//! Exact information measures over finite distributions.
//!
//! Every quantity is in nats. `0 · log 0` is taken to be `0`, and
//! `p · log(p / 0)` for `p > 0` yields [`Nats::INFINITY`].

mod dist;
mod measures;
mod nats;

pub use dist::{FiniteDistribution, JointPmf};
pub use measures::{
    conditional_mutual_information, dv_gap, entropy, event_probability_bound, jsd_tv, kl,
    kl_gaussian, mutual_information,
};
pub use nats::Nats;

/// Tolerance for closed-form identities.
pub const CLOSED_FORM_TOL: f64 = 1e-12;
/// Tolerance for sums of up to ten thousand terms.
pub const SUMMATION_TOL: f64 = 1e-10;
/// Tolerance for results of iterative solvers.
pub const ITERATIVE_TOL: f64 = 1e-9;
/// Constructors rescale masses whose total is within this distance of one
/// and reject anything further away.
pub const RENORMALIZE_SLACK: f64 = 1e-9;

/// `x · ln(x / y)` with the conventions `0 · ln(0 / y) = 0` and
/// `x · ln(x / 0) = +∞` for `x > 0`.
pub(crate) fn xlogxy(x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if y <= 0.0 {
        f64::INFINITY
    } else {
        x * (x / y).ln()
    }
}
