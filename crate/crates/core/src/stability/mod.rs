//! Stable mechanisms and the CMI bounds their stability implies:
//! randomized response (pure DP), a ⊥-or-reveal lottery (TV stability), the
//! universal-CMI check for DP kernels, and the variance surrogate behind the
//! uniform-stability bound on evaluated CMI.

mod certificate;
mod gaussian;
mod mechanisms;

pub use certificate::{Certified, DpParams, Notion, StabilityCertificate, TvParams};
pub use gaussian::{clipped_squared_loss, ecmi_gaussian_bound, mean_estimator_stability, GaussianSurrogate, MeanEstimator};
pub use mechanisms::{
    max_neighbour_divergence, randomized_response, tv_lottery, ucmi_dp_check, LotteryOutput, NeighbourDivergence,
    RandomizedResponse, TvLottery, UcmiCheck, MAX_RESPONSE_BITS, UCMI_CHECK_SLACK,
};
