//! Algorithms as dataset-to-distribution kernels, the supersample model, and
//! exact and Monte Carlo engines for CMI, universal CMI and evaluated CMI.
//!
//! A supersample `z̃` has `n` rows of two points; a selector `s ∈ {0,1}^n`
//! picks the training set `z̃_s`. With `S` uniform, `I(A(z̃_S); S)` measures
//! how well the output identifies which half was trained on.
//!
//! ```
//! use cmi_lab::kernel::{cmi_exact_fixed, RevealKernel, Supersample};
//!
//! let z = Supersample::new(vec![[0, 1], [2, 3], [4, 5]]).unwrap();
//! let cmi = cmi_exact_fixed(&z, &RevealKernel).unwrap();
//! assert!((cmi.value.0 - 3.0 * std::f64::consts::LN_2).abs() < 1e-12);
//! ```

mod algorithm;
mod channel;
mod engine;
mod supersample;

pub use algorithm::{
    adaptive_compose, compose_pair, postprocess, Adaptive, AlgorithmKernel, Composed, ConstantKernel,
    Deterministic, PostProcessed, RevealKernel, StochasticMap, TableKernel,
};
pub use channel::{Capacity, CapacityOptions, SELECTOR_CAP_LOG2};
pub use engine::{
    capacity_bracket, channel_capacity, cmi_distribution_free, cmi_distribution_free_with, cmi_distributional,
    cmi_distributional_with, cmi_exact_fixed, ecmi_fixed, mutual_information_under, ucmi_fixed, CmiEstimate,
    CmiMode, FnSampler, IidSampler, Method, MonteCarlo, SupersampleSampler, MIN_CMI_TRIALS,
    SUPERSAMPLE_TERM_CAP,
};
pub use supersample::{Selector, Supersample};

#[cfg(test)]
mod tests;
