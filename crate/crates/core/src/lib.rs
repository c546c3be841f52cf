//! Conditional mutual information of learning algorithms.
//!
//! Learners are kernels from datasets to finite output laws. The crate
//! computes their CMI on supersamples exactly or by seeded Monte Carlo,
//! together with the universal and evaluated variants, and checks the
//! generalization bounds those quantities imply against simulated gaps.
//!
//! ```
//! use cmi_lab::kernel::{cmi_exact_fixed, Supersample};
//! use cmi_lab::learners::{Example, ThresholdLearner};
//!
//! let z = Supersample::new(vec![
//!     [Example::positive(2.0), Example::negative(0.0)],
//!     [Example::negative(1.0), Example::positive(3.0)],
//! ])
//! .unwrap();
//! let cmi = cmi_exact_fixed(&z, &ThresholdLearner).unwrap();
//! assert!(cmi.value.0 <= 2.0 * std::f64::consts::LN_2);
//! ```
//!
//! The guide in `book/` walks through each module; its snippets run as
//! doc-tests of this crate.

pub mod bounds;
mod error;
pub mod harness;
pub mod info;
pub mod kernel;
pub mod learners;
pub mod mc;
pub mod stability;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/information.md")]
    mod information {}
    #[doc = include_str!("../../../book/src/supersamples.md")]
    mod supersamples {}
    #[doc = include_str!("../../../book/src/learners.md")]
    mod learners {}
    #[doc = include_str!("../../../book/src/stability.md")]
    mod stability {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
