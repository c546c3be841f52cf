//! Concrete learners as kernels: the minimal-positive threshold learner,
//! the GF(2) parity learner, a globally consistent ERM over a finite class,
//! a sample compression wrapper, and a threshold ERM that leaks its input.

mod compression;
mod dataset;
mod erm;
mod parity;
mod pathological;
mod threshold;

pub use compression::{compression_cmi_bound, compression_wrap, CompressionScheme};
pub use dataset::{Example, Feature, LabeledDataset};
pub use erm::{
    consistent_erm, erm_cmi_bound, sauer_shelah_bound, subsets, ConsistentErm, FiniteHypothesis, HypothesisClass,
};
pub use parity::{
    parity_cmi_bound, parity_failure_probability, parity_learn, pseudodeterministic_bound, ParityHypothesis,
    ParityLearner, MAX_PARITY_DIM,
};
pub use pathological::{decode_pathological, pathological_erm, DecimalGrid, PathologicalErm};
pub use threshold::{
    threshold_cmi_fixed, threshold_learn, threshold_output_law, uncoupled_threshold_cmi, ThresholdHypothesis,
    ThresholdLearner,
};

/// A binary classifier on features of type `X`.
pub trait Classifier<X> {
    fn predict(&self, x: &X) -> bool;

    /// Number of misclassified examples.
    fn errors(&self, data: &[Example<X>]) -> usize {
        data.iter().filter(|e| self.predict(&e.x) != e.y).count()
    }

    /// Empirical 0-1 loss; zero on empty data.
    fn empirical_loss(&self, data: &[Example<X>]) -> f64 {
        if data.is_empty() {
            0.0
        } else {
            self.errors(data) as f64 / data.len() as f64
        }
    }
}
