//! Experiment configuration, seeded suite execution and report emission.
//!
//! A suite is one JSON document: a mandatory `seed`, a list of
//! learner/distribution/loss experiments with the theorems to check on each,
//! and a list of property families. Every Monte Carlo trial `t` of
//! experiment `id` is seeded from `(seed, id, t)`, so reports do not depend
//! on the worker count.

mod config;
mod experiment;
mod properties;
mod suite;

pub use config::{CmiConfig, Component, ExperimentConfig, SuiteConfig, TheoremRequest};
pub use experiment::{build_distribution, Experiment, ExperimentCmi, ExperimentReport, Learner, LossChoice, DISTRIBUTION_IDS};
pub use properties::{
    CompositionParams, CompressionParams, DpTvParams, EcmiParams, ErmVcParams, ParityParams, Property, PropertyResult,
    ThresholdCmiParams, TriplesParams,
};
pub use suite::{
    emit, exit_code, read_report, run_suite, run_suite_file, write_estimates_csv, write_gaps_csv, write_report, Format,
    SuiteReport, ESTIMATE_COLUMNS, EXIT_ERROR, GAP_COLUMNS,
    EXIT_INFEASIBLE, EXIT_OK, EXIT_UNKNOWN_ID, EXIT_UNSATISFIED,
};
