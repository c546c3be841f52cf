//! Right-hand sides of the CMI generalization bounds, loss presets with
//! their sensitivities, and Monte Carlo estimators of the generalization gap
//! they control.
//!
//! Every bound takes the CMI in nats. A [`BoundReport`] pairs one bound with
//! a [`GapEstimate`] from the same experiment and records whether
//! `rhs ≥ |lhs| − ci`.

mod gap;
mod loss;
mod report;
mod rhs;

pub use gap::{estimate_auroc_gap, estimate_gap, DataSource, FiniteSource, GapEstimate, SamplerOnly, TailFrequency, MIN_GAP_TRIALS};
pub use loss::{
    delta_preset, empirical_auroc, lp_norm, population_auroc, zero_one_loss, DeltaPreset, LinearModel, LossKind,
    LossSpec, PresetKind, RealExample,
};
pub use report::{check_theorem, evaluate_theorem, theorem_rhs, write_reports_csv, BoundParams, BoundReport, Sourced, TheoremId, CSV_COLUMNS};
pub use rhs::{
    bound_agnostic, bound_auroc, bound_ecmi, bound_nonlinear, bound_nonlinear_expectation, bound_normalized,
    bound_realizable, bound_squared_closed_form, squared_objective, AgnosticKind, AurocBound, EcmiBounds,
    NonlinearExpectation,
};
