use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::gap::GapEstimate;
use super::rhs::{
    bound_agnostic, bound_auroc, bound_ecmi, bound_nonlinear_expectation, bound_realizable,
    AgnosticKind,
};
use crate::info::Nats;
use crate::kernel::CmiEstimate;
use crate::{Error, Result};

/// The generalization statements that can be checked against a gap estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremId {
    AgnosticExpected,
    AgnosticAbsolute,
    AgnosticSquared,
    UnboundedExpected,
    Realizable,
    NonlinearExpectation,
    Markov,
    Normalized,
    Auroc,
    EcmiAbsolute,
    EcmiSquared,
    EcmiRealizable,
}

impl TheoremId {
    pub const ALL: [TheoremId; 12] = [
        TheoremId::AgnosticExpected,
        TheoremId::AgnosticAbsolute,
        TheoremId::AgnosticSquared,
        TheoremId::UnboundedExpected,
        TheoremId::Realizable,
        TheoremId::NonlinearExpectation,
        TheoremId::Markov,
        TheoremId::Normalized,
        TheoremId::Auroc,
        TheoremId::EcmiAbsolute,
        TheoremId::EcmiSquared,
        TheoremId::EcmiRealizable,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremId::AgnosticExpected => "agnostic-expected",
            TheoremId::AgnosticAbsolute => "agnostic-absolute",
            TheoremId::AgnosticSquared => "agnostic-squared",
            TheoremId::UnboundedExpected => "unbounded-expected",
            TheoremId::Realizable => "realizable",
            TheoremId::NonlinearExpectation => "nonlinear-expectation",
            TheoremId::Markov => "markov",
            TheoremId::Normalized => "normalized",
            TheoremId::Auroc => "auroc",
            TheoremId::EcmiAbsolute => "ecmi-absolute",
            TheoremId::EcmiSquared => "ecmi-squared",
            TheoremId::EcmiRealizable => "ecmi-realizable",
        }
    }

    /// The section of the guide that states this bound.
    pub fn anchor(&self) -> String {
        format!("bounds.md#{}", self.as_str())
    }

    /// Whether the statement needs `ε` (and reads a tail frequency).
    pub fn needs_epsilon(&self) -> bool {
        matches!(self, TheoremId::Markov | TheoremId::Normalized | TheoremId::Auroc)
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TheoremId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::UnknownId { kind: "theorem", id: s.to_string() })
    }
}

/// Inputs of a bound other than the CMI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: usize,
    /// `E[Δ²]`; `E[sup ℓ²]` for the unbounded statement and the
    /// whole-dataset `E[Δ(Z̃)²]` for the non-linear one.
    #[serde(default = "one")]
    pub scale: f64,
    /// Tail level for the probability statements.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Positive-class mass for the AUROC statement.
    #[serde(default)]
    pub positive_rate: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl BoundParams {
    pub fn new(n: usize) -> Self {
        BoundParams { n, scale: 1.0, epsilon: None, positive_rate: None }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    pub fn with_positive_rate(mut self, p: f64) -> Self {
        self.positive_rate = Some(p);
        self
    }

    fn epsilon(&self, theorem: TheoremId) -> Result<f64> {
        self.epsilon.ok_or_else(|| Error::invalid(format!("{theorem} needs epsilon")))
    }
}

/// A value tagged with the experiment that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sourced<T> {
    pub fingerprint: String,
    pub value: T,
}

impl<T> Sourced<T> {
    pub fn new(fingerprint: impl Into<String>, value: T) -> Self {
        Sourced { fingerprint: fingerprint.into(), value }
    }
}

/// One checked inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub experiment: String,
    pub theorem_id: TheoremId,
    pub n: usize,
    /// The CMI-type value plugged into the bound (upper end of its CI).
    pub cmi_nats: f64,
    pub rhs: f64,
    pub lhs: f64,
    pub lhs_ci: f64,
    /// `rhs ≥ |lhs| − lhs_ci`.
    pub satisfied: bool,
    pub seed: u64,
    pub lhs_estimate: GapEstimate,
}

impl BoundReport {
    /// Replaces the right-hand side and re-evaluates the comparison.
    pub fn with_rhs(mut self, rhs: f64) -> Self {
        self.rhs = rhs;
        self.satisfied = compare(rhs, self.lhs, self.lhs_ci);
        self
    }
}

fn compare(rhs: f64, lhs: f64, ci: f64) -> bool {
    rhs >= lhs.abs() - ci
}

/// The right-hand side of `theorem` at `cmi`. `empirical_loss` is the mean
/// training loss, read only by the realizable forms.
///
/// Statements whose closed forms rest on the squared-gap bound use its
/// infimum form, which is always valid.
pub fn theorem_rhs(theorem: TheoremId, params: &BoundParams, cmi: Nats, empirical_loss: f64) -> Result<f64> {
    let n = params.n;
    let s = params.scale;
    let squared = || bound_agnostic(AgnosticKind::Squared, cmi, n, s);
    Ok(match theorem {
        TheoremId::AgnosticExpected => bound_agnostic(AgnosticKind::Expected, cmi, n, s)?,
        TheoremId::AgnosticAbsolute => bound_agnostic(AgnosticKind::Absolute, cmi, n, s)?,
        TheoremId::AgnosticSquared | TheoremId::EcmiSquared => squared()?,
        TheoremId::UnboundedExpected => bound_agnostic(AgnosticKind::Unbounded, cmi, n, s)?,
        TheoremId::Realizable => bound_realizable(empirical_loss, cmi, n)?,
        TheoremId::NonlinearExpectation => bound_nonlinear_expectation(cmi, s)?.absolute,
        TheoremId::Markov | TheoremId::Normalized => {
            let eps = params.epsilon(theorem)?;
            squared()? / (eps * eps)
        }
        TheoremId::Auroc => {
            let eps = params.epsilon(theorem)?;
            let p = params.positive_rate.ok_or_else(|| Error::invalid("auroc needs positive_rate"))?;
            bound_auroc(eps, p, n, cmi)?.reported
        }
        TheoremId::EcmiAbsolute => bound_ecmi(cmi, n, s)?.absolute,
        TheoremId::EcmiRealizable => {
            if empirical_loss != 0.0 {
                return Err(Error::invalid("ecmi-realizable needs zero empirical loss on every run"));
            }
            bound_ecmi(cmi, n, s)?.realizable
        }
    })
}

/// The right-hand side and the matching left-hand statistic of `theorem`.
pub fn evaluate_theorem(theorem: TheoremId, params: &BoundParams, cmi: Nats, gap: &GapEstimate) -> Result<(f64, f64, f64)> {
    let rhs = theorem_rhs(theorem, params, cmi, gap.empirical_mean)?;
    let (lhs, ci) = match theorem {
        TheoremId::AgnosticExpected | TheoremId::UnboundedExpected => (gap.gap, gap.ci_halfwidth),
        TheoremId::AgnosticAbsolute | TheoremId::NonlinearExpectation | TheoremId::EcmiAbsolute => {
            (gap.abs_gap, gap.abs_gap_ci)
        }
        TheoremId::AgnosticSquared | TheoremId::EcmiSquared => (gap.gap_squared, gap.gap_squared_ci),
        TheoremId::Realizable | TheoremId::EcmiRealizable => (gap.population_mean, gap.population_ci),
        TheoremId::Markov | TheoremId::Normalized | TheoremId::Auroc => {
            let eps = params.epsilon(theorem)?;
            gap.tail(eps)
                .map(|t| (t.frequency, t.ci_halfwidth))
                .ok_or_else(|| Error::invalid(format!("{theorem} needs the tail frequency at {eps}")))?
        }
    };
    Ok((rhs, lhs, ci))
}

/// Evaluates `theorem` on a CMI value and a gap estimate from the same
/// experiment.
///
/// ```
/// use cmi_lab::bounds::{check_theorem, BoundParams, GapEstimate, Sourced, TheoremId};
/// use cmi_lab::kernel::CmiEstimate;
///
/// let gap = GapEstimate {
///     empirical_mean: 0.1, population_mean: 0.1, gap: 0.0, gap_squared: 0.0, abs_gap: 0.0,
///     ci_halfwidth: 0.0, gap_squared_ci: 0.0, abs_gap_ci: 0.0, population_ci: 0.0,
///     trials: 100, seed: 0, tails: vec![],
/// };
/// let r = check_theorem(
///     TheoremId::AgnosticExpected,
///     &BoundParams::new(10),
///     &Sourced::new("e1", CmiEstimate::exact(0.0)),
///     &Sourced::new("e1", gap),
/// )
/// .unwrap();
/// assert!(r.satisfied);
/// ```
pub fn check_theorem(
    theorem: TheoremId,
    params: &BoundParams,
    cmi: &Sourced<CmiEstimate>,
    gap: &Sourced<GapEstimate>,
) -> Result<BoundReport> {
    if cmi.fingerprint != gap.fingerprint {
        return Err(Error::FingerprintMismatch { cmi: cmi.fingerprint.clone(), gap: gap.fingerprint.clone() });
    }
    let value = Nats(cmi.value.upper());
    let (rhs, lhs, lhs_ci) = evaluate_theorem(theorem, params, value, &gap.value)?;
    Ok(BoundReport {
        experiment: gap.fingerprint.clone(),
        theorem_id: theorem,
        n: params.n,
        cmi_nats: value.0,
        rhs,
        lhs,
        lhs_ci,
        satisfied: compare(rhs, lhs, lhs_ci),
        seed: gap.value.seed,
        lhs_estimate: gap.value.clone(),
    })
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    theorem_id: TheoremId,
    n: usize,
    cmi_nats: f64,
    rhs: f64,
    lhs: f64,
    lhs_ci: f64,
    satisfied: bool,
    seed: u64,
}

pub const CSV_COLUMNS: [&str; 8] = ["theorem_id", "n", "cmi_nats", "rhs", "lhs", "lhs_ci", "satisfied", "seed"];

/// Writes one CSV row per report; the header is written even when empty.
pub fn write_reports_csv<W: Write>(reports: &[BoundReport], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in reports {
        w.serialize(CsvRow {
            theorem_id: r.theorem_id,
            n: r.n,
            cmi_nats: r.cmi_nats,
            rhs: r.rhs,
            lhs: r.lhs,
            lhs_ci: r.lhs_ci,
            satisfied: r.satisfied,
            seed: r.seed,
        })?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}
