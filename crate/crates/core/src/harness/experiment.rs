use serde::{Deserialize, Serialize};

use super::config::{CmiConfig, Component, ExperimentConfig};
use crate::bounds::{
    check_theorem, estimate_auroc_gap, estimate_gap, zero_one_loss, BoundParams, BoundReport, FiniteSource,
    GapEstimate, Sourced, TheoremId,
};
use crate::info::FiniteDistribution;
use crate::kernel::{
    capacity_bracket, cmi_distributional_with, cmi_exact_fixed, ecmi_fixed, AlgorithmKernel, CapacityOptions,
    CmiEstimate, CmiMode, IidSampler, Method, MonteCarlo, SupersampleSampler, Supersample, MIN_CMI_TRIALS,
};
use crate::learners::{
    threshold_cmi_fixed, threshold_learn, Classifier, DecimalGrid, Example, PathologicalErm, ThresholdHypothesis,
};
use crate::{Error, Result};

/// Threshold-family learners over labelled reals.
#[derive(Clone, Debug)]
pub enum Learner {
    Threshold,
    Pathological(PathologicalErm),
    Constant(ThresholdHypothesis),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridParams {
    decimals: u32,
    lo: i64,
    hi: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantParams {
    t: f64,
}

impl Learner {
    pub const IDS: [&'static str; 3] = ["threshold", "pathological", "constant"];

    pub fn build(c: &Component) -> Result<Self> {
        match c.id.as_str() {
            "threshold" => c.parse::<NoParams>("learner").map(|_| Learner::Threshold),
            "pathological" => {
                let p: GridParams = c.parse("learner")?;
                Ok(Learner::Pathological(PathologicalErm { grid: DecimalGrid::new(p.decimals, p.lo, p.hi)? }))
            }
            "constant" => Ok(Learner::Constant(ThresholdHypothesis::at(c.parse::<ConstantParams>("learner")?.t)?)),
            other => Err(Error::UnknownId { kind: "learner", id: other.into() }),
        }
    }

    /// A proven upper bound on the CMI at sample size `n`, for every data law.
    pub fn cap(&self, n: usize) -> f64 {
        let trivial = n as f64 * std::f64::consts::LN_2;
        match self {
            Learner::Threshold => trivial.min(2.0),
            Learner::Pathological(_) => trivial,
            Learner::Constant(_) => 0.0,
        }
    }

    /// Exact CMI on one supersample, by the fastest available route.
    pub fn cmi_fixed(&self, z: &Supersample<Example<f64>>) -> Result<f64> {
        match self {
            Learner::Threshold => Ok(threshold_cmi_fixed(z)?.0),
            Learner::Pathological(k) => Ok(cmi_exact_fixed(z, k)?.value.0),
            Learner::Constant(_) => Ok(0.0),
        }
    }
}

impl AlgorithmKernel<Example<f64>> for Learner {
    type Output = ThresholdHypothesis;
    fn evaluate(&self, data: &[Example<f64>]) -> Result<FiniteDistribution<ThresholdHypothesis>> {
        match self {
            Learner::Threshold => Ok(FiniteDistribution::point(threshold_learn(data))),
            Learner::Pathological(k) => k.evaluate(data),
            Learner::Constant(h) => Ok(FiniteDistribution::point(h.clone())),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridLaw {
    points: usize,
    cut: usize,
    #[serde(default)]
    noise: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableAtom {
    x: f64,
    y: u8,
    mass: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableLaw {
    atoms: Vec<TableAtom>,
}

pub const DISTRIBUTION_IDS: [&str; 2] = ["grid", "table"];

/// Builds a data law over labelled reals.
///
/// `grid` is uniform on `0, 1, …, points − 1` labelled `x ≥ cut`, each label
/// flipped with probability `noise`; `table` lists `(x, y, mass)` atoms.
pub fn build_distribution(c: &Component) -> Result<FiniteDistribution<Example<f64>>> {
    match c.id.as_str() {
        "grid" => {
            let g: GridLaw = c.parse("distribution")?;
            if g.points == 0 || !(0.0..=1.0).contains(&g.noise) {
                return Err(Error::invalid("grid needs at least one point and noise in [0, 1]"));
            }
            let mass = 1.0 / g.points as f64;
            FiniteDistribution::new((0..g.points).flat_map(|i| {
                let y = i >= g.cut;
                [(Example::new(i as f64, y), mass * (1.0 - g.noise)), (Example::new(i as f64, !y), mass * g.noise)]
            }))
        }
        "table" => {
            let t: TableLaw = c.parse("distribution")?;
            let atoms = t
                .atoms
                .into_iter()
                .map(|a| match a.y {
                    0 | 1 => Ok((Example::new(a.x, a.y == 1), a.mass)),
                    y => Err(Error::invalid(format!("label {y} is not 0 or 1"))),
                })
                .collect::<Result<Vec<_>>>()?;
            FiniteDistribution::new(atoms)
        }
        other => Err(Error::UnknownId { kind: "distribution", id: other.into() }),
    }
}

/// Which loss the gap is measured in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossChoice {
    ZeroOne,
    /// Empirical against population AUROC of the 0/1 prediction as a score.
    Auroc,
}

impl LossChoice {
    pub const IDS: [&'static str; 2] = ["zero-one", "auroc"];

    pub fn build(c: &Component) -> Result<Self> {
        match c.id.as_str() {
            "zero-one" => c.parse::<NoParams>("loss").map(|_| LossChoice::ZeroOne),
            "auroc" => c.parse::<NoParams>("loss").map(|_| LossChoice::Auroc),
            other => Err(Error::UnknownId { kind: "loss", id: other.into() }),
        }
    }
}

/// CMI of an experiment: the value plugged into bounds, plus the Monte Carlo
/// estimate when both were requested.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentCmi {
    pub used: CmiEstimate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<CmiEstimate>,
}

/// Result of running one experiment end to end.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub id: String,
    pub cmi: ExperimentCmi,
    pub gap: GapEstimate,
    pub reports: Vec<BoundReport>,
}

/// A validated experiment.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub learner: Learner,
    pub law: FiniteDistribution<Example<f64>>,
    pub loss: LossChoice,
    pub theorems: Vec<TheoremId>,
}

impl Experiment {
    pub fn build(config: &ExperimentConfig) -> Result<Self> {
        let learner = Learner::build(&config.learner)?;
        let law = build_distribution(&config.distribution)?;
        let loss = LossChoice::build(&config.loss)?;
        if config.n == 0 {
            return Err(Error::invalid(format!("experiment `{}` has n = 0", config.id)));
        }
        if let CmiConfig::Mc { trials } | CmiConfig::Both { trials } = config.cmi {
            if trials < MIN_CMI_TRIALS {
                return Err(Error::invalid(format!("experiment `{}` needs at least {MIN_CMI_TRIALS} CMI trials", config.id)));
            }
        }
        let theorems = config.theorems.iter().map(|t| t.theorem()).collect::<Result<Vec<_>>>()?;
        for (t, req) in theorems.iter().zip(&config.theorems) {
            if t.needs_epsilon() && req.epsilon.is_none() {
                return Err(Error::invalid(format!("theorem {t} in `{}` needs epsilon", config.id)));
            }
            if (*t == TheoremId::Auroc) != (loss == LossChoice::Auroc) {
                return Err(Error::invalid(format!("theorem {t} does not apply to loss `{}`", config.loss.id)));
            }
        }
        Ok(Experiment { config: config.clone(), learner, law, loss, theorems })
    }

    pub fn id(&self) -> &str {
        &self.config.id
    }

    fn sampler(&self) -> IidSampler<Example<f64>> {
        IidSampler { law: self.law.clone(), n: self.config.n }
    }

    fn plan(&self, seed: u64, stream: &str, trials: usize) -> MonteCarlo {
        MonteCarlo::new(trials, seed).with_stream(format!("{}{stream}", self.config.id))
    }

    /// Distributional CMI in the configured mode.
    pub fn cmi(&self, seed: u64) -> Result<ExperimentCmi> {
        let inner = |z: &Supersample<Example<f64>>| self.learner.cmi_fixed(z);
        let mc = |trials| cmi_distributional_with(inner, &self.sampler(), &CmiMode::MonteCarlo(self.plan(seed, "/cmi", trials)));
        Ok(match self.config.cmi {
            CmiConfig::Exact => ExperimentCmi { used: cmi_distributional_with(inner, &self.sampler(), &CmiMode::Exact)?, monte_carlo: None },
            CmiConfig::Mc { trials } => ExperimentCmi { used: mc(trials)?, monte_carlo: None },
            CmiConfig::Both { trials } => ExperimentCmi {
                used: cmi_distributional_with(inner, &self.sampler(), &CmiMode::Exact)?,
                monte_carlo: Some(mc(trials)?),
            },
            CmiConfig::Cap => ExperimentCmi {
                used: CmiEstimate { method: Method::Cap, ..CmiEstimate::exact(self.learner.cap(self.config.n)) },
                monte_carlo: None,
            },
        })
    }

    /// Distributional evaluated CMI under the zero-one loss. In cap mode this
    /// is the CMI cap, which also bounds the evaluated CMI.
    pub fn ecmi(&self, seed: u64) -> Result<CmiEstimate> {
        let loss = |h: &ThresholdHypothesis, e: &Example<f64>| f64::from(u8::from(h.predict(&e.x) != e.y));
        let inner = |z: &Supersample<Example<f64>>| Ok(ecmi_fixed(z, &self.learner, loss)?.value.0);
        match self.config.cmi {
            CmiConfig::Exact | CmiConfig::Both { .. } => cmi_distributional_with(inner, &self.sampler(), &CmiMode::Exact),
            CmiConfig::Mc { trials } => {
                cmi_distributional_with(inner, &self.sampler(), &CmiMode::MonteCarlo(self.plan(seed, "/ecmi", trials)))
            }
            CmiConfig::Cap => Ok(self.cmi(seed)?.used),
        }
    }

    /// Largest universal CMI (lower end of the capacity bracket) over the
    /// configured number of supersample draws; a lower bound on the
    /// supremum.
    pub fn ucmi(&self, seed: u64, opts: CapacityOptions) -> Result<CmiEstimate> {
        let trials = match self.config.cmi {
            CmiConfig::Mc { trials } | CmiConfig::Both { trials } => trials,
            _ => return Err(Error::invalid("universal CMI draws candidate supersamples; use mc or both mode")),
        };
        let plan = self.plan(seed, "/ucmi", trials);
        let sampler = self.sampler();
        let mut best = f64::NEG_INFINITY;
        for t in 0..trials as u64 {
            let z = sampler.draw(crate::mc::derive_seed(plan.seed, &plan.stream, t));
            best = best.max(capacity_bracket(&z, &self.learner, opts)?.lower);
        }
        Ok(CmiEstimate { trials, seed: Some(seed), lower_bound: true, ..CmiEstimate::exact(best) })
    }

    fn tails(&self) -> Vec<f64> {
        self.config.theorems.iter().filter_map(|t| t.epsilon).collect()
    }

    /// Gap estimate over `trials` seeded runs; trial `t` is seeded from
    /// `(seed, experiment id, t)`.
    pub fn gap(&self, seed: u64) -> Result<GapEstimate> {
        let plan = self.plan(seed, "", self.config.trials);
        match self.loss {
            LossChoice::ZeroOne => {
                let source = FiniteSource { law: self.law.clone() };
                estimate_gap(&self.learner, &source, &zero_one_loss(), self.config.n, &plan, &self.tails())
            }
            LossChoice::Auroc => {
                let score = |h: &ThresholdHypothesis, x: &f64| f64::from(u8::from(h.predict(x)));
                estimate_auroc_gap(&self.learner, &self.law, score, self.config.n, &plan, &self.tails())
            }
        }
    }

    /// Parameters for checking `theorem` (the `i`-th request).
    fn params(&self, i: usize) -> BoundParams {
        let req = &self.config.theorems[i];
        let mut params = BoundParams::new(self.config.n).with_scale(req.scale.unwrap_or(1.0));
        if let Some(eps) = req.epsilon {
            params = params.with_epsilon(eps);
        }
        let p = self.law.probability(|e| e.y);
        if p > 0.0 && p < 1.0 {
            params = params.with_positive_rate(p);
        }
        params
    }

    /// Checks every requested theorem on one CMI value and gap estimate.
    pub fn check(&self, cmi: &CmiEstimate, gap: &GapEstimate) -> Result<Vec<BoundReport>> {
        let cmi = Sourced::new(self.id(), cmi.clone());
        let gap = Sourced::new(self.id(), gap.clone());
        self.theorems
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let report = check_theorem(t, &self.params(i), &cmi, &gap)?;
                Ok(match self.config.theorems[i].rhs_override {
                    Some(rhs) => report.with_rhs(rhs),
                    None => report,
                })
            })
            .collect()
    }

    pub fn run(&self, seed: u64) -> Result<ExperimentReport> {
        let cmi = self.cmi(seed)?;
        let gap = self.gap(seed)?;
        let reports = self.check(&cmi.used, &gap)?;
        Ok(ExperimentReport { id: self.id().into(), cmi, gap, reports })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::TheoremRequest;

    fn config(learner: Component, n: usize, cmi: CmiConfig) -> ExperimentConfig {
        ExperimentConfig {
            id: "t".into(),
            learner,
            distribution: Component::new("grid").with("points", 4).with("cut", 2),
            loss: Component::new("zero-one"),
            n,
            trials: 200,
            cmi,
            theorems: vec![TheoremRequest::new("agnostic-expected")],
        }
    }

    #[test]
    fn registries_reject_unknown_ids() {
        let mut c = config(Component::new("perceptron"), 2, CmiConfig::Cap);
        assert!(matches!(Experiment::build(&c), Err(Error::UnknownId { kind: "learner", .. })));
        c.learner = Component::new("threshold").with("extra", 1);
        assert!(matches!(Experiment::build(&c), Err(Error::InvalidArgument(_))));
        c.learner = Component::new("threshold");
        c.theorems.push(TheoremRequest::new("holder"));
        assert!(matches!(Experiment::build(&c), Err(Error::UnknownId { kind: "theorem", .. })));
        c.theorems = vec![TheoremRequest::new("markov")];
        assert!(Experiment::build(&c).is_err());
    }

    #[test]
    fn exact_and_monte_carlo_agree() {
        let e = Experiment::build(&config(Component::new("threshold"), 3, CmiConfig::Both { trials: 2000 })).unwrap();
        let cmi = e.cmi(5).unwrap();
        let mc = cmi.monte_carlo.as_ref().unwrap();
        assert!((mc.value.0 - cmi.used.value.0).abs() <= 3.0 * mc.ci_halfwidth, "{cmi:?}");
        // The fast threshold route matches the generic engine.
        let generic = crate::kernel::cmi_distributional(&e.learner, &e.sampler(), &CmiMode::Exact).unwrap();
        assert!((generic.value.0 - cmi.used.value.0).abs() < 1e-10);
    }

    #[test]
    fn exact_mode_never_falls_back() {
        let e = Experiment::build(&config(Component::new("threshold"), 20, CmiConfig::Exact)).unwrap();
        assert!(matches!(e.cmi(0), Err(Error::TooLargeForExact { .. })));
    }

    #[test]
    fn run_is_reproducible() {
        let e = Experiment::build(&config(Component::new("threshold"), 10, CmiConfig::Mc { trials: 50 })).unwrap();
        let a = e.run(3).unwrap();
        assert_eq!(a, e.run(3).unwrap());
        assert_eq!(a.reports.len(), 1);
        assert!(a.reports[0].satisfied);
        let ecmi = e.ecmi(3).unwrap();
        assert!(ecmi.value.0 <= a.cmi.used.value.0 + 3.0 * (a.cmi.used.ci_halfwidth + ecmi.ci_halfwidth));
    }

    #[test]
    fn pathological_and_threshold_gaps_coincide() {
        let mut c = config(Component::new("threshold"), 20, CmiConfig::Cap);
        c.distribution = Component::new("grid").with("points", 32).with("cut", 16).with("noise", 0.1);
        let threshold = Experiment::build(&c).unwrap().gap(1).unwrap();
        c.learner = Component::new("pathological").with("decimals", 0).with("lo", 0).with("hi", 31);
        let pathological = Experiment::build(&c).unwrap();
        // Both predict identically on every grid point, so every run has the
        // same gap even though the CMI caps differ.
        assert_eq!(pathological.gap(1).unwrap().gap, threshold.gap);
        assert!(pathological.learner.cap(20) > 5.0 * Learner::Threshold.cap(20));
    }
}
