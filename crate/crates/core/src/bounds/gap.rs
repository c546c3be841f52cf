use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::loss::{empirical_auroc, population_auroc, LossSpec};
use crate::info::FiniteDistribution;
use crate::kernel::{AlgorithmKernel, MonteCarlo};
use crate::learners::{Example, Feature};
use crate::mc::{trial_rng, MeanCi, Rng};
use crate::{Error, Result};

/// Fewest trials accepted by the gap estimators.
pub const MIN_GAP_TRIALS: usize = 100;

/// A law to draw training sets from, with an exact population-loss
/// evaluator where one exists.
pub trait DataSource<Z, W>: Sync {
    fn draw(&self, n: usize, rng: &mut Rng) -> Vec<Z>;

    /// `E_{z∼D}[ℓ(w, z)]`, computed exactly.
    fn population_loss(&self, loss: &LossSpec<W, Z>, w: &W) -> Option<f64>;
}

/// Independent draws from a finite law; population losses are exact sums.
#[derive(Clone, Debug)]
pub struct FiniteSource<Z> {
    pub law: FiniteDistribution<Z>,
}

impl<Z: Ord + Clone + Sync, W> DataSource<Z, W> for FiniteSource<Z> {
    fn draw(&self, n: usize, rng: &mut Rng) -> Vec<Z> {
        (0..n).map(|_| self.law.sample(rng).clone()).collect()
    }

    fn population_loss(&self, loss: &LossSpec<W, Z>, w: &W) -> Option<f64> {
        Some(loss.expectation(w, &self.law))
    }
}

/// A generator with no population evaluator; rejected by [`estimate_gap`].
#[derive(Clone, Debug)]
pub struct SamplerOnly<F>(pub F);

impl<Z, W, F: Fn(&mut Rng) -> Z + Sync> DataSource<Z, W> for SamplerOnly<F> {
    fn draw(&self, n: usize, rng: &mut Rng) -> Vec<Z> {
        (0..n).map(|_| (self.0)(rng)).collect()
    }

    fn population_loss(&self, _: &LossSpec<W, Z>, _: &W) -> Option<f64> {
        None
    }
}

/// Empirical frequency of `|gap| ≥ ε·Ψ(w)` (`Ψ = 1` for losses without a
/// normalizer).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFrequency {
    pub epsilon: f64,
    pub frequency: f64,
    pub ci_halfwidth: f64,
}

/// Monte Carlo summary of `ℓ(A(Z), Z) − ℓ(A(Z), D)` over independent runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub empirical_mean: f64,
    pub population_mean: f64,
    /// Mean of `empirical − population`.
    pub gap: f64,
    /// Mean of `(empirical − population)²`.
    pub gap_squared: f64,
    /// Mean of `|empirical − population|`.
    pub abs_gap: f64,
    /// 95% half-width for `gap`.
    pub ci_halfwidth: f64,
    pub gap_squared_ci: f64,
    pub abs_gap_ci: f64,
    pub population_ci: f64,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub tails: Vec<TailFrequency>,
}

impl GapEstimate {
    pub fn tail(&self, epsilon: f64) -> Option<&TailFrequency> {
        self.tails.iter().find(|t| t.epsilon == epsilon)
    }
}

/// One run: empirical and population value and the normalizer of the output.
#[derive(Clone, Copy, Debug)]
struct Trial {
    empirical: f64,
    population: f64,
    psi: f64,
}

fn summarize(records: &[Trial], tails: &[f64], seed: u64) -> GapEstimate {
    let column = |f: &dyn Fn(&Trial) -> f64| MeanCi::of(&records.iter().map(f).collect::<Vec<_>>());
    let emp = column(&|t| t.empirical);
    let pop = column(&|t| t.population);
    let gap = column(&|t| t.empirical - t.population);
    let sq = column(&|t| (t.empirical - t.population).powi(2));
    let abs = column(&|t| (t.empirical - t.population).abs());
    let tails = tails
        .iter()
        .map(|&epsilon| {
            let hit = column(&|t| f64::from(u8::from((t.empirical - t.population).abs() >= epsilon * t.psi)));
            TailFrequency { epsilon, frequency: hit.mean, ci_halfwidth: hit.ci_halfwidth }
        })
        .collect();
    GapEstimate {
        empirical_mean: emp.mean,
        population_mean: pop.mean,
        gap: gap.mean,
        gap_squared: sq.mean,
        abs_gap: abs.mean,
        ci_halfwidth: gap.ci_halfwidth,
        gap_squared_ci: sq.ci_halfwidth,
        abs_gap_ci: abs.ci_halfwidth,
        population_ci: pop.ci_halfwidth,
        trials: records.len(),
        seed,
        tails,
    }
}

fn run_trials<T: Send>(plan: &MonteCarlo, trial: impl Fn(&mut Rng) -> Result<T> + Sync) -> Result<Vec<T>> {
    if plan.trials < MIN_GAP_TRIALS {
        return Err(Error::invalid(format!("gap estimation needs at least {MIN_GAP_TRIALS} trials, got {}", plan.trials)));
    }
    (0..plan.trials as u64)
        .into_par_iter()
        .map(|t| trial(&mut trial_rng(plan.seed, &plan.stream, t)))
        .collect()
}

/// Runs the learner on `plan.trials` independent training sets of size `n`
/// and summarizes the generalization gap. Trial `t` draws its data and the
/// learner's randomness from `derive_seed(plan.seed, plan.stream, t)`.
pub fn estimate_gap<Z, K, D>(
    kernel: &K,
    source: &D,
    loss: &LossSpec<K::Output, Z>,
    n: usize,
    plan: &MonteCarlo,
    tails: &[f64],
) -> Result<GapEstimate>
where
    Z: Sync,
    K: AlgorithmKernel<Z>,
    D: DataSource<Z, K::Output>,
{
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    let records = run_trials(plan, |rng| {
        let data = source.draw(n, rng);
        let w = kernel.sample(&data, rng)?;
        let population = source
            .population_loss(loss, &w)
            .ok_or_else(|| Error::invalid("data source has no exact population-loss evaluator"))?;
        Ok(Trial { empirical: loss.mean(&w, &data), population, psi: loss.psi(&w) })
    })?;
    Ok(summarize(&records, tails, plan.seed))
}

/// The AUROC analogue of [`estimate_gap`]: empirical AUROC of the learned
/// scorer on its training set against its exact AUROC under `law`.
pub fn estimate_auroc_gap<X, K>(
    kernel: &K,
    law: &FiniteDistribution<Example<X>>,
    score: impl Fn(&K::Output, &X) -> f64 + Sync,
    n: usize,
    plan: &MonteCarlo,
    tails: &[f64],
) -> Result<GapEstimate>
where
    X: Feature,
    K: AlgorithmKernel<Example<X>>,
{
    let records = run_trials(plan, |rng| {
        let data: Vec<Example<X>> = (0..n).map(|_| law.sample(rng).clone()).collect();
        let w = kernel.sample(&data, rng)?;
        let scores: Vec<f64> = data.iter().map(|e| score(&w, &e.x)).collect();
        let labels: Vec<bool> = data.iter().map(|e| e.y).collect();
        Ok(Trial {
            empirical: empirical_auroc(&scores, &labels)?,
            population: population_auroc(law, |x| score(&w, x))?,
            psi: 1.0,
        })
    })?;
    Ok(summarize(&records, tails, plan.seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::zero_one_loss;
    use crate::kernel::ConstantKernel;
    use crate::learners::{ThresholdHypothesis, ThresholdLearner};

    fn grid_law(points: usize, cut: usize) -> FiniteDistribution<Example<f64>> {
        FiniteDistribution::uniform((0..points).map(|i| Example::new(i as f64, i >= cut))).unwrap()
    }

    #[test]
    fn constant_learner_has_no_gap() {
        let source = FiniteSource { law: grid_law(16, 8) };
        let h = ConstantKernel(ThresholdHypothesis::at(3.0).unwrap());
        let est = estimate_gap(&h, &source, &zero_one_loss(), 20, &MonteCarlo::new(400, 1), &[0.1]).unwrap();
        // The expected gap is exactly zero; allow 3 half-widths of noise.
        assert!(est.gap.abs() <= 3.0 * est.ci_halfwidth, "{est:?}");
        assert!((est.population_mean - 5.0 / 16.0).abs() < 1e-12);
        assert_eq!(est.population_ci, 0.0);
        assert!(est.tail(0.1).is_some());
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let source = FiniteSource { law: grid_law(64, 32) };
        let plan = MonteCarlo::new(300, 9).with_stream("threads");
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_gap(&ThresholdLearner, &source, &zero_one_loss(), 30, &plan, &[0.05]).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn rejects_missing_evaluator_and_few_trials() {
        let source = SamplerOnly(|_: &mut Rng| Example::positive(1.0));
        let plan = MonteCarlo::new(100, 0);
        assert!(estimate_gap(&ThresholdLearner, &source, &zero_one_loss(), 5, &plan, &[]).is_err());
        let finite = FiniteSource { law: grid_law(4, 2) };
        let short = MonteCarlo::new(99, 0);
        assert!(estimate_gap(&ThresholdLearner, &finite, &zero_one_loss(), 5, &short, &[]).is_err());
    }

    #[test]
    fn auroc_gap_of_a_fixed_scorer_is_unbiased() {
        let law = grid_law(10, 5);
        let noisy = FiniteDistribution::mixture([(0.8, &law), (0.2, &grid_law(10, 0))]).unwrap();
        let est = estimate_auroc_gap(&ConstantKernel(()), &noisy, |_, &x| x, 100, &MonteCarlo::new(500, 4), &[0.3]).unwrap();
        assert!(est.gap.abs() <= 3.0 * est.ci_halfwidth.max(1e-3), "{est:?}");
    }
}
