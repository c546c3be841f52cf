use std::collections::BTreeMap;

use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::channel::{map_chunks, Capacity, CapacityOptions, SelectorChannel};
use super::{AlgorithmKernel, Supersample};
use crate::info::{FiniteDistribution, Nats};
use crate::mc::{derive_seed, MeanCi, Rng};
use crate::{Error, Result};

/// Largest number of supersamples summed by exact distributional CMI.
pub const SUPERSAMPLE_TERM_CAP: f64 = 1e7;

/// Fewest supersample draws accepted by Monte Carlo CMI.
pub const MIN_CMI_TRIALS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "exact")]
    Exact,
    #[serde(rename = "monte-carlo")]
    MonteCarlo,
    /// A proven upper bound for the learner, not a computed value.
    #[serde(rename = "cap")]
    Cap,
}

/// A CMI-type value with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CmiEstimate {
    #[serde(rename = "value_nats")]
    pub value: Nats,
    pub method: Method,
    /// 95% confidence half-width; zero for exact values.
    #[serde(rename = "ci")]
    pub ci_halfwidth: f64,
    pub trials: usize,
    pub seed: Option<u64>,
    /// Set when the value is a maximum over finitely many candidates and so
    /// only a lower bound on a supremum.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub lower_bound: bool,
}

impl CmiEstimate {
    pub fn exact(value: f64) -> Self {
        CmiEstimate { value: Nats(value), method: Method::Exact, ci_halfwidth: 0.0, trials: 1, seed: None, lower_bound: false }
    }

    /// Upper end of the confidence interval.
    pub fn upper(&self) -> f64 {
        self.value.0 + self.ci_halfwidth
    }
}

/// Source of supersamples `Z̃ ~ D^{n×2}`.
pub trait SupersampleSampler<Z>: Sync {
    fn n(&self) -> usize;

    /// A supersample drawn from the generator seeded with `seed`.
    fn draw(&self, seed: u64) -> Supersample<Z>;

    /// The law `D` itself when it has finite support.
    fn law(&self) -> Option<&FiniteDistribution<Z>> {
        None
    }
}

/// Supersamples with independent entries from a finite law.
#[derive(Clone, Debug)]
pub struct IidSampler<Z> {
    pub law: FiniteDistribution<Z>,
    pub n: usize,
}

impl<Z: Ord + Clone + Sync> SupersampleSampler<Z> for IidSampler<Z> {
    fn n(&self) -> usize {
        self.n
    }

    fn draw(&self, seed: u64) -> Supersample<Z> {
        let mut rng = Rng::seed_from_u64(seed);
        let rows = (0..self.n)
            .map(|_| [self.law.sample(&mut rng).clone(), self.law.sample(&mut rng).clone()])
            .collect();
        Supersample::new(rows).expect("n >= 1")
    }

    fn law(&self) -> Option<&FiniteDistribution<Z>> {
        Some(&self.law)
    }
}

/// Supersamples with independent entries produced by a point generator.
#[derive(Clone, Debug)]
pub struct FnSampler<F> {
    pub n: usize,
    pub point: F,
}

impl<Z, F: Fn(&mut Rng) -> Z + Sync> SupersampleSampler<Z> for FnSampler<F> {
    fn n(&self) -> usize {
        self.n
    }

    fn draw(&self, seed: u64) -> Supersample<Z> {
        let mut rng = Rng::seed_from_u64(seed);
        let rows = (0..self.n).map(|_| [(self.point)(&mut rng), (self.point)(&mut rng)]).collect();
        Supersample::new(rows).expect("n >= 1")
    }
}

/// Monte Carlo plan: trial `t` uses `derive_seed(seed, stream, t)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub trials: usize,
    pub seed: u64,
    pub stream: String,
}

impl MonteCarlo {
    pub fn new(trials: usize, seed: u64) -> Self {
        MonteCarlo { trials, seed, stream: "cmi".into() }
    }

    pub fn with_stream(mut self, stream: impl Into<String>) -> Self {
        self.stream = stream.into();
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CmiMode {
    /// Sum over every supersample in the support of `D^{n×2}`.
    Exact,
    MonteCarlo(MonteCarlo),
}

/// `I(A(z̃_S); S)` for a fixed supersample and uniform `S`, computed exactly
/// by enumerating all `2^n` selectors.
pub fn cmi_exact_fixed<Z, K>(z: &Supersample<Z>, kernel: &K) -> Result<CmiEstimate>
where
    Z: Clone + Sync,
    K: AlgorithmKernel<Z>,
{
    let value = SelectorChannel::new(z, kernel)?.uniform_mutual_information()?;
    Ok(CmiEstimate::exact(value))
}

/// `I(A(z̃_S); S)` under an arbitrary selector law (indexed as in
/// [`crate::kernel::Selector::from_index`]).
pub fn mutual_information_under<Z, K>(z: &Supersample<Z>, kernel: &K, selector_law: &[f64]) -> Result<Nats>
where
    Z: Clone + Sync,
    K: AlgorithmKernel<Z>,
{
    Ok(Nats(SelectorChannel::new(z, kernel)?.mutual_information(selector_law)?))
}

/// Distributional CMI `E_{Z̃}[I(A(Z̃_S); S)]` with the exact fixed-supersample
/// engine as the inner computation.
pub fn cmi_distributional<Z, K, S>(kernel: &K, sampler: &S, mode: &CmiMode) -> Result<CmiEstimate>
where
    Z: Ord + Clone + Send + Sync,
    K: AlgorithmKernel<Z>,
    S: SupersampleSampler<Z>,
{
    cmi_distributional_with(|z| Ok(cmi_exact_fixed(z, kernel)?.value.0), sampler, mode)
}

/// Distributional averaging around any exact fixed-supersample evaluator,
/// for learners whose inner value has a faster exact formula.
pub fn cmi_distributional_with<Z, S, F>(inner: F, sampler: &S, mode: &CmiMode) -> Result<CmiEstimate>
where
    Z: Ord + Clone + Send + Sync,
    S: SupersampleSampler<Z>,
    F: Fn(&Supersample<Z>) -> Result<f64> + Sync,
{
    match mode {
        CmiMode::Exact => exact_distributional(&inner, sampler),
        CmiMode::MonteCarlo(plan) => {
            if plan.trials < MIN_CMI_TRIALS {
                return Err(Error::invalid(format!(
                    "Monte Carlo CMI needs at least {MIN_CMI_TRIALS} trials, got {}",
                    plan.trials
                )));
            }
            let samples = (0..plan.trials as u64)
                .into_par_iter()
                .map(|t| inner(&sampler.draw(derive_seed(plan.seed, &plan.stream, t))))
                .collect::<Result<Vec<f64>>>()?;
            let summary = MeanCi::of(&samples);
            Ok(CmiEstimate {
                value: Nats(summary.mean),
                method: Method::MonteCarlo,
                ci_halfwidth: summary.ci_halfwidth,
                trials: plan.trials,
                seed: Some(plan.seed),
                lower_bound: false,
            })
        }
    }
}

fn exact_distributional<Z, S, F>(inner: &F, sampler: &S) -> Result<CmiEstimate>
where
    Z: Ord + Clone + Send + Sync,
    S: SupersampleSampler<Z>,
    F: Fn(&Supersample<Z>) -> Result<f64> + Sync,
{
    let law = sampler
        .law()
        .ok_or_else(|| Error::invalid("exact distributional CMI needs a finitely supported data law"))?;
    let atoms: Vec<(&Z, f64)> = law.iter().filter(|(_, m)| *m > 0.0).collect();
    let n = sampler.n();
    let size = (atoms.len() as f64).powi(2 * n as i32);
    if size > SUPERSAMPLE_TERM_CAP {
        return Err(Error::TooLargeForExact { what: "supersample enumeration", size, cap: SUPERSAMPLE_TERM_CAP });
    }
    let base = atoms.len() as u64;
    let parts = map_chunks(size as u64, |range| {
        let mut acc = 0.0;
        for t in range {
            let mut digits = t;
            let mut weight = 1.0;
            let mut rows = Vec::with_capacity(n);
            for _ in 0..n {
                let mut pair = Vec::with_capacity(2);
                for _ in 0..2 {
                    let (z, m) = atoms[(digits % base) as usize];
                    digits /= base;
                    weight *= m;
                    pair.push(z.clone());
                }
                let b = pair.pop().expect("two points");
                let a = pair.pop().expect("two points");
                rows.push([a, b]);
            }
            acc += weight * inner(&Supersample::new(rows)?)?;
        }
        Ok(acc)
    })?;
    Ok(CmiEstimate::exact(parts.into_iter().sum::<f64>().max(0.0)))
}

/// Maximum of the fixed-supersample CMI over `candidates`, flagged as a lower
/// bound on the distribution-free CMI.
pub fn cmi_distribution_free<Z, K>(kernel: &K, candidates: &[Supersample<Z>]) -> Result<CmiEstimate>
where
    Z: Clone + Sync,
    K: AlgorithmKernel<Z>,
{
    cmi_distribution_free_with(|z| Ok(cmi_exact_fixed(z, kernel)?.value.0), candidates)
}

/// [`cmi_distribution_free`] around a custom exact inner evaluator.
pub fn cmi_distribution_free_with<Z, F>(inner: F, candidates: &[Supersample<Z>]) -> Result<CmiEstimate>
where
    Z: Sync,
    F: Fn(&Supersample<Z>) -> Result<f64> + Sync,
{
    if candidates.is_empty() {
        return Err(Error::invalid("distribution-free CMI needs at least one candidate supersample"));
    }
    let values = candidates.par_iter().map(&inner).collect::<Result<Vec<f64>>>()?;
    let best = values.into_iter().fold(f64::NEG_INFINITY, f64::max);
    Ok(CmiEstimate { trials: candidates.len(), lower_bound: true, ..CmiEstimate::exact(best) })
}

/// Capacity of the selector channel `s ↦ A(z̃_s)` by Blahut–Arimoto.
///
/// Fails with [`Error::NotConverged`], carrying the final bracket, when the
/// bracket does not close within `opts.max_iters` iterations.
pub fn channel_capacity<Z, K>(z: &Supersample<Z>, kernel: &K, opts: CapacityOptions) -> Result<Capacity>
where
    Z: Clone + Sync,
    K: AlgorithmKernel<Z>,
{
    let cap = capacity_bracket(z, kernel, opts)?;
    if cap.converged {
        Ok(cap)
    } else {
        Err(Error::NotConverged { iterations: cap.iterations, lower: cap.lower, upper: cap.upper })
    }
}

/// Like [`channel_capacity`] but returns the bracket reached even when it is
/// wider than the tolerance.
pub fn capacity_bracket<Z, K>(z: &Supersample<Z>, kernel: &K, opts: CapacityOptions) -> Result<Capacity>
where
    Z: Clone + Sync,
    K: AlgorithmKernel<Z>,
{
    SelectorChannel::new(z, kernel)?.capacity(opts)
}

/// Universal CMI on a fixed supersample: the supremum of `I(A(z̃_S); S)` over
/// all selector laws, reported as the lower end of a capacity bracket of
/// width at most `tol`.
pub fn ucmi_fixed<Z, K>(z: &Supersample<Z>, kernel: &K, tol: f64, max_iters: usize) -> Result<CmiEstimate>
where
    Z: Clone + Sync,
    K: AlgorithmKernel<Z>,
{
    let cap = channel_capacity(z, kernel, CapacityOptions { tol, max_iters })?;
    Ok(CmiEstimate { trials: cap.iterations, ..CmiEstimate::exact(cap.value) })
}

/// Evaluated CMI on a fixed supersample: mutual information between `S` and
/// the vector of losses of the output on all `2n` supersample points.
///
/// Outputs whose loss vectors agree bit-for-bit are merged, so losses should
/// take exactly representable values.
pub fn ecmi_fixed<Z, K, L>(z: &Supersample<Z>, kernel: &K, loss: L) -> Result<CmiEstimate>
where
    Z: Clone + Sync,
    K: AlgorithmKernel<Z>,
    L: Fn(&K::Output, &Z) -> f64 + Sync,
{
    let evaluated = Evaluated { kernel, z, loss: &loss, cache: Default::default() };
    cmi_exact_fixed(z, &evaluated)
}

struct Evaluated<'a, K: AlgorithmKernel<Z>, Z, L> {
    kernel: &'a K,
    z: &'a Supersample<Z>,
    loss: &'a L,
    cache: std::sync::Mutex<BTreeMap<K::Output, Vec<u64>>>,
}

impl<K, Z, L> Evaluated<'_, K, Z, L>
where
    K: AlgorithmKernel<Z>,
    L: Fn(&K::Output, &Z) -> f64,
{
    fn loss_vector(&self, w: &K::Output) -> Result<Vec<u64>> {
        if let Some(v) = self.cache.lock().expect("cache lock").get(w) {
            return Ok(v.clone());
        }
        let mut key = Vec::with_capacity(2 * self.z.n());
        for point in self.z.points() {
            let v = (self.loss)(w, point);
            if v.is_nan() {
                return Err(Error::invalid("loss returned NaN"));
            }
            // Adding zero maps -0.0 to +0.0 so equal losses share a key.
            key.push((v + 0.0).to_bits());
        }
        self.cache.lock().expect("cache lock").insert(w.clone(), key.clone());
        Ok(key)
    }
}

impl<K, Z, L> AlgorithmKernel<Z> for Evaluated<'_, K, Z, L>
where
    K: AlgorithmKernel<Z>,
    Z: Sync,
    L: Fn(&K::Output, &Z) -> f64 + Sync,
{
    type Output = Vec<u64>;
    fn evaluate(&self, data: &[Z]) -> Result<FiniteDistribution<Vec<u64>>> {
        let law = self.kernel.evaluate(data)?;
        let mut out: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
        for (w, m) in law.iter() {
            *out.entry(self.loss_vector(w)?).or_insert(0.0) += m;
        }
        FiniteDistribution::new(out)
    }
}
