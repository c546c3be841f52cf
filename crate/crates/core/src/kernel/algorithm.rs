use std::collections::BTreeMap;
use std::fmt::Debug;
use std::hash::{Hash, Hasher};

use rand::{Rng as _, SeedableRng};

use crate::info::FiniteDistribution;
use crate::mc::Rng;
use crate::{Error, Result};

/// A learning algorithm given as an explicit map from a dataset to the law of
/// its output.
///
/// `evaluate` must be a pure function of the dataset: calling it twice on the
/// same data returns the same table.
pub trait AlgorithmKernel<Z>: Sync {
    type Output: Ord + Clone + Send + Sync + Debug;

    fn evaluate(&self, data: &[Z]) -> Result<FiniteDistribution<Self::Output>>;

    /// Draws one output with the caller's generator.
    fn sample(&self, data: &[Z], rng: &mut Rng) -> Result<Self::Output> {
        Ok(self.evaluate(data)?.sample(rng).clone())
    }
}

impl<Z, K: AlgorithmKernel<Z> + ?Sized> AlgorithmKernel<Z> for &K {
    type Output = K::Output;
    fn evaluate(&self, data: &[Z]) -> Result<FiniteDistribution<K::Output>> {
        (**self).evaluate(data)
    }
}

/// Ignores its input and always returns the same output.
#[derive(Clone, Debug)]
pub struct ConstantKernel<W>(pub W);

impl<Z, W: Ord + Clone + Send + Sync + Debug> AlgorithmKernel<Z> for ConstantKernel<W> {
    type Output = W;
    fn evaluate(&self, _: &[Z]) -> Result<FiniteDistribution<W>> {
        Ok(FiniteDistribution::point(self.0.clone()))
    }
}

/// A deterministic algorithm given by a function.
#[derive(Clone, Debug)]
pub struct Deterministic<F>(pub F);

impl<Z, W, F> AlgorithmKernel<Z> for Deterministic<F>
where
    F: Fn(&[Z]) -> W + Sync,
    W: Ord + Clone + Send + Sync + Debug,
{
    type Output = W;
    fn evaluate(&self, data: &[Z]) -> Result<FiniteDistribution<W>> {
        Ok(FiniteDistribution::point((self.0)(data)))
    }
}

/// Outputs its whole training set.
#[derive(Clone, Copy, Debug, Default)]
pub struct RevealKernel;

impl<Z: Ord + Clone + Send + Sync + Debug> AlgorithmKernel<Z> for RevealKernel {
    type Output = Vec<Z>;
    fn evaluate(&self, data: &[Z]) -> Result<FiniteDistribution<Vec<Z>>> {
        Ok(FiniteDistribution::point(data.to_vec()))
    }
}

/// A pseudo-random kernel for property tests: the output law over
/// `0..outputs` is a fixed function of `(seed, dataset)`.
#[derive(Clone, Copy, Debug)]
pub struct TableKernel {
    pub outputs: u32,
    pub seed: u64,
    pub deterministic: bool,
}

impl TableKernel {
    pub fn new(outputs: u32, seed: u64) -> Self {
        TableKernel { outputs: outputs.max(1), seed, deterministic: false }
    }

    pub fn deterministic(outputs: u32, seed: u64) -> Self {
        TableKernel { outputs: outputs.max(1), seed, deterministic: true }
    }
}

impl<Z: Hash> AlgorithmKernel<Z> for TableKernel {
    type Output = u32;
    fn evaluate(&self, data: &[Z]) -> Result<FiniteDistribution<u32>> {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.seed.hash(&mut h);
        data.hash(&mut h);
        let mut rng = Rng::seed_from_u64(h.finish());
        if self.deterministic {
            return Ok(FiniteDistribution::point(rng.random_range(0..self.outputs)));
        }
        // Cubing uniform draws gives uneven, sometimes nearly sparse rows.
        let weights: Vec<f64> = (0..self.outputs).map(|_| rng.random::<f64>().powi(3)).collect();
        let total: f64 = weights.iter().sum();
        FiniteDistribution::new((0..self.outputs).zip(weights.into_iter().map(|w| w / total)))
    }
}

/// Runs two kernels on the same data with independent randomness and
/// reports both outputs.
#[derive(Clone, Debug)]
pub struct Composed<A, B> {
    pub first: A,
    pub second: B,
}

/// The non-adaptive composition `z ↦ (A1(z), A2(z))`.
pub fn compose_pair<A, B>(first: A, second: B) -> Composed<A, B> {
    Composed { first, second }
}

impl<Z, A: AlgorithmKernel<Z>, B: AlgorithmKernel<Z>> AlgorithmKernel<Z> for Composed<A, B> {
    type Output = (A::Output, B::Output);
    fn evaluate(&self, data: &[Z]) -> Result<FiniteDistribution<Self::Output>> {
        Ok(self.first.evaluate(data)?.product(&self.second.evaluate(data)?))
    }
}

/// A row-stochastic map from outputs `W` to outputs `V`.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMap<W, V> {
    rows: BTreeMap<W, FiniteDistribution<V>>,
}

impl<W: Ord + Clone, V: Ord + Clone> StochasticMap<W, V> {
    /// Builds the map from one row of `(target, probability)` pairs per source.
    /// Rows that are not probability vectors are rejected.
    pub fn new(rows: impl IntoIterator<Item = (W, Vec<(V, f64)>)>) -> Result<Self> {
        let mut out = BTreeMap::new();
        for (w, row) in rows {
            let law = FiniteDistribution::from_weights(row)?;
            if out.insert(w, law).is_some() {
                return Err(Error::invalid("stochastic map has two rows for one source"));
            }
        }
        Ok(StochasticMap { rows: out })
    }

    /// The deterministic map `w ↦ f(w)` on the listed sources.
    pub fn deterministic(sources: impl IntoIterator<Item = W>, f: impl Fn(&W) -> V) -> Self {
        let rows = sources.into_iter().map(|w| {
            let v = f(&w);
            (w, FiniteDistribution::point(v))
        });
        StochasticMap { rows: rows.collect() }
    }

    pub fn row(&self, w: &W) -> Result<&FiniteDistribution<V>> {
        self.rows.get(w).ok_or_else(|| Error::invalid("stochastic map has no row for this output"))
    }

    /// Pushes a law on `W` through the map.
    pub fn apply(&self, law: &FiniteDistribution<W>) -> Result<FiniteDistribution<V>> {
        let mut out: BTreeMap<V, f64> = BTreeMap::new();
        for (w, p) in law.iter().filter(|(_, p)| *p > 0.0) {
            for (v, q) in self.row(w)?.iter() {
                *out.entry(v.clone()).or_insert(0.0) += p * q;
            }
        }
        FiniteDistribution::new(out)
    }
}

/// A kernel followed by a data-independent stochastic map.
#[derive(Clone, Debug)]
pub struct PostProcessed<A, W, V> {
    pub inner: A,
    pub map: StochasticMap<W, V>,
}

/// The pushforward kernel `z ↦ B(A(z))`.
pub fn postprocess<A, W, V>(inner: A, map: StochasticMap<W, V>) -> PostProcessed<A, W, V> {
    PostProcessed { inner, map }
}

impl<Z, A, V> AlgorithmKernel<Z> for PostProcessed<A, A::Output, V>
where
    A: AlgorithmKernel<Z>,
    V: Ord + Clone + Send + Sync + Debug,
{
    type Output = V;
    fn evaluate(&self, data: &[Z]) -> Result<FiniteDistribution<V>> {
        self.map.apply(&self.inner.evaluate(data)?)
    }
}

/// The adaptive composition `z ↦ A2(z, A1(z))`, reporting the second output.
#[derive(Clone, Debug)]
pub struct Adaptive<A, F> {
    pub first: A,
    pub family: F,
}

/// Builds `z ↦ family(A1(z)).evaluate(z)`.
pub fn adaptive_compose<A, F>(first: A, family: F) -> Adaptive<A, F> {
    Adaptive { first, family }
}

impl<Z, A, F, B> AlgorithmKernel<Z> for Adaptive<A, F>
where
    A: AlgorithmKernel<Z>,
    F: Fn(&A::Output) -> B + Sync,
    B: AlgorithmKernel<Z>,
{
    type Output = B::Output;
    fn evaluate(&self, data: &[Z]) -> Result<FiniteDistribution<B::Output>> {
        let first = self.first.evaluate(data)?;
        let mut out: BTreeMap<B::Output, f64> = BTreeMap::new();
        for (w1, p) in first.iter().filter(|(_, p)| *p > 0.0) {
            for (w2, q) in (self.family)(w1).evaluate(data)?.iter() {
                *out.entry(w2.clone()).or_insert(0.0) += p * q;
            }
        }
        FiniteDistribution::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_kernel_is_a_function_of_the_data() {
        let k = TableKernel::new(5, 9);
        let a = k.evaluate(&[1u8, 2, 3]).unwrap();
        assert_eq!(a, k.evaluate(&[1u8, 2, 3]).unwrap());
        assert_ne!(a, k.evaluate(&[1u8, 2, 4]).unwrap());
        let d = TableKernel::deterministic(5, 9);
        assert!(d.evaluate(&[1u8]).unwrap().as_point().is_some());
    }

    #[test]
    fn stochastic_map_validation() {
        assert!(StochasticMap::new([(0, vec![(0, 0.5), (1, 0.4)])]).is_err());
        let m = StochasticMap::new([(0, vec![(7, 1.0)]), (1, vec![(7, 0.5), (8, 0.5)])]).unwrap();
        let law = FiniteDistribution::new([(0, 0.5), (1, 0.5)]).unwrap();
        let out = m.apply(&law).unwrap();
        assert_eq!(out.mass(&7), 0.75);
        let missing = FiniteDistribution::point(2);
        assert!(m.apply(&missing).is_err());
    }

    #[test]
    fn composition_is_the_product_law() {
        let k = compose_pair(ConstantKernel('a'), TableKernel::new(3, 1));
        let law = k.evaluate(&[0u8]).unwrap();
        let second = TableKernel::new(3, 1).evaluate(&[0u8]).unwrap();
        for (w, p) in second.iter() {
            assert_eq!(law.mass(&('a', *w)), p);
        }
    }

    #[test]
    fn adaptive_mixes_second_stage_laws() {
        let first = Deterministic(|d: &[u8]| d[0] % 2);
        let k = adaptive_compose(first, |&w: &u8| ConstantKernel(w + 10));
        assert_eq!(k.evaluate(&[3u8]).unwrap(), FiniteDistribution::point(11));
    }
}
