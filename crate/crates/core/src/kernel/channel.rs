//! The channel `s ↦ A(z̃_s)` from selectors to outputs, and the two
//! quantities computed on it: mutual information under a given selector law
//! and Blahut–Arimoto capacity.

use std::collections::BTreeSet;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AlgorithmKernel, Supersample};
use crate::info::{xlogxy, FiniteDistribution};
use crate::{Error, Result};

/// Largest selector enumeration attempted: `2^20` selectors.
pub const SELECTOR_CAP_LOG2: usize = 20;

/// Channels with more nonzero entries than this are re-evaluated from the
/// kernel on every pass instead of being held in memory.
const DENSE_ENTRY_BUDGET: usize = 1 << 22;

/// Work is split into at most this many contiguous chunks whose partial
/// results are combined in chunk order, so floating-point sums do not depend
/// on the number of worker threads.
const MAX_CHUNKS: u64 = 64;
const SEQUENTIAL_BELOW: u64 = 256;

pub(crate) fn chunk_ranges(total: u64) -> Vec<Range<u64>> {
    if total <= SEQUENTIAL_BELOW {
        return vec![0..total];
    }
    let size = total.div_ceil(MAX_CHUNKS);
    (0..total.div_ceil(size)).map(|c| c * size..((c + 1) * size).min(total)).collect()
}

/// Applies `f` to each chunk of `0..total`, in parallel when worthwhile,
/// returning the per-chunk results in chunk order.
pub(crate) fn map_chunks<R, F>(total: u64, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(Range<u64>) -> Result<R> + Sync + Send,
{
    let ranges = chunk_ranges(total);
    if ranges.len() == 1 {
        return Ok(vec![f(ranges[0].clone())?]);
    }
    ranges.into_par_iter().map(f).collect()
}

pub(crate) fn check_selector_cap(n: usize) -> Result<u64> {
    if n > SELECTOR_CAP_LOG2 {
        return Err(Error::TooLargeForExact {
            what: "selector enumeration",
            size: 2f64.powi(n as i32),
            cap: 2f64.powi(SELECTOR_CAP_LOG2 as i32),
        });
    }
    Ok(1u64 << n)
}

/// Sparse rows over output indices `0..outputs`.
enum Rows<'a, Z, K: AlgorithmKernel<Z>> {
    Dense(Vec<Vec<(u32, f64)>>),
    Streamed { z: &'a Supersample<Z>, kernel: &'a K, labels: Vec<K::Output> },
}

/// The selector channel of a kernel on a fixed supersample.
pub(crate) struct SelectorChannel<'a, Z, K: AlgorithmKernel<Z>> {
    count: u64,
    outputs: usize,
    rows: Rows<'a, Z, K>,
}

fn index_row<O: Ord + Clone>(labels: &[O], law: &FiniteDistribution<O>) -> Vec<(u32, f64)> {
    law.iter()
        .filter(|(_, m)| *m > 0.0)
        .map(|(l, m)| (labels.binary_search(l).expect("label collected in first pass") as u32, m))
        .collect()
}

impl<'a, Z, K> SelectorChannel<'a, Z, K>
where
    Z: Clone + Sync,
    K: AlgorithmKernel<Z>,
{
    pub(crate) fn new(z: &'a Supersample<Z>, kernel: &'a K) -> Result<Self> {
        let count = check_selector_cap(z.n())?;
        let parts = map_chunks(count, |range| {
            let mut labels = BTreeSet::new();
            let mut entries = 0usize;
            for s in range {
                let law = kernel.evaluate(&z.select_index(s))?;
                for l in law.support() {
                    entries += 1;
                    labels.insert(l.clone());
                }
            }
            Ok((labels, entries))
        })?;
        let mut labels = BTreeSet::new();
        let mut entries = 0;
        for (l, e) in parts {
            labels.extend(l);
            entries += e;
        }
        let labels: Vec<K::Output> = labels.into_iter().collect();
        let outputs = labels.len();
        let rows = if entries <= DENSE_ENTRY_BUDGET {
            let parts = map_chunks(count, |range| {
                range
                    .map(|s| Ok(index_row(&labels, &kernel.evaluate(&z.select_index(s))?)))
                    .collect::<Result<Vec<_>>>()
            })?;
            Rows::Dense(parts.into_iter().flatten().collect())
        } else {
            Rows::Streamed { z, kernel, labels }
        };
        Ok(SelectorChannel { count, outputs, rows })
    }

    fn for_rows<R, F>(&self, f: F) -> Result<Vec<R>>
    where
        R: Send,
        F: Fn(u64, &[(u32, f64)], &mut R) + Sync,
        R: Default,
    {
        map_chunks(self.count, |range| {
            let mut acc = R::default();
            for s in range {
                match &self.rows {
                    Rows::Dense(rows) => f(s, &rows[s as usize], &mut acc),
                    Rows::Streamed { z, kernel, labels } => {
                        let row = index_row(labels, &kernel.evaluate(&z.select_index(s))?);
                        f(s, &row, &mut acc)
                    }
                }
            }
            Ok(acc)
        })
    }

    /// Output law `q = Σ_s p_s W_s`.
    fn output_law(&self, input: &[f64]) -> Result<Vec<f64>> {
        let outputs = self.outputs;
        let parts: Vec<Vec<f64>> = self.for_rows(|s, row, acc: &mut Vec<f64>| {
            if acc.is_empty() {
                acc.resize(outputs, 0.0);
            }
            let p = input[s as usize];
            for &(w, m) in row {
                acc[w as usize] += p * m;
            }
        })?;
        let mut q = vec![0.0; outputs];
        for part in parts.iter().filter(|p| !p.is_empty()) {
            q.iter_mut().zip(part).for_each(|(a, b)| *a += b);
        }
        Ok(q)
    }

    /// `D(W_s ‖ q)` for every selector, in selector order.
    fn divergences(&self, q: &[f64]) -> Result<Vec<f64>> {
        let parts: Vec<Vec<f64>> = self.for_rows(|_, row, acc: &mut Vec<f64>| {
            acc.push(row.iter().map(|&(w, m)| xlogxy(m, q[w as usize])).sum());
        })?;
        Ok(parts.into_iter().flatten().collect())
    }

    /// `I(A(z̃_S); S)` for `S` uniform.
    pub(crate) fn uniform_mutual_information(&self) -> Result<f64> {
        let uniform = vec![1.0 / self.count as f64; self.count as usize];
        self.mutual_information(&uniform)
    }

    /// `I(A(z̃_S); S)` for `S` with law `input` over selector indices.
    pub(crate) fn mutual_information(&self, input: &[f64]) -> Result<f64> {
        Error::check_len(self.count as usize, input.len())?;
        let q = self.output_law(input)?;
        let d = self.divergences(&q)?;
        Ok(input.iter().zip(&d).filter(|(p, _)| **p > 0.0).map(|(p, d)| p * d).sum::<f64>().max(0.0))
    }

    /// Runs Blahut–Arimoto until the bracket is narrower than `opts.tol` or
    /// the iteration budget is spent; `converged` tells which.
    pub(crate) fn capacity(&self, opts: CapacityOptions) -> Result<Capacity> {
        let count = self.count as usize;
        let mut p = vec![1.0 / count as f64; count];
        let mut history = Vec::new();
        for iteration in 1..=opts.max_iters.max(1) {
            let q = self.output_law(&p)?;
            let d = self.divergences(&q)?;
            let lower = p.iter().zip(&d).filter(|(p, _)| **p > 0.0).map(|(p, d)| p * d).sum::<f64>().max(0.0);
            let upper = d.iter().copied().fold(0.0, f64::max);
            history.push(lower);
            let converged = upper - lower <= opts.tol;
            if converged || iteration >= opts.max_iters {
                return Ok(Capacity {
                    value: lower,
                    lower,
                    upper,
                    iterations: iteration,
                    converged,
                    lower_history: history,
                    input_law: p,
                });
            }
            let weights: Vec<f64> = p.iter().zip(&d).map(|(p, d)| p * (d - upper).exp()).collect();
            let total: f64 = weights.iter().sum();
            p = weights.into_iter().map(|w| w / total).collect();
        }
        unreachable!("the loop returns on its last iteration")
    }
}

/// Stopping rule for Blahut–Arimoto.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapacityOptions {
    /// Stop once the capacity bracket is narrower than this.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        CapacityOptions { tol: crate::info::ITERATIVE_TOL, max_iters: 100_000 }
    }
}

/// Result of a Blahut–Arimoto run.
///
/// The true capacity lies in `[lower, upper]` whether or not the run
/// converged; `value` is the achieved lower end. `lower_history` holds the mutual information of every iterate and is
/// nondecreasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Capacity {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
    /// Whether the bracket closed to the requested tolerance.
    pub converged: bool,
    pub lower_history: Vec<f64>,
    /// Final selector law, indexed like [`crate::kernel::Selector::from_index`].
    pub input_law: Vec<f64>,
}
