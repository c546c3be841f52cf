use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Classifier, Example};
use crate::info::FiniteDistribution;
use crate::kernel::AlgorithmKernel;
use crate::{Error, Result};

/// Largest cube dimension handled by the packed GF(2) routines.
pub const MAX_PARITY_DIM: usize = 64;

/// The parity function `f_w(x) = ⟨w, x⟩ mod 2`.
///
/// Ordered lexicographically by the bitstring `w_1 w_2 … w_d`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParityHypothesis {
    w: Vec<bool>,
}

impl ParityHypothesis {
    pub fn new(w: Vec<bool>) -> Self {
        ParityHypothesis { w }
    }

    pub fn from_bitstring(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Decode(format!("`{s}` is not a bitstring"))),
            })
            .collect::<Result<Vec<bool>>>()
            .map(ParityHypothesis::new)
    }

    pub fn to_bitstring(&self) -> String {
        self.w.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn weights(&self) -> &[bool] {
        &self.w
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }
}

impl Classifier<Vec<bool>> for ParityHypothesis {
    fn predict(&self, x: &Vec<bool>) -> bool {
        self.w.iter().zip(x).filter(|(w, x)| **w && **x).count() % 2 == 1
    }
}

impl fmt::Display for ParityHypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bitstring())
    }
}

impl Serialize for ParityHypothesis {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_bitstring())
    }
}

impl<'de> Deserialize<'de> for ParityHypothesis {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        ParityHypothesis::from_bitstring(&String::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Packs `x_1 … x_d` with `x_1` in the most significant position, so that
/// numeric order on packed words is lexicographic order on bitstrings.
fn pack(bits: &[bool]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | u64::from(b))
}

fn unpack(word: u64, d: usize) -> Vec<bool> {
    (0..d).map(|i| word >> (d - 1 - i) & 1 == 1).collect()
}

fn top_bit(word: u64) -> u64 {
    1 << (63 - word.leading_zeros())
}

/// A subspace of `GF(2)^d` held as a fully reduced echelon basis: each
/// vector's leading bit appears in no other vector.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
struct Span {
    basis: Vec<u64>,
}

impl Span {
    fn reduce(&self, mut v: u64) -> u64 {
        for &b in &self.basis {
            if v & top_bit(b) != 0 {
                v ^= b;
            }
        }
        v
    }

    /// Adds `v`, keeping the basis reduced and sorted by leading bit
    /// (descending). Returns false when `v` was already in the span.
    fn insert(&mut self, v: u64) -> bool {
        let v = self.reduce(v);
        if v == 0 {
            return false;
        }
        let lead = top_bit(v);
        for b in &mut self.basis {
            if *b & lead != 0 {
                *b ^= v;
            }
        }
        self.basis.push(v);
        self.basis.sort_unstable_by(|a, b| b.cmp(a));
        true
    }

    /// Least element of the coset `v + span`.
    fn coset_min(&self, v: u64) -> u64 {
        self.reduce(v)
    }
}

/// Solves `⟨w, x_i⟩ = y_i` over GF(2) and returns the lexicographically
/// least solution.
///
/// Rows are eliminated into reduced echelon form keyed on their leading
/// (most significant, i.e. first) coordinate. A particular solution sets
/// every non-pivot coordinate to zero; the nullspace is then put in
/// reduced echelon form and the particular solution is reduced against it,
/// which yields the least element of the solution coset.
///
/// ```
/// use cmi_lab::learners::{parity_learn, Example};
///
/// let z = [Example::positive(vec![true, false]), Example::negative(vec![false, true])];
/// assert_eq!(parity_learn(&z, 2).unwrap().to_bitstring(), "10");
/// ```
pub fn parity_learn(data: &[Example<Vec<bool>>], d: usize) -> Result<ParityHypothesis> {
    if d == 0 || d > MAX_PARITY_DIM {
        return Err(Error::invalid(format!("parity dimension {d} is outside 1..={MAX_PARITY_DIM}")));
    }
    // Each stored row is (coefficients, rhs) with a distinct leading bit.
    let mut rows: Vec<(u64, bool)> = Vec::new();
    for e in data {
        Error::check_len(d, e.x.len())?;
        let (mut a, mut b) = (pack(&e.x), e.y);
        for &(r, rb) in &rows {
            if a & top_bit(r) != 0 {
                a ^= r;
                b ^= rb;
            }
        }
        if a == 0 {
            if b {
                return Err(Error::NotRealizable);
            }
            continue;
        }
        let lead = top_bit(a);
        for (r, rb) in &mut rows {
            if *r & lead != 0 {
                *r ^= a;
                *rb ^= b;
            }
        }
        rows.push((a, b));
    }
    let pivots: u64 = rows.iter().map(|&(r, _)| top_bit(r)).fold(0, |acc, p| acc | p);
    let particular: u64 = rows.iter().filter(|(_, b)| *b).map(|&(r, _)| top_bit(r)).fold(0, |acc, p| acc | p);
    let mut null = Span::default();
    for f in (0..d).map(|i| 1u64 << i).filter(|f| pivots & f == 0) {
        let v = rows.iter().filter(|(r, _)| r & f != 0).map(|&(r, _)| top_bit(r)).fold(f, |acc, p| acc | p);
        null.insert(v);
    }
    Ok(ParityHypothesis::new(unpack(null.coset_min(particular), d)))
}

/// [`parity_learn`] over `{0,1}^d` as a kernel; unrealizable data is an
/// error.
#[derive(Clone, Copy, Debug)]
pub struct ParityLearner {
    pub d: usize,
}

impl AlgorithmKernel<Example<Vec<bool>>> for ParityLearner {
    type Output = ParityHypothesis;
    fn evaluate(&self, data: &[Example<Vec<bool>>]) -> Result<FiniteDistribution<ParityHypothesis>> {
        Ok(FiniteDistribution::point(parity_learn(data, self.d)?))
    }
}

/// `P(parity_learn(Z) ≠ w*)` for `Z` of `n` points uniform on `{0,1}^d`
/// labelled by `w*`, computed exactly.
///
/// The learner's output depends on the data only through the span of the
/// features, so the probability is an expectation over the Markov chain of
/// spans generated by `n` uniform vectors.
pub fn parity_failure_probability(w_star: &ParityHypothesis, n: usize) -> Result<f64> {
    let d = w_star.dim();
    if d == 0 || d > 8 {
        return Err(Error::invalid(format!("exact failure probability needs 1 <= d <= 8, got {d}")));
    }
    let cube = 1u64 << d;
    let mut chain: BTreeMap<Span, f64> = BTreeMap::from([(Span::default(), 1.0)]);
    for _ in 0..n {
        let mut next: BTreeMap<Span, f64> = BTreeMap::new();
        for (span, p) in &chain {
            let stay = (1u64 << span.basis.len()) as f64 / cube as f64;
            *next.entry(span.clone()).or_insert(0.0) += p * stay;
            // Each vector outside the span leads to a larger span; vectors in
            // the same coset lead to the same one.
            let mut seen: Vec<Span> = Vec::new();
            for x in 0..cube {
                let mut grown = span.clone();
                if grown.insert(x) && !seen.contains(&grown) {
                    seen.push(grown);
                }
            }
            let each = p * stay;
            for grown in seen {
                *next.entry(grown).or_insert(0.0) += each;
            }
        }
        chain = next;
    }
    let mut fail = 0.0;
    for (span, p) in &chain {
        let data: Vec<Example<Vec<bool>>> = span
            .basis
            .iter()
            .map(|&x| {
                let x = unpack(x, d);
                let y = w_star.predict(&x);
                Example::new(x, y)
            })
            .collect();
        if parity_learn(&data, d)? != *w_star {
            fail += p;
        }
    }
    Ok(fail)
}

/// `p·(log(1/p) + 1 + log|W|)`, the CMI bound for a learner that returns one
/// fixed hypothesis except with probability `p`.
pub fn pseudodeterministic_bound(p: f64, log_outputs: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("failure probability {p} is not in [0, 1]")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    Ok(p * ((1.0 / p).ln() + 1.0 + log_outputs))
}

/// The parity CMI bound `2^{d−n}(n·log 2 + 1)` under uniform features.
pub fn parity_cmi_bound(d: usize, n: usize) -> f64 {
    2f64.powi(d as i32 - n as i32) * (n as f64 * std::f64::consts::LN_2 + 1.0)
}
