use std::fmt;

use rand::{Rng as _, SeedableRng};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Classifier, Example};
use crate::info::FiniteDistribution;
use crate::kernel::AlgorithmKernel;
use crate::mc::Rng;
use crate::{Error, Result};

/// A hypothesis on the finite domain `{0, …, m−1}`, stored as its labelling
/// `h(0) h(1) … h(m−1)`.
///
/// The order is lexicographic on that bitstring, which is the well-order
/// used to break ties between empirical risk minimizers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FiniteHypothesis {
    labels: Vec<bool>,
}

impl FiniteHypothesis {
    pub fn new(labels: Vec<bool>) -> Self {
        FiniteHypothesis { labels }
    }

    pub fn from_bitstring(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Decode(format!("`{s}` is not a bitstring"))),
            })
            .collect::<Result<Vec<bool>>>()
            .map(FiniteHypothesis::new)
    }

    pub fn to_bitstring(&self) -> String {
        self.labels.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }
}

impl Classifier<usize> for FiniteHypothesis {
    /// Points outside the domain are labelled 0.
    fn predict(&self, x: &usize) -> bool {
        self.labels.get(*x).copied().unwrap_or(false)
    }
}

impl fmt::Display for FiniteHypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bitstring())
    }
}

impl Serialize for FiniteHypothesis {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_bitstring())
    }
}

impl<'de> Deserialize<'de> for FiniteHypothesis {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        FiniteHypothesis::from_bitstring(&String::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// A nonempty finite class of hypotheses on `{0, …, m−1}`, kept sorted and
/// free of duplicates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawClass")]
pub struct HypothesisClass {
    domain: usize,
    members: Vec<FiniteHypothesis>,
}

#[derive(Deserialize)]
struct RawClass {
    domain: usize,
    members: Vec<FiniteHypothesis>,
}

impl TryFrom<RawClass> for HypothesisClass {
    type Error = Error;
    fn try_from(raw: RawClass) -> Result<Self> {
        HypothesisClass::new(raw.domain, raw.members)
    }
}

impl HypothesisClass {
    pub fn new(domain: usize, mut members: Vec<FiniteHypothesis>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::invalid("hypothesis class is empty"));
        }
        for h in &members {
            Error::check_len(domain, h.labels.len())?;
        }
        members.sort();
        members.dedup();
        Ok(HypothesisClass { domain, members })
    }

    /// Thresholds `x ↦ [x ≥ t]` for `t = 0, …, m` (VC dimension 1).
    pub fn thresholds(domain: usize) -> Self {
        let members = (0..=domain).map(|t| FiniteHypothesis::new((0..domain).map(|x| x >= t).collect())).collect();
        Self::new(domain, members).expect("nonempty")
    }

    /// Indicators of intervals `[a, b]`, plus the empty set (VC dimension 2).
    pub fn intervals(domain: usize) -> Self {
        let mut members = vec![FiniteHypothesis::new(vec![false; domain])];
        for a in 0..domain {
            for b in a..domain {
                members.push(FiniteHypothesis::new((0..domain).map(|x| a <= x && x <= b).collect()));
            }
        }
        Self::new(domain, members).expect("nonempty")
    }

    /// `size` independent uniformly random labellings (duplicates merged).
    pub fn random(domain: usize, size: usize, seed: u64) -> Result<Self> {
        let mut rng = Rng::seed_from_u64(seed);
        let members = (0..size).map(|_| FiniteHypothesis::new((0..domain).map(|_| rng.random()).collect())).collect();
        Self::new(domain, members)
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    /// Members in well-order.
    pub fn members(&self) -> &[FiniteHypothesis] {
        &self.members
    }

    /// Number of distinct labellings the class induces on `points`.
    pub fn labelling_count(&self, points: &[usize]) -> usize {
        let mut seen: Vec<Vec<bool>> = self.members.iter().map(|h| points.iter().map(|x| h.predict(x)).collect()).collect();
        seen.sort();
        seen.dedup();
        seen.len()
    }

    pub fn shatters(&self, points: &[usize]) -> bool {
        points.len() < usize::BITS as usize && self.labelling_count(points) == 1usize << points.len()
    }

    /// VC dimension by brute force over subsets of increasing size. Shattering
    /// is inherited by subsets, so the search stops at the first size with no
    /// shattered subset.
    pub fn vc_dimension(&self) -> usize {
        let mut d = 0;
        for k in 1..=self.domain {
            if !subsets(self.domain, k).any(|s| self.shatters(&s)) {
                break;
            }
            d = k;
        }
        d
    }
}

/// All `k`-subsets of `{0, …, m−1}` in lexicographic order.
pub fn subsets(m: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut next = (k <= m).then(|| (0..k).collect::<Vec<usize>>());
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut c = current.clone();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if c[i] < m - k + i {
                c[i] += 1;
                for j in i + 1..k {
                    c[j] = c[j - 1] + 1;
                }
                next = Some(c);
                break;
            }
        }
        Some(current)
    })
}

/// `Σ_{k ≤ d} C(m, k)`, the most labellings a VC-dimension-`d` class can
/// induce on `m` points.
pub fn sauer_shelah_bound(m: usize, d: usize) -> u128 {
    let mut total = 0u128;
    let mut c = 1u128;
    for k in 0..=d.min(m) {
        total += c;
        c = c * (m - k) as u128 / (k + 1) as u128;
    }
    total
}

/// The member with the fewest errors on `data`, ties going to the least in
/// the class order.
///
/// This rule is globally consistent: relabelling any superset of the data
/// by the returned hypothesis and re-running returns it again.
pub fn consistent_erm<'a>(class: &'a HypothesisClass, data: &[Example<usize>]) -> &'a FiniteHypothesis {
    class.members.iter().min_by_key(|h| h.errors(data)).expect("class is nonempty")
}

/// [`consistent_erm`] as a kernel.
#[derive(Clone, Debug)]
pub struct ConsistentErm {
    pub class: HypothesisClass,
}

impl AlgorithmKernel<Example<usize>> for ConsistentErm {
    type Output = FiniteHypothesis;
    fn evaluate(&self, data: &[Example<usize>]) -> Result<FiniteDistribution<FiniteHypothesis>> {
        Ok(FiniteDistribution::point(consistent_erm(&self.class, data).clone()))
    }
}

/// The consistent-ERM CMI bound `d·log n + 2`.
pub fn erm_cmi_bound(vc_dimension: usize, n: usize) -> f64 {
    vc_dimension as f64 * (n as f64).ln() + 2.0
}
