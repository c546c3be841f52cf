use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Classifier, Example};
use crate::info::{entropy, FiniteDistribution, Nats};
use crate::kernel::{AlgorithmKernel, Supersample};
use crate::{Error, Result};

/// The threshold function `f_t(x) = 1 iff x ≥ t`, or the constant-zero
/// function `f_∞`.
///
/// Hypotheses carry the decimal string they were written with. Two
/// hypotheses with the same `t` but different strings are distinct outputs;
/// the order compares `t` first (`f_∞` last) and then the string.
#[derive(Clone, Debug)]
pub struct ThresholdHypothesis {
    t: Option<f64>,
    repr: String,
}

impl ThresholdHypothesis {
    pub fn at(t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::invalid(format!("threshold {t} is not finite; use ThresholdHypothesis::infinite")));
        }
        let t = t + 0.0;
        Ok(ThresholdHypothesis { t: Some(t), repr: t.to_string() })
    }

    pub fn infinite() -> Self {
        ThresholdHypothesis { t: None, repr: "inf".into() }
    }

    /// Parses `"inf"` or a plain decimal such as `-12.0450`.
    pub fn from_decimal(s: &str) -> Result<Self> {
        if s == "inf" {
            return Ok(Self::infinite());
        }
        let digits = s.strip_prefix('-').unwrap_or(s);
        let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
        let plain = !int.is_empty()
            && int.bytes().all(|b| b.is_ascii_digit())
            && frac.bytes().all(|b| b.is_ascii_digit())
            && !(digits.contains('.') && frac.is_empty());
        if !plain {
            return Err(Error::Decode(format!("`{s}` is not a decimal threshold")));
        }
        let t: f64 = s.parse().map_err(|e| Error::Decode(format!("`{s}`: {e}")))?;
        if !t.is_finite() {
            return Err(Error::Decode(format!("`{s}` overflows")));
        }
        Ok(ThresholdHypothesis { t: Some(t + 0.0), repr: s.to_owned() })
    }

    pub fn threshold(&self) -> Option<f64> {
        self.t
    }

    pub fn as_decimal(&self) -> &str {
        &self.repr
    }
}

impl Classifier<f64> for ThresholdHypothesis {
    fn predict(&self, x: &f64) -> bool {
        self.t.is_some_and(|t| *x >= t)
    }
}

impl fmt::Display for ThresholdHypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.repr)
    }
}

impl PartialEq for ThresholdHypothesis {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for ThresholdHypothesis {}

impl PartialOrd for ThresholdHypothesis {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ThresholdHypothesis {
    fn cmp(&self, other: &Self) -> Ordering {
        let by_t = match (self.t, other.t) {
            (Some(a), Some(b)) => a.total_cmp(&b),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        };
        by_t.then_with(|| self.repr.cmp(&other.repr))
    }
}

impl Serialize for ThresholdHypothesis {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.repr)
    }
}

impl<'de> Deserialize<'de> for ThresholdHypothesis {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        ThresholdHypothesis::from_decimal(&s).map_err(serde::de::Error::custom)
    }
}

/// Thresholds at the smallest positive example, or `f_∞` when there is none.
///
/// ```
/// use cmi_lab::learners::{threshold_learn, Example};
///
/// let z = [Example::negative(1.0), Example::positive(3.0), Example::positive(2.0)];
/// assert_eq!(threshold_learn(&z).threshold(), Some(2.0));
/// ```
pub fn threshold_learn(data: &[Example<f64>]) -> ThresholdHypothesis {
    data.iter()
        .filter(|e| e.y)
        .map(|e| e.x)
        .min_by(f64::total_cmp)
        .map_or_else(ThresholdHypothesis::infinite, |t| ThresholdHypothesis::at(t).expect("features are finite"))
}

/// [`threshold_learn`] as a kernel.
#[derive(Clone, Copy, Debug, Default)]
pub struct ThresholdLearner;

impl AlgorithmKernel<Example<f64>> for ThresholdLearner {
    type Output = ThresholdHypothesis;
    fn evaluate(&self, data: &[Example<f64>]) -> Result<FiniteDistribution<ThresholdHypothesis>> {
        if let Some(e) = data.iter().find(|e| !e.x.is_finite()) {
            return Err(Error::invalid(format!("feature {} is not finite", e.x)));
        }
        Ok(FiniteDistribution::point(threshold_learn(data)))
    }
}

/// Law of `threshold_learn(z̃_S)` for uniform `S`, in time linear in the
/// number of candidate thresholds times `n`.
///
/// With `G(v) = P(no selected positive lies below v)`, each row contributes
/// the fraction of its two entries that are not positives below `v`, and
/// `P(A = v_j) = G(v_j) − G(v_{j+1})` over the sorted positive values.
pub fn threshold_output_law(z: &Supersample<Example<f64>>) -> Result<FiniteDistribution<ThresholdHypothesis>> {
    let mut candidates: Vec<f64> = z.points().filter(|e| e.y).map(|e| e.x + 0.0).collect();
    if candidates.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("features must be finite"));
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let survive = |v: Option<f64>| -> f64 {
        z.rows()
            .iter()
            .map(|row| row.iter().filter(|e| !(e.y && v.is_none_or(|v| e.x < v))).count() as f64 / 2.0)
            .product()
    };
    let mut atoms = Vec::with_capacity(candidates.len() + 1);
    for (j, &v) in candidates.iter().enumerate() {
        let next = survive(candidates.get(j + 1).copied());
        atoms.push((ThresholdHypothesis::at(v)?, survive(Some(v)) - next));
    }
    atoms.push((ThresholdHypothesis::infinite(), survive(None)));
    atoms.retain(|(_, p)| *p > 0.0);
    FiniteDistribution::new(atoms)
}

/// Exact CMI of the threshold learner on a fixed supersample, which is the
/// entropy of [`threshold_output_law`] since the learner is deterministic.
pub fn threshold_cmi_fixed(z: &Supersample<Example<f64>>) -> Result<Nats> {
    Ok(entropy(&threshold_output_law(z)?))
}

/// Closed-form CMI `(2 − 2^{2−k})·log 2`, `k = m + 1`, of the threshold
/// learner on a supersample with `m` distinct positives, no two in one row.
pub fn uncoupled_threshold_cmi(positives: usize) -> Nats {
    let k = positives as i32 + 1;
    Nats((2.0 - 2f64.powi(2 - k)) * std::f64::consts::LN_2)
}
