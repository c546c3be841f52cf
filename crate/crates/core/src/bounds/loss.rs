use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::info::FiniteDistribution;
use crate::learners::{Classifier, Example, Feature};
use crate::{Error, Result};

type Eval<W, Z> = Arc<dyn Fn(&W, &Z) -> f64 + Send + Sync>;
type Pairwise<Z> = Arc<dyn Fn(&Z, &Z) -> f64 + Send + Sync>;
type Normalizer<W> = Arc<dyn Fn(&W) -> f64 + Send + Sync>;

/// Relative slack allowed when checking a loss against its declared
/// sensitivity.
const INVARIANT_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    /// Values in `[0, 1]`.
    Bounded01,
    /// `|ℓ(w,z1) − ℓ(w,z2)| ≤ Δ(z1,z2)`.
    DeltaBounded,
    /// A statistic of the whole dataset rather than an average.
    Nonlinear,
    /// `|ℓ(w,z1) − ℓ(w,z2)| ≤ Δ(z1,z2)·Ψ(w)`.
    Normalized,
}

/// A loss `ℓ(w, z)` with its declared sensitivity.
pub struct LossSpec<W, Z> {
    kind: LossKind,
    eval: Eval<W, Z>,
    delta: Option<Pairwise<Z>>,
    psi: Option<Normalizer<W>>,
    range: Option<(f64, f64)>,
}

impl<W, Z> Clone for LossSpec<W, Z> {
    fn clone(&self) -> Self {
        LossSpec {
            kind: self.kind,
            eval: self.eval.clone(),
            delta: self.delta.clone(),
            psi: self.psi.clone(),
            range: self.range,
        }
    }
}

impl<W, Z> fmt::Debug for LossSpec<W, Z> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LossSpec")
            .field("kind", &self.kind)
            .field("delta", &self.delta.is_some())
            .field("psi", &self.psi.is_some())
            .field("range", &self.range)
            .finish()
    }
}

impl<W, Z> LossSpec<W, Z> {
    pub fn new(kind: LossKind, eval: impl Fn(&W, &Z) -> f64 + Send + Sync + 'static) -> Self {
        let range = (kind == LossKind::Bounded01).then_some((0.0, 1.0));
        LossSpec { kind, eval: Arc::new(eval), delta: None, psi: None, range }
    }

    pub fn with_delta(mut self, delta: impl Fn(&Z, &Z) -> f64 + Send + Sync + 'static) -> Self {
        self.delta = Some(Arc::new(delta));
        self
    }

    pub fn with_psi(mut self, psi: impl Fn(&W) -> f64 + Send + Sync + 'static) -> Self {
        self.psi = Some(Arc::new(psi));
        self
    }

    pub fn with_range(mut self, lo: f64, hi: f64) -> Self {
        self.range = Some((lo, hi));
        self
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn range(&self) -> Option<(f64, f64)> {
        self.range
    }

    pub fn eval(&self, w: &W, z: &Z) -> f64 {
        (self.eval)(w, z)
    }

    /// Mean loss over a dataset; zero on empty data.
    pub fn mean(&self, w: &W, data: &[Z]) -> f64 {
        if data.is_empty() {
            return 0.0;
        }
        data.iter().map(|z| self.eval(w, z)).sum::<f64>() / data.len() as f64
    }

    /// Exact expected loss under a finite law.
    pub fn expectation(&self, w: &W, law: &FiniteDistribution<Z>) -> f64
    where
        Z: Ord + Clone,
    {
        law.expectation(|z| self.eval(w, z))
    }

    pub fn delta(&self, z1: &Z, z2: &Z) -> Option<f64> {
        self.delta.as_ref().map(|d| d(z1, z2))
    }

    pub fn has_psi(&self) -> bool {
        self.psi.is_some()
    }

    /// The normalizer `Ψ(w)`, or 1 when the loss has none.
    pub fn psi(&self, w: &W) -> f64 {
        self.psi.as_ref().map_or(1.0, |p| p(w))
    }

    /// Checks the invariants of the declared kind on sampled triples
    /// `(w, z1, z2)`, reporting the first violation.
    pub fn check_triples<'a>(&self, triples: impl IntoIterator<Item = (&'a W, &'a Z, &'a Z)>) -> Result<usize>
    where
        W: 'a,
        Z: 'a,
    {
        let mut checked = 0;
        for (w, z1, z2) in triples {
            let (a, b) = (self.eval(w, z1), self.eval(w, z2));
            if let Some((lo, hi)) = self.range {
                if let Some(v) = [a, b].into_iter().find(|v| !(lo..=hi).contains(v)) {
                    return Err(Error::invalid(format!("loss value {v} outside declared range [{lo}, {hi}]")));
                }
            }
            let cap = match self.kind {
                LossKind::DeltaBounded => self.delta(z1, z2),
                LossKind::Normalized => self.delta(z1, z2).map(|d| d * self.psi(w)),
                LossKind::Bounded01 | LossKind::Nonlinear => None,
            };
            if matches!(self.kind, LossKind::DeltaBounded | LossKind::Normalized) && cap.is_none() {
                return Err(Error::invalid(format!("{:?} loss has no sensitivity function", self.kind)));
            }
            if let Some(cap) = cap {
                let diff = (a - b).abs();
                if diff > cap * (1.0 + INVARIANT_SLACK) + INVARIANT_SLACK {
                    return Err(Error::invalid(format!("loss difference {diff} exceeds declared sensitivity {cap}")));
                }
            }
            checked += 1;
        }
        Ok(checked)
    }
}

/// The 0-1 loss of a classifier on labelled examples.
pub fn zero_one_loss<H, X>() -> LossSpec<H, Example<X>>
where
    H: Classifier<X>,
    X: Feature,
{
    LossSpec::new(LossKind::Bounded01, |h: &H, e: &Example<X>| f64::from(u8::from(h.predict(&e.x) != e.y)))
        .with_delta(|_, _| 1.0)
}

/// Weights `w` of a linear predictor `x ↦ ⟨w, x⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel(pub Vec<f64>);

impl LinearModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(w, x)| w * x).sum()
    }
}

/// A real feature vector with a real label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealExample {
    pub x: Vec<f64>,
    pub y: f64,
}

impl RealExample {
    pub fn new(x: Vec<f64>, y: f64) -> Self {
        RealExample { x, y }
    }
}

/// `‖v‖_p` for `p ∈ [1, ∞]`.
pub fn lp_norm(v: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    } else if p == 1.0 {
        v.iter().map(|x| x.abs()).sum()
    } else if p == 2.0 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    } else {
        v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetKind {
    /// `ℓ(w,(x,y)) = (⟨w,x⟩ − y)²`.
    Squared,
    /// `ℓ(w,(x,y)) = max(0, 1 − y⟨w,x⟩)` with `y ∈ {±1}`.
    Hinge,
}

impl std::str::FromStr for PresetKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" => Ok(PresetKind::Squared),
            "hinge" => Ok(PresetKind::Hinge),
            _ => Err(Error::UnknownId { kind: "delta preset", id: s.to_string() }),
        }
    }
}

/// Sensitivity presets for linear predictors over the parameter ball
/// `‖w‖_q ≤ c`, with `‖·‖_p` the dual norm on features.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaPreset {
    pub kind: PresetKind,
    pub p: f64,
    pub q: f64,
    pub c: f64,
}

impl DeltaPreset {
    /// Validates that `1/p + 1/q = 1` (with `1/∞ = 0`) and `c ≥ 0`.
    pub fn new(kind: PresetKind, p: f64, q: f64, c: f64) -> Result<Self> {
        let inv = |e: f64| if e.is_infinite() { 0.0 } else { 1.0 / e };
        if !(p >= 1.0 && q >= 1.0) || (inv(p) + inv(q) - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("({p}, {q}) is not a dual exponent pair")));
        }
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::invalid(format!("radius c must be finite and nonnegative, got {c}")));
        }
        Ok(DeltaPreset { kind, p, q, c })
    }

    /// Whether `w` lies in the parameter ball the preset assumes.
    pub fn admits(&self, w: &LinearModel) -> bool {
        lp_norm(&w.0, self.q) <= self.c * (1.0 + INVARIANT_SLACK)
    }

    pub fn loss_value(&self, w: &LinearModel, z: &RealExample) -> f64 {
        match self.kind {
            PresetKind::Squared => (w.predict(&z.x) - z.y).powi(2),
            PresetKind::Hinge => (1.0 - z.y * w.predict(&z.x)).max(0.0),
        }
    }

    /// `Δ(z1, z2)²`.
    pub fn delta_sq(&self, z1: &RealExample, z2: &RealExample) -> f64 {
        match self.kind {
            PresetKind::Squared => {
                let c4 = self.c.powi(4);
                16.0 * c4 * (lp_norm(&z1.x, self.p).powi(4) + lp_norm(&z2.x, self.p).powi(4))
                    + 16.0 * (z1.y.powi(4) + z2.y.powi(4))
            }
            PresetKind::Hinge => self.delta(z1, z2).powi(2),
        }
    }

    pub fn delta(&self, z1: &RealExample, z2: &RealExample) -> f64 {
        match self.kind {
            PresetKind::Squared => self.delta_sq(z1, z2).sqrt(),
            PresetKind::Hinge => {
                let diff: Vec<f64> = z1.x.iter().zip(&z2.x).map(|(a, b)| z1.y * a - z2.y * b).collect();
                self.c * lp_norm(&diff, self.p)
            }
        }
    }

    /// The loss with its pairwise sensitivity, valid on the ball `‖w‖_q ≤ c`.
    pub fn loss(self) -> LossSpec<LinearModel, RealExample> {
        LossSpec::new(LossKind::DeltaBounded, move |w, z| self.loss_value(w, z)).with_delta(move |a, b| self.delta(a, b))
    }

    /// The same loss split as `Δ(z1,z2)·Ψ(w)`, valid for every `w`.
    pub fn normalized_loss(self) -> LossSpec<LinearModel, RealExample> {
        let (p, q) = (self.p, self.q);
        let spec = LossSpec::new(LossKind::Normalized, move |w, z| self.loss_value(w, z));
        match self.kind {
            PresetKind::Squared => spec
                .with_delta(move |a: &RealExample, b: &RealExample| {
                    lp_norm(&a.x, p).powi(2) + lp_norm(&b.x, p).powi(2) + a.y * a.y + b.y * b.y
                })
                .with_psi(move |w: &LinearModel| 2.0 * (lp_norm(&w.0, q).powi(2) + 1.0)),
            PresetKind::Hinge => spec
                .with_delta(move |a: &RealExample, b: &RealExample| {
                    let diff: Vec<f64> = a.x.iter().zip(&b.x).map(|(u, v)| a.y * u - b.y * v).collect();
                    lp_norm(&diff, p)
                })
                .with_psi(move |w: &LinearModel| lp_norm(&w.0, q)),
        }
    }

    /// `E[Δ(Z1,Z2)²]` for independent draws from a finite law.
    pub fn expected_delta_sq(&self, law: &[(RealExample, f64)]) -> f64 {
        law.iter()
            .flat_map(|(a, pa)| law.iter().map(move |(b, pb)| pa * pb * self.delta_sq(a, b)))
            .sum()
    }
}

/// Looks a preset up by name.
pub fn delta_preset(name: &str, p: f64, q: f64, c: f64) -> Result<DeltaPreset> {
    DeltaPreset::new(name.parse()?, p, q, c)
}

/// AUROC of weighted (score, is_positive) items with ties counted half;
/// `None` when one class has no weight.
fn weighted_auroc(mut items: Vec<(f64, bool, f64)>) -> Option<f64> {
    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut below_neg, mut wins) = (0.0, 0.0);
    let (mut pos_total, mut neg_total) = (0.0, 0.0);
    for group in items.chunk_by(|a, b| a.0 == b.0) {
        let pos: f64 = group.iter().filter(|i| i.1).map(|i| i.2).sum();
        let neg: f64 = group.iter().filter(|i| !i.1).map(|i| i.2).sum();
        wins += pos * below_neg + 0.5 * pos * neg;
        below_neg += neg;
        pos_total += pos;
        neg_total += neg;
    }
    (pos_total > 0.0 && neg_total > 0.0).then(|| wins / (pos_total * neg_total))
}

fn check_scores(scores: &[f64]) -> Result<()> {
    match scores.iter().find(|s| s.is_nan()) {
        Some(_) => Err(Error::invalid("scores must not be NaN")),
        None => Ok(()),
    }
}

/// Fraction of (positive, negative) pairs ranked correctly, ties counting
/// half; 1/2 when either class is absent.
///
/// ```
/// use cmi_lab::bounds::empirical_auroc;
///
/// assert_eq!(empirical_auroc(&[0.9, 0.8, 0.1], &[true, true, false]).unwrap(), 1.0);
/// assert_eq!(empirical_auroc(&[0.5, 0.5], &[true, false]).unwrap(), 0.5);
/// assert_eq!(empirical_auroc(&[0.1, 0.7], &[true, true]).unwrap(), 0.5);
/// ```
pub fn empirical_auroc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    Error::check_len(scores.len(), labels.len())?;
    check_scores(scores)?;
    let items = scores.iter().zip(labels).map(|(&s, &y)| (s, y, 1.0)).collect();
    Ok(weighted_auroc(items).unwrap_or(0.5))
}

/// AUROC of `score` under a finite law of labelled examples.
pub fn population_auroc<X>(law: &FiniteDistribution<Example<X>>, score: impl Fn(&X) -> f64) -> Result<f64>
where
    X: Feature,
    Example<X>: Ord,
{
    let items: Vec<_> = law.iter().map(|(e, p)| (score(&e.x), e.y, p)).collect();
    check_scores(&items.iter().map(|i| i.0).collect::<Vec<_>>())?;
    weighted_auroc(items).ok_or_else(|| Error::invalid("population AUROC needs both classes to have positive mass"))
}
