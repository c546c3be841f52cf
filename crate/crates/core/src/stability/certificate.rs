use std::fmt;

use serde::{Deserialize, Serialize};

use crate::info::Nats;
use crate::{Error, Result};

/// Flip probability and privacy level of randomized response, tied by
/// `ε = ln((1 − p) / p)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpParams {
    pub epsilon: f64,
    pub flip_prob: f64,
}

impl DpParams {
    pub fn from_flip_prob(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 0.5) {
            return Err(Error::invalid(format!("flip probability {p} is not in (0, 0.5]")));
        }
        Ok(DpParams { epsilon: ((1.0 - p) / p).ln(), flip_prob: p })
    }

    pub fn from_epsilon(epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid(format!("epsilon {epsilon} is not a finite nonnegative number")));
        }
        Ok(DpParams { epsilon, flip_prob: 1.0 / (1.0 + epsilon.exp()) })
    }
}

/// Total-variation stability level `δ ∈ [0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvParams {
    pub delta: f64,
}

impl TvParams {
    pub fn new(delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::invalid(format!("delta {delta} is not in [0, 1]")));
        }
        Ok(TvParams { delta })
    }
}

/// Stability notions with a known CMI consequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Notion {
    /// Pure differential privacy.
    #[serde(rename = "DP")]
    Dp,
    /// KL stability.
    #[serde(rename = "KL")]
    Kl,
    /// Average leave-one-out KL stability.
    #[serde(rename = "ALKL")]
    Alkl,
    /// Mutual-information stability.
    #[serde(rename = "MI")]
    Mi,
    /// Total-variation stability.
    #[serde(rename = "TV")]
    Tv,
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Notion::Dp => "DP",
            Notion::Kl => "KL",
            Notion::Alkl => "ALKL",
            Notion::Mi => "MI",
            Notion::Tv => "TV",
        })
    }
}

/// A stability guarantee for an algorithm on `n` points, with the CMI bound
/// it implies: `ε²n/2` for `ε`-DP, `εn` for the KL-type notions and `δn` for
/// `δ`-TV stability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityCertificate {
    pub notion: Notion,
    pub parameter: f64,
    #[serde(rename = "implied_cmi_bound_nats")]
    pub implied_cmi_bound: Nats,
}

impl StabilityCertificate {
    pub fn new(notion: Notion, parameter: f64, n: usize) -> Result<Self> {
        if !(parameter >= 0.0 && parameter.is_finite()) {
            return Err(Error::invalid(format!("stability parameter {parameter} is not finite and nonnegative")));
        }
        if notion == Notion::Tv && parameter > 1.0 {
            return Err(Error::invalid(format!("TV parameter {parameter} exceeds 1")));
        }
        let n = n as f64;
        let bound = match notion {
            Notion::Dp => parameter * parameter * n / 2.0,
            Notion::Kl | Notion::Alkl | Notion::Mi | Notion::Tv => parameter * n,
        };
        Ok(StabilityCertificate { notion, parameter, implied_cmi_bound: Nats(bound) })
    }

    /// The universal-CMI bound `εn` of an `ε`-DP certificate.
    pub fn ucmi_bound(&self, n: usize) -> Result<Nats> {
        match self.notion {
            Notion::Dp => Ok(Nats(self.parameter * n as f64)),
            other => Err(Error::MissingCertificate(format!("a DP certificate is needed, found {other}"))),
        }
    }
}

/// Kernels that come with a stability certificate.
pub trait Certified {
    fn certificate(&self) -> StabilityCertificate;
}
