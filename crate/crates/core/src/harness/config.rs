use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::bounds::TheoremId;
use crate::{Error, Result};

/// A registered component reference: an `id` plus component-specific
/// parameters given inline, e.g. `{"id": "grid", "points": 64, "cut": 32}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub id: String,
    #[serde(flatten)]
    pub params: Map<String, Value>,
}

impl Component {
    pub fn new(id: impl Into<String>) -> Self {
        Component { id: id.into(), params: Map::new() }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.into(), value.into());
        self
    }

    /// Parses the parameters into the typed form of `kind` `id`.
    pub(crate) fn parse<T: DeserializeOwned>(&self, kind: &str) -> Result<T> {
        serde_json::from_value(Value::Object(self.params.clone()))
            .map_err(|e| Error::invalid(format!("{kind} `{}`: {e}", self.id)))
    }
}

/// How the CMI of an experiment is obtained. Exact mode never falls back to
/// Monte Carlo; an infeasible exact request is an error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CmiConfig {
    /// Exact sum over every supersample in the support of the data law.
    Exact,
    /// Monte Carlo over `trials` supersample draws with an exact inner value.
    Mc { trials: usize },
    /// Both; the exact value is the one plugged into the bounds.
    Both { trials: usize },
    /// The learner's proven distribution-free cap.
    Cap,
}

/// A theorem to check on an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoremRequest {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Loss scale, or `E[Δ²]` for the forms that take it; defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    /// Replaces the computed right-hand side.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs_override: Option<f64>,
}

impl TheoremRequest {
    pub fn new(id: impl Into<String>) -> Self {
        TheoremRequest { id: id.into(), epsilon: None, scale: None, rhs_override: None }
    }

    pub fn theorem(&self) -> Result<TheoremId> {
        self.id.parse()
    }
}

/// One learner/distribution/loss experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub learner: Component,
    pub distribution: Component,
    pub loss: Component,
    pub n: usize,
    /// Gap-estimation runs.
    pub trials: usize,
    pub cmi: CmiConfig,
    #[serde(default)]
    pub theorems: Vec<TheoremRequest>,
}

/// A whole suite: seeded experiments plus property checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    #[serde(default)]
    pub experiments: Vec<ExperimentConfig>,
    #[serde(default)]
    pub properties: Vec<Component>,
}

impl SuiteConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: SuiteConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        Self::from_json(&text)
    }

    /// Resolves every referenced id and parameter block without running
    /// anything.
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for e in &self.experiments {
            if !seen.insert(e.id.as_str()) {
                return Err(Error::invalid(format!("duplicate experiment id `{}`", e.id)));
            }
            super::experiment::Experiment::build(e)?;
        }
        for p in &self.properties {
            super::properties::Property::build(p)?;
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}
