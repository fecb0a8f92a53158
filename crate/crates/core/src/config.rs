//! Engine parameters.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum UnionMode {
    /// Pairs intersect with `⊎`, longer tuples with `∪`.
    #[default]
    AsWritten,
    /// `⊎` at every step.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Phase I candidate count.
    pub eta1: usize,
    /// Cluster candidate count.
    pub eta2: usize,
    /// Minimum normalized similarity for cluster candidates.
    pub tau1: f64,
    /// Minimum `cs/csq` of a cluster.
    pub tau2: f64,
    /// Minimum `csq/|F(first pruned)|` of a cluster.
    pub tau3: f64,
    pub top_k: usize,
    pub union_mode: UnionMode,
    pub placeholders: bool,
    /// 0 uses every available core.
    pub workers: usize,
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            eta1: 1000,
            eta2: 100,
            tau1: 0.65,
            tau2: 1.5,
            tau3: 0.9,
            top_k: 5,
            union_mode: UnionMode::AsWritten,
            placeholders: false,
            workers: 0,
            seed: 0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
    #[error("cannot parse configuration: {0}")]
    Syntax(String),
}

/// A partial configuration, as read from a config file or a request body.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub eta1: Option<usize>,
    pub eta2: Option<usize>,
    pub tau1: Option<f64>,
    pub tau2: Option<f64>,
    pub tau3: Option<f64>,
    #[serde(alias = "topk")]
    pub top_k: Option<usize>,
    pub union_mode: Option<UnionMode>,
    pub placeholders: Option<bool>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
}

impl ConfigOverrides {
    /// Parses the `key = value` config file format.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))
    }

    pub fn from_json(value: serde_json::Value) -> Result<Self, ConfigError> {
        serde_json::from_value(value).map_err(|e| ConfigError::Syntax(e.to_string()))
    }

    /// Values set in `other` replace those set here.
    pub fn merge(&mut self, other: &ConfigOverrides) {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(eta1, eta2, tau1, tau2, tau3, top_k, union_mode, placeholders, workers, seed);
    }

    pub fn apply(&self, base: &EngineConfig) -> Result<EngineConfig, ConfigError> {
        let mut c = base.clone();
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { c.$f = v; } )* };
        }
        set!(eta1, eta2, tau1, tau2, tau3, top_k, union_mode, placeholders, workers, seed);
        c.validate()?;
        Ok(c)
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key, message: &str| Err(ConfigError::Invalid { key, message: message.to_string() });
        if self.eta1 == 0 {
            return bad("eta1", "must be at least 1");
        }
        if self.eta2 == 0 || self.eta2 > self.eta1 {
            return bad("eta2", "must be in 1..=eta1");
        }
        if !(self.tau1 > 0.0 && self.tau1 <= 1.0) {
            return bad("tau1", "must be in (0, 1]");
        }
        if !(self.tau2 > 1.0 && self.tau2.is_finite()) {
            return bad("tau2", "must be greater than 1");
        }
        if !(self.tau3 > 0.0 && self.tau3 <= 1.0) {
            return bad("tau3", "must be in (0, 1]");
        }
        if self.top_k == 0 {
            return bad("top_k", "must be at least 1");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = EngineConfig::default();
        c.validate().unwrap();
        assert_eq!((c.eta1, c.eta2, c.top_k), (1000, 100, 5));
        assert_eq!((c.tau1, c.tau2, c.tau3), (0.65, 1.5, 0.9));
    }

    #[test]
    fn file_overrides_apply() {
        let o = ConfigOverrides::from_toml("eta1 = 50\neta2 = 10\ntau2 = 2.0\nunion_mode = \"uniform\"\n").unwrap();
        let c = o.apply(&EngineConfig::default()).unwrap();
        assert_eq!((c.eta1, c.eta2, c.tau2, c.union_mode), (50, 10, 2.0, UnionMode::Uniform));
    }

    #[test]
    fn unknown_keys_and_bad_values_rejected() {
        assert!(matches!(ConfigOverrides::from_toml("eta3 = 1"), Err(ConfigError::Syntax(_))));
        let o = ConfigOverrides { eta2: Some(2000), ..Default::default() };
        assert!(matches!(o.apply(&EngineConfig::default()), Err(ConfigError::Invalid { key: "eta2", .. })));
        let o = ConfigOverrides { tau2: Some(1.0), ..Default::default() };
        assert!(o.apply(&EngineConfig::default()).is_err());
        let o = ConfigOverrides { tau3: Some(0.0), ..Default::default() };
        assert!(o.apply(&EngineConfig::default()).is_err());
    }

    #[test]
    fn later_overrides_win() {
        let mut a = ConfigOverrides { eta1: Some(10), top_k: Some(3), ..Default::default() };
        a.merge(&ConfigOverrides { top_k: Some(1), ..Default::default() });
        assert_eq!((a.eta1, a.top_k), (Some(10), Some(1)));
    }
}
