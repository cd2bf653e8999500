//! Run configuration loaded from TOML and overridden by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use interplay_core::estimator::SampleConfig;
use interplay_core::exact::ExactConfig;
use interplay_core::scorer::protocol::ScorerEndpoint;
use interplay_core::strength::AmrisParams;
use interplay_core::Error;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub sample: SampleConfig,
    pub exact: ExactConfig,
    pub amris: AmrisParams,
    pub search: SearchOptions,
    pub mask: MaskOptions,
    pub verify: VerifyOptions,
    pub scorer: Option<ScorerEndpoint>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sample: SampleConfig::default(),
            exact: ExactConfig::default(),
            amris: AmrisParams { a: 0.1, b: 0.3, c: 0.5 },
            search: SearchOptions::default(),
            mask: MaskOptions::default(),
            verify: VerifyOptions::default(),
            scorer: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchOptions {
    pub step: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { step: 0.05 }
    }
}

/// How masked games split their input into players.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaskOptions {
    pub rows: usize,
    pub cols: usize,
    /// Baseline file: JSON array, or raw little-endian f64 values.
    pub baseline: Option<PathBuf>,
}

impl Default for MaskOptions {
    fn default() -> Self {
        Self { rows: 2, cols: 2, baseline: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyOptions {
    /// Largest order checked by the reward-sum and cutout suites.
    pub max_order: usize,
    /// Rewards with `|T| <= threshold` are scaled by `factor` in the suppression suite.
    pub threshold: usize,
    pub factor: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { max_order: 6, threshold: 1, factor: 0.5 }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Self = toml::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.sample.validate()?;
        self.amris.validate()?;
        if self.mask.rows == 0 || self.mask.cols == 0 {
            return Err(Error::BadGrid("mask rows and cols must be positive".into()).into());
        }
        if !(0.0..1.0).contains(&self.verify.factor) {
            return Err(Error::InvalidFactor(self.verify.factor).into());
        }
        if let Some(s) = &self.scorer {
            if s.command.is_empty() {
                return Err(Error::InvalidConfig("scorer command is empty".into()).into());
            }
            if s.batch_limit == 0 {
                return Err(Error::InvalidConfig("scorer batch_limit must be at least 1".into()).into());
            }
        }
        Ok(())
    }
}
