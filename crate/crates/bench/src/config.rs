//! Experiment configuration (JSON).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ecf_robust::simulation::{AdversarySpec, DistributionSpec};
use ecf_robust::{InnerSolverConfig64, Norm, OuterSolverConfig64};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorId {
    Ecf,
    EcfRefined,
    EcfOblivious,
    Mean,
    Catoni,
    Mom,
    Gmom,
    Trimmed,
}

impl EstimatorId {
    pub const ALL: [EstimatorId; 8] = [
        EstimatorId::Ecf,
        EstimatorId::EcfRefined,
        EstimatorId::EcfOblivious,
        EstimatorId::Mean,
        EstimatorId::Catoni,
        EstimatorId::Mom,
        EstimatorId::Gmom,
        EstimatorId::Trimmed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorId::Ecf => "ecf",
            EstimatorId::EcfRefined => "ecf_refined",
            EstimatorId::EcfOblivious => "ecf_oblivious",
            EstimatorId::Mean => "mean",
            EstimatorId::Catoni => "catoni",
            EstimatorId::Mom => "mom",
            EstimatorId::Gmom => "gmom",
            EstimatorId::Trimmed => "trimmed",
        }
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        EstimatorId::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| format!("unknown estimator `{s}`"))
    }
}

/// How the accuracy level `ε` behind each radius is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusMode {
    /// Ground-truth covariance and mean, Monte Carlo `C_n`.
    #[default]
    Oracle,
    /// Per-trial plug-ins: sample covariance, coordinate median, sample `C_n`.
    Plugin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub distribution: DistributionSpec,
    #[serde(default)]
    pub adversary: Option<AdversarySpec>,
    pub n_grid: Vec<usize>,
    #[serde(default = "one")]
    pub d: usize,
    pub delta: f64,
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    pub estimators: Vec<EstimatorId>,
    #[serde(default)]
    pub norm: Norm,
    #[serde(default)]
    pub radius_mode: RadiusMode,
    /// Independent sample sets drawn to estimate `C_n` in oracle mode.
    #[serde(default = "default_cn_draws")]
    pub cn_draws: usize,
    /// Blocks for `mom`/`gmom`; defaults to `⌈8 log(1/δ)⌉` clamped to `[1, n]`.
    #[serde(default)]
    pub blocks: Option<usize>,
    #[serde(default)]
    pub inner: InnerSolverConfig64,
    #[serde(default)]
    pub outer: OuterSolverConfig64,
}

fn one() -> usize {
    1
}

fn default_cn_draws() -> usize {
    200
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| BenchError::config("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |p: &str, m: String| BenchError::config(p, m);
        if self.d == 0 {
            return Err(err("d", "must be positive".into()));
        }
        self.distribution
            .validate(self.d)
            .map_err(|e| err("distribution", e.to_string()))?;
        if let Some(adv) = &self.adversary {
            adv.validate().map_err(|e| err("adversary", e.to_string()))?;
        }
        if self.n_grid.is_empty() {
            return Err(err("n_grid", "must be non-empty".into()));
        }
        if self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(err("n_grid", "must be positive and strictly ascending".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(err("delta", format!("must lie in (0, 1), got {}", self.delta)));
        }
        if self.trials == 0 {
            return Err(err("trials", "must be at least 1".into()));
        }
        if self.estimators.is_empty() {
            return Err(err("estimators", "must name at least one estimator".into()));
        }
        if self.cn_draws == 0 {
            return Err(err("cn_draws", "must be positive".into()));
        }
        if self.blocks == Some(0) {
            return Err(err("blocks", "must be positive".into()));
        }
        let min_refine = 30.0 * (1.0 / self.delta).ln();
        if self.estimators.contains(&EstimatorId::EcfRefined) && (self.n_grid[0] as f64) < min_refine {
            return Err(err(
                "n_grid",
                format!("ecf_refined needs n ≥ 30·log(1/δ) = {min_refine:.1}, got {}", self.n_grid[0]),
            ));
        }
        self.inner.validate().map_err(|e| err("inner", e.to_string()))?;
        self.outer.validate(self.d).map_err(|e| err("outer", e.to_string()))?;
        Ok(())
    }

    pub fn eta(&self) -> f64 {
        self.adversary.as_ref().map_or(0.0, |a| a.eta)
    }

    pub fn blocks_for(&self, n: usize) -> usize {
        self.blocks
            .unwrap_or_else(|| (8.0 * (1.0 / self.delta).ln()).ceil() as usize)
            .clamp(1, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "distribution": {"family": "student_t", "df": 3.0},
        "n_grid": [100, 200],
        "delta": 0.1,
        "trials": 3,
        "estimators": ["ecf", "mean", "gmom"]
    }"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.d, 1);
        assert_eq!(cfg.radius_mode, RadiusMode::Oracle);
        assert_eq!(cfg.norm, Norm::L2);
        assert_eq!(cfg.blocks_for(100), 19);
        assert_eq!(cfg.blocks_for(5), 5);
        assert_eq!(cfg.eta(), 0.0);
    }

    #[test]
    fn validation_names_the_field() {
        let bad = MINIMAL.replace("[100, 200]", "[200, 100]");
        let e = ExperimentConfig::from_json(&bad).unwrap_err();
        assert!(e.to_string().starts_with("n_grid:"), "{e}");
        let bad = MINIMAL.replace("\"df\": 3.0", "\"df\": 1.5");
        assert!(ExperimentConfig::from_json(&bad).unwrap_err().to_string().starts_with("distribution:"));
        let bad = MINIMAL.replace("\"trials\": 3", "\"trials\": 0");
        assert!(ExperimentConfig::from_json(&bad).unwrap_err().to_string().starts_with("trials:"));
        let bad = MINIMAL.replace("\"mean\"", "\"median\"");
        assert_eq!(ExperimentConfig::from_json(&bad).unwrap_err().exit_code(), 1);
        let bad = MINIMAL.replace("[100, 200]", "[50, 200]").replace("\"gmom\"", "\"ecf_refined\"");
        assert!(ExperimentConfig::from_json(&bad).unwrap_err().to_string().starts_with("n_grid:"));
    }

    #[test]
    fn estimator_names_round_trip() {
        for e in EstimatorId::ALL {
            assert_eq!(e.as_str().parse::<EstimatorId>().unwrap(), e);
            assert_eq!(serde_json::to_string(&e).unwrap(), format!("\"{e}\""));
        }
    }
}
