//! JSON run configuration. Parsing is strict: unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use edge_placer_core::dataset::DatasetSpec;
use edge_placer_core::error::{Error, Result};
use edge_placer_core::learn::{Activation, FeatureScope, KernelKind};
use edge_placer_core::solver::SolveOptions;
use edge_placer_core::world::{ClusterSpec, GridConfig, ModelConstants, Rho, SpatialMode};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub grid: GridConfig,
    pub users: usize,
    pub servers: usize,
    pub scenarios: usize,
    pub constants: ConstantsConfig,
    pub mode: SpatialMode,
    pub cluster: ClusterSpec,
    pub records: usize,
    pub request_range: (u32, u32),
    pub seed: u64,
    pub train_ratio: f64,
    pub split_seed: u64,
    pub solver: SolveOptions,
    pub learn: LearnConfig,
    pub bench: BenchConfig,
    pub paths: PathsConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            grid: GridConfig::default(),
            users: 20,
            servers: 5,
            scenarios: 25,
            constants: ConstantsConfig::default(),
            mode: SpatialMode::Normal,
            cluster: ClusterSpec::default(),
            records: 1800,
            request_range: (1, 10),
            seed: 1,
            train_ratio: 0.8,
            split_seed: 7,
            solver: SolveOptions {
                time_limit: None,
                gap_tolerance: 0.01,
                // deterministic safety valve so generation never stalls
                node_limit: Some(500_000_000),
            },
            learn: LearnConfig::default(),
            bench: BenchConfig::default(),
            paths: PathsConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsConfig {
    pub sigma: f64,
    pub gamma: f64,
    pub rho: Rho<f64>,
    pub energy_budget: f64,
    pub capacity: f64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        ConstantsConfig {
            sigma: 396.0,
            gamma: 100.0,
            rho: Rho::Scalar(10.0),
            energy_budget: 396.0,
            capacity: 24.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LearnConfig {
    pub feature_scope: FeatureScope,
    pub cv_folds: usize,
    pub seed: u64,
    pub svm: SvmConfig,
    pub mlp: MlpGridConfig,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig {
            feature_scope: FeatureScope::FullInstance,
            cv_folds: 5,
            seed: 0,
            svm: SvmConfig::default(),
            mlp: MlpGridConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvmConfig {
    /// Grid-search envelope; the factorial design has its own fixed levels.
    pub kernels: Vec<KernelKind>,
    pub gammas: Vec<f64>,
    pub cs: Vec<f64>,
    pub poly_degree: u32,
    pub poly_coef0: f64,
    pub tol: f64,
    pub max_passes: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            kernels: vec![
                KernelKind::Linear,
                KernelKind::Poly,
                KernelKind::Rbf,
                KernelKind::Sigmoid,
            ],
            gammas: vec![0.0001, 0.1],
            cs: vec![1.0, 10.0, 100.0, 400.0, 800.0, 1000.0],
            poly_degree: 3,
            poly_coef0: 0.0,
            tol: 1e-3,
            max_passes: 100_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MlpGridConfig {
    pub hidden_layouts: Vec<Vec<usize>>,
    pub alphas: Vec<f64>,
    pub activation: Activation,
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub validation_fraction: f64,
    pub patience: usize,
}

impl Default for MlpGridConfig {
    fn default() -> Self {
        MlpGridConfig {
            hidden_layouts: vec![
                vec![256, 128, 64, 32, 16, 8, 6],
                vec![128, 64, 32, 16, 8, 4],
            ],
            alphas: vec![0.001, 0.00001],
            activation: Activation::Relu,
            learning_rate: 0.01,
            momentum: 0.9,
            batch_size: 32,
            max_epochs: 200,
            validation_fraction: 0.1,
            patience: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    /// (users, servers, scenarios) rows to time the exact solver on.
    pub ladder: Vec<(usize, usize, usize)>,
    /// Per-solve wall-clock budget in seconds.
    pub time_limit: f64,
    pub inference_repetitions: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            ladder: vec![(10, 3, 15), (20, 5, 25), (30, 7, 35)],
            time_limit: 300.0,
            inference_repetitions: 1000,
            seed: 99,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    pub out_dir: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> Self {
        PathsConfig {
            out_dir: PathBuf::from("."),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let config: Config = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Config::load(p),
            None => {
                let config = Config::default();
                config.validate()?;
                Ok(config)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.users == 0 || self.servers == 0 || self.scenarios == 0 {
            return Err(Error::config("users, servers and scenarios must be positive"));
        }
        let c = &self.constants;
        if c.sigma <= 0.0 || c.gamma <= 0.0 || c.energy_budget <= 0.0 || c.capacity <= 0.0 {
            return Err(Error::config("all model constants must be positive"));
        }
        if !(0.0 < self.train_ratio && self.train_ratio < 1.0) {
            return Err(Error::config("train ratio must lie strictly in (0, 1)"));
        }
        if self.learn.cv_folds < 2 {
            return Err(Error::config("cv folds must be at least 2"));
        }
        if self.records == 0 {
            return Err(Error::config("record count must be positive"));
        }
        self.solver.validate()?;
        Ok(())
    }

    pub fn model_constants(&self) -> ModelConstants<f64> {
        ModelConstants {
            sigma: self.constants.sigma,
            gamma: self.constants.gamma,
            rho: self.constants.rho.clone(),
            scenario_prob: None,
        }
    }

    /// Dataset generation spec for a given mode/record count.
    pub fn dataset_spec(&self, mode: SpatialMode, records: usize) -> DatasetSpec<f64> {
        DatasetSpec {
            mode,
            records,
            users: self.users,
            servers: self.servers,
            scenarios: self.scenarios,
            grid: self.grid,
            constants: self.model_constants(),
            cluster: self.cluster,
            energy_budget: self.constants.energy_budget,
            capacity: self.constants.capacity,
            request_range: self.request_range,
            solver: self.solver,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_round_trips() {
        let config = Config::default();
        config.validate().unwrap();
        let text = serde_json::to_string_pretty(&config).unwrap();
        let parsed: Config = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed.users, 20);
        assert_eq!(parsed.constants.sigma, 396.0);
        assert_eq!(parsed.bench.ladder.len(), 3);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{"users": 5, "bogus_key": 1}"#;
        assert!(serde_json::from_str::<Config>(text).is_err());
    }

    #[test]
    fn invalid_constants_are_rejected() {
        let mut config = Config::default();
        config.constants.sigma = 0.0;
        assert!(config.validate().is_err());
    }
}
