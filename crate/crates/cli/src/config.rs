//! Declarative run configuration (TOML).
//!
//! Sections: `[distribution]`, `[embedding]`, `[model_class]`, `[experiment]`,
//! `[verify]`, `[project]`. The resolved configuration (including defaults)
//! is echoed into the run manifest so no run depends on implicit state.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qip_core::embedding::{load_embedding_json, EmbeddingKind, FeatureEmbedding};
use qip_core::experiment::{MatrixKind, MatrixSource, Regime};
use qip_core::{make_embedding, ModelClass, ProbabilityVector};

use crate::CliError;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub master_seed: u64,
    /// Optional sample size for the empirical state emitted by `embed`.
    #[serde(default)]
    pub sample_n: Option<usize>,
    pub distribution: DistributionCfg,
    pub embedding: EmbeddingCfg,
    #[serde(default)]
    pub model_class: Option<ModelClass>,
    #[serde(default)]
    pub experiment: Option<ExperimentCfg>,
    #[serde(default)]
    pub verify: Option<VerifyCfg>,
    #[serde(default)]
    pub project: Option<ProjectCfg>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionCfg {
    pub pmf: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EmbeddingCfg {
    Onehot { dim: usize },
    SimplexCap { dim: usize, angle: f64 },
    Fourier { dim: usize, bandwidth: f64 },
    Explicit { path: PathBuf },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentCfg {
    Rates {
        n_grid: Vec<usize>,
        trials_per_n: usize,
        #[serde(default = "default_thresholds")]
        tail_thresholds: Vec<f64>,
        regime: Regime,
    },
    Concentration {
        n_grid: Vec<usize>,
        trials_per_n: usize,
        tail_thresholds: Vec<f64>,
        regime: Regime,
    },
    Matrix {
        kind: MatrixKind,
        source: MatrixSource,
        d: usize,
        n: usize,
        t_grid: Vec<f64>,
        trials: usize,
    },
    Regret {
        n_grid: Vec<usize>,
    },
}

fn default_thresholds() -> Vec<f64> {
    vec![0.1, 0.2, 0.4]
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyCfg {
    pub checks: Vec<String>,
    #[serde(default = "default_verify_seeds")]
    pub seeds: u64,
    /// Negative-control fixture: corrupt the pinched spectrum before the
    /// classical-reduction comparison, which must make verification fail.
    #[serde(default)]
    pub corrupt_pinch: bool,
}

fn default_verify_seeds() -> u64 {
    20
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectCfg {
    #[serde(default = "default_project_dim")]
    pub dim: usize,
    #[serde(default)]
    pub sigma_path: Option<PathBuf>,
    #[serde(default)]
    pub basis_path: Option<PathBuf>,
}

fn default_project_dim() -> usize {
    2
}

impl Config {
    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|e| CliError::Config(format!("config is not UTF-8: {e}")))?;
        let cfg: Config =
            toml::from_str(text).map_err(|e| CliError::Config(format!("config parse: {e}")))?;
        cfg.validate()?;
        Ok((cfg, bytes))
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.distribution.pmf.is_empty() {
            return Err(CliError::Config("distribution.pmf must be non-empty".into()));
        }
        if let Some(model) = &self.model_class {
            model.validate().map_err(|e| CliError::Config(format!("model_class: {e}")))?;
        }
        if let Some(ExperimentCfg::Rates { trials_per_n, .. })
        | Some(ExperimentCfg::Concentration { trials_per_n, .. }) = &self.experiment
        {
            if *trials_per_n == 0 {
                return Err(CliError::Config("experiment.trials_per_n must be >= 1".into()));
            }
        }
        if let Some(ExperimentCfg::Matrix { trials, .. }) = &self.experiment {
            if *trials == 0 {
                return Err(CliError::Config("experiment.trials must be >= 1".into()));
            }
        }
        if let Some(verify) = &self.verify {
            if verify.checks.is_empty() {
                return Err(CliError::Config("verify.checks must be non-empty".into()));
            }
        }
        Ok(())
    }

    pub fn pmf(&self) -> Result<ProbabilityVector, CliError> {
        ProbabilityVector::new(self.distribution.pmf.clone())
            .map_err(|e| CliError::Config(format!("distribution.pmf: {e}")))
    }

    /// Build the feature embedding; `base_dir` anchors relative paths.
    pub fn embedding(&self, base_dir: &Path, seed: u64) -> Result<FeatureEmbedding, CliError> {
        let alphabet = self.distribution.pmf.len();
        let built = match &self.embedding {
            EmbeddingCfg::Onehot { dim } => {
                make_embedding(EmbeddingKind::Onehot, alphabet, *dim, seed)
            }
            EmbeddingCfg::SimplexCap { dim, angle } => {
                make_embedding(EmbeddingKind::SimplexCap { angle: *angle }, alphabet, *dim, seed)
            }
            EmbeddingCfg::Fourier { dim, bandwidth } => make_embedding(
                EmbeddingKind::Fourier { bandwidth: *bandwidth },
                alphabet,
                *dim,
                seed,
            ),
            EmbeddingCfg::Explicit { path } => {
                let resolved = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
                return load_embedding_json(&resolved)
                    .map_err(|e| CliError::Config(format!("embedding.path: {e}")));
            }
        };
        built.map_err(|e| CliError::Config(format!("embedding: {e}")))
    }

    pub fn require_model(&self) -> Result<&ModelClass, CliError> {
        self.model_class
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [model_class] section".into()))
    }
}
