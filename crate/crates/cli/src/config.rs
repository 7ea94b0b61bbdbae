//! Run configuration: a partial JSON config file merged over defaults, with
//! command-line flags winning. The fully-resolved configuration is written
//! into every run directory so a run can be reproduced from its artifacts
//! alone.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Token,
    Dictionary,
}

impl ModelKind {
    pub fn label(&self) -> &'static str {
        match self {
            ModelKind::Token => "token",
            ModelKind::Dictionary => "dictionary",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "token" => Ok(ModelKind::Token),
            "dictionary" => Ok(ModelKind::Dictionary),
            other => Err(format!("unknown model kind '{other}' (token|dictionary)")),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitSettings {
    pub holdout_fraction: f64,
    pub folds: usize,
}

impl Default for SplitSettings {
    fn default() -> Self {
        SplitSettings {
            holdout_fraction: 0.2,
            folds: 5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainSettings {
    pub max_epochs: usize,
    pub batch_size: usize,
    /// Early-stop patience in epochs on validation MAE; 0 disables.
    pub patience: usize,
    pub learning_rate: f64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings {
            max_epochs: 500,
            batch_size: 32,
            patience: 50,
            learning_rate: 0.001,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McSettings {
    pub samples_per_model: usize,
    pub train_mode_dropout: bool,
}

impl Default for McSettings {
    fn default() -> Self {
        McSettings {
            samples_per_model: 100,
            train_mode_dropout: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TokenSettings {
    pub embed_dim: usize,
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub seq_len: usize,
    pub hidden: Vec<usize>,
    pub dropout: f64,
    pub train_embeddings: bool,
}

impl Default for TokenSettings {
    fn default() -> Self {
        TokenSettings {
            embed_dim: 300,
            ngram_min: 3,
            ngram_max: 5,
            seq_len: 50,
            hidden: vec![128, 64, 32],
            dropout: 0.5,
            train_embeddings: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DictionarySettings {
    pub layers: usize,
    pub heads: usize,
    pub model_dim: usize,
    pub ff_dim: usize,
    pub seq_len: usize,
    pub block_dropout: f64,
    pub positional: bool,
    pub hidden: Vec<usize>,
    pub head_dropout: f64,
    pub train_encoder: bool,
    pub max_def_words: usize,
}

impl Default for DictionarySettings {
    fn default() -> Self {
        DictionarySettings {
            layers: 2,
            heads: 4,
            model_dim: 64,
            ff_dim: 256,
            seq_len: 128,
            block_dropout: 0.1,
            positional: true,
            hidden: vec![128, 64, 32],
            head_dropout: 0.5,
            train_encoder: true,
            max_def_words: 50,
        }
    }
}

/// Fully-resolved run configuration; every default is materialized before a
/// run starts and the result is snapshotted into the run directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelKind,
    pub lexicon: PathBuf,
    pub vectors: Option<PathBuf>,
    pub subword_vocab: Option<PathBuf>,
    pub defs_cache: Option<PathBuf>,
    pub seed: u64,
    pub split: SplitSettings,
    pub train: TrainSettings,
    pub mc: McSettings,
    pub token: TokenSettings,
    pub dictionary: DictionarySettings,
}

/// Partial config as read from disk; any omitted section falls back to the
/// defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub model: Option<ModelKind>,
    pub lexicon: Option<PathBuf>,
    pub vectors: Option<PathBuf>,
    pub subword_vocab: Option<PathBuf>,
    pub defs_cache: Option<PathBuf>,
    pub seed: Option<u64>,
    pub split: Option<SplitSettings>,
    pub train: Option<TrainSettings>,
    pub mc: Option<McSettings>,
    pub token: Option<TokenSettings>,
    pub dictionary: Option<DictionarySettings>,
}

/// Command-line overrides; flags win over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub model: Option<ModelKind>,
    pub lexicon: Option<PathBuf>,
    pub vectors: Option<PathBuf>,
    pub subword_vocab: Option<PathBuf>,
    pub defs_cache: Option<PathBuf>,
    pub seed: Option<u64>,
    pub folds: Option<usize>,
    pub max_epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub patience: Option<usize>,
    pub samples_per_model: Option<usize>,
}

impl RunConfig {
    pub fn resolve(file: ConfigFile, cli: Overrides) -> Result<RunConfig> {
        let model = cli
            .model
            .or(file.model)
            .ok_or_else(|| CliError::BadConfig("model kind not set (token|dictionary)".into()))?;
        let lexicon = cli
            .lexicon
            .or(file.lexicon)
            .ok_or_else(|| CliError::BadConfig("lexicon path not set".into()))?;
        let mut cfg = RunConfig {
            model,
            lexicon,
            vectors: cli.vectors.or(file.vectors),
            subword_vocab: cli.subword_vocab.or(file.subword_vocab),
            defs_cache: cli.defs_cache.or(file.defs_cache),
            seed: cli.seed.or(file.seed).unwrap_or(0),
            split: file.split.unwrap_or_default(),
            train: file.train.unwrap_or_default(),
            mc: file.mc.unwrap_or_default(),
            token: file.token.unwrap_or_default(),
            dictionary: file.dictionary.unwrap_or_default(),
        };
        if let Some(folds) = cli.folds {
            cfg.split.folds = folds;
        }
        if let Some(v) = cli.max_epochs {
            cfg.train.max_epochs = v;
        }
        if let Some(v) = cli.batch_size {
            cfg.train.batch_size = v;
        }
        if let Some(v) = cli.patience {
            cfg.train.patience = v;
        }
        if let Some(v) = cli.samples_per_model {
            cfg.mc.samples_per_model = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.model == ModelKind::Dictionary && self.subword_vocab.is_none() {
            return Err(CliError::BadConfig(
                "dictionary model requires a subword_vocab path".into(),
            ));
        }
        if self.split.folds < 2 {
            return Err(CliError::BadConfig("need at least 2 folds".into()));
        }
        if !(0.0..1.0).contains(&self.split.holdout_fraction) || self.split.holdout_fraction == 0.0
        {
            return Err(CliError::BadConfig(
                "holdout_fraction must be in (0, 1)".into(),
            ));
        }
        if self.train.max_epochs == 0 {
            return Err(CliError::BadConfig("max_epochs must be at least 1".into()));
        }
        if self.mc.samples_per_model == 0 {
            return Err(CliError::BadConfig(
                "samples_per_model must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn split_spec(&self) -> lexaug_core::train::SplitSpec {
        lexaug_core::train::SplitSpec {
            holdout_fraction: self.split.holdout_fraction,
            folds: self.split.folds,
            seed: self.seed,
        }
    }

    pub fn train_config(&self) -> lexaug_core::train::TrainConfig {
        lexaug_core::train::TrainConfig {
            max_epochs: self.train.max_epochs,
            batch_size: self.train.batch_size,
            patience: self.train.patience,
            adam: lexaug_core::nn::AdamConfig {
                lr: self.train.learning_rate,
                ..lexaug_core::nn::AdamConfig::default()
            },
            seed: self.seed,
        }
    }

    pub fn mc_config(&self) -> lexaug_core::predict::McConfig {
        lexaug_core::predict::McConfig {
            samples_per_model: self.mc.samples_per_model,
            train_mode_dropout: self.mc.train_mode_dropout,
            seed: self.seed,
        }
    }
}

pub fn load_config_file(path: &Path) -> Result<ConfigFile> {
    if !path.exists() {
        return Err(CliError::InputNotFound {
            path: path.to_path_buf(),
        });
    }
    let text = fs::read_to_string(path).map_err(|source| CliError::ReadFailed {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::BadInput {
        path: path.to_path_buf(),
        message: format!("config parse error: {e}"),
    })
}
