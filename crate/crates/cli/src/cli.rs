//! Argument parsing and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, BaselineArgs, FetchDefsArgs};
use crate::config::{load_config_file, ConfigFile, ModelKind, Overrides, RunConfig};
use crate::error::Result;

#[derive(Parser)]
#[command(
    name = "lexaug",
    about = "Augment happiness-score lexicons with model-predicted scores and uncertainty bands",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// JSON config file; command-line flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model family to train.
    #[arg(long)]
    model: Option<ModelKind>,
    /// labMT-format lexicon TSV.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Pre-trained vector text file for embedding init.
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Subword vocabulary (one token per line), dictionary model only.
    #[arg(long)]
    subword_vocab: Option<PathBuf>,
    /// Definition cache (JSON lines), dictionary model only.
    #[arg(long)]
    defs_cache: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Early-stop patience in epochs (0 disables early stopping).
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    samples_per_model: Option<usize>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => load_config_file(path)?,
            None => ConfigFile::default(),
        };
        let overrides = Overrides {
            model: self.model,
            lexicon: self.lexicon.clone(),
            vectors: self.vectors.clone(),
            subword_vocab: self.subword_vocab.clone(),
            defs_cache: self.defs_cache.clone(),
            seed: self.seed,
            folds: self.folds,
            max_epochs: self.max_epochs,
            batch_size: self.batch_size,
            patience: self.patience,
            samples_per_model: self.samples_per_model,
        };
        RunConfig::resolve(file, overrides)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train a k-fold ensemble and write a run directory.
    Train {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output run directory.
        #[arg(long)]
        run_dir: PathBuf,
    },
    /// Score new words with a trained run; emits labMT-compatible TSV.
    Augment {
        /// Trained run directory.
        #[arg(long)]
        run_dir: PathBuf,
        /// Words file, one word per line.
        #[arg(long)]
        words: PathBuf,
        /// Rescore words that already have human ratings.
        #[arg(long)]
        force: bool,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a trained run on its holdout set and write report files.
    Evaluate {
        #[arg(long)]
        run_dir: PathBuf,
        /// Rows in the top-error table.
        #[arg(long, default_value_t = 50)]
        top_k: usize,
        /// Report directory (default: <run_dir>/eval).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Populate the definition cache for every lexicon word.
    FetchDefs {
        #[arg(long)]
        lexicon: PathBuf,
        /// JSON-lines cache file to create or extend.
        #[arg(long)]
        cache: PathBuf,
        /// Dictionary API base URL (or set LEXAUG_DEFS_ENDPOINT).
        #[arg(long)]
        endpoint: Option<String>,
        /// Offline fixture directory of <word>.json responses.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        /// Re-fetch errored entries older than this many seconds.
        #[arg(long, default_value_t = 86_400)]
        error_ttl_secs: u64,
        /// Re-fetch missing (negative-cached) entries older than this many
        /// seconds.
        #[arg(long, default_value_t = 30 * 86_400)]
        missing_ttl_secs: u64,
        /// Stop after this many new fetches.
        #[arg(long)]
        limit: Option<usize>,
        /// Minimum milliseconds between requests.
        #[arg(long, default_value_t = 250)]
        spacing_ms: u64,
    },
    /// Mean lexicon happiness of whitespace-delimited text.
    ScoreText {
        #[arg(long)]
        lexicon: PathBuf,
        /// Text to score; reads stdin when omitted.
        #[arg(long)]
        text: Option<String>,
    },
    /// Linear baselines over pooled pre-trained vectors.
    Baseline {
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        vectors: PathBuf,
        /// Comma-separated subset of ols,ridge,lasso,elasticnet.
        #[arg(long, default_value = "ridge,lasso,elasticnet", value_delimiter = ',')]
        models: Vec<String>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 0.2)]
        holdout_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parse `args` and run the requested command.
pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            let _ = e.print();
            return Ok(());
        }
        Err(e) => {
            // clap renders its own message; map to a usage error after printing
            let _ = e.print();
            return Err(crate::error::CliError::BadConfig(
                "argument parsing failed".into(),
            ));
        }
    };
    match cli.command {
        Command::Train { config, run_dir } => {
            let cfg = config.resolve()?;
            commands::cmd_train(&cfg, &run_dir)
        }
        Command::Augment {
            run_dir,
            words,
            force,
            out,
        } => commands::cmd_augment(&run_dir, &words, force, out),
        Command::Evaluate {
            run_dir,
            top_k,
            out,
        } => commands::cmd_evaluate(&run_dir, top_k, out),
        Command::FetchDefs {
            lexicon,
            cache,
            endpoint,
            fixtures,
            error_ttl_secs,
            missing_ttl_secs,
            limit,
            spacing_ms,
        } => commands::cmd_fetch_defs(&FetchDefsArgs {
            lexicon,
            cache,
            endpoint,
            fixtures,
            error_ttl_secs,
            missing_ttl_secs,
            limit,
            spacing_ms,
        }),
        Command::ScoreText { lexicon, text } => {
            let text = match text {
                Some(t) => t,
                None => {
                    use std::io::Read;
                    let mut buf = String::new();
                    std::io::stdin()
                        .read_to_string(&mut buf)
                        .map_err(|e| crate::error::CliError::Internal(format!("stdin: {e}")))?;
                    buf
                }
            };
            commands::cmd_score_text(&lexicon, &text)
        }
        Command::Baseline {
            lexicon,
            vectors,
            models,
            trials,
            lambda,
            alpha,
            holdout_fraction,
            seed,
            out,
        } => commands::cmd_baseline(&BaselineArgs {
            lexicon,
            vectors,
            models,
            trials,
            lambda,
            alpha,
            holdout_fraction,
            seed,
            out,
        }),
    }
}
