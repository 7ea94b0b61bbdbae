//! Checkpoint container: a plain-text manifest plus a little-endian 32-bit
//! float payload.
//!
//! The manifest records the schema version, model architecture, seed, fold
//! id, vocabulary hash, and the parameter layout (name and shape per block,
//! in payload order). The payload is the flat parameter buffer serialized
//! front to back as `f32` values, row-major. Save -> load -> save is
//! bit-exact at 32-bit precision.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::nn::{Regressor, TokenModel, TokenModelConfig};
use crate::rng::{hash_hex, Rng};
use crate::transformer::{DictModel, DictModelConfig, EncoderConfig};

pub const SCHEMA_VERSION: u32 = 1;

/// Architecture descriptor carried in every manifest.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelArch {
    Token(TokenModelConfig),
    Dictionary(DictModelConfig),
}

impl ModelArch {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelArch::Token(_) => "token",
            ModelArch::Dictionary(_) => "dictionary",
        }
    }

    /// Construct a model of this architecture with seeded initialization.
    pub fn build(&self, rng: &mut Rng) -> alloc::boxed::Box<dyn Regressor> {
        match self {
            ModelArch::Token(cfg) => alloc::boxed::Box::new(TokenModel::new(cfg.clone(), rng)),
            ModelArch::Dictionary(cfg) => alloc::boxed::Box::new(DictModel::new(cfg.clone(), rng)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Manifest {
    pub schema_version: u32,
    pub arch: ModelArch,
    pub seed: u64,
    pub fold: u32,
    pub vocab_hash: u64,
    pub val_mae: Option<f64>,
    /// Parameter blocks in payload order: (name, shape).
    pub params: Vec<(String, Vec<usize>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CheckpointError {
    BadManifest { line: usize, reason: String },
    MissingField { field: String },
    UnknownModelKind { kind: String },
    PayloadSize { expected: usize, found: usize },
    LayoutMismatch { detail: String },
}

impl fmt::Display for CheckpointError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckpointError::BadManifest { line, reason } => {
                write!(f, "manifest line {line}: {reason}")
            }
            CheckpointError::MissingField { field } => {
                write!(f, "manifest missing field '{field}'")
            }
            CheckpointError::UnknownModelKind { kind } => write!(f, "unknown model kind '{kind}'"),
            CheckpointError::PayloadSize { expected, found } => {
                write!(
                    f,
                    "payload holds {found} values, manifest declares {expected}"
                )
            }
            CheckpointError::LayoutMismatch { detail } => {
                write!(f, "parameter layout mismatch: {detail}")
            }
        }
    }
}

impl core::error::Error for CheckpointError {}

/// A manifest plus its parameter payload, ready for byte serialization.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub manifest: Manifest,
    pub payload: Vec<f32>,
}

impl Checkpoint {
    /// Snapshot a trained model.
    pub fn capture(
        model: &dyn Regressor,
        seed: u64,
        fold: u32,
        vocab_hash: u64,
        val_mae: Option<f64>,
    ) -> Self {
        let params = model
            .params()
            .specs()
            .iter()
            .map(|s| (s.name.clone(), s.shape.clone()))
            .collect();
        let payload = model.params().data().iter().map(|&v| v as f32).collect();
        Checkpoint {
            manifest: Manifest {
                schema_version: SCHEMA_VERSION,
                arch: model.arch(),
                seed,
                fold,
                vocab_hash,
                val_mae,
                params,
            },
            payload,
        }
    }

    /// Rebuild the model this checkpoint captured. The manifest layout must
    /// match the layout the architecture produces.
    pub fn restore(&self) -> Result<alloc::boxed::Box<dyn Regressor>, CheckpointError> {
        let mut rng = Rng::seed_from(0);
        let mut model = self.manifest.arch.build(&mut rng);
        let specs = model.params().specs();
        if specs.len() != self.manifest.params.len() {
            return Err(CheckpointError::LayoutMismatch {
                detail: format!(
                    "model has {} parameter blocks, manifest {}",
                    specs.len(),
                    self.manifest.params.len()
                ),
            });
        }
        for (spec, (name, shape)) in specs.iter().zip(&self.manifest.params) {
            if &spec.name != name || &spec.shape != shape {
                return Err(CheckpointError::LayoutMismatch {
                    detail: format!("block '{}' vs manifest '{name}'", spec.name),
                });
            }
        }
        let expected = model.params().len();
        if self.payload.len() != expected {
            return Err(CheckpointError::PayloadSize {
                expected,
                found: self.payload.len(),
            });
        }
        for (slot, &v) in model.params_mut().data_mut().iter_mut().zip(&self.payload) {
            *slot = v as f64;
        }
        Ok(model)
    }

    pub fn payload_bytes(&self) -> Vec<u8> {
        let mut bytes = Vec::with_capacity(self.payload.len() * 4);
        for v in &self.payload {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        bytes
    }

    pub fn payload_from_bytes(bytes: &[u8]) -> Result<Vec<f32>, CheckpointError> {
        if !bytes.len().is_multiple_of(4) {
            return Err(CheckpointError::PayloadSize {
                expected: bytes.len() / 4 * 4,
                found: bytes.len(),
            });
        }
        Ok(bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect())
    }
}

fn arch_lines(arch: &ModelArch, out: &mut String) {
    match arch {
        ModelArch::Token(cfg) => {
            out.push_str(&format!("arch.vocab_size: {}\n", cfg.vocab_size));
            out.push_str(&format!("arch.embed_dim: {}\n", cfg.embed_dim));
            out.push_str(&format!("arch.hidden: {}\n", join_usizes(&cfg.hidden)));
            out.push_str(&format!("arch.dropout: {}\n", cfg.dropout));
            out.push_str(&format!(
                "arch.train_embeddings: {}\n",
                cfg.train_embeddings
            ));
        }
        ModelArch::Dictionary(cfg) => {
            let e = &cfg.encoder;
            out.push_str(&format!("arch.vocab_size: {}\n", e.vocab_size));
            out.push_str(&format!("arch.layers: {}\n", e.layers));
            out.push_str(&format!("arch.heads: {}\n", e.heads));
            out.push_str(&format!("arch.model_dim: {}\n", e.model_dim));
            out.push_str(&format!("arch.ff_dim: {}\n", e.ff_dim));
            out.push_str(&format!("arch.max_len: {}\n", e.max_len));
            out.push_str(&format!("arch.block_dropout: {}\n", e.block_dropout));
            out.push_str(&format!("arch.positional: {}\n", e.positional));
            out.push_str(&format!("arch.hidden: {}\n", join_usizes(&cfg.hidden)));
            out.push_str(&format!("arch.head_dropout: {}\n", cfg.head_dropout));
            out.push_str(&format!("arch.train_encoder: {}\n", cfg.train_encoder));
        }
    }
}

fn join_usizes(values: &[usize]) -> String {
    let parts: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    parts.join(",")
}

/// Render the manifest as line-oriented `key: value` text.
pub fn manifest_to_text(m: &Manifest) -> String {
    let mut out = String::new();
    out.push_str(&format!("schema_version: {}\n", m.schema_version));
    out.push_str(&format!("model: {}\n", m.arch.kind()));
    out.push_str(&format!("seed: {}\n", m.seed));
    out.push_str(&format!("fold: {}\n", m.fold));
    out.push_str(&format!("vocab_hash: {}\n", hash_hex(m.vocab_hash)));
    if let Some(v) = m.val_mae {
        out.push_str(&format!("val_mae: {v}\n"));
    }
    arch_lines(&m.arch, &mut out);
    let total: usize = m
        .params
        .iter()
        .map(|(_, shape)| shape.iter().product::<usize>())
        .sum();
    out.push_str(&format!("param_count: {total}\n"));
    for (name, shape) in &m.params {
        let dims: Vec<String> = shape.iter().map(|d| d.to_string()).collect();
        out.push_str(&format!("param: {name} {}\n", dims.join(" ")));
    }
    out
}

struct Fields<'a> {
    pairs: Vec<(usize, &'a str, &'a str)>,
}

impl<'a> Fields<'a> {
    fn get(&self, key: &str) -> Option<&'a str> {
        self.pairs
            .iter()
            .find(|(_, k, _)| *k == key)
            .map(|(_, _, v)| *v)
    }

    fn require(&self, key: &str) -> Result<&'a str, CheckpointError> {
        self.get(key).ok_or_else(|| CheckpointError::MissingField {
            field: key.to_owned(),
        })
    }
}

fn parse_num<T: core::str::FromStr>(s: &str, line: usize) -> Result<T, CheckpointError> {
    s.trim()
        .parse::<T>()
        .map_err(|_| CheckpointError::BadManifest {
            line,
            reason: format!("bad number '{s}'"),
        })
}

/// Parse manifest text back into a [`Manifest`].
pub fn manifest_from_text(text: &str) -> Result<Manifest, CheckpointError> {
    let mut pairs = Vec::new();
    let mut params = Vec::new();
    for (lineno0, line) in text.lines().enumerate() {
        let lineno = lineno0 + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| CheckpointError::BadManifest {
                line: lineno,
                reason: "missing ':'".to_owned(),
            })?;
        let (key, value) = (key.trim(), value.trim());
        if key == "param" {
            let mut parts = value.split_whitespace();
            let name = parts
                .next()
                .ok_or_else(|| CheckpointError::BadManifest {
                    line: lineno,
                    reason: "param without name".to_owned(),
                })?
                .to_owned();
            let shape: Result<Vec<usize>, _> =
                parts.map(|p| parse_num::<usize>(p, lineno)).collect();
            params.push((name, shape?));
        } else {
            pairs.push((lineno, key, value));
        }
    }
    let fields = Fields { pairs };
    let schema_version: u32 = parse_num(fields.require("schema_version")?, 0)?;
    let seed: u64 = parse_num(fields.require("seed")?, 0)?;
    let fold: u32 = parse_num(fields.require("fold")?, 0)?;
    let vocab_hash = u64::from_str_radix(fields.require("vocab_hash")?, 16).map_err(|_| {
        CheckpointError::MissingField {
            field: "vocab_hash".to_owned(),
        }
    })?;
    let val_mae = match fields.get("val_mae") {
        Some(v) => Some(parse_num::<f64>(v, 0)?),
        None => None,
    };

    let hidden = parse_usizes(fields.require("arch.hidden")?)?;
    let vocab_size: usize = parse_num(fields.require("arch.vocab_size")?, 0)?;
    let kind = fields.require("model")?;
    let arch = match kind {
        "token" => ModelArch::Token(TokenModelConfig {
            vocab_size,
            embed_dim: parse_num(fields.require("arch.embed_dim")?, 0)?,
            hidden,
            dropout: parse_num(fields.require("arch.dropout")?, 0)?,
            train_embeddings: parse_bool(fields.require("arch.train_embeddings")?)?,
        }),
        "dictionary" => ModelArch::Dictionary(DictModelConfig {
            encoder: EncoderConfig {
                vocab_size,
                layers: parse_num(fields.require("arch.layers")?, 0)?,
                heads: parse_num(fields.require("arch.heads")?, 0)?,
                model_dim: parse_num(fields.require("arch.model_dim")?, 0)?,
                ff_dim: parse_num(fields.require("arch.ff_dim")?, 0)?,
                max_len: parse_num(fields.require("arch.max_len")?, 0)?,
                block_dropout: parse_num(fields.require("arch.block_dropout")?, 0)?,
                positional: parse_bool(fields.require("arch.positional")?)?,
            },
            hidden,
            head_dropout: parse_num(fields.require("arch.head_dropout")?, 0)?,
            train_encoder: parse_bool(fields.require("arch.train_encoder")?)?,
        }),
        other => {
            return Err(CheckpointError::UnknownModelKind {
                kind: other.to_owned(),
            })
        }
    };
    Ok(Manifest {
        schema_version,
        arch,
        seed,
        fold,
        vocab_hash,
        val_mae,
        params,
    })
}

fn parse_usizes(s: &str) -> Result<Vec<usize>, CheckpointError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|p| parse_num::<usize>(p.trim(), 0))
        .collect()
}

fn parse_bool(s: &str) -> Result<bool, CheckpointError> {
    match s.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(CheckpointError::BadManifest {
            line: 0,
            reason: format!("bad bool '{other}'"),
        }),
    }
}
