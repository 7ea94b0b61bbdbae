//! Dataset assembly: lexicon, vocabulary, and encoded sequences for either
//! model family, plus the encoders reused when scoring new words.

use std::fs;
use std::path::Path;

use lexaug_core::defs::{normalize_definition, DefStatus, DefinitionRecord};
use lexaug_core::embed::{EmbeddingMatrix, VectorFile, VocabBuild};
use lexaug_core::lexicon::{ColumnMap, Lexicon};
use lexaug_core::rng::fnv1a;
use lexaug_core::tokenize::{
    char_ngrams, encode_definition, encode_tokens, DefEncodeConfig, NgramConfig, SubwordVocab,
    TokenSequence,
};
use lexaug_core::train::Dataset;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub fn read_text(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(CliError::InputNotFound {
            path: path.to_path_buf(),
        });
    }
    fs::read_to_string(path).map_err(|source| CliError::ReadFailed {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_lexicon(path: &Path) -> Result<Lexicon> {
    let text = read_text(path)?;
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "lexicon".to_string());
    Lexicon::parse_tsv(&text, &ColumnMap::default(), &name).map_err(|e| CliError::BadInput {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn load_vectors(path: &Path) -> Result<VectorFile> {
    let text = read_text(path)?;
    VectorFile::parse(&text).map_err(|e| CliError::BadInput {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn load_subword_vocab(path: &Path) -> Result<SubwordVocab> {
    let text = read_text(path)?;
    SubwordVocab::parse(&text).map_err(|e| CliError::BadInput {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Definition cache as a word-keyed map (last record per word wins, matching
/// append-order semantics).
pub fn load_defs_map(path: &Path) -> Result<std::collections::BTreeMap<String, DefinitionRecord>> {
    let mut map = std::collections::BTreeMap::new();
    if !path.exists() {
        return Ok(map);
    }
    for record in crate::defs_client::read_cache_records(path)? {
        map.insert(record.word.clone(), record);
    }
    Ok(map)
}

/// Everything needed to train and later rescore with a token model.
pub struct TokenBundle {
    pub lexicon: Lexicon,
    pub dataset: Dataset,
    pub vocab: VocabBuild,
    pub vocab_hash: u64,
    pub embedding: EmbeddingMatrix,
    pub ngram: NgramConfig,
}

impl TokenBundle {
    /// Encode an arbitrary word with the training vocabulary (unknown
    /// n-grams map to the unknown id).
    pub fn encode_word(&self, word: &str) -> Option<TokenSequence> {
        let grams = char_ngrams(word, &self.ngram).ok()?;
        encode_tokens(&grams, &self.vocab, &self.ngram).ok()
    }
}

pub fn build_token_bundle(cfg: &RunConfig) -> Result<TokenBundle> {
    let lexicon = load_lexicon(&cfg.lexicon)?;
    let ngram = NgramConfig {
        n_min: cfg.token.ngram_min,
        n_max: cfg.token.ngram_max,
        seq_len: cfg.token.seq_len,
        ..NgramConfig::default()
    };
    let mut words = Vec::with_capacity(lexicon.len());
    let mut token_lists = Vec::with_capacity(lexicon.len());
    let mut targets = Vec::with_capacity(lexicon.len());
    for entry in lexicon.entries() {
        let grams = char_ngrams(&entry.word, &ngram).map_err(|e| CliError::BadInput {
            path: cfg.lexicon.clone(),
            message: format!("word '{}': {e}", entry.word),
        })?;
        words.push(entry.word.clone());
        token_lists.push(grams);
        targets.push(entry.h_avg);
    }
    let vocab = VocabBuild::from_corpus(&token_lists).map_err(|e| CliError::BadInput {
        path: cfg.lexicon.clone(),
        message: e.to_string(),
    })?;
    let seqs: Vec<TokenSequence> = token_lists
        .iter()
        .map(|grams| encode_tokens(grams, &vocab, &ngram).expect("nonempty gram list"))
        .collect();
    let embedding = match &cfg.vectors {
        Some(path) => {
            let vectors = load_vectors(path)?;
            EmbeddingMatrix::from_pretrained(&vectors, &vocab, cfg.token.embed_dim, cfg.seed)
                .map_err(|e| CliError::BadInput {
                    path: path.clone(),
                    message: e.to_string(),
                })?
        }
        None => EmbeddingMatrix::random(
            vocab.len(),
            cfg.token.embed_dim,
            &mut lexaug_core::rng::Rng::derive(cfg.seed, "embedding.init"),
        ),
    };
    let vocab_hash = vocab.hash();
    Ok(TokenBundle {
        lexicon,
        dataset: Dataset {
            words,
            seqs,
            targets,
        },
        vocab,
        vocab_hash,
        embedding,
        ngram,
    })
}

/// Everything needed to train and rescore with a dictionary model.
pub struct DictionaryBundle {
    pub lexicon: Lexicon,
    pub dataset: Dataset,
    pub vocab: SubwordVocab,
    pub vocab_hash: u64,
    pub defs: std::collections::BTreeMap<String, DefinitionRecord>,
    pub encode_cfg: DefEncodeConfig,
}

impl DictionaryBundle {
    pub fn definition_text(&self, word: &str) -> String {
        match self.defs.get(word) {
            Some(rec) if rec.status == DefStatus::Found => {
                normalize_definition(rec, self.encode_cfg.max_words).unwrap_or_default()
            }
            _ => String::new(),
        }
    }

    pub fn encode_word(&self, word: &str) -> Option<TokenSequence> {
        let def = self.definition_text(word);
        encode_definition(word, &def, &self.vocab, &self.encode_cfg).ok()
    }
}

pub fn build_dictionary_bundle(cfg: &RunConfig) -> Result<DictionaryBundle> {
    let lexicon = load_lexicon(&cfg.lexicon)?;
    let vocab_path = cfg
        .subword_vocab
        .as_ref()
        .ok_or_else(|| CliError::BadConfig("dictionary model requires subword_vocab".into()))?;
    let vocab = load_subword_vocab(vocab_path)?;
    let defs = match &cfg.defs_cache {
        Some(path) => load_defs_map(path)?,
        None => Default::default(),
    };
    let encode_cfg = DefEncodeConfig {
        max_words: cfg.dictionary.max_def_words,
        seq_len: cfg.dictionary.seq_len,
    };
    let mut words = Vec::with_capacity(lexicon.len());
    let mut seqs = Vec::with_capacity(lexicon.len());
    let mut targets = Vec::with_capacity(lexicon.len());
    for entry in lexicon.entries() {
        let def = match defs.get(&entry.word) {
            Some(rec) if rec.status == DefStatus::Found => {
                normalize_definition(rec, encode_cfg.max_words).unwrap_or_default()
            }
            _ => String::new(),
        };
        let seq = encode_definition(&entry.word, &def, &vocab, &encode_cfg).map_err(|e| {
            CliError::BadInput {
                path: cfg.lexicon.clone(),
                message: format!("word '{}': {e}", entry.word),
            }
        })?;
        words.push(entry.word.clone());
        seqs.push(seq);
        targets.push(entry.h_avg);
    }
    let vocab_hash = fnv1a(vocab.tokens().join("\n").as_bytes());
    Ok(DictionaryBundle {
        lexicon,
        dataset: Dataset {
            words,
            seqs,
            targets,
        },
        vocab,
        vocab_hash,
        defs,
        encode_cfg,
    })
}
