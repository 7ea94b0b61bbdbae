//! Input encodings for both model families.
//!
//! The token route breaks a word into character-level n-grams (n in 3..=5 by
//! default) with the original word kept at the front of the sequence. The
//! dictionary route splits a word plus its definition into WordPiece-style
//! subwords with `##` marking non-initial pieces. Both produce a fixed-length
//! [`TokenSequence`] of ids with a validity mask.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::lexicon::normalize_word;

/// Character n-gram enumeration settings.
#[derive(Debug, Clone)]
pub struct NgramConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub seq_len: usize,
    pub pad_id: u32,
    /// Wrap words in angle-bracket boundary markers before enumeration.
    /// Off by default; the token sequences use bare n-grams.
    pub boundary_markers: bool,
}

impl Default for NgramConfig {
    fn default() -> Self {
        NgramConfig {
            n_min: 3,
            n_max: 5,
            seq_len: 50,
            pad_id: 0,
            boundary_markers: false,
        }
    }
}

/// Fixed-length id sequence with a validity mask.
///
/// Real tokens always form a prefix; every masked-off position holds the pad
/// id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    ids: Vec<u32>,
    mask: Vec<bool>,
}

impl TokenSequence {
    /// Build from real ids, truncating at `seq_len` and padding the tail.
    pub fn new(real_ids: &[u32], seq_len: usize, pad_id: u32) -> Self {
        let n = real_ids.len().min(seq_len);
        let mut ids = Vec::with_capacity(seq_len);
        let mut mask = Vec::with_capacity(seq_len);
        ids.extend_from_slice(&real_ids[..n]);
        mask.extend(core::iter::repeat_n(true, n));
        ids.extend(core::iter::repeat_n(pad_id, seq_len - n));
        mask.extend(core::iter::repeat_n(false, seq_len - n));
        TokenSequence { ids, mask }
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Number of real (unmasked) tokens.
    pub fn real_len(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenizeError {
    EmptyWord,
    EmptyTokenList,
    BadNgramRange { n_min: usize, n_max: usize },
    VocabMissingToken { token: String },
    PadNotFirst,
    DuplicateVocabToken { token: String, line: usize },
}

impl fmt::Display for TokenizeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenizeError::EmptyWord => write!(f, "cannot tokenize an empty word"),
            TokenizeError::EmptyTokenList => write!(f, "cannot encode an empty token list"),
            TokenizeError::BadNgramRange { n_min, n_max } => {
                write!(f, "invalid n-gram range {n_min}..={n_max}")
            }
            TokenizeError::VocabMissingToken { token } => {
                write!(f, "subword vocabulary lacks required token '{token}'")
            }
            TokenizeError::PadNotFirst => {
                write!(
                    f,
                    "subword vocabulary must list the pad token on line 1 (id 0)"
                )
            }
            TokenizeError::DuplicateVocabToken { token, line } => {
                write!(f, "line {line}: duplicate vocabulary token '{token}'")
            }
        }
    }
}

impl core::error::Error for TokenizeError {}

/// Id lookup used by [`encode_tokens`]; implemented by vocabulary builders.
pub trait IdLookup {
    fn id_of(&self, token: &str) -> Option<u32>;
    fn unk_id(&self) -> u32;
}

/// The word followed by its character n-grams, each length in left-to-right
/// position order. Words shorter than `n` contribute no n-grams of that
/// length; duplicates are kept.
pub fn char_ngrams(word: &str, cfg: &NgramConfig) -> Result<Vec<String>, TokenizeError> {
    if word.is_empty() {
        return Err(TokenizeError::EmptyWord);
    }
    if cfg.n_min == 0 || cfg.n_min > cfg.n_max {
        return Err(TokenizeError::BadNgramRange {
            n_min: cfg.n_min,
            n_max: cfg.n_max,
        });
    }
    let mut surface = word.to_owned();
    if cfg.boundary_markers {
        surface = alloc::format!("<{surface}>");
    }
    let chars: Vec<char> = surface.chars().collect();
    let mut out = Vec::new();
    out.push(word.to_owned());
    for n in cfg.n_min..=cfg.n_max {
        if chars.len() < n {
            continue;
        }
        for start in 0..=(chars.len() - n) {
            out.push(chars[start..start + n].iter().collect());
        }
    }
    Ok(out)
}

/// Look tokens up, truncate at `seq_len`, and pad. Unknown tokens map to the
/// vocabulary's unknown id.
pub fn encode_tokens(
    tokens: &[String],
    vocab: &impl IdLookup,
    cfg: &NgramConfig,
) -> Result<TokenSequence, TokenizeError> {
    if tokens.is_empty() {
        return Err(TokenizeError::EmptyTokenList);
    }
    let ids: Vec<u32> = tokens
        .iter()
        .map(|t| vocab.id_of(t).unwrap_or_else(|| vocab.unk_id()))
        .collect();
    Ok(TokenSequence::new(&ids, cfg.seq_len, cfg.pad_id))
}

/// Subword vocabulary for the dictionary route.
///
/// Loaded from a one-token-per-line listing where the line number is the id.
/// The pad token must sit on line 1 (id 0); unknown, class, and separator
/// tokens must be present. Non-initial word pieces carry the `##` marker.
#[derive(Debug, Clone)]
pub struct SubwordVocab {
    tokens: Vec<String>,
    map: BTreeMap<String, u32>,
    pad: u32,
    unk: u32,
    cls: u32,
    sep: u32,
}

pub const PAD_TOKEN: &str = "[PAD]";
pub const UNK_TOKEN: &str = "[UNK]";
pub const CLS_TOKEN: &str = "[CLS]";
pub const SEP_TOKEN: &str = "[SEP]";
pub const CONTINUATION: &str = "##";

impl SubwordVocab {
    /// Parse from text, one token per line; line number = id.
    pub fn parse(text: &str) -> Result<Self, TokenizeError> {
        let tokens: Vec<String> = text
            .lines()
            .map(|l| l.trim_end().to_owned())
            .filter(|l| !l.is_empty())
            .collect();
        let mut map = BTreeMap::new();
        for (i, t) in tokens.iter().enumerate() {
            if map.insert(t.clone(), i as u32).is_some() {
                return Err(TokenizeError::DuplicateVocabToken {
                    token: t.clone(),
                    line: i + 1,
                });
            }
        }
        let require = |name: &str| -> Result<u32, TokenizeError> {
            map.get(name)
                .copied()
                .ok_or_else(|| TokenizeError::VocabMissingToken {
                    token: name.to_owned(),
                })
        };
        let pad = require(PAD_TOKEN)?;
        if pad != 0 {
            return Err(TokenizeError::PadNotFirst);
        }
        Ok(SubwordVocab {
            pad,
            unk: require(UNK_TOKEN)?,
            cls: require(CLS_TOKEN)?,
            sep: require(SEP_TOKEN)?,
            tokens,
            map,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn pad_id(&self) -> u32 {
        self.pad
    }

    pub fn cls_id(&self) -> u32 {
        self.cls
    }

    pub fn sep_id(&self) -> u32 {
        self.sep
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    fn contains(&self, token: &str) -> bool {
        self.map.contains_key(token)
    }
}

impl IdLookup for SubwordVocab {
    fn id_of(&self, token: &str) -> Option<u32> {
        self.map.get(token).copied()
    }

    fn unk_id(&self) -> u32 {
        self.unk
    }
}

/// Greedy longest-match-first subword split of whitespace-delimited text.
///
/// Words that admit no full decomposition collapse to the unknown token.
pub fn wordpiece_tokenize(text: &str, vocab: &SubwordVocab) -> Vec<String> {
    let mut pieces = Vec::new();
    for raw in text.split_whitespace() {
        let word = normalize_word(raw);
        if word.is_empty() {
            continue;
        }
        match wordpiece_word(&word, vocab) {
            Some(mut ps) => pieces.append(&mut ps),
            None => pieces.push(UNK_TOKEN.to_owned()),
        }
    }
    pieces
}

fn wordpiece_word(word: &str, vocab: &SubwordVocab) -> Option<Vec<String>> {
    let chars: Vec<char> = word.chars().collect();
    let mut pieces = Vec::new();
    let mut start = 0;
    while start < chars.len() {
        let mut end = chars.len();
        let mut found: Option<String> = None;
        while end > start {
            let mut candidate: String = chars[start..end].iter().collect();
            if start > 0 {
                candidate = alloc::format!("{CONTINUATION}{candidate}");
            }
            if vocab.contains(&candidate) {
                found = Some(candidate);
                break;
            }
            end -= 1;
        }
        let piece = found?;
        pieces.push(piece);
        start = end;
    }
    Some(pieces)
}

/// Definition-encoding settings: the word budget for the definition text and
/// the fixed subword sequence length of the encoder input.
#[derive(Debug, Clone)]
pub struct DefEncodeConfig {
    pub max_words: usize,
    pub seq_len: usize,
}

impl Default for DefEncodeConfig {
    fn default() -> Self {
        DefEncodeConfig {
            max_words: 50,
            seq_len: 128,
        }
    }
}

/// Encode `[CLS] word-pieces [SEP] definition-pieces` at fixed length.
///
/// Only the first `max_words` whitespace words of the definition are used;
/// an empty definition yields the word-only sequence.
pub fn encode_definition(
    word: &str,
    definition: &str,
    vocab: &SubwordVocab,
    cfg: &DefEncodeConfig,
) -> Result<TokenSequence, TokenizeError> {
    let word = normalize_word(word);
    if word.is_empty() {
        return Err(TokenizeError::EmptyWord);
    }
    let mut pieces: Vec<String> = Vec::new();
    pieces.push(CLS_TOKEN.to_owned());
    pieces.extend(wordpiece_tokenize(&word, vocab));
    pieces.push(SEP_TOKEN.to_owned());
    let truncated: Vec<&str> = definition.split_whitespace().take(cfg.max_words).collect();
    if !truncated.is_empty() {
        pieces.extend(wordpiece_tokenize(&truncated.join(" "), vocab));
    }
    let ids: Vec<u32> = pieces
        .iter()
        .map(|p| vocab.id_of(p).unwrap_or_else(|| vocab.unk_id()))
        .collect();
    Ok(TokenSequence::new(&ids, cfg.seq_len, vocab.pad_id()))
}
