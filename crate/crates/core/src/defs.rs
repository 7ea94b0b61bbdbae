//! Dictionary-definition records: normalization for model input and
//! coverage reporting over a populated cache.
//!
//! Fetching, caching, and rate limiting live in the companion crate; this
//! module owns the record type and the pure transformations on it.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::lexicon::Lexicon;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefStatus {
    Found,
    Missing,
    Error,
}

impl DefStatus {
    pub fn label(&self) -> &'static str {
        match self {
            DefStatus::Found => "found",
            DefStatus::Missing => "missing",
            DefStatus::Error => "error",
        }
    }
}

/// Cached lookup outcome for one word. Missing words are cached too, so gap
/// reports reproduce offline.
#[derive(Debug, Clone, PartialEq)]
pub struct DefinitionRecord {
    pub word: String,
    /// Definition texts in API order; nonempty iff status is Found.
    pub definitions: Vec<String>,
    pub source_url: String,
    /// Unix seconds at fetch time.
    pub fetched_at: u64,
    pub status: DefStatus,
    /// Error detail for Error records.
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DefsError {
    FoundWithoutDefinitions { word: String },
    NotFound { word: String, status: DefStatus },
}

impl fmt::Display for DefsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DefsError::FoundWithoutDefinitions { word } => {
                write!(
                    f,
                    "record for '{word}' is Found but has no nonempty definition"
                )
            }
            DefsError::NotFound { word, status } => {
                write!(
                    f,
                    "record for '{word}' has status {} (need Found)",
                    status.label()
                )
            }
        }
    }
}

impl core::error::Error for DefsError {}

impl DefinitionRecord {
    pub fn found(
        word: &str,
        definitions: Vec<String>,
        source_url: &str,
        fetched_at: u64,
    ) -> Result<Self, DefsError> {
        if definitions.iter().all(|d| d.trim().is_empty()) {
            return Err(DefsError::FoundWithoutDefinitions {
                word: word.to_string(),
            });
        }
        Ok(DefinitionRecord {
            word: word.to_string(),
            definitions,
            source_url: source_url.to_string(),
            fetched_at,
            status: DefStatus::Found,
            detail: None,
        })
    }

    pub fn missing(word: &str, source_url: &str, fetched_at: u64) -> Self {
        DefinitionRecord {
            word: word.to_string(),
            definitions: Vec::new(),
            source_url: source_url.to_string(),
            fetched_at,
            status: DefStatus::Missing,
            detail: None,
        }
    }

    pub fn errored(word: &str, source_url: &str, fetched_at: u64, detail: &str) -> Self {
        DefinitionRecord {
            word: word.to_string(),
            definitions: Vec::new(),
            source_url: source_url.to_string(),
            fetched_at,
            status: DefStatus::Error,
            detail: Some(detail.to_string()),
        }
    }
}

/// Join the record's definitions in API order with `"; "`, collapse
/// whitespace, lowercase, and truncate to `max_words` whitespace words.
pub fn normalize_definition(
    record: &DefinitionRecord,
    max_words: usize,
) -> Result<String, DefsError> {
    if record.status != DefStatus::Found {
        return Err(DefsError::NotFound {
            word: record.word.clone(),
            status: record.status,
        });
    }
    let joined = record.definitions.join("; ");
    let collapsed: Vec<&str> = joined.split_whitespace().collect();
    let text = collapsed.join(" ").to_lowercase();
    let words: Vec<&str> = text.split_whitespace().take(max_words).collect();
    Ok(words.join(" "))
}

/// Cache coverage against a lexicon: exact status partition of the cached
/// words, plus the sorted missing-word list. Words with no cache entry are
/// counted pending rather than treated as errors.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub found: usize,
    pub missing: usize,
    pub errored: usize,
    pub pending: usize,
    pub missing_words: Vec<String>,
}

pub fn coverage_report(
    lexicon: &Lexicon,
    cache: &BTreeMap<String, DefinitionRecord>,
) -> CoverageReport {
    let mut report = CoverageReport {
        found: 0,
        missing: 0,
        errored: 0,
        pending: 0,
        missing_words: Vec::new(),
    };
    for entry in lexicon.entries() {
        match cache.get(&entry.word) {
            Some(rec) => match rec.status {
                DefStatus::Found => report.found += 1,
                DefStatus::Missing => {
                    report.missing += 1;
                    report.missing_words.push(entry.word.clone());
                }
                DefStatus::Error => report.errored += 1,
            },
            None => report.pending += 1,
        }
    }
    report.missing_words.sort();
    report
}
