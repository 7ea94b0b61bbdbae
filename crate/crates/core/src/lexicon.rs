//! labMT-style lexicons: parsing, validation, grouping, and a simple
//! lexicon-average text scorer.
//!
//! A lexicon row carries a word, the mean happiness rating `h_avg` on the
//! 1-9 scale (1 saddest, 9 happiest), and the standard deviation of the
//! human ratings. Words are normalized (lowercase, Unicode NFC, trimmed)
//! and must be unique after normalization.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use unicode_normalization::UnicodeNormalization;

/// Lower bound of the happiness scale.
pub const SCALE_MIN: f64 = 1.0;
/// Upper bound of the happiness scale.
pub const SCALE_MAX: f64 = 9.0;
/// Number of raters per word in the source lexicon when not stated.
pub const DEFAULT_N_RATERS: u32 = 50;

/// Canonical word form used for all lookups: NFC, lowercase, trimmed.
pub fn normalize_word(word: &str) -> String {
    word.trim().nfc().collect::<String>().to_lowercase()
}

/// One human-rated lexicon row.
#[derive(Debug, Clone, PartialEq)]
pub struct LexiconEntry {
    pub word: String,
    pub h_avg: f64,
    pub sigma: f64,
    pub rank: Option<u32>,
    pub n_raters: u32,
}

impl LexiconEntry {
    pub fn new(word: &str, h_avg: f64, sigma: f64) -> Result<Self, LexiconError> {
        let normalized = normalize_word(word);
        if normalized.is_empty() {
            return Err(LexiconError::EmptyWord);
        }
        if !(SCALE_MIN..=SCALE_MAX).contains(&h_avg) || !h_avg.is_finite() {
            return Err(LexiconError::ScoreOutOfRange { value: h_avg });
        }
        if sigma < 0.0 || !sigma.is_finite() {
            return Err(LexiconError::NegativeSigma { value: sigma });
        }
        Ok(LexiconEntry {
            word: normalized,
            h_avg,
            sigma,
            rank: None,
            n_raters: DEFAULT_N_RATERS,
        })
    }

    pub fn group(&self) -> SentimentGroup {
        // h_avg is validated on construction, so grouping cannot fail.
        SentimentGroup::of(self.h_avg).expect("validated score")
    }
}

/// Polarity band of a happiness score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SentimentGroup {
    Negative,
    Neutral,
    Positive,
}

impl SentimentGroup {
    /// Map a score to its band: Negative [1,4), Neutral [4,6], Positive (6,9].
    pub fn of(h: f64) -> Result<SentimentGroup, LexiconError> {
        if !(SCALE_MIN..=SCALE_MAX).contains(&h) || !h.is_finite() {
            return Err(LexiconError::ScoreOutOfRange { value: h });
        }
        Ok(if h < 4.0 {
            SentimentGroup::Negative
        } else if h <= 6.0 {
            SentimentGroup::Neutral
        } else {
            SentimentGroup::Positive
        })
    }

    pub const ALL: [SentimentGroup; 3] = [
        SentimentGroup::Negative,
        SentimentGroup::Neutral,
        SentimentGroup::Positive,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            SentimentGroup::Negative => "negative",
            SentimentGroup::Neutral => "neutral",
            SentimentGroup::Positive => "positive",
        }
    }
}

/// Maps logical columns onto TSV header names.
///
/// labMT distributions vary in column order and naming, so the parser looks
/// fields up by header rather than position.
#[derive(Debug, Clone)]
pub struct ColumnMap {
    pub word: String,
    pub h_avg: String,
    pub sigma: String,
    pub rank: Option<String>,
    pub n_raters: Option<String>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            word: "word".to_owned(),
            h_avg: "happiness_average".to_owned(),
            sigma: "happiness_standard_deviation".to_owned(),
            rank: Some("happiness_rank".to_owned()),
            n_raters: None,
        }
    }
}

/// An immutable, order-preserving collection of validated entries.
#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
    index: BTreeMap<String, usize>,
    pub source_name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LexiconError {
    EmptyWord,
    ScoreOutOfRange { value: f64 },
    NegativeSigma { value: f64 },
    MissingColumn { column: String },
    MalformedRow { line: usize, reason: String },
    DuplicateWord { line: usize, word: String },
    EmptyInput,
}

impl fmt::Display for LexiconError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LexiconError::EmptyWord => write!(f, "word is empty after normalization"),
            LexiconError::ScoreOutOfRange { value } => {
                write!(
                    f,
                    "happiness score {value} outside [{SCALE_MIN}, {SCALE_MAX}]"
                )
            }
            LexiconError::NegativeSigma { value } => {
                write!(f, "standard deviation {value} is negative or non-finite")
            }
            LexiconError::MissingColumn { column } => {
                write!(f, "required column '{column}' missing from header")
            }
            LexiconError::MalformedRow { line, reason } => {
                write!(f, "line {line}: {reason}")
            }
            LexiconError::DuplicateWord { line, word } => {
                write!(f, "line {line}: duplicate word '{word}'")
            }
            LexiconError::EmptyInput => write!(f, "input has no header row"),
        }
    }
}

impl core::error::Error for LexiconError {}

impl Lexicon {
    pub fn from_entries(
        entries: Vec<LexiconEntry>,
        source_name: &str,
    ) -> Result<Self, LexiconError> {
        let mut index = BTreeMap::new();
        for (i, e) in entries.iter().enumerate() {
            if index.insert(e.word.clone(), i).is_some() {
                return Err(LexiconError::DuplicateWord {
                    line: i + 1,
                    word: e.word.clone(),
                });
            }
        }
        Ok(Lexicon {
            entries,
            index,
            source_name: source_name.to_owned(),
        })
    }

    /// Parse a tab-delimited lexicon with a header row.
    ///
    /// Every failure carries the 1-based line number of the offending row.
    pub fn parse_tsv(
        text: &str,
        columns: &ColumnMap,
        source_name: &str,
    ) -> Result<Self, LexiconError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(LexiconError::EmptyInput)?;
        let headers: Vec<&str> = header.split('\t').map(str::trim).collect();

        let col = |name: &str| -> Result<usize, LexiconError> {
            headers
                .iter()
                .position(|h| *h == name)
                .ok_or_else(|| LexiconError::MissingColumn {
                    column: name.to_owned(),
                })
        };
        let word_col = col(&columns.word)?;
        let h_col = col(&columns.h_avg)?;
        let sigma_col = col(&columns.sigma)?;
        let rank_col = columns
            .rank
            .as_ref()
            .and_then(|name| headers.iter().position(|h| h == name));
        let raters_col = columns
            .n_raters
            .as_ref()
            .and_then(|name| headers.iter().position(|h| h == name));

        let mut entries = Vec::new();
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        for (lineno0, line) in lines {
            let lineno = lineno0 + 1; // 1-based
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let need = [word_col, h_col, sigma_col]
                .into_iter()
                .chain(rank_col)
                .chain(raters_col)
                .max()
                .unwrap_or(0);
            if fields.len() <= need {
                return Err(LexiconError::MalformedRow {
                    line: lineno,
                    reason: format!(
                        "expected at least {} columns, found {}",
                        need + 1,
                        fields.len()
                    ),
                });
            }
            let parse_f64 = |s: &str, what: &str| -> Result<f64, LexiconError> {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| LexiconError::MalformedRow {
                        line: lineno,
                        reason: format!("non-numeric {what} '{}'", s.trim()),
                    })
            };
            let h_avg = parse_f64(fields[h_col], "happiness score")?;
            let sigma = parse_f64(fields[sigma_col], "standard deviation")?;
            let mut entry =
                LexiconEntry::new(fields[word_col], h_avg, sigma).map_err(|e| match e {
                    LexiconError::EmptyWord => LexiconError::MalformedRow {
                        line: lineno,
                        reason: "empty word".to_owned(),
                    },
                    LexiconError::ScoreOutOfRange { value } => LexiconError::MalformedRow {
                        line: lineno,
                        reason: format!("score {value} out of [{SCALE_MIN}, {SCALE_MAX}]"),
                    },
                    LexiconError::NegativeSigma { value } => LexiconError::MalformedRow {
                        line: lineno,
                        reason: format!("invalid standard deviation {value}"),
                    },
                    other => other,
                })?;
            if let Some(c) = rank_col {
                let raw = fields[c].trim();
                if !raw.is_empty() {
                    entry.rank =
                        Some(raw.parse::<u32>().map_err(|_| LexiconError::MalformedRow {
                            line: lineno,
                            reason: format!("non-integer rank '{raw}'"),
                        })?);
                }
            }
            if let Some(c) = raters_col {
                entry.n_raters =
                    fields[c]
                        .trim()
                        .parse::<u32>()
                        .map_err(|_| LexiconError::MalformedRow {
                            line: lineno,
                            reason: format!("non-integer rater count '{}'", fields[c].trim()),
                        })?;
            }
            if index.contains_key(&entry.word) {
                return Err(LexiconError::DuplicateWord {
                    line: lineno,
                    word: entry.word,
                });
            }
            index.insert(entry.word.clone(), entries.len());
            entries.push(entry);
        }
        Ok(Lexicon {
            entries,
            index,
            source_name: source_name.to_owned(),
        })
    }

    /// Serialize back to the same tab-delimited format `parse_tsv` reads.
    pub fn to_tsv(&self) -> String {
        let any_rank = self.entries.iter().any(|e| e.rank.is_some());
        let mut out = String::new();
        out.push_str("word\t");
        if any_rank {
            out.push_str("happiness_rank\t");
        }
        out.push_str("happiness_average\thappiness_standard_deviation\n");
        for e in &self.entries {
            out.push_str(&e.word);
            out.push('\t');
            if any_rank {
                if let Some(r) = e.rank {
                    out.push_str(&r.to_string());
                }
                out.push('\t');
            }
            out.push_str(&format!("{}\t{}\n", e.h_avg, e.sigma));
        }
        out
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Look up an entry by (normalized) word.
    pub fn get(&self, word: &str) -> Option<&LexiconEntry> {
        self.index
            .get(&normalize_word(word))
            .map(|&i| &self.entries[i])
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(&normalize_word(word))
    }

    /// Unweighted mean score of the lexicon words found in `text`.
    ///
    /// Tokens are whitespace-delimited, normalized, and stripped of
    /// surrounding punctuation; punctuation-only tokens are ignored.
    /// Returns `None` when no token matches.
    pub fn score_text(&self, text: &str) -> Option<f64> {
        let mut sum = 0.0;
        let mut count = 0usize;
        for raw in text.split_whitespace() {
            let token = normalize_word(raw);
            let token = token.trim_matches(|c: char| !c.is_alphanumeric());
            if token.is_empty() {
                continue;
            }
            if let Some(&i) = self.index.get(token) {
                sum += self.entries[i].h_avg;
                count += 1;
            }
        }
        (count > 0).then(|| sum / count as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_rows() -> &'static str {
        "word\thappiness_rank\thappiness_average\thappiness_standard_deviation\n\
         the\t2720\t4.98\t0.91\n\
         hahaha\t32\t7.94\t1.56\n\
         church\t1553\t5.48\t1.85\n\
         cigarettes\t9724\t3.31\t2.6\n"
    }

    #[test]
    fn parses_published_rows() {
        let lex = Lexicon::parse_tsv(paper_rows(), &ColumnMap::default(), "test").unwrap();
        assert_eq!(lex.len(), 4);
        let the = lex.get("the").unwrap();
        assert_eq!(the.h_avg, 4.98);
        assert_eq!(the.sigma, 0.91);
        assert_eq!(the.rank, Some(2720));
        assert_eq!(the.n_raters, 50);
        let hahaha = lex.get("hahaha").unwrap();
        assert_eq!(hahaha.h_avg, 7.94);
        assert_eq!(hahaha.sigma, 1.56);
    }

    #[test]
    fn rejects_out_of_range_score() {
        let text = "word\thappiness_average\thappiness_standard_deviation\nbad\t9.5\t0.3\n";
        let err = Lexicon::parse_tsv(text, &ColumnMap::default(), "t").unwrap_err();
        match err {
            LexiconError::MalformedRow { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_duplicates_after_normalization() {
        let text = "word\thappiness_average\thappiness_standard_deviation\n\
                    Dog\t6.0\t1.0\n dog \t6.1\t1.0\n";
        let err = Lexicon::parse_tsv(text, &ColumnMap::default(), "t").unwrap_err();
        assert_eq!(
            err,
            LexiconError::DuplicateWord {
                line: 3,
                word: "dog".into()
            }
        );
    }

    #[test]
    fn rejects_non_numeric_and_short_rows() {
        let text = "word\thappiness_average\thappiness_standard_deviation\nfoo\tnotanumber\t1.0\n";
        assert!(matches!(
            Lexicon::parse_tsv(text, &ColumnMap::default(), "t"),
            Err(LexiconError::MalformedRow { line: 2, .. })
        ));
        let text = "word\thappiness_average\thappiness_standard_deviation\nfoo\t5.0\n";
        assert!(matches!(
            Lexicon::parse_tsv(text, &ColumnMap::default(), "t"),
            Err(LexiconError::MalformedRow { line: 2, .. })
        ));
    }

    #[test]
    fn missing_column_is_reported() {
        let text = "word\thappiness_average\nfoo\t5.0\n";
        assert_eq!(
            Lexicon::parse_tsv(text, &ColumnMap::default(), "t").unwrap_err(),
            LexiconError::MissingColumn {
                column: "happiness_standard_deviation".into()
            }
        );
    }

    #[test]
    fn custom_column_mapping() {
        let text = "score\tterm\tsd\n5.5\tfoo\t1.2\n";
        let cols = ColumnMap {
            word: "term".into(),
            h_avg: "score".into(),
            sigma: "sd".into(),
            rank: None,
            n_raters: None,
        };
        let lex = Lexicon::parse_tsv(text, &cols, "t").unwrap();
        assert_eq!(lex.get("foo").unwrap().h_avg, 5.5);
    }

    #[test]
    fn groups_match_score_bands() {
        assert_eq!(SentimentGroup::of(3.31).unwrap(), SentimentGroup::Negative);
        assert_eq!(SentimentGroup::of(4.0).unwrap(), SentimentGroup::Neutral);
        assert_eq!(SentimentGroup::of(4.98).unwrap(), SentimentGroup::Neutral);
        assert_eq!(SentimentGroup::of(6.0).unwrap(), SentimentGroup::Neutral);
        assert_eq!(SentimentGroup::of(7.94).unwrap(), SentimentGroup::Positive);
        assert_eq!(SentimentGroup::of(1.0).unwrap(), SentimentGroup::Negative);
        assert_eq!(SentimentGroup::of(9.0).unwrap(), SentimentGroup::Positive);
        assert!(SentimentGroup::of(0.5).is_err());
        assert!(SentimentGroup::of(9.5).is_err());
    }

    #[test]
    fn group_is_total_over_entries() {
        let lex = Lexicon::parse_tsv(paper_rows(), &ColumnMap::default(), "t").unwrap();
        for e in lex.entries() {
            let _ = e.group();
        }
    }

    #[test]
    fn score_text_examples() {
        let lex = Lexicon::parse_tsv(paper_rows(), &ColumnMap::default(), "t").unwrap();
        assert_eq!(lex.score_text("the the"), Some(4.98));
        assert_eq!(lex.score_text("zzzqqq"), None);
        let mixed = lex.score_text("the hahaha").unwrap();
        assert!((mixed - 6.46).abs() < 1e-12);
        // punctuation-only tokens are skipped, attached punctuation stripped
        assert_eq!(lex.score_text("... the! ?"), Some(4.98));
        assert_eq!(lex.score_text(""), None);
    }

    #[test]
    fn tsv_round_trip_is_identity() {
        let lex = Lexicon::parse_tsv(paper_rows(), &ColumnMap::default(), "t").unwrap();
        let text = lex.to_tsv();
        let back = Lexicon::parse_tsv(&text, &ColumnMap::default(), "t").unwrap();
        assert_eq!(lex.entries(), back.entries());
        assert_eq!(text, back.to_tsv());
    }

    #[test]
    fn normalization_is_nfc_lower_trim() {
        // U+0065 U+0301 (e + combining acute) composes to U+00E9
        let composed = normalize_word(" Cafe\u{0301} ");
        assert_eq!(composed, "caf\u{e9}");
    }
}
