//! Token vocabularies, the trainable embedding matrix, pre-trained vector
//! ingestion, and mask-aware mean pooling.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::lexicon::normalize_word;
use crate::rng::Rng;
use crate::tokenize::{char_ngrams, IdLookup, NgramConfig};

pub const PAD_ID: u32 = 0;
pub const UNK_ID: u32 = 1;

/// Token vocabulary built from a training corpus. Ids are dense, with 0 and
/// 1 reserved for padding and unknowns; the rest follow first-occurrence
/// order.
#[derive(Debug, Clone)]
pub struct VocabBuild {
    tokens: Vec<String>,
    map: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EmbedError {
    EmptyCorpus,
    BadHeader {
        reason: String,
    },
    DimMismatch {
        expected: usize,
        found: usize,
        line: usize,
    },
    NonFinite {
        line: usize,
    },
    AllMasked,
    ShapeMismatch {
        values: usize,
        dim: usize,
        mask: usize,
    },
}

impl fmt::Display for EmbedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmbedError::EmptyCorpus => write!(f, "vocabulary corpus contains no tokens"),
            EmbedError::BadHeader { reason } => write!(f, "bad vector file header: {reason}"),
            EmbedError::DimMismatch {
                expected,
                found,
                line,
            } => {
                write!(
                    f,
                    "line {line}: expected {expected} vector components, found {found}"
                )
            }
            EmbedError::NonFinite { line } => write!(f, "line {line}: non-finite vector component"),
            EmbedError::AllMasked => write!(f, "mean pooling requires at least one unmasked row"),
            EmbedError::ShapeMismatch { values, dim, mask } => {
                write!(
                    f,
                    "{values} values do not form {mask} rows of dimension {dim}"
                )
            }
        }
    }
}

impl core::error::Error for EmbedError {}

impl VocabBuild {
    /// Assign ids by first occurrence across the corpus (PAD=0, UNK=1,
    /// corpus tokens from 2).
    pub fn from_corpus<S: AsRef<str>>(token_lists: &[Vec<S>]) -> Result<Self, EmbedError> {
        if token_lists.iter().all(|l| l.is_empty()) {
            return Err(EmbedError::EmptyCorpus);
        }
        let mut tokens = vec!["<pad>".to_owned(), "<unk>".to_owned()];
        let mut map = BTreeMap::new();
        map.insert(tokens[0].clone(), PAD_ID);
        map.insert(tokens[1].clone(), UNK_ID);
        for list in token_lists {
            for t in list {
                let t = t.as_ref();
                if !map.contains_key(t) {
                    map.insert(t.to_owned(), tokens.len() as u32);
                    tokens.push(t.to_owned());
                }
            }
        }
        Ok(VocabBuild { tokens, map })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// FNV-1a over the token listing; identifies the vocabulary in manifests.
    pub fn hash(&self) -> u64 {
        crate::rng::fnv1a(self.tokens.join("\n").as_bytes())
    }
}

impl IdLookup for VocabBuild {
    fn id_of(&self, token: &str) -> Option<u32> {
        self.map.get(token).copied()
    }

    fn unk_id(&self) -> u32 {
        UNK_ID
    }
}

/// Parsed plain-text vector file: `<count> <dim>` header, then one
/// `<token> <floats...>` row per line. Tokens are normalized on load; the
/// first occurrence wins.
#[derive(Debug, Clone)]
pub struct VectorFile {
    pub dim: usize,
    map: BTreeMap<String, Vec<f64>>,
}

impl VectorFile {
    pub fn parse(text: &str) -> Result<Self, EmbedError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| EmbedError::BadHeader {
            reason: "empty file".to_owned(),
        })?;
        let mut parts = header.split_whitespace();
        let _count: usize =
            parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| EmbedError::BadHeader {
                    reason: "missing count".to_owned(),
                })?;
        let dim: usize =
            parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| EmbedError::BadHeader {
                    reason: "missing dimension".to_owned(),
                })?;
        if dim == 0 {
            return Err(EmbedError::BadHeader {
                reason: "zero dimension".to_owned(),
            });
        }
        let mut map = BTreeMap::new();
        for (lineno0, line) in lines {
            let lineno = lineno0 + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let token = fields.next().unwrap_or("");
            let values: Result<Vec<f64>, _> = fields.map(str::parse::<f64>).collect();
            let values = values.map_err(|_| EmbedError::DimMismatch {
                expected: dim,
                found: 0,
                line: lineno,
            })?;
            if values.len() != dim {
                return Err(EmbedError::DimMismatch {
                    expected: dim,
                    found: values.len(),
                    line: lineno,
                });
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(EmbedError::NonFinite { line: lineno });
            }
            map.entry(normalize_word(token)).or_insert(values);
        }
        Ok(VectorFile { dim, map })
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.map.get(&normalize_word(token)).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Dense V x d embedding table. Row 0 (padding) is pinned to zero and stays
/// zero through training; the exclusion is enforced by the optimizer path.
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix {
    pub vocab_size: usize,
    pub dim: usize,
    pub weights: Vec<f64>,
    pub trainable: bool,
}

impl EmbeddingMatrix {
    /// Seeded uniform init in [-0.05, 0.05] with a zero pad row.
    pub fn random(vocab_size: usize, dim: usize, rng: &mut Rng) -> Self {
        let mut weights = vec![0.0; vocab_size * dim];
        for row in 1..vocab_size {
            for col in 0..dim {
                weights[row * dim + col] = rng.uniform(-0.05, 0.05);
            }
        }
        EmbeddingMatrix {
            vocab_size,
            dim,
            weights,
            trainable: true,
        }
    }

    /// Initialize from a vector file: tokens found in the file take the
    /// file's vector, everything else a seeded uniform row in [-0.05, 0.05].
    /// The per-token streams make the result independent of vocabulary
    /// order.
    pub fn from_pretrained(
        vectors: &VectorFile,
        vocab: &VocabBuild,
        dim: usize,
        seed: u64,
    ) -> Result<Self, EmbedError> {
        if vectors.dim != dim {
            return Err(EmbedError::DimMismatch {
                expected: dim,
                found: vectors.dim,
                line: 1,
            });
        }
        let vocab_size = vocab.len();
        let mut weights = vec![0.0; vocab_size * dim];
        for (row, token) in vocab.tokens().iter().enumerate().skip(1) {
            match vectors.get(token) {
                Some(v) => weights[row * dim..(row + 1) * dim].copy_from_slice(v),
                None => {
                    let mut rng = Rng::derive(seed, &format!("oov.{token}"));
                    for col in 0..dim {
                        weights[row * dim + col] = rng.uniform(-0.05, 0.05);
                    }
                }
            }
        }
        Ok(EmbeddingMatrix {
            vocab_size,
            dim,
            weights,
            trainable: true,
        })
    }

    pub fn row(&self, id: u32) -> &[f64] {
        let i = id as usize;
        &self.weights[i * self.dim..(i + 1) * self.dim]
    }
}

/// Arithmetic mean over the unmasked rows of a `rows x dim` matrix.
pub fn pool_mean(embedded: &[f64], dim: usize, mask: &[bool]) -> Result<Vec<f64>, EmbedError> {
    if dim == 0 || embedded.len() != dim * mask.len() {
        return Err(EmbedError::ShapeMismatch {
            values: embedded.len(),
            dim,
            mask: mask.len(),
        });
    }
    let n_real = mask.iter().filter(|&&m| m).count();
    if n_real == 0 {
        return Err(EmbedError::AllMasked);
    }
    let mut out = vec![0.0; dim];
    for (row, &keep) in mask.iter().enumerate() {
        if keep {
            for (o, v) in out.iter_mut().zip(&embedded[row * dim..(row + 1) * dim]) {
                *o += v;
            }
        }
    }
    for o in &mut out {
        *o /= n_real as f64;
    }
    Ok(out)
}

/// How a baseline feature vector for a word was obtained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureSource {
    /// The vector file contained the whole word.
    Word,
    /// Mean of the word's character n-gram vectors found in the file.
    NgramMean { used: usize },
}

/// Baseline input features: the whole-word vector when the file has one,
/// otherwise the mean over whatever of the word's n-grams the file covers.
/// `None` when neither is available.
pub fn word_feature(
    word: &str,
    vectors: &VectorFile,
    cfg: &NgramConfig,
) -> Option<(Vec<f64>, FeatureSource)> {
    if let Some(v) = vectors.get(word) {
        return Some((v.to_vec(), FeatureSource::Word));
    }
    let grams = char_ngrams(&normalize_word(word), cfg).ok()?;
    let mut sum = vec![0.0; vectors.dim];
    let mut used = 0usize;
    for g in grams.iter().skip(1) {
        if let Some(v) = vectors.get(g) {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
            used += 1;
        }
    }
    if used == 0 {
        return None;
    }
    for s in &mut sum {
        *s /= used as f64;
    }
    Some((sum, FeatureSource::NgramMean { used }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn vocab_first_occurrence_order() {
        let corpus = vec![
            vec!["a".to_string(), "b".to_string()],
            vec!["b".to_string(), "c".to_string()],
        ];
        let vocab = VocabBuild::from_corpus(&corpus).unwrap();
        assert_eq!(vocab.id_of("a"), Some(2));
        assert_eq!(vocab.id_of("b"), Some(3));
        assert_eq!(vocab.id_of("c"), Some(4));
        assert_eq!(vocab.len(), 5);
    }

    #[test]
    fn vocab_rejects_empty_corpus() {
        let corpus: Vec<Vec<String>> = vec![vec![]];
        assert_eq!(
            VocabBuild::from_corpus(&corpus).unwrap_err(),
            EmbedError::EmptyCorpus
        );
    }

    #[test]
    fn vocab_dedups_repeats() {
        let corpus = vec![vec!["x"; 10]];
        let vocab = VocabBuild::from_corpus(&corpus).unwrap();
        assert_eq!(vocab.len(), 3);
    }

    #[test]
    fn vocab_hash_tracks_content() {
        let a = VocabBuild::from_corpus(&[vec!["a", "b"]]).unwrap();
        let b = VocabBuild::from_corpus(&[vec!["a", "b"]]).unwrap();
        let c = VocabBuild::from_corpus(&[vec!["a", "c"]]).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn vector_file_direct_read() {
        let vf = VectorFile::parse("2 3\nfoo 0.1 0.2 0.3\nbar 1 2 3\n").unwrap();
        assert_eq!(vf.get("foo").unwrap(), &[0.1, 0.2, 0.3]);
        assert_eq!(vf.get("FOO").unwrap(), &[0.1, 0.2, 0.3]);
        assert!(vf.get("baz").is_none());
    }

    #[test]
    fn vector_file_rejects_bad_rows() {
        assert!(matches!(
            VectorFile::parse("1 3\nfoo 0.1 0.2\n"),
            Err(EmbedError::DimMismatch { line: 2, .. })
        ));
        assert!(matches!(
            VectorFile::parse("1 2\nfoo nan 1\n"),
            Err(EmbedError::NonFinite { line: 2 })
        ));
        assert!(matches!(
            VectorFile::parse(""),
            Err(EmbedError::BadHeader { .. })
        ));
    }

    #[test]
    fn pretrained_rows_and_seeded_oov() {
        let vf = VectorFile::parse("1 3\nfoo 0.1 0.2 0.3\n").unwrap();
        let vocab = VocabBuild::from_corpus(&[vec!["foo", "mystery"]]).unwrap();
        let a = EmbeddingMatrix::from_pretrained(&vf, &vocab, 3, 7).unwrap();
        let b = EmbeddingMatrix::from_pretrained(&vf, &vocab, 7, 7);
        assert!(b.is_err(), "dimension mismatch must be rejected");
        assert_eq!(a.row(vocab.id_of("foo").unwrap()), &[0.1, 0.2, 0.3]);
        assert!(a.row(PAD_ID).iter().all(|&v| v == 0.0));
        let oov = a.row(vocab.id_of("mystery").unwrap()).to_vec();
        assert!(oov.iter().all(|v| v.abs() <= 0.05));
        // reproducible across runs
        let again = EmbeddingMatrix::from_pretrained(&vf, &vocab, 3, 7).unwrap();
        assert_eq!(oov, again.row(vocab.id_of("mystery").unwrap()));
        // and dependent on the seed
        let other = EmbeddingMatrix::from_pretrained(&vf, &vocab, 3, 8).unwrap();
        assert_ne!(oov, other.row(vocab.id_of("mystery").unwrap()));
    }

    #[test]
    fn pool_mean_masks_rows() {
        let rows = [1.0, 3.0, 3.0, 5.0];
        assert_eq!(pool_mean(&rows, 2, &[true, true]).unwrap(), vec![2.0, 4.0]);
        let rows = [1.0, 1.0, 9.0, 9.0];
        assert_eq!(pool_mean(&rows, 2, &[true, false]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(
            pool_mean(&rows, 2, &[false, false]).unwrap_err(),
            EmbedError::AllMasked
        );
    }

    #[test]
    fn pool_mean_ignores_masked_values() {
        let mut rng = Rng::seed_from(5);
        let dim = 4;
        let base: Vec<f64> = (0..3 * dim).map(|_| rng.normal()).collect();
        let mask = [true, false, true];
        let a = pool_mean(&base, dim, &mask).unwrap();
        let mut garbled = base.clone();
        for v in &mut garbled[dim..2 * dim] {
            *v = 1e9;
        }
        assert_eq!(a, pool_mean(&garbled, dim, &mask).unwrap());
    }

    #[test]
    fn word_feature_prefers_whole_word() {
        let vf = VectorFile::parse("3 2\ncat 1 1\ncatn 5 5\natn 3 3\n").unwrap();
        let cfg = NgramConfig::default();
        let (v, src) = word_feature("cat", &vf, &cfg).unwrap();
        assert_eq!((v, src), (vec![1.0, 1.0], FeatureSource::Word));
        // "catnip" is absent; the file covers cat, atn, and catn
        let (v, src) = word_feature("catnip", &vf, &cfg).unwrap();
        assert_eq!(v, vec![3.0, 3.0]);
        assert_eq!(src, FeatureSource::NgramMean { used: 3 });
        assert!(word_feature("zzz", &vf, &cfg).is_none());
    }
}
