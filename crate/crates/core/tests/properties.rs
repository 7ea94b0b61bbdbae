//! Property tests for the tokenization, metric, and split invariants.

use proptest::prelude::*;

use lexaug_core::eval::{interval_iou, percentile};
use lexaug_core::lexicon::SentimentGroup;
use lexaug_core::tokenize::{
    char_ngrams, encode_tokens, wordpiece_tokenize, IdLookup, NgramConfig, SubwordVocab,
    TokenSequence,
};
use lexaug_core::train::{make_splits, SplitSpec};

fn ascii_word() -> impl Strategy<Value = String> {
    proptest::string::string_regex("[a-z]{1,20}").unwrap()
}

struct NoVocab;

impl IdLookup for NoVocab {
    fn id_of(&self, _token: &str) -> Option<u32> {
        None
    }
    fn unk_id(&self) -> u32 {
        1
    }
}

proptest! {
    #[test]
    fn ngram_enumeration_matches_brute_force(word in ascii_word()) {
        let cfg = NgramConfig::default();
        let got = char_ngrams(&word, &cfg).unwrap();
        // brute force over all substrings, shortest n first
        let chars: Vec<char> = word.chars().collect();
        let mut expect = vec![word.clone()];
        for n in cfg.n_min..=cfg.n_max {
            if chars.len() >= n {
                for s in 0..=(chars.len() - n) {
                    expect.push(chars[s..s + n].iter().collect());
                }
            }
        }
        prop_assert_eq!(&got, &expect);
        let l = chars.len();
        let count: usize = 1 + (cfg.n_min..=cfg.n_max)
            .map(|n| if l >= n { l - n + 1 } else { 0 })
            .sum::<usize>();
        prop_assert_eq!(got.len(), count);
    }

    #[test]
    fn encode_tokens_mask_and_pad_invariants(
        n_tokens in 1usize..80,
        seq_len in 1usize..64,
    ) {
        let tokens: Vec<String> = (0..n_tokens).map(|i| format!("t{i}")).collect();
        let cfg = NgramConfig { seq_len, ..NgramConfig::default() };
        let seq = encode_tokens(&tokens, &NoVocab, &cfg).unwrap();
        prop_assert_eq!(seq.len(), seq_len);
        prop_assert_eq!(seq.real_len(), n_tokens.min(seq_len));
        // real tokens form a prefix; every masked slot holds the pad id
        let mut seen_pad = false;
        for (&id, &keep) in seq.ids().iter().zip(seq.mask()) {
            if keep {
                prop_assert!(!seen_pad, "interior padding");
            } else {
                seen_pad = true;
                prop_assert_eq!(id, cfg.pad_id);
            }
        }
    }

    #[test]
    fn wordpiece_round_trips_known_words(word in ascii_word()) {
        // vocabulary of all single letters plus their continuations can
        // decompose any lowercase ascii word
        let mut lines = vec!["[PAD]".to_string(), "[UNK]".into(), "[CLS]".into(), "[SEP]".into()];
        for c in "abcdefghijklmnopqrstuvwxyz".chars() {
            lines.push(c.to_string());
            lines.push(format!("##{c}"));
        }
        let vocab = SubwordVocab::parse(&lines.join("\n")).unwrap();
        let pieces = wordpiece_tokenize(&word, &vocab);
        let rebuilt: String = pieces
            .iter()
            .map(|p| p.strip_prefix("##").unwrap_or(p))
            .collect();
        prop_assert_eq!(rebuilt, word);
    }

    #[test]
    fn identical_inputs_encode_identically(word in ascii_word()) {
        let cfg = NgramConfig::default();
        let a = char_ngrams(&word, &cfg).unwrap();
        let b = char_ngrams(&word, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn percentiles_are_monotone_and_bounded(
        values in proptest::collection::vec(-100.0f64..100.0, 1..60),
        ranks in proptest::collection::vec(0.0f64..=100.0, 1..8),
    ) {
        let mut sorted_ranks = ranks.clone();
        sorted_ranks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut prev = f64::NEG_INFINITY;
        for r in sorted_ranks {
            let p = percentile(&values, r).unwrap();
            prop_assert!(p >= min - 1e-12 && p <= max + 1e-12);
            prop_assert!(p >= prev - 1e-12);
            prev = p;
        }
        prop_assert_eq!(percentile(&values, 0.0).unwrap(), min);
        prop_assert_eq!(percentile(&values, 100.0).unwrap(), max);
    }

    #[test]
    fn iou_is_symmetric_bounded_and_identity_only_for_equal(
        a_lo in 0.0f64..9.0, a_len in 0.01f64..4.0,
        b_lo in 0.0f64..9.0, b_len in 0.01f64..4.0,
    ) {
        let a = (a_lo, a_lo + a_len);
        let b = (b_lo, b_lo + b_len);
        let ab = interval_iou(a, b).unwrap();
        prop_assert_eq!(ab, interval_iou(b, a).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
        if ab == 1.0 {
            prop_assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
        }
        prop_assert_eq!(interval_iou(a, a).unwrap(), 1.0);
    }

    #[test]
    fn group_of_is_total_with_two_breakpoints(h in 1.0f64..=9.0) {
        let g = SentimentGroup::of(h).unwrap();
        let expect = if h < 4.0 {
            SentimentGroup::Negative
        } else if h <= 6.0 {
            SentimentGroup::Neutral
        } else {
            SentimentGroup::Positive
        };
        prop_assert_eq!(g, expect);
    }

    #[test]
    fn splits_partition_for_any_size_and_seed(
        n in 60usize..400,
        seed in 0u64..500,
    ) {
        let spec = SplitSpec { holdout_fraction: 0.2, folds: 5, seed };
        let splits = make_splits(n, &spec).unwrap();
        let mut seen = vec![0u8; n];
        for &i in &splits.holdout {
            seen[i] += 1;
        }
        for fold in &splits.folds {
            for &i in &fold.val {
                seen[i] += 1;
            }
            for &i in &fold.train {
                prop_assert!(!splits.holdout.contains(&i));
            }
            prop_assert_eq!(fold.train.len() + fold.val.len() + splits.holdout.len(), n);
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn sequences_equal_under_same_input(ids in proptest::collection::vec(0u32..500, 1..60)) {
        let a = TokenSequence::new(&ids, 50, 0);
        let b = TokenSequence::new(&ids, 50, 0);
        prop_assert_eq!(a, b);
    }
}
