//! Core algorithms for augmenting happiness-score lexicons with model
//! predictions.
//!
//! Everything in this crate is pure computation over in-memory data: lexicon
//! parsing and grouping, character n-gram and WordPiece tokenization,
//! embedding matrices with masked pooling, a small dense regression network
//! and a desk-scale Transformer encoder with hand-written reverse-mode
//! gradients, Adam, k-fold ensemble training, Monte-Carlo-dropout prediction,
//! linear baselines, and evaluation metrics.
//!
//! The crate is `no_std` (with `alloc`); file formats, networking, and the
//! command-line surface live in the companion `lexaug` crate.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod baselines;
pub mod checkpoint;
pub mod defs;
pub mod embed;
pub mod eval;
pub mod lexicon;
pub mod nn;
pub mod predict;
pub mod rng;
pub mod tokenize;
pub mod train;
pub mod transformer;

pub use lexicon::{Lexicon, LexiconEntry, SentimentGroup};

pub use rng::Rng;
pub use tokenize::TokenSequence;
