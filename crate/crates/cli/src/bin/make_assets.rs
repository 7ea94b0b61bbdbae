//! Regenerate the bundled sample assets under `assets/`.
//!
//! All generators are seeded, so the output is byte-identical across runs.

use std::fs;
use std::path::PathBuf;

use lexaug::sample_assets;

fn main() -> std::io::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("assets"));
    fs::create_dir_all(out.join("fixtures/defs"))?;
    fs::create_dir_all(out.join("configs"))?;

    fs::write(
        out.join("labmt_sample_500.tsv"),
        sample_assets::sample_lexicon_500(),
    )?;
    fs::write(
        out.join("labmt_synthetic_full.tsv"),
        sample_assets::synthetic_full_lexicon(),
    )?;
    fs::write(
        out.join("vectors_50d_toy.txt"),
        sample_assets::toy_vectors_50d(),
    )?;
    fs::write(
        out.join("subword_vocab_tiny.txt"),
        sample_assets::tiny_subword_vocab(),
    )?;
    fs::write(out.join("oov_words.txt"), sample_assets::oov_words_file())?;
    fs::write(
        out.join("configs/token_sample.json"),
        sample_assets::sample_token_config(),
    )?;
    fs::write(
        out.join("configs/dictionary_sample.json"),
        sample_assets::sample_dictionary_config(),
    )?;
    for (word, body) in sample_assets::fixture_bodies() {
        fs::write(out.join(format!("fixtures/defs/{word}.json")), body)?;
    }
    fs::write(
        out.join("defs_cache_sample.jsonl"),
        sample_assets::sample_defs_cache(),
    )?;
    println!("assets written under {}", out.display());
    Ok(())
}
