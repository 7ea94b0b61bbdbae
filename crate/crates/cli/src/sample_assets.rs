//! Deterministic generators for the bundled sample data.
//!
//! The repository cannot ship the human-rated labMT distribution, so it
//! bundles synthetic stand-ins with the same file formats and, for the
//! full-scale file, summary statistics matched to the published ones (mean
//! rating deviation 1.38). Scores are built from morphological word
//! families, so related surface forms share subword structure and carry
//! correlated scores, which is the property the token model exploits in the
//! real lexicon. Four real published rows (the, hahaha, church, cigarettes)
//! are pinned verbatim.
//!
//! Regenerate with the `make_assets` binary; everything is seeded and
//! reproducible byte for byte.

use std::collections::BTreeSet;

use lexaug_core::lexicon::normalize_word;
use lexaug_core::rng::Rng;
use lexaug_core::tokenize::{char_ngrams, NgramConfig};

const GEN_SEED: u64 = 0x5eed_1ec0;

/// (family valence in [-3.5, 3.5], surface forms sharing that valence)
type Family = (f64, &'static str);

/// Published rows pinned verbatim: word, score, deviation.
pub const PINNED_ROWS: [(&str, f64, f64); 4] = [
    ("the", 4.98, 0.91),
    ("hahaha", 7.94, 1.56),
    ("church", 5.48, 1.85),
    ("cigarettes", 3.31, 2.6),
];

const FAMILIES: &[Family] = &[
    // positive
    (3.3, "love loves loved loving lovely lover"),
    (
        3.1,
        "joy joyful joyfully joyous enjoy enjoys enjoyed enjoying enjoyment",
    ),
    (3.2, "happy happily happiness"),
    (3.0, "laugh laughs laughed laughing laughter"),
    (2.8, "smile smiles smiled smiling"),
    (2.6, "friend friends friendly friendship"),
    (2.8, "peace peaceful peacefully"),
    (2.9, "delight delights delighted delightful"),
    (2.4, "win wins winning winner won"),
    (2.4, "sweet sweeter sweetest sweetly sweetness"),
    (2.7, "kiss kisses kissed kissing"),
    (2.6, "hug hugs hugged hugging"),
    (2.8, "sunshine sunny sunnier"),
    (2.6, "beauty beautiful beautifully"),
    (2.5, "bless blessed blessing blessings"),
    (2.5, "cheer cheers cheered cheerful cheering"),
    (2.2, "comfort comforts comforted comforting comfortable"),
    (2.0, "dream dreams dreamed dreaming dreamy"),
    (2.6, "freedom free freely freed"),
    (2.5, "fun funny funnier funniest"),
    (2.3, "gift gifts gifted"),
    (2.2, "glad gladly gladness"),
    (1.9, "gold golden"),
    (2.1, "grace graceful gracefully gracious"),
    (2.3, "health healthy healthier"),
    (2.7, "heaven heavens heavenly"),
    (2.4, "hero heroes heroic"),
    (2.1, "honest honestly honesty"),
    (2.4, "hope hopes hoped hoping hopeful"),
    (2.3, "kind kinder kindest kindly kindness"),
    (2.2, "luck lucky luckily luckiest"),
    (2.1, "magic magical magically"),
    (2.4, "merry merrily merriment"),
    (2.2, "music musical musician"),
    (2.9, "paradise"),
    (2.1, "party parties partying"),
    (1.8, "play plays played playing playful"),
    (2.6, "pleasure pleasures pleasant pleasing pleased"),
    (2.2, "pretty prettier prettiest"),
    (1.7, "pride proud proudly"),
    (2.2, "prize prizes prized"),
    (2.6, "rainbow rainbows"),
    (2.2, "relax relaxed relaxing relaxation"),
    (1.9, "rich richer richest riches"),
    (2.0, "safe safely safety safer"),
    (2.0, "song songs sing singing singer"),
    (1.9, "star stars starry"),
    (2.4, "success successful successfully succeed succeeded"),
    (2.3, "treasure treasures treasured"),
    (2.4, "triumph triumphs triumphant"),
    (2.1, "trust trusts trusted trusting trustworthy"),
    (1.9, "warm warmer warmly warmth"),
    (2.0, "wealth wealthy wealthier"),
    (2.8, "wonderful wonderfully wonder wonders"),
    (2.0, "brave bravely bravery braver"),
    (1.9, "bright brighter brightest brightly brightness"),
    (2.6, "celebrate celebrated celebrating celebration"),
    (2.3, "champion champions championship"),
    (2.0, "charity charities charitable"),
    (2.3, "excite excited exciting excitement"),
    (2.3, "festive festival festivals"),
    (2.0, "genius geniuses"),
    (2.1, "glory glorious gloriously"),
    (2.4, "grateful gratefully gratitude"),
    (2.4, "holiday holidays"),
    (2.0, "honor honors honored honorable"),
    (2.2, "inspire inspired inspiring inspiration"),
    (2.5, "miracle miracles miraculous"),
    (2.4, "angel angels angelic"),
    // negative
    (-3.0, "hate hates hated hating hateful hatred"),
    (-3.3, "death deaths deathly dead deadly die died dying"),
    (-3.2, "kill kills killed killing killer"),
    (-3.1, "war wars warfare"),
    (-2.8, "pain pains pained painful painfully"),
    (-2.5, "fear fears feared fearful fearing"),
    (-2.6, "sad sadly sadness sadder saddest"),
    (-2.2, "cry cries cried crying"),
    (-2.3, "sick sickness sickly sicker"),
    (-2.8, "poison poisons poisoned poisonous"),
    (-2.5, "prison prisons prisoner imprisoned"),
    (
        -3.1,
        "terror terrors terrible terribly terrified terrifying",
    ),
    (-3.2, "cancer cancers cancerous"),
    (-2.7, "grief grieve grieved grieving"),
    (-2.4, "doom doomed"),
    (-2.3, "curse cursed curses cursing"),
    (-2.5, "devil devils devilish"),
    (-2.4, "enemy enemies"),
    (-2.8, "evil evils"),
    (-2.3, "fail fails failed failing failure failures"),
    (-1.9, "fight fights fighting fought"),
    (-2.2, "filth filthy filthier"),
    (-2.2, "gloom gloomy gloomier"),
    (-2.3, "harm harms harmed harmful harming"),
    (-2.7, "hell hellish"),
    (-2.5, "hurt hurts hurting"),
    (-2.0, "lie lies lied lying liar"),
    (-2.2, "loss losses lose loses losing lost"),
    (-1.9, "mad madly madness madder"),
    (-2.8, "misery miserable miserably"),
    (-3.3, "murder murders murdered murderer murderous"),
    (-2.3, "nasty nastier nastiest"),
    (-2.6, "poverty poor poorer poorest poorly"),
    (-2.4, "rage rages raging enraged"),
    (-2.3, "ruin ruins ruined ruining"),
    (-2.1, "scare scared scares scary scaring"),
    (-2.2, "shame shamed shameful ashamed"),
    (-1.9, "sin sins sinner sinful"),
    (-2.8, "slave slaves slavery enslaved"),
    (-2.7, "sorrow sorrows sorrowful"),
    (-2.2, "steal steals stealing stolen"),
    (-1.6, "storm storms stormy"),
    (-2.2, "stress stressed stressful stressing"),
    (-2.0, "tears tear tearful"),
    (-2.3, "threat threats threaten threatened threatening"),
    (-3.0, "torture tortured torturing"),
    (-2.5, "toxic toxin toxins"),
    (-1.9, "trash trashed trashy"),
    (-2.2, "ugly uglier ugliest ugliness"),
    (-2.9, "violence violent violently"),
    (-2.3, "weep weeps weeping wept"),
    (-2.4, "wound wounds wounded wounding"),
    (-2.1, "wreck wrecks wrecked wreckage"),
    (-2.9, "abuse abused abusive abusing"),
    (-2.9, "agony agonies agonizing"),
    (-2.6, "betray betrayed betrayal betraying"),
    (-2.8, "bomb bombs bombed bombing"),
    (-2.1, "crash crashes crashed crashing"),
    (-2.4, "crime crimes criminal criminals"),
    (-2.7, "cruel cruelly cruelty crueler"),
    (-2.3, "danger dangers dangerous dangerously"),
    (-2.7, "disaster disasters disastrous"),
    (-2.8, "disease diseases diseased"),
    (-1.8, "dirt dirty dirtier"),
    // neutral
    (0.1, "table tables"),
    (0.0, "chair chairs"),
    (0.1, "window windows"),
    (0.0, "door doors"),
    (0.0, "paper papers"),
    (0.0, "number numbers numbered"),
    (0.0, "system systems"),
    (0.0, "method methods"),
    (0.0, "process processes processed processing"),
    (0.0, "object objects"),
    (0.0, "machine machines"),
    (-0.1, "metal metals metallic"),
    (0.0, "stone stones"),
    (0.0, "street streets"),
    (0.1, "building buildings built"),
    (0.0, "engine engines"),
    (0.0, "wheel wheels"),
    (0.0, "box boxes boxed"),
    (0.0, "glass glasses"),
    (0.0, "roof roofs"),
    (0.0, "floor floors"),
    (0.0, "wall walls"),
    (0.0, "road roads"),
    (0.0, "corner corners"),
    (0.0, "middle"),
    (0.0, "minute minutes"),
    (0.1, "moment moments"),
    (0.0, "motion motions"),
    (0.0, "pattern patterns"),
    (0.0, "region regions"),
    (0.0, "section sections"),
    (0.0, "series"),
    (0.0, "shape shapes shaped"),
    (0.0, "signal signals"),
    (0.0, "source sources"),
    (0.1, "space spaces"),
    (0.0, "surface surfaces"),
    (0.0, "symbol symbols"),
    (0.0, "theory theories"),
    (0.0, "volume volumes"),
    (0.0, "angle angles"),
    (0.0, "area areas"),
    (0.0, "basis"),
    (0.0, "branch branches"),
    (0.0, "cycle cycles"),
    (0.0, "degree degrees"),
    (0.0, "device devices"),
    (0.0, "element elements"),
    (0.0, "factor factors"),
    (0.0, "figure figures"),
    (0.0, "format formats"),
    (0.0, "frame frames"),
    (0.0, "index indexes"),
    (0.0, "input inputs"),
    (0.0, "layer layers"),
    (0.0, "level levels"),
    (0.0, "limit limits limited"),
    (0.0, "margin margins"),
    (0.0, "matrix"),
    (0.0, "medium"),
    (0.0, "member members"),
    (0.0, "option options"),
    (0.0, "origin origins"),
    (0.0, "output outputs"),
    (0.0, "period periods"),
    (0.0, "phase phases"),
    (0.0, "phrase phrases"),
    (0.0, "plane planes"),
    (0.0, "point points pointed"),
    (0.0, "policy policies"),
    (0.0, "record records recorded"),
    (0.0, "row rows"),
    (0.0, "scale scales scaled"),
    (0.0, "scheme schemes"),
    (0.0, "sector sectors"),
    (0.0, "sequence sequences"),
    (0.0, "shelf shelves"),
    (0.0, "sphere spheres"),
    (0.0, "station stations"),
    (0.0, "status"),
    (0.0, "title titles"),
    (0.0, "topic topics"),
    (0.0, "track tracks tracked"),
    (0.0, "unit units"),
    (0.0, "vector vectors"),
    (0.0, "version versions"),
    (0.0, "zone zones"),
];

struct Row {
    word: String,
    h: f64,
    sigma: f64,
    pinned: bool,
}

fn clamp(v: f64, lo: f64, hi: f64) -> f64 {
    v.max(lo).min(hi)
}

/// All curated family rows (deduplicated, pinned rows excluded), in table
/// order.
fn family_rows(rng: &mut Rng) -> Vec<Row> {
    let mut seen: BTreeSet<String> = PINNED_ROWS.iter().map(|(w, _, _)| w.to_string()).collect();
    let mut rows = Vec::new();
    for (valence, words) in FAMILIES {
        for word in words.split_whitespace() {
            let word = normalize_word(word);
            if !seen.insert(word.clone()) {
                continue;
            }
            let h = clamp(5.0 + valence + 0.22 * rng.normal(), 1.3, 8.8);
            let sigma = clamp(
                1.05 + 0.45 * rng.normal().abs() + 0.09 * (h - 5.0).abs(),
                0.35,
                3.4,
            );
            rows.push(Row {
                word,
                h,
                sigma,
                pinned: false,
            });
        }
    }
    rows
}

fn pinned_rows() -> Vec<Row> {
    PINNED_ROWS
        .iter()
        .map(|(w, h, s)| Row {
            word: w.to_string(),
            h: *h,
            sigma: *s,
            pinned: true,
        })
        .collect()
}

/// Pronounceable pseudo-stem, deterministic from the stream.
fn pseudo_stem(rng: &mut Rng) -> String {
    const ONSETS: &[&str] = &[
        "b", "br", "c", "cl", "cr", "d", "dr", "f", "fl", "fr", "g", "gl", "gr", "h", "j", "k",
        "l", "m", "n", "p", "pl", "pr", "r", "s", "sk", "sl", "sm", "sn", "sp", "st", "str", "t",
        "tr", "v", "w", "z",
    ];
    const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ea", "ee", "oa", "oo", "ou"];
    const CODAS: &[&str] = &[
        "", "n", "r", "l", "t", "st", "nd", "rk", "mp", "sh", "ck", "ng",
    ];
    let mut stem = String::new();
    let syllables = 1 + rng.below(2);
    for _ in 0..=syllables {
        stem.push_str(ONSETS[rng.below(ONSETS.len())]);
        stem.push_str(VOWELS[rng.below(VOWELS.len())]);
    }
    stem.push_str(CODAS[rng.below(CODAS.len())]);
    stem
}

const PSEUDO_SUFFIXES: &[&str] = &["", "s", "ed", "ing", "er", "ly", "ness"];

fn render_tsv(rows: &[Row]) -> String {
    // rank by score, happiest first, like the source distribution
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| {
        rows[b]
            .h
            .partial_cmp(&rows[a].h)
            .unwrap()
            .then_with(|| rows[a].word.cmp(&rows[b].word))
    });
    let mut rank = vec![0usize; rows.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r + 1;
    }
    let mut out =
        String::from("word\thappiness_rank\thappiness_average\thappiness_standard_deviation\n");
    for (i, row) in rows.iter().enumerate() {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            row.word,
            rank[i],
            round4(row.h),
            round4(row.sigma)
        ));
    }
    out
}

fn round4(v: f64) -> f64 {
    (v * 10_000.0).round() / 10_000.0
}

/// Shift non-pinned deviations so the file mean lands on `target` after
/// rounding and clamping.
fn adjust_sigma_mean(rows: &mut [Row], target: f64) {
    for _ in 0..6 {
        let n = rows.len() as f64;
        let mean: f64 = rows.iter().map(|r| round4(r.sigma)).sum::<f64>() / n;
        let free = rows.iter().filter(|r| !r.pinned).count() as f64;
        if free == 0.0 {
            return;
        }
        let shift = (target - mean) * n / free;
        if shift.abs() < 1e-6 {
            break;
        }
        for row in rows.iter_mut().filter(|r| !r.pinned) {
            row.sigma = clamp(row.sigma + shift, 0.35, 3.4);
        }
    }
}

/// The 500-word sample slice: every pinned row plus a seeded draw from the
/// curated families.
pub fn sample_lexicon_500() -> String {
    let mut rng = Rng::derive(GEN_SEED, "sample500");
    let mut rows = family_rows(&mut rng);
    let mut shuffle_rng = Rng::derive(GEN_SEED, "sample500.pick");
    shuffle_rng.shuffle(&mut rows);
    rows.truncate(500 - PINNED_ROWS.len());
    rows.extend(pinned_rows());
    let mut order_rng = Rng::derive(GEN_SEED, "sample500.order");
    order_rng.shuffle(&mut rows);
    render_tsv(&rows)
}

/// Full-scale synthetic stand-in (about ten thousand rows): all curated
/// words plus pseudo-word families; the mean rating deviation is adjusted
/// onto the published 1.38.
pub fn synthetic_full_lexicon() -> String {
    let target_total = 10_000usize;
    let mut rng = Rng::derive(GEN_SEED, "full");
    let mut rows = family_rows(&mut rng);
    rows.extend(pinned_rows());
    let mut seen: BTreeSet<String> = rows.iter().map(|r| r.word.clone()).collect();
    let mut stem_rng = Rng::derive(GEN_SEED, "full.stems");
    while rows.len() < target_total {
        let stem = pseudo_stem(&mut stem_rng);
        if stem.len() < 3 || seen.contains(&stem) {
            continue;
        }
        // positivity-biased valence, mostly neutral
        let valence = clamp(1.1 * stem_rng.normal() + 0.25, -3.6, 3.6);
        for suffix in PSEUDO_SUFFIXES {
            if rows.len() >= target_total {
                break;
            }
            let word = format!("{stem}{suffix}");
            if !seen.insert(word.clone()) {
                continue;
            }
            if !suffix.is_empty() && stem_rng.bernoulli(0.45) {
                continue; // irregular paradigms: not every form exists
            }
            let h = clamp(5.0 + 0.95 * valence + 0.2 * stem_rng.normal(), 1.3, 8.8);
            let sigma = clamp(
                1.05 + 0.45 * stem_rng.normal().abs() + 0.09 * (h - 5.0).abs(),
                0.35,
                3.4,
            );
            rows.push(Row {
                word,
                h,
                sigma,
                pinned: false,
            });
        }
    }
    adjust_sigma_mean(&mut rows, 1.38);
    let mut order_rng = Rng::derive(GEN_SEED, "full.order");
    order_rng.shuffle(&mut rows);
    render_tsv(&rows)
}

/// Toy 50-dimensional vector file covering the sample words, the family
/// stems, and the stems' character n-grams. Whole-word vectors carry a
/// score-correlated component so the linear baselines have signal.
pub fn toy_vectors_50d() -> String {
    const DIM: usize = 50;
    let sample = sample_lexicon_500();
    let lexicon = lexaug_core::lexicon::Lexicon::parse_tsv(
        &sample,
        &lexaug_core::lexicon::ColumnMap::default(),
        "sample",
    )
    .expect("generated sample parses");

    let direction: Vec<f64> = {
        let mut rng = Rng::derive(GEN_SEED, "vectors.direction");
        let v: Vec<f64> = (0..DIM).map(|_| rng.normal()).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / norm).collect()
    };
    let unit_for = |token: &str| -> Vec<f64> {
        let mut rng = Rng::derive(GEN_SEED, &format!("vectors.tok.{token}"));
        let v: Vec<f64> = (0..DIM).map(|_| rng.normal()).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / norm).collect()
    };

    // valence per token: words take their own score offset, n-grams the mean
    // offset of the sample words containing them
    let mut tokens: Vec<(String, f64)> = Vec::new();
    let mut seen = BTreeSet::new();
    for entry in lexicon.entries() {
        if seen.insert(entry.word.clone()) {
            tokens.push((entry.word.clone(), entry.h_avg - 5.0));
        }
    }
    let cfg = NgramConfig::default();
    let mut gram_sums: std::collections::BTreeMap<String, (f64, usize)> = Default::default();
    for entry in lexicon.entries() {
        if let Ok(grams) = char_ngrams(&entry.word, &cfg) {
            for gram in grams.into_iter().skip(1) {
                let slot = gram_sums.entry(gram).or_insert((0.0, 0));
                slot.0 += entry.h_avg - 5.0;
                slot.1 += 1;
            }
        }
    }
    for (gram, (sum, count)) in gram_sums {
        if seen.insert(gram.clone()) {
            tokens.push((gram, sum / count as f64));
        }
    }

    let mut out = format!("{} {DIM}\n", tokens.len());
    for (token, offset) in &tokens {
        let base = unit_for(token);
        let strength = clamp(offset / 3.5, -1.0, 1.0) * 0.55;
        let mut line = token.clone();
        for (b, d) in base.iter().zip(&direction) {
            let v = 0.8 * b + strength * d;
            line.push_str(&format!(" {}", round4(v)));
        }
        line.push('\n');
        out.push_str(&line);
    }
    out
}

/// Tiny WordPiece-style vocabulary: specials, single characters with
/// continuation forms, common affix pieces, family stems, and frequent
/// definitional words.
pub fn tiny_subword_vocab() -> String {
    let mut tokens: Vec<String> = vec![
        "[PAD]".into(),
        "[UNK]".into(),
        "[CLS]".into(),
        "[SEP]".into(),
    ];
    let push = |t: String, tokens: &mut Vec<String>| {
        if !tokens.contains(&t) {
            tokens.push(t);
        }
    };
    for c in "abcdefghijklmnopqrstuvwxyz0123456789.,;'-".chars() {
        push(c.to_string(), &mut tokens);
        push(format!("##{c}"), &mut tokens);
    }
    for suffix in [
        "s", "ed", "ing", "er", "est", "ly", "ness", "ful", "less", "ment", "tion", "able", "al",
        "ous", "ive", "ish", "ity", "en", "y", "es", "ies", "ied",
    ] {
        push(format!("##{suffix}"), &mut tokens);
    }
    for prefix in [
        "un", "re", "in", "dis", "pre", "mis", "non", "over", "under", "en", "be",
    ] {
        push(prefix.to_string(), &mut tokens);
    }
    for (_, words) in FAMILIES {
        if let Some(stem) = words.split_whitespace().next() {
            push(stem.to_string(), &mut tokens);
        }
    }
    for word in [
        "the",
        "a",
        "an",
        "of",
        "to",
        "and",
        "or",
        "in",
        "on",
        "at",
        "with",
        "for",
        "by",
        "from",
        "is",
        "are",
        "was",
        "as",
        "not",
        "no",
        "one",
        "that",
        "this",
        "who",
        "which",
        "state",
        "quality",
        "act",
        "feeling",
        "feelings",
        "person",
        "thing",
        "things",
        "cause",
        "causing",
        "express",
        "expressing",
        "full",
        "without",
        "great",
        "strong",
        "deep",
        "violent",
        "emotion",
        "affection",
        "pleasure",
        "pain",
        "fear",
        "joy",
        "sadness",
        "anger",
        "sorrow",
        "mind",
        "body",
        "life",
        "good",
        "bad",
        "make",
        "makes",
        "showing",
        "marked",
        "lacking",
        "care",
        "worry",
        "someone",
        "something",
        "being",
        "very",
        "much",
        "intense",
        "extreme",
        "condition",
        "virus",
        "illness",
        "respiratory",
        "infectious",
        "disease",
        "caused",
        "corona",
        "hahaha",
        "church",
        "cigarettes",
        "words",
        "word",
    ] {
        push(word.to_string(), &mut tokens);
    }
    let mut out = String::new();
    for t in tokens {
        out.push_str(&t);
        out.push('\n');
    }
    out
}

/// Offline fixture bodies for the definition fetcher, in the dictionary
/// API's response shape. Words absent from this set behave as 404s.
pub fn fixture_bodies() -> Vec<(&'static str, String)> {
    let entry = |defs: &[&str]| -> String {
        let definitions: Vec<serde_json::Value> = defs
            .iter()
            .map(|d| serde_json::json!({ "definition": d }))
            .collect();
        serde_json::json!([{
            "meanings": [{ "partOfSpeech": "noun", "definitions": definitions }]
        }])
        .to_string()
    };
    vec![
        (
            "love",
            entry(&[
                "an intense feeling of deep affection",
                "a great interest and pleasure in something",
            ]),
        ),
        (
            "hate",
            entry(&[
                "an intense feeling of dislike",
                "to feel hostility or animosity toward",
            ]),
        ),
        ("joy", entry(&["a feeling of great pleasure and happiness"])),
        (
            "sunshine",
            entry(&[
                "direct sunlight unbroken by cloud",
                "cheerfulness or happiness",
            ]),
        ),
        (
            "misery",
            entry(&["a state of great distress or discomfort of mind or body"]),
        ),
        (
            "coronavirus",
            entry(&[
                "an infectious respiratory illness caused by a virus",
                "any of a family of viruses marked by crown shaped spikes",
            ]),
        ),
        (
            "win",
            entry(&["to be successful or victorious in a contest"]),
        ),
        (
            "failure",
            entry(&[
                "lack of success",
                "the omission of expected or required action",
            ]),
        ),
        (
            "peace",
            entry(&["freedom from disturbance", "a state without war"]),
        ),
        (
            "war",
            entry(&["a state of armed conflict between societies"]),
        ),
        (
            "smile",
            entry(&["a pleased, kind, or amused facial expression"]),
        ),
        (
            "grief",
            entry(&["deep sorrow, especially caused by a death"]),
        ),
        (
            "treasure",
            entry(&[
                "a quantity of precious metals or gems",
                "a much loved person or thing",
            ]),
        ),
        (
            "poison",
            entry(&["a substance causing illness or death when absorbed"]),
        ),
        ("friend", entry(&["a person whom one knows and trusts"])),
        (
            "enemy",
            entry(&["a person who is actively opposed or hostile to someone"]),
        ),
        (
            "table",
            entry(&["a piece of furniture with a flat top on legs"]),
        ),
        ("church", entry(&["a building used for public worship"])),
        (
            "the",
            entry(&["used to point to something previously mentioned"]),
        ),
    ]
}

/// Pre-populated definition cache for the sample lexicon: fixture-covered
/// words carry their definitions, everything else a Missing record, exactly
/// what a fixture-mode fetch-defs run over the sample produces.
pub fn sample_defs_cache() -> String {
    let lexicon = lexaug_core::lexicon::Lexicon::parse_tsv(
        &sample_lexicon_500(),
        &lexaug_core::lexicon::ColumnMap::default(),
        "sample",
    )
    .expect("generated sample parses");
    let fixtures: std::collections::BTreeMap<&str, String> = fixture_bodies().into_iter().collect();
    let mut out = String::new();
    for entry in lexicon.entries() {
        let record = match fixtures.get(entry.word.as_str()) {
            Some(body) => {
                let defs = crate::defs_client::parse_definitions(body).expect("fixture parses");
                serde_json::json!({
                    "word": entry.word,
                    "status": "found",
                    "definitions": defs,
                    "source_url": "fixtures:assets/fixtures/defs",
                    "fetched_at": 0,
                })
            }
            None => serde_json::json!({
                "word": entry.word,
                "status": "missing",
                "definitions": [],
                "source_url": "fixtures:assets/fixtures/defs",
                "fetched_at": 0,
            }),
        };
        out.push_str(&record.to_string());
        out.push('\n');
    }
    out
}

/// Out-of-vocabulary demo words for the augment subcommand.
pub fn oov_words_file() -> String {
    [
        "coronavirus",
        "covid",
        "doomscroll",
        "selfie",
        "brunch",
        "chillax",
        "rickroll",
        "facepalm",
        "binge",
        "glamping",
        "hangry",
        "staycation",
    ]
    .join("\n")
        + "\n"
}

/// Ready-to-run sample configuration for the token model.
pub fn sample_token_config() -> String {
    serde_json::to_string_pretty(&serde_json::json!({
        "model": "token",
        "lexicon": "assets/labmt_sample_500.tsv",
        "seed": 42,
        "split": { "holdout_fraction": 0.2, "folds": 5 },
        "train": { "max_epochs": 120, "batch_size": 32, "patience": 25, "learning_rate": 0.001 },
        "mc": { "samples_per_model": 100, "train_mode_dropout": true },
        "token": {
            "embed_dim": 50,
            "ngram_min": 3,
            "ngram_max": 5,
            "seq_len": 50,
            "hidden": [128, 64, 32],
            "dropout": 0.5,
            "train_embeddings": true
        }
    }))
    .expect("static json")
        + "\n"
}

/// Ready-to-run sample configuration for the dictionary model at desk scale.
pub fn sample_dictionary_config() -> String {
    serde_json::to_string_pretty(&serde_json::json!({
        "model": "dictionary",
        "lexicon": "assets/labmt_sample_500.tsv",
        "subword_vocab": "assets/subword_vocab_tiny.txt",
        "defs_cache": "assets/defs_cache_sample.jsonl",
        "seed": 42,
        "split": { "holdout_fraction": 0.2, "folds": 5 },
        "train": { "max_epochs": 40, "batch_size": 32, "patience": 10, "learning_rate": 0.001 },
        "mc": { "samples_per_model": 100, "train_mode_dropout": true },
        "dictionary": {
            "layers": 2,
            "heads": 4,
            "model_dim": 64,
            "ff_dim": 256,
            "seq_len": 64,
            "block_dropout": 0.1,
            "positional": true,
            "hidden": [128, 64, 32],
            "head_dropout": 0.5,
            "train_encoder": true,
            "max_def_words": 50
        }
    }))
    .expect("static json")
        + "\n"
}
