//! Regenerates the bundled mini dataset under `data/mini`.
//!
//! Every word gets a latent difficulty in [0, 1]. Corpus frequency, word
//! length, the toy lexicons and the gold scores are all noisy functions of
//! it, so the pipeline has a real signal to find.
//!
//!     cargo run --example make_mini -- crates/core/data/mini

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use lexcomp::rng::Rng;

const VOCAB: usize = 240;
const PAIRS: usize = 130;
const INSTANCES: usize = 200;
const SENTENCES: usize = 2500;

struct Word {
    surface: String,
    lemma: String,
    difficulty: f64,
}

fn normal(rng: &mut Rng) -> f64 {
    let u1 = rng.next_f64().max(1e-300);
    let u2 = rng.next_f64();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn make_vocab(rng: &mut Rng) -> Vec<Word> {
    const CONSONANTS: &[u8] = b"bcdfghklmnprstvz";
    const VOWELS: &[u8] = b"aeiou";
    let mut seen = std::collections::HashSet::new();
    let mut words = Vec::new();
    while words.len() < VOCAB {
        let d = rng.next_f64();
        let len = (3.0 + 7.0 * d + 0.8 * normal(rng)).round().clamp(2.0, 12.0) as usize;
        let mut w = String::new();
        for i in 0..len {
            let set = if i % 2 == 0 { CONSONANTS } else { VOWELS };
            w.push(set[rng.below(set.len())] as char);
        }
        if !seen.insert(w.clone()) {
            continue;
        }
        // A sixth of the vocabulary appears only in an inflected form.
        let surface = if rng.below(6) == 0 {
            format!("{w}s")
        } else {
            w.clone()
        };
        if surface != w && !seen.insert(surface.clone()) {
            continue;
        }
        words.push(Word {
            surface,
            lemma: w,
            difficulty: d,
        });
    }
    words
}

fn draw_word(rng: &mut Rng, cdf: &[f64]) -> usize {
    let u = rng.next_f64() * cdf[cdf.len() - 1];
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

fn lexicon(
    rng: &mut Rng,
    words: &[Word],
    header: &str,
    missing: f64,
    value: impl Fn(f64, &mut Rng) -> f64,
) -> String {
    let mut out = format!("word\t{header}\n");
    for w in words {
        if rng.next_f64() < missing {
            continue;
        }
        let v = value(w.difficulty, rng);
        writeln!(out, "{}\t{v:.3}", w.lemma).unwrap();
    }
    out
}

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "data/mini".into()),
    );
    fs::create_dir_all(&dir)?;
    let mut rng = Rng::new(20210805);
    let words = make_vocab(&mut rng);

    let weights: Vec<f64> = words.iter().map(|w| (-5.0 * w.difficulty).exp()).collect();
    let cdf: Vec<f64> = weights
        .iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect();

    // Target pairs; easier pairs are planted more often as collocations.
    let mut pairs = Vec::with_capacity(PAIRS);
    while pairs.len() < PAIRS {
        let (a, b) = (rng.below(VOCAB), rng.below(VOCAB));
        if a != b && !pairs.contains(&(a, b)) {
            pairs.push((a, b));
        }
    }

    let mut corpus = String::new();
    for _ in 0..SENTENCES {
        let len = 5 + rng.below(8);
        let toks: Vec<&str> = (0..len)
            .map(|_| words[draw_word(&mut rng, &cdf)].surface.as_str())
            .collect();
        let mut line = toks.join(" ");
        line.push_str(if rng.below(4) == 0 { "!" } else { "." });
        corpus.push_str(&capitalize(&line));
        corpus.push('\n');
    }
    for &(a, b) in &pairs {
        let mean = 0.5 * (words[a].difficulty + words[b].difficulty);
        let plants = (12.0 * (-3.0 * mean).exp()).round() as usize;
        for _ in 0..plants {
            let filler = &words[draw_word(&mut rng, &cdf)].surface;
            writeln!(
                corpus,
                "{filler} {} {}.",
                words[a].surface, words[b].surface
            )
            .unwrap();
        }
    }
    fs::write(dir.join("corpus.txt"), corpus)?;

    let corpora = ["bible", "biomed", "europarl"];
    let offsets = [0.03, 0.06, 0.0];
    let mut data = String::from("id\tcorpus\tsentence\ttoken\tcomplexity\n");
    for i in 0..INSTANCES {
        // Half the instances reuse one of the first 40 pairs.
        let p = if rng.below(2) == 0 {
            rng.below(40)
        } else {
            rng.below(PAIRS)
        };
        let (a, b) = pairs[p];
        let c = rng.below(3);
        let len = 4 + rng.below(9);
        let at = rng.below(len + 1);
        let mut toks: Vec<String> = (0..len)
            .map(|_| words[draw_word(&mut rng, &cdf)].surface.clone())
            .collect();
        toks.insert(at, words[b].surface.clone());
        toks.insert(at, words[a].surface.clone());
        let sentence = capitalize(&toks.join(" ")) + ".";
        let mean = 0.5 * (words[a].difficulty + words[b].difficulty);
        let gold = (0.1 + 0.55 * mean + offsets[c] + 0.04 * normal(&mut rng)).clamp(0.0, 1.0);
        writeln!(
            data,
            "mini-{i:03}\t{}\t{sentence}\t{} {}\t{gold:.4}",
            corpora[c], words[a].surface, words[b].surface
        )
        .unwrap();
    }
    fs::write(dir.join("train.tsv"), data)?;

    let freq = lexicon(&mut rng, &words, "log_freq", 0.2, |d, r| {
        4.5 - 3.0 * d + 0.4 * normal(r)
    });
    let aoa = lexicon(&mut rng, &words, "aoa", 0.25, |d, r| {
        3.0 + 10.0 * d + 1.5 * normal(r)
    });
    let rt = lexicon(&mut rng, &words, "rt", 0.3, |d, r| {
        550.0 + 250.0 * d + 40.0 * normal(r)
    });
    fs::write(dir.join("freq_list.tsv"), freq)?;
    fs::write(dir.join("aoa.tsv"), aoa)?;
    fs::write(dir.join("rt.tsv"), rt)?;

    let mut lemmas = String::from("surface\tlemma\n");
    for w in words.iter().filter(|w| w.surface != w.lemma) {
        writeln!(lemmas, "{}\t{}", w.surface, w.lemma).unwrap();
    }
    fs::write(dir.join("lemmas.tsv"), lemmas)?;

    fs::write(
        dir.join("manifest.json"),
        r#"{
  "lexicons": [
    { "name": "freq_list", "group": "frequency", "path": "freq_list.tsv" },
    { "name": "aoa", "group": "norm", "path": "aoa.tsv" },
    { "name": "rt", "group": "psychometric", "path": "rt.tsv" }
  ],
  "lemmas": "lemmas.tsv",
  "corpora": [{ "name": "toy", "counts": "counts/toy" }]
}
"#,
    )?;
    fs::write(
        dir.join("schema.json"),
        r#"{
  "groups": ["length", "corpus_id", "frequency", "norm", "psychometric", "association"],
  "manifest": "manifest.json",
  "score_interval": [0.0, 1.0]
}
"#,
    )?;
    fs::write(
        dir.join("params.json"),
        r#"{
  "num_iterations": 4800,
  "learning_rate": 0.0035,
  "num_leaves": 11,
  "max_depth": 7,
  "min_data_in_leaf": 7,
  "lambda_l2": 0.0175,
  "bagging_freq": 5,
  "bagging_fraction": 0.66,
  "feature_fraction": 0.09,
  "max_bin": 64,
  "min_data_in_bin": 10,
  "seed": 0
}
"#,
    )?;
    let mut pairs_tsv = String::from("word1\tword2\n");
    for &(a, b) in pairs.iter().take(20) {
        writeln!(pairs_tsv, "{}\t{}", words[a].surface, words[b].surface).unwrap();
    }
    fs::write(dir.join("pairs.tsv"), pairs_tsv)?;
    Ok(())
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().collect::<String>() + c.as_str(),
        None => String::new(),
    }
}
