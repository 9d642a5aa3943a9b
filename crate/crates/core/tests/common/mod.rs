//! Shared helpers for integration tests: random corpora and brute-force
//! oracles that do not use the library's index or digests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;

use nbclone::ingest::NotebookRecord;
use nbclone::nearmiss::{ClonePair, DetectorConfig, TokenBag};
use nbclone::{Corpus, SnippetRef};
use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus30")
}

pub fn fixture_manifest() -> PathBuf {
    fixture_dir().join("manifest.tsv")
}

const WORDS: &[&str] = &[
    "df", "np", "pd", "plt", "x", "y", "data", "model", "fit", "predict", "import", "from", "as",
    "print", "len", "range", "for", "in", "if", "return", "def", "train", "test", "value", "0",
    "1", "2", "10", "True", "None", "self", "result", "loss", "acc", "epoch",
];
const SEPS: &[char] = &['=', '(', ')', '.', ',', '+', '*', '[', ']', ':'];

#[derive(Clone, Debug)]
enum Item {
    Word(String),
    Sep(char),
}

#[derive(Clone, Debug)]
struct Line {
    items: Vec<Item>,
    comment: Option<String>,
}

/// Snippet as lexical items, so that renderings only vary whitespace where
/// it never joins or splits a token.
#[derive(Clone, Debug)]
struct Code {
    lines: Vec<Line>,
}

impl Code {
    fn random(rng: &mut StdRng) -> Self {
        let n_lines = rng.random_range(1..=4);
        let lines = (0..n_lines)
            .map(|_| {
                let n = rng.random_range(1..=8);
                let items = (0..n)
                    .map(|_| {
                        if rng.random_bool(0.35) {
                            Item::Sep(*SEPS.choose(rng).unwrap())
                        } else {
                            Item::Word(WORDS.choose(rng).unwrap().to_string())
                        }
                    })
                    .collect();
                let comment = rng
                    .random_bool(0.15)
                    .then(|| format!("note {}", WORDS.choose(rng).unwrap()));
                Line { items, comment }
            })
            .collect();
        Self { lines }
    }

    /// Small token-level edit.
    fn mutate(&self, rng: &mut StdRng) -> Self {
        let mut out = self.clone();
        let li = rng.random_range(0..out.lines.len());
        let line = &mut out.lines[li];
        let word = Item::Word(WORDS.choose(rng).unwrap().to_string());
        match rng.random_range(0..3) {
            0 if !line.items.is_empty() => {
                let i = rng.random_range(0..line.items.len());
                line.items[i] = word;
            }
            1 if line.items.len() > 1 => {
                let i = rng.random_range(0..line.items.len());
                line.items.remove(i);
            }
            _ => {
                let i = rng.random_range(0..=line.items.len());
                line.items.insert(i, word);
            }
        }
        out
    }

    fn render(&self, rng: &mut StdRng) -> String {
        let mut text = String::new();
        for (i, line) in self.lines.iter().enumerate() {
            if i > 0 {
                text.push('\n');
                if rng.random_bool(0.1) {
                    text.push_str("  \n");
                }
            }
            text.push_str(&" ".repeat(rng.random_range(0..3)));
            let mut prev_word = false;
            for item in &line.items {
                match item {
                    Item::Word(w) => {
                        let min = usize::from(prev_word);
                        text.push_str(&" ".repeat(rng.random_range(min..=min + 1)));
                        text.push_str(w);
                        prev_word = true;
                    }
                    Item::Sep(c) => {
                        text.push_str(if rng.random_bool(0.3) { " " } else { "" });
                        text.push(*c);
                        prev_word = false;
                    }
                }
            }
            if let Some(c) = &line.comment {
                text.push_str(&format!("  # {c}"));
            }
            if rng.random_bool(0.1) {
                text.push_str(" \t");
            }
        }
        text
    }
}

/// A corpus of at most `max_snippets` cells with planted CMW clones,
/// near-miss variants, empty and comment-only cells.
pub fn random_corpus(seed: u64, max_snippets: usize) -> Corpus {
    let mut rng = StdRng::seed_from_u64(seed);
    let bases: Vec<Code> = (0..rng.random_range(5..40))
        .map(|_| Code::random(&mut rng))
        .collect();
    let repos = rng.random_range(1..8);
    let mut records = Vec::new();
    let mut remaining = max_snippets;
    let mut nb = 0;
    while remaining > 0 {
        let cells = rng.random_range(1..=12).min(remaining);
        remaining -= cells;
        let sources: Vec<String> = (0..cells)
            .map(|_| match rng.random_range(0..20) {
                0 => String::new(),
                1 => " \n\t".to_string(),
                2 => "# only a comment".to_string(),
                3..=8 => bases.choose(&mut rng).unwrap().render(&mut rng),
                9..=14 => {
                    let base = bases.choose(&mut rng).unwrap();
                    base.mutate(&mut rng).render(&mut rng)
                }
                _ => Code::random(&mut rng).render(&mut rng),
            })
            .collect();
        let refs: Vec<&str> = sources.iter().map(String::as_str).collect();
        let repo = format!("repo{}", rng.random_range(0..repos));
        records.push(NotebookRecord::from_sources(
            format!("nb{nb:04}"),
            repo,
            &refs,
            Some("python"),
        ));
        nb += 1;
    }
    Corpus::new(records).expect("unique ids")
}

fn counts(bag: &TokenBag) -> HashMap<&str, usize> {
    bag.iter().map(|(t, n)| (t, n as usize)).collect()
}

/// Every pair checked directly against the threshold.
pub fn oracle_pairs(bags: &[(SnippetRef, TokenBag)], cfg: &DetectorConfig) -> BTreeSet<ClonePair> {
    let maps: Vec<HashMap<&str, usize>> = bags.iter().map(|(_, b)| counts(b)).collect();
    let sizes: Vec<usize> = maps.iter().map(|m| m.values().sum()).collect();
    let ok = |s: usize| s >= 2 && s >= cfg.min_tokens && s <= cfg.max_tokens;
    let mut out = BTreeSet::new();
    for i in 0..bags.len() {
        for j in i + 1..bags.len() {
            if !ok(sizes[i]) || !ok(sizes[j]) {
                continue;
            }
            let overlap: usize = maps[i]
                .iter()
                .map(|(t, &n)| n.min(*maps[j].get(t).unwrap_or(&0)))
                .sum();
            let larger = sizes[i].max(sizes[j]) as f64;
            if overlap as f64 >= cfg.theta * larger - 1e-9 {
                out.extend(ClonePair::new(bags[i].0, bags[j].0));
            }
        }
    }
    out
}

/// CMW groups by direct comparison of whitespace-free text.
pub fn oracle_cmw_groups(corpus: &Corpus, include_empty: bool) -> BTreeSet<BTreeSet<SnippetRef>> {
    let mut by_text: BTreeMap<String, BTreeSet<SnippetRef>> = BTreeMap::new();
    for s in corpus.snippet_refs() {
        let text: String = corpus
            .snippet(s)
            .text()
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect();
        if text.is_empty() && !include_empty {
            continue;
        }
        by_text.entry(text).or_default().insert(s);
    }
    by_text.into_values().collect()
}
