use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::TokenBag;
use crate::corpus::SnippetRef;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectorConfig {
    /// Similarity threshold in (0, 1].
    pub theta: f64,
    pub min_tokens: usize,
    pub max_tokens: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            theta: 0.8,
            min_tokens: 0,
            max_tokens: 500_000_000,
        }
    }
}

impl DetectorConfig {
    pub fn with_theta(theta: f64) -> Self {
        Self {
            theta,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::validation(
                "detector config",
                format!("theta must lie in (0, 1], got {}", self.theta),
            ));
        }
        if self.min_tokens > self.max_tokens {
            return Err(Error::validation(
                "detector config",
                "min_tokens exceeds max_tokens",
            ));
        }
        Ok(())
    }

    /// Whether a bag of this size takes part in detection at all.
    pub fn admits(&self, size: usize) -> bool {
        size >= 2 && size >= self.min_tokens && size <= self.max_tokens
    }
}

/// ⌈θ · n⌉, treating products within 1e-9 of an integer as that integer so
/// that e.g. 0.7 · 10 gives 7 rather than 8.
fn ceil_fraction(theta: f64, n: usize) -> usize {
    let x = theta * n as f64;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// Overlap two bags of these sizes need to pair.
pub fn required_overlap(theta: f64, a: usize, b: usize) -> usize {
    ceil_fraction(theta, a.max(b))
}

pub fn is_clone_pair(b1: &TokenBag, b2: &TokenBag, cfg: &DetectorConfig) -> bool {
    if !cfg.admits(b1.size()) || !cfg.admits(b2.size()) {
        return false;
    }
    b1.overlap(b2) >= required_overlap(cfg.theta, b1.size(), b2.size())
}

/// Unordered snippet pair, stored with `left < right`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ClonePair {
    pub left: SnippetRef,
    pub right: SnippetRef,
}

impl ClonePair {
    /// Canonical pair; `None` for a snippet paired with itself.
    pub fn new(a: SnippetRef, b: SnippetRef) -> Option<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(Self { left: a, right: b }),
            std::cmp::Ordering::Greater => Some(Self { left: b, right: a }),
            std::cmp::Ordering::Equal => None,
        }
    }
}

struct IndexedBag {
    input: usize,
    size: usize,
    /// (token id, count), ascending token id.
    tokens: Vec<(u32, u32)>,
}

fn sorted_overlap(a: &[(u32, u32)], b: &[(u32, u32)]) -> usize {
    let (mut i, mut j, mut total) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                total += a[i].1.min(b[j].1) as usize;
                i += 1;
                j += 1;
            }
        }
    }
    total
}

/// Sealed prefix-filter index over a set of bags.
///
/// Tokens are ranked by ascending document frequency (ties by text), and a
/// bag is viewed as the set of elements (token, k) for k in 1..=count, in
/// rank order. Two bags that must share ≥ α elements share an element
/// within their first |b| − α + 1 elements, so each bag only posts its
/// first |b| − ⌈θ|b|⌉ + 1 elements. Bags are processed in (size, input)
/// order and a query only looks at earlier bags, so each pair is found once.
pub struct PairIndex {
    cfg: DetectorConfig,
    bags: Vec<IndexedBag>,
    postings: HashMap<(u32, u32), Vec<u32>>,
}

impl PairIndex {
    pub fn build(bags: &[&TokenBag], cfg: &DetectorConfig) -> Result<Self> {
        cfg.validate()?;
        let admitted: Vec<usize> = (0..bags.len())
            .filter(|&i| cfg.admits(bags[i].size()))
            .collect();

        let mut doc_freq: HashMap<&str, u32> = HashMap::new();
        for &i in &admitted {
            for (t, _) in bags[i].iter() {
                *doc_freq.entry(t).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, u32)> = doc_freq.into_iter().collect();
        ranked.sort_unstable_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(b.0)));
        let token_id: HashMap<&str, u32> = ranked
            .iter()
            .enumerate()
            .map(|(id, (t, _))| (*t, id as u32))
            .collect();

        let mut indexed: Vec<IndexedBag> = admitted
            .iter()
            .map(|&i| {
                let mut tokens: Vec<(u32, u32)> =
                    bags[i].iter().map(|(t, c)| (token_id[t], c)).collect();
                tokens.sort_unstable();
                IndexedBag {
                    input: i,
                    size: bags[i].size(),
                    tokens,
                }
            })
            .collect();
        indexed.sort_by_key(|b| (b.size, b.input));

        let mut postings: HashMap<(u32, u32), Vec<u32>> = HashMap::new();
        for (pos, bag) in indexed.iter().enumerate() {
            let mut remaining = prefix_len(cfg.theta, bag.size);
            'outer: for &(token, count) in &bag.tokens {
                for k in 1..=count {
                    if remaining == 0 {
                        break 'outer;
                    }
                    postings.entry((token, k)).or_default().push(pos as u32);
                    remaining -= 1;
                }
            }
        }
        Ok(Self {
            cfg: *cfg,
            bags: indexed,
            postings,
        })
    }

    /// Number of bags that passed the size filter.
    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    /// Pairs (as input positions, smaller first) between bag `pos` (in
    /// index order) and every earlier bag.
    pub fn query(&self, pos: usize) -> Vec<(usize, usize)> {
        let q = &self.bags[pos];
        let min_size = ceil_fraction(self.cfg.theta, q.size);
        let needed = required_overlap(self.cfg.theta, q.size, q.size);
        let mut candidates: Vec<u32> = Vec::new();
        let mut remaining = prefix_len(self.cfg.theta, q.size);
        'outer: for &(token, count) in &q.tokens {
            for k in 1..=count {
                if remaining == 0 {
                    break 'outer;
                }
                remaining -= 1;
                let Some(list) = self.postings.get(&(token, k)) else {
                    continue;
                };
                let end = list.partition_point(|&p| (p as usize) < pos);
                let start = list[..end].partition_point(|&p| self.bags[p as usize].size < min_size);
                candidates.extend_from_slice(&list[start..end]);
            }
        }
        candidates.sort_unstable();
        candidates.dedup();
        candidates
            .into_iter()
            .filter(|&c| sorted_overlap(&q.tokens, &self.bags[c as usize].tokens) >= needed)
            .map(|c| {
                let (a, b) = (self.bags[c as usize].input, q.input);
                (a.min(b), a.max(b))
            })
            .collect()
    }

    /// Every qualifying pair as input positions, sorted.
    pub fn all_pairs(&self) -> Vec<(usize, usize)> {
        self.pairs_in(0..self.bags.len())
    }

    /// Pairs found by the queries for index positions in `range`.
    pub fn pairs_in(&self, range: std::ops::Range<usize>) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = range
            .into_par_iter()
            .flat_map_iter(|pos| self.query(pos))
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }
}

fn prefix_len(theta: f64, size: usize) -> usize {
    size - ceil_fraction(theta, size) + 1
}

/// Every pair of bags satisfying [`is_clone_pair`], sorted canonically.
/// Duplicate snippet references collapse; a reference never pairs with
/// itself.
pub fn detect_clone_pairs(
    bags: &[(SnippetRef, TokenBag)],
    cfg: &DetectorConfig,
) -> Result<Vec<ClonePair>> {
    let refs: Vec<&TokenBag> = bags.iter().map(|b| &b.1).collect();
    let index = PairIndex::build(&refs, cfg)?;
    let mut pairs: Vec<ClonePair> = index
        .all_pairs()
        .into_iter()
        .filter_map(|(a, b)| ClonePair::new(bags[a].0, bags[b].0))
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    Ok(pairs)
}
