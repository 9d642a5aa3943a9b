//! Notebook connection multigraph: one edge per snippet clone pair between
//! the notebooks holding the two snippets, split into intra-repository (C₀)
//! and per-external-repository (Cᵢ) counts.

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;

use serde::Serialize;

use crate::cmw::CloneGroup;
use crate::corpus::Corpus;
use crate::nearmiss::ClonePair;
use crate::stats::{wilcoxon_signed_rank, TestOutcome};
use crate::{Error, Result};

/// What a self-loop adds to a notebook's connection count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SelfLoopMode {
    /// One incident edge.
    #[default]
    Once,
    /// Graph degree: a loop touches the node twice.
    Twice,
}

impl SelfLoopMode {
    fn weight(self) -> u64 {
        match self {
            SelfLoopMode::Once => 1,
            SelfLoopMode::Twice => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SelfLoopMode::Once => "once",
            SelfLoopMode::Twice => "twice",
        }
    }
}

impl FromStr for SelfLoopMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "once" | "1" => Ok(SelfLoopMode::Once),
            "twice" | "2" | "degree" => Ok(SelfLoopMode::Twice),
            other => Err(Error::validation(
                "self-loop mode",
                format!("unknown mode {other:?}"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectionProfile {
    pub notebook_id: String,
    pub total: u64,
    /// `total` divided by the notebook's snippet count (0 without snippets).
    pub normalized: f64,
    /// Connections to notebooks of the same repository, self-loops included.
    pub c0: u64,
    /// Connections per other repository; only repositories with ≥ 1.
    pub per_repo: BTreeMap<String, u64>,
    /// Mean of `per_repo` (0 when empty).
    pub ic: f64,
    /// Sum of `per_repo`.
    pub sc: u64,
}

/// Mergeable edge counts keyed by (notebook, target repository).
#[derive(Debug, Clone, Default)]
pub struct EdgeCounter {
    counts: HashMap<u32, HashMap<u32, u64>>,
}

impl EdgeCounter {
    fn add(&mut self, notebook: u32, repo: u32, weight: u64) {
        if weight > 0 {
            *self
                .counts
                .entry(notebook)
                .or_default()
                .entry(repo)
                .or_default() += weight;
        }
    }

    pub fn merge(&mut self, other: EdgeCounter) {
        for (n, repos) in other.counts {
            for (r, w) in repos {
                self.add(n, r, w);
            }
        }
    }
}

/// Numbers repositories so counters can be keyed by integers.
struct RepoTable<'a> {
    of_notebook: Vec<u32>,
    names: Vec<&'a str>,
}

impl<'a> RepoTable<'a> {
    fn new(corpus: &'a Corpus) -> Self {
        let mut ids: HashMap<&str, u32> = HashMap::new();
        let mut names = Vec::new();
        let of_notebook = (0..corpus.len() as u32)
            .map(|n| {
                let repo = corpus.repo_id(n);
                *ids.entry(repo).or_insert_with(|| {
                    names.push(repo);
                    names.len() as u32 - 1
                })
            })
            .collect();
        Self { of_notebook, names }
    }
}

fn profiles_from_counts(
    corpus: &Corpus,
    repos: &RepoTable<'_>,
    counter: &EdgeCounter,
    scope: &[u32],
    denominator: &dyn Fn(u32) -> usize,
) -> Vec<ConnectionProfile> {
    scope
        .iter()
        .map(|&n| {
            let own = repos.of_notebook[n as usize];
            let mut c0 = 0;
            let mut per_repo = BTreeMap::new();
            if let Some(targets) = counter.counts.get(&n) {
                for (&repo, &w) in targets {
                    if repo == own {
                        c0 += w;
                    } else {
                        per_repo.insert(repos.names[repo as usize].to_owned(), w);
                    }
                }
            }
            let sc: u64 = per_repo.values().sum();
            let ic = if per_repo.is_empty() {
                0.0
            } else {
                sc as f64 / per_repo.len() as f64
            };
            let total = c0 + sc;
            let d = denominator(n);
            ConnectionProfile {
                notebook_id: corpus.notebook_id(n).to_owned(),
                total,
                normalized: if d == 0 { 0.0 } else { total as f64 / d as f64 },
                c0,
                per_repo,
                ic,
                sc,
            }
        })
        .collect()
}

/// Profiles for the notebooks in `scope` from explicit snippet pairs. Every
/// pair adds one edge between its two notebooks. `denominator` gives the
/// snippet count used for normalisation.
pub fn build_connection_profiles(
    pairs: &[ClonePair],
    corpus: &Corpus,
    scope: &[u32],
    self_loop: SelfLoopMode,
    denominator: &dyn Fn(u32) -> usize,
) -> Result<Vec<ConnectionProfile>> {
    let repos = RepoTable::new(corpus);
    let mut in_scope = vec![false; corpus.len()];
    for &n in scope {
        in_scope[n as usize] = true;
    }
    let mut counter = EdgeCounter::default();
    for pair in pairs {
        for s in [pair.left, pair.right] {
            if !corpus.contains(s) || !in_scope[s.notebook as usize] {
                return Err(Error::validation(
                    "connections",
                    format!("pair references unknown snippet {}:{}", s.notebook, s.cell),
                ));
            }
        }
        let (a, b) = (pair.left.notebook, pair.right.notebook);
        if a == b {
            counter.add(a, repos.of_notebook[a as usize], self_loop.weight());
        } else {
            counter.add(a, repos.of_notebook[b as usize], 1);
            counter.add(b, repos.of_notebook[a as usize], 1);
        }
    }
    Ok(profiles_from_counts(
        corpus,
        &repos,
        &counter,
        scope,
        denominator,
    ))
}

/// Profiles from CMW clone groups without enumerating member pairs: a group
/// with mₐ members in notebook a contributes mₐ(mₐ−1)/2 self-loops to a and
/// mₐ·m_b edges between a and b.
pub fn cmw_connection_profiles(
    groups: &[CloneGroup],
    corpus: &Corpus,
    self_loop: SelfLoopMode,
    denominator: &dyn Fn(u32) -> usize,
) -> Vec<ConnectionProfile> {
    let repos = RepoTable::new(corpus);
    let mut counter = EdgeCounter::default();
    for group in groups.iter().filter(|g| g.is_clone_group()) {
        // members are sorted, so per-notebook runs are contiguous
        let mut per_notebook: Vec<(u32, u64)> = Vec::new();
        for m in &group.members {
            match per_notebook.last_mut() {
                Some((n, c)) if *n == m.notebook => *c += 1,
                _ => per_notebook.push((m.notebook, 1)),
            }
        }
        let mut per_repo: HashMap<u32, u64> = HashMap::new();
        for &(n, c) in &per_notebook {
            *per_repo.entry(repos.of_notebook[n as usize]).or_default() += c;
        }
        for &(n, m) in &per_notebook {
            let own = repos.of_notebook[n as usize];
            for (&repo, &members) in &per_repo {
                let weight = if repo == own {
                    self_loop.weight() * m * (m - 1) / 2 + m * (members - m)
                } else {
                    m * members
                };
                counter.add(n, repo, weight);
            }
        }
    }
    let scope: Vec<u32> = (0..corpus.len() as u32).collect();
    profiles_from_counts(corpus, &repos, &counter, &scope, denominator)
}

/// Signed-rank tests of C₀ against IC and of C₀ against SC.
pub fn paired_connection_tests(
    profiles: &[ConnectionProfile],
) -> Result<(TestOutcome, TestOutcome)> {
    let c0: Vec<f64> = profiles.iter().map(|p| p.c0 as f64).collect();
    let ic: Vec<f64> = profiles.iter().map(|p| p.ic).collect();
    let sc: Vec<f64> = profiles.iter().map(|p| p.sc as f64).collect();
    Ok((
        wilcoxon_signed_rank(&c0, &ic)?,
        wilcoxon_signed_rank(&c0, &sc)?,
    ))
}
