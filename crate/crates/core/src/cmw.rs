//! Copy-modulo-whitespace (CMW) clones: snippets that are identical once
//! every whitespace character is deleted. Comments are part of the text.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use md5::{Digest as _, Md5};
use rayon::prelude::*;
use serde::Serialize;
use sha2::Sha256;

use crate::corpus::{CloneCounts, Corpus, SnippetRef};
use crate::{Error, Result};

/// 128-bit digest of whitespace-free snippet text.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CmwDigest(pub [u8; 16]);

impl fmt::Display for CmwDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for CmwDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CmwDigest({self})")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DigestAlgorithm {
    #[default]
    Md5,
    /// SHA-256 truncated to its first 128 bits.
    Sha256,
}

impl DigestAlgorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            DigestAlgorithm::Md5 => "md5",
            DigestAlgorithm::Sha256 => "sha256",
        }
    }
}

impl FromStr for DigestAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "md5" => Ok(DigestAlgorithm::Md5),
            "sha256" => Ok(DigestAlgorithm::Sha256),
            other => Err(Error::validation(
                "digest",
                format!("unknown algorithm {other:?}"),
            )),
        }
    }
}

/// Deletes every Unicode whitespace character.
pub fn normalize_whitespace(text: &str) -> String {
    text.chars().filter(|c| !c.is_whitespace()).collect()
}

pub fn cmw_digest(normalized: &str) -> CmwDigest {
    cmw_digest_with(normalized, DigestAlgorithm::Md5)
}

pub fn cmw_digest_with(normalized: &str, algorithm: DigestAlgorithm) -> CmwDigest {
    let mut out = [0u8; 16];
    match algorithm {
        DigestAlgorithm::Md5 => out.copy_from_slice(&Md5::digest(normalized.as_bytes())),
        DigestAlgorithm::Sha256 => {
            out.copy_from_slice(&Sha256::digest(normalized.as_bytes())[..16])
        }
    }
    CmwDigest(out)
}

/// Per-snippet CMW data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashedSnippet {
    pub snippet: SnippetRef,
    pub digest: CmwDigest,
    /// Normalized text is empty.
    pub is_empty: bool,
    pub loc_nonblank: usize,
}

/// Hashes every snippet of the corpus; the result is in corpus order, so it
/// can be indexed with [`Corpus::global_index`].
pub fn hash_corpus(corpus: &Corpus, algorithm: DigestAlgorithm) -> Vec<HashedSnippet> {
    let refs: Vec<SnippetRef> = corpus.snippet_refs().collect();
    refs.par_iter()
        .map(|&r| {
            let snippet = corpus.snippet(r);
            let normalized = normalize_whitespace(&snippet.text());
            HashedSnippet {
                snippet: r,
                digest: cmw_digest_with(&normalized, algorithm),
                is_empty: normalized.is_empty(),
                loc_nonblank: snippet.lines.nonblank,
            }
        })
        .collect()
}

/// Snippets sharing one digest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CloneGroup {
    pub digest: CmwDigest,
    /// Sorted snippet references.
    pub members: Vec<SnippetRef>,
    pub median_loc: usize,
}

impl CloneGroup {
    pub fn occurrence_count(&self) -> usize {
        self.members.len()
    }

    /// Size ≥ 2; size-1 groups are unique snippets.
    pub fn is_clone_group(&self) -> bool {
        self.members.len() >= 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CloneGroups {
    /// Ordered by occurrence count descending, then digest ascending.
    pub groups: Vec<CloneGroup>,
    /// Number of snippets whose normalized text is empty, whether or not
    /// they were grouped.
    pub empty_count: usize,
    pub include_empty: bool,
}

impl CloneGroups {
    pub fn considered_snippets(&self) -> usize {
        self.groups.iter().map(CloneGroup::occurrence_count).sum()
    }

    pub fn cloned_snippets(&self) -> usize {
        self.groups
            .iter()
            .filter(|g| g.is_clone_group())
            .map(CloneGroup::occurrence_count)
            .sum()
    }

    pub fn unique_snippets(&self) -> usize {
        self.groups.iter().filter(|g| !g.is_clone_group()).count()
    }

    pub fn clone_group_count(&self) -> usize {
        self.groups.iter().filter(|g| g.is_clone_group()).count()
    }

    /// Group size of every grouped snippet.
    pub fn size_by_digest(&self) -> HashMap<CmwDigest, usize> {
        self.groups
            .iter()
            .map(|g| (g.digest, g.occurrence_count()))
            .collect()
    }
}

/// Median of line counts; for an even count the mean of the two central
/// values, rounded down.
pub fn group_median_loc(locs: &[usize]) -> usize {
    assert!(!locs.is_empty(), "median of an empty group");
    let mut sorted = locs.to_vec();
    sorted.sort_unstable();
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2
    }
}

type PartialGroups = HashMap<CmwDigest, Vec<(SnippetRef, usize)>>;

pub fn build_clone_groups(hashed: &[HashedSnippet], include_empty: bool) -> CloneGroups {
    let empty_count = hashed.iter().filter(|h| h.is_empty).count();
    let merged: PartialGroups = hashed
        .par_iter()
        .filter(|h| include_empty || !h.is_empty)
        .fold(PartialGroups::new, |mut acc, h| {
            acc.entry(h.digest)
                .or_default()
                .push((h.snippet, h.loc_nonblank));
            acc
        })
        .reduce(PartialGroups::new, |mut a, b| {
            for (digest, members) in b {
                a.entry(digest).or_default().extend(members);
            }
            a
        });
    let mut groups: Vec<CloneGroup> = merged
        .into_iter()
        .map(|(digest, mut members)| {
            members.sort_unstable();
            let locs: Vec<usize> = members.iter().map(|m| m.1).collect();
            CloneGroup {
                digest,
                median_loc: group_median_loc(&locs),
                members: members.into_iter().map(|m| m.0).collect(),
            }
        })
        .collect();
    groups.sort_by(|a, b| {
        b.occurrence_count()
            .cmp(&a.occurrence_count())
            .then(a.digest.cmp(&b.digest))
    });
    CloneGroups {
        groups,
        empty_count,
        include_empty,
    }
}

/// Notebooks whose code-cell sequences are positionally CMW-identical.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NotebookCloneClass {
    /// Sorted notebook indices.
    pub members: Vec<u32>,
}

/// Partitions the corpus into notebook clone classes. Empty snippets take
/// part in the positional comparison.
pub fn notebook_clone_classes(
    corpus: &Corpus,
    hashed: &[HashedSnippet],
) -> Vec<NotebookCloneClass> {
    let mut keys: Vec<(Vec<CmwDigest>, u32)> = (0..corpus.len() as u32)
        .map(|n| {
            let seq = hashed[corpus.notebook_range(n)]
                .iter()
                .map(|h| h.digest)
                .collect();
            (seq, n)
        })
        .collect();
    keys.sort();
    let mut classes: Vec<NotebookCloneClass> = Vec::new();
    let mut i = 0;
    while i < keys.len() {
        let mut j = i + 1;
        while j < keys.len() && keys[j].0 == keys[i].0 {
            j += 1;
        }
        classes.push(NotebookCloneClass {
            members: keys[i..j].iter().map(|k| k.1).collect(),
        });
        i = j;
    }
    classes.sort_by(|a, b| {
        b.members
            .len()
            .cmp(&a.members.len())
            .then(a.members[0].cmp(&b.members[0]))
    });
    classes
}

/// Cloned / considered snippet counts for every notebook. Empty snippets
/// are considered only when `groups` includes them.
pub fn clone_counts(
    corpus: &Corpus,
    hashed: &[HashedSnippet],
    groups: &CloneGroups,
) -> Vec<CloneCounts> {
    let sizes = groups.size_by_digest();
    (0..corpus.len() as u32)
        .map(|n| {
            let mut counts = CloneCounts::default();
            for h in &hashed[corpus.notebook_range(n)] {
                if h.is_empty && !groups.include_empty {
                    continue;
                }
                counts.nonempty += 1;
                if sizes.get(&h.digest).copied().unwrap_or(0) >= 2 {
                    counts.cloned += 1;
                }
            }
            counts
        })
        .collect()
}

pub fn clone_frequency(
    corpus: &Corpus,
    notebook: u32,
    hashed: &[HashedSnippet],
    groups: &CloneGroups,
) -> f64 {
    let sizes = groups.size_by_digest();
    let mut counts = CloneCounts::default();
    for h in hashed[corpus.notebook_range(notebook)]
        .iter()
        .filter(|h| groups.include_empty || !h.is_empty)
    {
        counts.nonempty += 1;
        if sizes.get(&h.digest).copied().unwrap_or(0) >= 2 {
            counts.cloned += 1;
        }
    }
    counts.frequency()
}

/// Share of considered snippets that sit in groups of size ≥ 2.
pub fn corpus_clone_ratio(groups: &CloneGroups) -> Result<f64> {
    let total = groups.considered_snippets();
    if total == 0 {
        return Err(Error::validation("corpus_clone_ratio", "no snippets"));
    }
    Ok(groups.cloned_snippets() as f64 / total as f64)
}

/// Notebooks in which some non-empty snippet occurs at least twice.
pub fn self_cloning_notebooks(corpus: &Corpus, hashed: &[HashedSnippet]) -> Vec<u32> {
    (0..corpus.len() as u32)
        .filter(|&n| {
            let mut seen = std::collections::HashSet::new();
            hashed[corpus.notebook_range(n)]
                .iter()
                .filter(|h| !h.is_empty)
                .any(|h| !seen.insert(h.digest))
        })
        .collect()
}
