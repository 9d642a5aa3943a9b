use serde::Serialize;

use crate::cmw::{CloneGroup, CmwDigest};
use crate::corpus::Corpus;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TopClone {
    pub rank: usize,
    pub digest: CmwDigest,
    pub occurrences: usize,
    pub median_loc: usize,
    /// Original source of the group's first member.
    pub source: String,
}

/// The `n` most frequent clone groups (size ≥ 2) whose median line count is
/// at least `min_loc`. `groups` must already be ordered by occurrence count
/// descending, then digest.
pub fn top_clones(
    groups: &[CloneGroup],
    corpus: &Corpus,
    n: usize,
    min_loc: usize,
) -> Result<Vec<TopClone>> {
    if n == 0 {
        return Err(Error::validation("top_clones", "n must be positive"));
    }
    Ok(groups
        .iter()
        .filter(|g| g.is_clone_group() && g.median_loc >= min_loc)
        .take(n)
        .enumerate()
        .map(|(i, g)| TopClone {
            rank: i + 1,
            digest: g.digest,
            occurrences: g.occurrence_count(),
            median_loc: g.median_loc,
            source: corpus.snippet(g.members[0]).text(),
        })
        .collect())
}
