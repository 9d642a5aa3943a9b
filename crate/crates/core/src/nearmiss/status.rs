use std::collections::HashSet;

use super::ClonePair;
use crate::corpus::{CloneCounts, Corpus, SnippetRef};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NearMissStatus {
    /// Notebooks examined, in the order given.
    pub notebooks: Vec<u32>,
    /// Per notebook: cloned flag of each code cell.
    pub cloned: Vec<Vec<bool>>,
    /// Per notebook: counts over snippets with at least one source line.
    pub counts: Vec<CloneCounts>,
}

impl NearMissStatus {
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts.iter().map(CloneCounts::frequency).collect()
    }
}

/// Marks every snippet that occurs in some pair. Snippets without source
/// lines (blank or comment-only) are left out of the counts.
pub fn nearmiss_clone_status(
    pairs: &[ClonePair],
    corpus: &Corpus,
    notebooks: &[u32],
) -> NearMissStatus {
    let paired: HashSet<SnippetRef> = pairs.iter().flat_map(|p| [p.left, p.right]).collect();
    let mut cloned = Vec::with_capacity(notebooks.len());
    let mut counts = Vec::with_capacity(notebooks.len());
    for &n in notebooks {
        let flags: Vec<bool> = (0..corpus.cell_count(n) as u32)
            .map(|c| paired.contains(&SnippetRef::new(n, c)))
            .collect();
        let mut cc = CloneCounts::default();
        for (c, flag) in flags.iter().enumerate() {
            if corpus.snippet(SnippetRef::new(n, c as u32)).lines.sloc == 0 {
                continue;
            }
            cc.nonempty += 1;
            cc.cloned += usize::from(*flag);
        }
        cloned.push(flags);
        counts.push(cc);
    }
    NearMissStatus {
        notebooks: notebooks.to_vec(),
        cloned,
        counts,
    }
}
