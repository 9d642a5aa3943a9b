//! Near-miss clone pairs over comment-stripped token bags.
//!
//! Two bags pair when both hold at least two tokens and their multiset
//! overlap reaches ⌈θ · max(|b1|, |b2|)⌉. [`detect_clone_pairs`] uses a
//! prefix-filtered inverted index and returns exactly the pairs an all-pairs
//! scan would.

mod checkpoint;
pub(crate) use checkpoint::write_atomic;
mod detect;
mod sanitize;
mod status;
mod tokenize;

pub use checkpoint::{Progress, ResumableDetector};
pub use detect::{
    detect_clone_pairs, is_clone_pair, required_overlap, ClonePair, DetectorConfig, PairIndex,
};
pub use sanitize::{sanitize_pair_file, ExternalPair, SanitizeReport};
pub use status::{nearmiss_clone_status, NearMissStatus};
pub use tokenize::{
    strip_comments, tokenize, Stripped, TokenBag, TokenizerConfig, DEFAULT_SEPARATORS,
};

use crate::corpus::{Corpus, SnippetRef};

/// Token bags for the given notebooks' snippets, in corpus order.
pub fn corpus_bags(
    corpus: &Corpus,
    notebooks: &[u32],
    cfg: &TokenizerConfig,
) -> Vec<(SnippetRef, TokenBag)> {
    use rayon::prelude::*;
    let refs: Vec<SnippetRef> = notebooks
        .iter()
        .flat_map(|&n| (0..corpus.cell_count(n) as u32).map(move |c| SnippetRef::new(n, c)))
        .collect();
    refs.par_iter()
        .map(|&r| {
            let stripped = strip_comments(&corpus.snippet(r).text(), cfg);
            (r, tokenize(&stripped.text, cfg))
        })
        .collect()
}
