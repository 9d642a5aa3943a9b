//! Corpus manifest loading, notebook parsing and size metrics.

mod manifest;
mod notebook;
mod size;

pub use manifest::{load_manifest, CorpusManifest, ManifestEntry};
pub use notebook::{
    count_lines, parse_notebook, split_lines, LineCounts, NotebookRecord, ParseStatus, Snippet,
    LFS_POINTER_PREFIX,
};
pub use size::{summarize_corpus, SizeStats};
