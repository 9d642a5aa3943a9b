use std::collections::HashSet;
use std::path::{Path, PathBuf};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub notebook_id: String,
    pub repo_id: String,
    pub is_fork: bool,
    pub file_path: PathBuf,
}

/// All notebooks of a corpus. Fork entries are kept and flagged; they are
/// dropped when the corpus is assembled.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusManifest {
    pub entries: Vec<ManifestEntry>,
}

impl CorpusManifest {
    /// Parses `notebook_id<TAB>repo_id<TAB>is_fork<TAB>file_path` lines.
    /// Relative file paths are resolved against `base_dir`. Empty lines are
    /// skipped.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.trim().is_empty() {
                continue;
            }
            let context = || format!("manifest line {line_no}");
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(Error::validation(
                    context(),
                    format!("expected 4 tab-separated fields, found {}", fields.len()),
                ));
            }
            let (notebook_id, repo_id) = (fields[0], fields[1]);
            if notebook_id.is_empty() || repo_id.is_empty() || fields[3].is_empty() {
                return Err(Error::validation(context(), "empty field"));
            }
            let is_fork = match fields[2] {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::validation(
                        context(),
                        format!("is_fork must be 0 or 1, found {other:?}"),
                    ))
                }
            };
            if !seen.insert(notebook_id.to_owned()) {
                return Err(Error::validation(
                    context(),
                    format!("duplicate notebook_id {notebook_id:?}"),
                ));
            }
            let path = Path::new(fields[3]);
            entries.push(ManifestEntry {
                notebook_id: notebook_id.to_owned(),
                repo_id: repo_id.to_owned(),
                is_fork,
                file_path: if path.is_absolute() {
                    path.to_path_buf()
                } else {
                    base_dir.join(path)
                },
            });
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn fork_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_fork).count()
    }

    /// Entries that take part in the analysis.
    pub fn non_fork(&self) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(|e| !e.is_fork)
    }
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<CorpusManifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    CorpusManifest::parse(&text, base).map_err(|e| match e {
        Error::Validation { context, message } => {
            Error::validation(format!("{}: {context}", path.display()), message)
        }
        other => other,
    })
}
