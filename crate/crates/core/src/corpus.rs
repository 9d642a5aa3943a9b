use std::collections::HashMap;

use serde::Serialize;

use crate::ingest::{NotebookRecord, Snippet};
use crate::langid::{classify, LanguageGroup};
use crate::{Error, Result};

/// Position of a snippet: notebook index in the corpus and code-cell index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SnippetRef {
    pub notebook: u32,
    pub cell: u32,
}

impl SnippetRef {
    pub fn new(notebook: u32, cell: u32) -> Self {
        Self { notebook, cell }
    }
}

/// Analysed notebooks, ordered by notebook id.
#[derive(Debug, Clone)]
pub struct Corpus {
    records: Vec<NotebookRecord>,
    languages: Vec<LanguageGroup>,
    cell_disagreement: Vec<bool>,
    offsets: Vec<usize>,
    by_id: HashMap<String, u32>,
}

impl Corpus {
    pub fn new(mut records: Vec<NotebookRecord>) -> Result<Self> {
        records.sort_by(|a, b| a.notebook_id.cmp(&b.notebook_id));
        if let Some(w) = records
            .windows(2)
            .find(|w| w[0].notebook_id == w[1].notebook_id)
        {
            return Err(Error::validation(
                "corpus",
                format!("duplicate notebook_id {:?}", w[0].notebook_id),
            ));
        }
        if records.len() > u32::MAX as usize {
            return Err(Error::validation("corpus", "too many notebooks"));
        }
        let mut offsets = Vec::with_capacity(records.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for r in &records {
            acc += r.code_cells.len();
            offsets.push(acc);
        }
        let (languages, cell_disagreement) = records
            .iter()
            .map(|r| {
                let c = classify(&r.language_evidence);
                (c.group, c.cell_disagreement)
            })
            .unzip();
        let by_id = records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.notebook_id.clone(), i as u32))
            .collect();
        Ok(Self {
            records,
            languages,
            cell_disagreement,
            offsets,
            by_id,
        })
    }

    pub fn records(&self) -> &[NotebookRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn record(&self, notebook: u32) -> &NotebookRecord {
        &self.records[notebook as usize]
    }

    pub fn notebook_id(&self, notebook: u32) -> &str {
        &self.records[notebook as usize].notebook_id
    }

    pub fn repo_id(&self, notebook: u32) -> &str {
        &self.records[notebook as usize].repo_id
    }

    pub fn index_of(&self, notebook_id: &str) -> Option<u32> {
        self.by_id.get(notebook_id).copied()
    }

    pub fn language(&self, notebook: u32) -> LanguageGroup {
        self.languages[notebook as usize]
    }

    pub fn languages(&self) -> &[LanguageGroup] {
        &self.languages
    }

    pub fn cells_disagree(&self, notebook: u32) -> bool {
        self.cell_disagreement[notebook as usize]
    }

    pub fn snippet_count(&self) -> usize {
        *self.offsets.last().expect("offsets start with 0")
    }

    pub fn cell_count(&self, notebook: u32) -> usize {
        self.records[notebook as usize].code_cells.len()
    }

    /// Index of a snippet in corpus-wide order.
    pub fn global_index(&self, s: SnippetRef) -> usize {
        self.offsets[s.notebook as usize] + s.cell as usize
    }

    /// Range of global indices covering one notebook's snippets.
    pub fn notebook_range(&self, notebook: u32) -> std::ops::Range<usize> {
        self.offsets[notebook as usize]..self.offsets[notebook as usize + 1]
    }

    pub fn contains(&self, s: SnippetRef) -> bool {
        (s.notebook as usize) < self.records.len()
            && (s.cell as usize) < self.cell_count(s.notebook)
    }

    pub fn snippet(&self, s: SnippetRef) -> &Snippet {
        &self.records[s.notebook as usize].code_cells[s.cell as usize]
    }

    /// Every snippet in corpus order.
    pub fn snippet_refs(&self) -> impl Iterator<Item = SnippetRef> + '_ {
        self.records.iter().enumerate().flat_map(|(n, r)| {
            (0..r.code_cells.len() as u32).map(move |c| SnippetRef::new(n as u32, c))
        })
    }
}

/// Cloned versus non-empty snippet counts of one notebook.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct CloneCounts {
    pub nonempty: usize,
    pub cloned: usize,
}

impl CloneCounts {
    /// Fraction of non-empty snippets that are cloned; 0 without any.
    pub fn frequency(&self) -> f64 {
        if self.nonempty == 0 {
            0.0
        } else {
            self.cloned as f64 / self.nonempty as f64
        }
    }
}
