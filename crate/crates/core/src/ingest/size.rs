use serde::Serialize;

use super::NotebookRecord;
use crate::stats::{percentiles, SummaryRow};
use crate::{Error, Result};

/// Per-notebook size distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeStats {
    pub bytes: SummaryRow,
    pub code_cells: SummaryRow,
    pub loc_nonblank: SummaryRow,
    pub loc_total: SummaryRow,
}

impl SizeStats {
    pub fn rows(&self) -> [(&'static str, &SummaryRow); 4] {
        [
            ("bytes", &self.bytes),
            ("code_cells", &self.code_cells),
            ("loc_nonblank", &self.loc_nonblank),
            ("loc_total", &self.loc_total),
        ]
    }
}

pub fn summarize_corpus(records: &[NotebookRecord]) -> Result<SizeStats> {
    if records.is_empty() {
        return Err(Error::validation("summarize_corpus", "empty corpus"));
    }
    let metric = |f: &dyn Fn(&NotebookRecord) -> f64| -> Result<SummaryRow> {
        percentiles(&records.iter().map(f).collect::<Vec<_>>())
    };
    Ok(SizeStats {
        bytes: metric(&|r| r.byte_size as f64)?,
        code_cells: metric(&|r| r.code_cells.len() as f64)?,
        loc_nonblank: metric(&|r| r.loc_nonblank() as f64)?,
        loc_total: metric(&|r| r.loc_total() as f64)?,
    })
}
