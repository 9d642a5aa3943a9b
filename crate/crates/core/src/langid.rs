//! Notebook language classification from declared metadata.
//!
//! Four holders are examined in priority order: `metadata.language_info.name`,
//! `metadata.language`, `metadata.kernelspec.language` and the per-cell
//! language of each code cell. The first holder with a value decides.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LanguageEvidence {
    /// `metadata.language_info.name`
    pub language_info_name: Option<String>,
    /// `metadata.language`
    pub metadata_language: Option<String>,
    /// `metadata.kernelspec.language`
    pub kernelspec_language: Option<String>,
    /// One entry per code cell.
    pub cell_languages: Vec<Option<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LanguageGroup {
    Python,
    Julia,
    R,
    Scala,
    Other,
    Undefined,
}

impl LanguageGroup {
    pub const ALL: [LanguageGroup; 6] = [
        LanguageGroup::Python,
        LanguageGroup::Julia,
        LanguageGroup::R,
        LanguageGroup::Scala,
        LanguageGroup::Other,
        LanguageGroup::Undefined,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LanguageGroup::Julia => "JULIA",
            LanguageGroup::Python => "PYTHON",
            LanguageGroup::R => "R",
            LanguageGroup::Scala => "SCALA",
            LanguageGroup::Other => "OTHER",
            LanguageGroup::Undefined => "UNDEFINED",
        }
    }

    /// Group of a single declared value.
    pub fn of_value(value: &str) -> LanguageGroup {
        let v = value.trim();
        if v.is_empty() {
            LanguageGroup::Undefined
        } else if v == "Julia" || v == "julia" {
            LanguageGroup::Julia
        } else if v.starts_with("Python") || v.starts_with("python") {
            LanguageGroup::Python
        } else if v == "R" || v == "r" {
            LanguageGroup::R
        } else if v.starts_with("Scala") || v.starts_with("scala") {
            LanguageGroup::Scala
        } else {
            LanguageGroup::Other
        }
    }
}

impl fmt::Display for LanguageGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LanguageGroup {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LanguageGroup::ALL
            .into_iter()
            .find(|g| g.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                crate::Error::validation("language group", format!("unknown group {s:?}"))
            })
    }
}

fn present(v: &Option<String>) -> Option<&str> {
    v.as_deref().map(str::trim).filter(|s| !s.is_empty())
}

impl LanguageEvidence {
    fn header_fields(&self) -> [Option<&str>; 3] {
        [
            present(&self.language_info_name),
            present(&self.metadata_language),
            present(&self.kernelspec_language),
        ]
    }

    /// Every present value across all holders, in priority order.
    pub fn values(&self) -> impl Iterator<Item = &str> {
        self.header_fields()
            .into_iter()
            .flatten()
            .chain(self.cell_languages.iter().filter_map(present))
    }
}

/// Classification plus whether the decision fell on disagreeing cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub group: LanguageGroup,
    /// Classification reached the code cells and they did not all declare
    /// the same value.
    pub cell_disagreement: bool,
}

pub fn classify(evidence: &LanguageEvidence) -> Classification {
    if let Some(v) = evidence.header_fields().into_iter().flatten().next() {
        return Classification {
            group: LanguageGroup::of_value(v),
            cell_disagreement: false,
        };
    }
    let cells: Vec<Option<&str>> = evidence.cell_languages.iter().map(present).collect();
    let Some(first) = cells.iter().flatten().next() else {
        return Classification {
            group: LanguageGroup::Undefined,
            cell_disagreement: false,
        };
    };
    if cells.iter().all(|c| *c == Some(*first)) {
        Classification {
            group: LanguageGroup::of_value(first),
            cell_disagreement: false,
        }
    } else {
        Classification {
            group: LanguageGroup::Undefined,
            cell_disagreement: true,
        }
    }
}

pub fn classify_language(evidence: &LanguageEvidence) -> LanguageGroup {
    classify(evidence).group
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LanguageConflict {
    pub conflicting: bool,
    /// Distinct groups named by the holders (only filled when conflicting).
    pub groups: BTreeSet<LanguageGroup>,
    pub values: BTreeSet<String>,
}

/// Conflicting when two or more holders carry values that map to
/// different groups. Each code cell counts as its own holder.
pub fn detect_conflicts(evidence: &LanguageEvidence) -> LanguageConflict {
    let groups: BTreeSet<LanguageGroup> = evidence.values().map(LanguageGroup::of_value).collect();
    if groups.len() < 2 {
        return LanguageConflict::default();
    }
    LanguageConflict {
        conflicting: true,
        groups,
        values: evidence.values().map(str::to_owned).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LanguageShare {
    pub group: LanguageGroup,
    pub count: usize,
    pub percent: f64,
}

/// Counts per group in fixed group order; groups with no notebooks are
/// left out.
pub fn language_distribution(groups: &[LanguageGroup]) -> Vec<LanguageShare> {
    let total = groups.len();
    LanguageGroup::ALL
        .into_iter()
        .filter_map(|g| {
            let count = groups.iter().filter(|x| **x == g).count();
            (count > 0).then(|| LanguageShare {
                group: g,
                count,
                percent: 100.0 * count as f64 / total as f64,
            })
        })
        .collect()
}
