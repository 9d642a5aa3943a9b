use serde::Serialize;
use serde_json::Value;

use super::ManifestEntry;
use crate::langid::LanguageEvidence;
use crate::nearmiss::{strip_comments, TokenizerConfig};

/// First-line prefix of a GIT-LFS pointer file.
pub const LFS_POINTER_PREFIX: &str = "version https://git-lfs.github.com/spec/";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ParseStatus {
    Ok,
    NotJson,
    IllFormed,
    LfsPointer,
    /// The cell list could not be read; the notebook is treated as having
    /// no code cells.
    CellsUnreadable,
    /// The cells were readable but code could not be extracted; every code
    /// cell is kept with an empty source.
    CodeUnreadable,
}

impl ParseStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseStatus::Ok => "OK",
            ParseStatus::NotJson => "NOT_JSON",
            ParseStatus::IllFormed => "ILL_FORMED",
            ParseStatus::LfsPointer => "LFS_POINTER",
            ParseStatus::CellsUnreadable => "CELLS_UNREADABLE",
            ParseStatus::CodeUnreadable => "CODE_UNREADABLE",
        }
    }

    /// Whether the notebook is part of the analysed corpus.
    pub fn is_analysed(self) -> bool {
        matches!(
            self,
            ParseStatus::Ok | ParseStatus::CellsUnreadable | ParseStatus::CodeUnreadable
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct LineCounts {
    /// All lines.
    pub total: usize,
    /// Lines that are not blank; comment lines count.
    pub nonblank: usize,
    /// Non-blank lines that still hold code after comments are stripped.
    pub sloc: usize,
}

/// Source of one code cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Snippet {
    /// Position among the notebook's code cells.
    pub cell_index: usize,
    pub source: Vec<String>,
    pub lines: LineCounts,
    /// A `"""` block comment was left open.
    pub unterminated_comment: bool,
}

impl Snippet {
    pub fn new(cell_index: usize, source: Vec<String>, cfg: &TokenizerConfig) -> Self {
        let (lines, unterminated_comment) = count_lines_with_warning(&source, cfg);
        Self {
            cell_index,
            source,
            lines,
            unterminated_comment,
        }
    }

    /// Source lines joined with line feeds.
    pub fn text(&self) -> String {
        self.source.join("\n")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NotebookRecord {
    pub notebook_id: String,
    pub repo_id: String,
    pub byte_size: u64,
    pub parse_status: ParseStatus,
    pub code_cells: Vec<Snippet>,
    pub language_evidence: LanguageEvidence,
}

impl NotebookRecord {
    /// Builds an in-memory record from cell texts, as if parsed from a
    /// notebook whose `language_info.name` is `language`.
    pub fn from_sources(
        notebook_id: impl Into<String>,
        repo_id: impl Into<String>,
        cells: &[&str],
        language: Option<&str>,
    ) -> Self {
        let cfg = TokenizerConfig::default();
        Self {
            notebook_id: notebook_id.into(),
            repo_id: repo_id.into(),
            byte_size: cells.iter().map(|c| c.len() as u64).sum(),
            parse_status: ParseStatus::Ok,
            code_cells: cells
                .iter()
                .enumerate()
                .map(|(i, c)| Snippet::new(i, split_lines(c), &cfg))
                .collect(),
            language_evidence: LanguageEvidence {
                language_info_name: language.map(str::to_owned),
                cell_languages: vec![None; cells.len()],
                ..Default::default()
            },
        }
    }

    pub fn loc_total(&self) -> usize {
        self.code_cells.iter().map(|s| s.lines.total).sum()
    }

    pub fn loc_nonblank(&self) -> usize {
        self.code_cells.iter().map(|s| s.lines.nonblank).sum()
    }
}

/// Splits text into lines on LF, dropping a CR before the LF. A trailing
/// line break does not start a new line.
pub fn split_lines(text: &str) -> Vec<String> {
    if text.is_empty() {
        return Vec::new();
    }
    let body = text.strip_suffix('\n').unwrap_or(text);
    body.split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_owned())
        .collect()
}

fn is_blank(line: &str) -> bool {
    line.chars().all(char::is_whitespace)
}

fn count_lines_with_warning(source: &[String], cfg: &TokenizerConfig) -> (LineCounts, bool) {
    let stripped = strip_comments(&source.join("\n"), cfg);
    let sloc = if source.is_empty() {
        0
    } else {
        stripped.text.split('\n').filter(|l| !is_blank(l)).count()
    };
    (
        LineCounts {
            total: source.len(),
            nonblank: source.iter().filter(|l| !is_blank(l)).count(),
            sloc,
        },
        stripped.unterminated_block,
    )
}

pub fn count_lines(source: &[String], cfg: &TokenizerConfig) -> LineCounts {
    count_lines_with_warning(source, cfg).0
}

/// Reads a cell source: a string or a list of string fragments, which are
/// concatenated before splitting into lines.
fn read_source(value: &Value) -> Option<Vec<String>> {
    match value {
        Value::String(s) => Some(split_lines(s)),
        Value::Array(parts) => {
            let mut joined = String::new();
            for p in parts {
                joined.push_str(p.as_str()?);
            }
            Some(split_lines(&joined))
        }
        _ => None,
    }
}

fn string_at(value: &Value, path: &[&str]) -> Option<String> {
    let mut cur = value;
    for key in path {
        cur = cur.get(key)?;
    }
    cur.as_str().map(str::to_owned)
}

struct RawCell<'a> {
    source: Option<&'a Value>,
    language: Option<String>,
}

fn collect_code_cells<'a>(
    cell_list: &'a Value,
    source_key: &str,
    out: &mut Vec<RawCell<'a>>,
) -> Option<()> {
    for cell in cell_list.as_array()? {
        let cell = cell.as_object()?;
        if cell.get("cell_type")?.as_str()? != "code" {
            continue;
        }
        let language = cell
            .get("language")
            .and_then(Value::as_str)
            .or_else(|| {
                cell.get("metadata")
                    .and_then(|m| m.get("language"))
                    .and_then(Value::as_str)
            })
            .map(str::to_owned);
        out.push(RawCell {
            source: cell.get(source_key).or_else(|| cell.get("source")),
            language,
        });
    }
    Some(())
}

/// Code cells of an nbformat 4 (`cells`) or nbformat 3 (`worksheets`)
/// notebook; `None` when the cell structure is unreadable.
fn code_cells(doc: &serde_json::Map<String, Value>) -> Option<Vec<RawCell<'_>>> {
    let mut cells = Vec::new();
    if let Some(list) = doc.get("cells") {
        collect_code_cells(list, "source", &mut cells)?;
    } else {
        for ws in doc.get("worksheets")?.as_array()? {
            collect_code_cells(ws.get("cells")?, "input", &mut cells)?;
        }
    }
    Some(cells)
}

/// Parses raw notebook bytes. Never fails: every problem becomes a
/// [`ParseStatus`].
pub fn parse_notebook(bytes: &[u8], entry: &ManifestEntry) -> NotebookRecord {
    parse_notebook_with(bytes, entry, &TokenizerConfig::default())
}

pub fn parse_notebook_with(
    bytes: &[u8],
    entry: &ManifestEntry,
    cfg: &TokenizerConfig,
) -> NotebookRecord {
    let mut record = NotebookRecord {
        notebook_id: entry.notebook_id.clone(),
        repo_id: entry.repo_id.clone(),
        byte_size: bytes.len() as u64,
        parse_status: ParseStatus::Ok,
        code_cells: Vec::new(),
        language_evidence: LanguageEvidence::default(),
    };
    if bytes.starts_with(LFS_POINTER_PREFIX.as_bytes()) {
        record.parse_status = ParseStatus::LfsPointer;
        return record;
    }
    let doc: Value = match serde_json::from_slice(bytes) {
        Ok(v) => v,
        Err(_) => {
            let first = bytes.iter().find(|b| !b.is_ascii_whitespace());
            record.parse_status = if first == Some(&b'{') {
                ParseStatus::IllFormed
            } else {
                ParseStatus::NotJson
            };
            return record;
        }
    };
    let Some(obj) = doc.as_object() else {
        record.parse_status = ParseStatus::IllFormed;
        return record;
    };
    if !obj.contains_key("cells") && !obj.contains_key("worksheets") {
        record.parse_status = ParseStatus::IllFormed;
        return record;
    }
    record.language_evidence.language_info_name =
        string_at(&doc, &["metadata", "language_info", "name"]);
    record.language_evidence.metadata_language = string_at(&doc, &["metadata", "language"]);
    record.language_evidence.kernelspec_language =
        string_at(&doc, &["metadata", "kernelspec", "language"]);

    let Some(cells) = code_cells(obj) else {
        record.parse_status = ParseStatus::CellsUnreadable;
        return record;
    };
    record.language_evidence.cell_languages = cells.iter().map(|c| c.language.clone()).collect();
    let sources: Option<Vec<Vec<String>>> = cells
        .iter()
        .map(|c| c.source.and_then(read_source))
        .collect();
    match sources {
        Some(sources) => {
            record.code_cells = sources
                .into_iter()
                .enumerate()
                .map(|(i, src)| Snippet::new(i, src, cfg))
                .collect();
        }
        None => {
            record.parse_status = ParseStatus::CodeUnreadable;
            record.code_cells = (0..cells.len())
                .map(|i| Snippet::new(i, Vec::new(), cfg))
                .collect();
        }
    }
    record
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn entry() -> ManifestEntry {
        ManifestEntry {
            notebook_id: "nb".into(),
            repo_id: "repo".into(),
            is_fork: false,
            file_path: PathBuf::from("nb.ipynb"),
        }
    }

    fn parse(s: &str) -> NotebookRecord {
        parse_notebook(s.as_bytes(), &entry())
    }

    fn lines(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn minimal_notebook() {
        let r = parse(
            r#"{"cells":[{"cell_type":"code","source":"x=1","metadata":{},"outputs":[]}],"metadata":{},"nbformat":4}"#,
        );
        assert_eq!(r.parse_status, ParseStatus::Ok);
        assert_eq!(r.code_cells.len(), 1);
        assert_eq!(r.code_cells[0].source, vec!["x=1"]);
        assert_eq!(r.language_evidence.cell_languages, vec![None]);
    }

    #[test]
    fn list_sources_and_markdown() {
        let r = parse(
            r##"{"cells":[
                {"cell_type":"markdown","source":["# Title"]},
                {"cell_type":"code","source":["import os\n","\n","os.getcwd()\n"]},
                {"cell_type":"raw","source":"x"},
                {"cell_type":"code","source":[]}
            ],"metadata":{"language_info":{"name":"python"},"kernelspec":{"language":"python"}}}"##,
        );
        assert_eq!(r.parse_status, ParseStatus::Ok);
        assert_eq!(r.code_cells.len(), 2);
        assert_eq!(r.code_cells[0].source, vec!["import os", "", "os.getcwd()"]);
        assert_eq!(r.code_cells[1].cell_index, 1);
        assert!(r.code_cells[1].source.is_empty());
        assert_eq!(
            r.language_evidence.language_info_name.as_deref(),
            Some("python")
        );
        assert_eq!(
            r.language_evidence.kernelspec_language.as_deref(),
            Some("python")
        );
        assert_eq!(r.loc_total(), 3);
        assert_eq!(r.loc_nonblank(), 2);
    }

    #[test]
    fn nbformat3_worksheets() {
        let r = parse(
            r#"{"metadata":{"name":""},"nbformat":3,"worksheets":[{"cells":[
                {"cell_type":"code","input":["a = 1\n","b = 2"],"language":"python"},
                {"cell_type":"heading","source":["T"]},
                {"cell_type":"code","input":"c","language":"python"}]}]}"#,
        );
        assert_eq!(r.parse_status, ParseStatus::Ok);
        assert_eq!(r.code_cells.len(), 2);
        assert_eq!(r.code_cells[0].source, vec!["a = 1", "b = 2"]);
        assert_eq!(
            r.language_evidence.cell_languages,
            vec![Some("python".to_string()), Some("python".to_string())]
        );
    }

    #[test]
    fn failure_classes() {
        assert_eq!(parse("hello world").parse_status, ParseStatus::NotJson);
        assert_eq!(parse("").parse_status, ParseStatus::NotJson);
        assert_eq!(parse("{\"cells\": [").parse_status, ParseStatus::IllFormed);
        assert_eq!(parse("[1,2]").parse_status, ParseStatus::IllFormed);
        assert_eq!(
            parse("{\"metadata\":{}}").parse_status,
            ParseStatus::IllFormed
        );
        let lfs = "version https://git-lfs.github.com/spec/v1\noid sha256:abc\nsize 12\n";
        assert_eq!(parse(lfs).parse_status, ParseStatus::LfsPointer);
        assert_eq!(
            parse_notebook(&[0xff, 0xfe, 0x00], &entry()).parse_status,
            ParseStatus::NotJson
        );
    }

    #[test]
    fn unreadable_cells() {
        let r = parse(r#"{"cells": 5, "metadata": {"language": "R"}}"#);
        assert_eq!(r.parse_status, ParseStatus::CellsUnreadable);
        assert!(r.code_cells.is_empty());
        assert!(r.language_evidence.cell_languages.is_empty());
        assert_eq!(r.language_evidence.metadata_language.as_deref(), Some("R"));
        let r = parse(r#"{"cells": [1, 2]}"#);
        assert_eq!(r.parse_status, ParseStatus::CellsUnreadable);
    }

    #[test]
    fn unreadable_code() {
        let r = parse(
            r#"{"cells":[{"cell_type":"code","source":"a"},{"cell_type":"code","source":7},{"cell_type":"code"}]}"#,
        );
        assert_eq!(r.parse_status, ParseStatus::CodeUnreadable);
        assert_eq!(r.code_cells.len(), 3);
        assert!(r.code_cells.iter().all(|s| s.source.is_empty()));
        assert_eq!(r.language_evidence.cell_languages.len(), 3);
    }

    #[test]
    fn byte_size_and_determinism() {
        let text = r#"{"cells":[{"cell_type":"code","source":"x = 1\n# c\n"}]}"#;
        let a = parse(text);
        assert_eq!(a.byte_size, text.len() as u64);
        assert_eq!(a, parse(text));
    }

    #[test]
    fn line_splitting() {
        assert_eq!(split_lines("a\r\nb\n"), lines(&["a", "b"]));
        assert_eq!(split_lines("a\n\n"), lines(&["a", ""]));
        assert_eq!(split_lines("\n"), lines(&[""]));
        assert!(split_lines("").is_empty());
    }

    #[test]
    fn line_counts() {
        let cfg = TokenizerConfig::default();
        let c = count_lines(&lines(&["x=1", "", "# c"]), &cfg);
        assert_eq!((c.total, c.nonblank, c.sloc), (3, 2, 1));
        assert_eq!(count_lines(&[], &cfg), LineCounts::default());
        let c = count_lines(&lines(&["a=1 # trailing"]), &cfg);
        assert_eq!((c.total, c.nonblank, c.sloc), (1, 1, 1));
        let c = count_lines(&lines(&["\"\"\"", "doc", "\"\"\"", "f()", "  \t"]), &cfg);
        assert_eq!((c.total, c.nonblank, c.sloc), (5, 4, 1));
    }
}
