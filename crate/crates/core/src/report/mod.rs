//! End-to-end pipeline and CSV report generation.

mod csv_out;
mod top;

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use md5::{Digest as _, Md5};
use rayon::prelude::*;
use serde::Serialize;

use crate::cmw::{
    build_clone_groups, clone_counts, corpus_clone_ratio, hash_corpus, notebook_clone_classes,
    self_cloning_notebooks, CloneGroups, DigestAlgorithm, HashedSnippet, NotebookCloneClass,
};
use crate::connections::{
    build_connection_profiles, cmw_connection_profiles, paired_connection_tests, ConnectionProfile,
    SelfLoopMode,
};
use crate::corpus::{CloneCounts, Corpus, SnippetRef};
use crate::ingest::{
    load_manifest, parse_notebook, summarize_corpus, CorpusManifest, ParseStatus, SizeStats,
};
use crate::langid::{detect_conflicts, language_distribution, LanguageGroup, LanguageShare};
use crate::nearmiss::{
    corpus_bags, detect_clone_pairs, nearmiss_clone_status, ClonePair, DetectorConfig,
    NearMissStatus, ResumableDetector, TokenizerConfig,
};
use crate::stats::{
    format_p, histogram, kruskal_wallis, pairwise_rank_sum, percentiles, spearman, BinSpec,
    PairwiseMatrix, SummaryRow, TestOutcome,
};
use crate::{Error, Result};

pub use csv_out::fmt_f64;
use csv_out::{histogram_table, key_values, summary_table, Table};
pub use top::{top_clones, TopClone};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub detector: DetectorConfig,
    /// Keep whitespace-only snippets in the CMW groups.
    pub include_empty: bool,
    pub self_loop: SelfLoopMode,
    /// Language analysed for near-miss clones; `None` means all.
    pub nearmiss_language: Option<LanguageGroup>,
    /// Normalise connection counts by non-empty snippets instead of all
    /// code cells.
    pub normalize_by_nonempty: bool,
    pub digest: DigestAlgorithm,
    pub top_n: usize,
    pub top_min_loc: usize,
    /// Worker threads; results do not depend on it.
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Directory and partition size for resumable near-miss detection.
    #[serde(skip)]
    pub checkpoint: Option<(PathBuf, usize)>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            detector: DetectorConfig::default(),
            include_empty: false,
            self_loop: SelfLoopMode::Once,
            nearmiss_language: Some(LanguageGroup::Python),
            normalize_by_nonempty: false,
            digest: DigestAlgorithm::Md5,
            top_n: 20,
            top_min_loc: 4,
            threads: None,
            checkpoint: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.detector.validate()?;
        if self.top_n == 0 {
            return Err(Error::validation("config", "top_n must be positive"));
        }
        Ok(())
    }

    /// Runs `f` on a pool with the configured number of threads.
    pub fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.threads {
            builder = builder.num_threads(n);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::validation("thread pool", e.to_string()))?;
        Ok(pool.install(f))
    }
}

/// Outcome of reading one manifest entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IngestOutcome {
    pub notebook_id: String,
    pub repo_id: String,
    pub is_fork: bool,
    /// `None` for fork entries, which are not read.
    pub status: Option<ParseStatus>,
    pub byte_size: u64,
    pub code_cells: usize,
}

#[derive(Debug, Clone)]
pub struct IngestedCorpus {
    pub manifest_path: PathBuf,
    pub manifest_md5: String,
    pub manifest: CorpusManifest,
    /// Every manifest entry, ordered by notebook id.
    pub outcomes: Vec<IngestOutcome>,
    /// Analysed notebooks (not forks, parse status OK or partially readable).
    pub corpus: Corpus,
    /// Non-fork files whose bytes equal an earlier file's.
    pub duplicate_files: usize,
}

/// Loads the manifest and parses every non-fork notebook.
pub fn ingest_corpus(manifest_path: &Path) -> Result<IngestedCorpus> {
    let manifest = load_manifest(manifest_path)?;
    let manifest_bytes = std::fs::read(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest_md5 = hex::encode(Md5::digest(&manifest_bytes));
    let parsed: Vec<(crate::ingest::NotebookRecord, [u8; 16])> = manifest
        .non_fork()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|entry| {
            let bytes =
                std::fs::read(&entry.file_path).map_err(|e| Error::io(&entry.file_path, e))?;
            let digest: [u8; 16] = Md5::digest(&bytes).into();
            Ok((parse_notebook(&bytes, entry), digest))
        })
        .collect::<Result<_>>()?;

    let mut seen = HashSet::new();
    let duplicate_files = parsed.iter().filter(|(_, d)| !seen.insert(*d)).count();

    let mut outcomes: Vec<IngestOutcome> = parsed
        .iter()
        .map(|(r, _)| IngestOutcome {
            notebook_id: r.notebook_id.clone(),
            repo_id: r.repo_id.clone(),
            is_fork: false,
            status: Some(r.parse_status),
            byte_size: r.byte_size,
            code_cells: r.code_cells.len(),
        })
        .chain(
            manifest
                .entries
                .iter()
                .filter(|e| e.is_fork)
                .map(|e| IngestOutcome {
                    notebook_id: e.notebook_id.clone(),
                    repo_id: e.repo_id.clone(),
                    is_fork: true,
                    status: None,
                    byte_size: 0,
                    code_cells: 0,
                }),
        )
        .collect();
    outcomes.sort_by(|a, b| a.notebook_id.cmp(&b.notebook_id));

    let records = parsed
        .into_iter()
        .map(|(r, _)| r)
        .filter(|r| r.parse_status.is_analysed())
        .collect();
    Ok(IngestedCorpus {
        manifest_path: manifest_path.to_path_buf(),
        manifest_md5,
        manifest,
        outcomes,
        corpus: Corpus::new(records)?,
        duplicate_files,
    })
}

#[derive(Debug, Clone)]
pub struct CmwAnalysis {
    pub hashed: Vec<HashedSnippet>,
    pub groups: CloneGroups,
    pub counts: Vec<CloneCounts>,
    pub classes: Vec<NotebookCloneClass>,
    pub self_cloning: Vec<u32>,
    pub profiles: Vec<ConnectionProfile>,
}

impl CmwAnalysis {
    pub fn run(corpus: &Corpus, cfg: &PipelineConfig) -> Self {
        let hashed = hash_corpus(corpus, cfg.digest);
        let groups = build_clone_groups(&hashed, cfg.include_empty);
        let counts = clone_counts(corpus, &hashed, &groups);
        let classes = notebook_clone_classes(corpus, &hashed);
        let self_cloning = self_cloning_notebooks(corpus, &hashed);
        let denominator = |n: u32| {
            if cfg.normalize_by_nonempty {
                counts[n as usize].nonempty
            } else {
                corpus.cell_count(n)
            }
        };
        let profiles = cmw_connection_profiles(&groups.groups, corpus, cfg.self_loop, &denominator);
        Self {
            hashed,
            groups,
            counts,
            classes,
            self_cloning,
            profiles,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NearMissAnalysis {
    /// Notebooks of the analysed language.
    pub scope: Vec<u32>,
    pub pairs: Vec<ClonePair>,
    pub status: NearMissStatus,
    pub profiles: Vec<ConnectionProfile>,
}

impl NearMissAnalysis {
    pub fn run(corpus: &Corpus, cfg: &PipelineConfig) -> Result<Self> {
        let scope: Vec<u32> = (0..corpus.len() as u32)
            .filter(|&n| {
                cfg.nearmiss_language
                    .is_none_or(|l| corpus.language(n) == l)
            })
            .collect();
        let bags = corpus_bags(corpus, &scope, &TokenizerConfig::default());
        let pairs = match &cfg.checkpoint {
            Some((dir, partition)) => {
                ResumableDetector::new(dir, *partition).run_to_end(&bags, &cfg.detector)?
            }
            None => detect_clone_pairs(&bags, &cfg.detector)?,
        };
        let status = nearmiss_clone_status(&pairs, corpus, &scope);
        let nonempty: BTreeMap<u32, usize> = scope
            .iter()
            .zip(&status.counts)
            .map(|(&n, c)| (n, c.nonempty))
            .collect();
        let denominator = |n: u32| {
            if cfg.normalize_by_nonempty {
                nonempty[&n]
            } else {
                corpus.cell_count(n)
            }
        };
        let profiles =
            build_connection_profiles(&pairs, corpus, &scope, cfg.self_loop, &denominator)?;
        Ok(Self {
            scope,
            pairs,
            status,
            profiles,
        })
    }
}

/// A statistical test row; `Err` holds the reason it could not be run.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedTest {
    pub name: String,
    pub outcome: std::result::Result<TestOutcome, String>,
}

impl NamedTest {
    fn new(name: impl Into<String>, outcome: Result<TestOutcome>) -> Self {
        Self {
            name: name.into(),
            outcome: outcome.map_err(|e| e.to_string()),
        }
    }
}

/// Output groups, one per CLI subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Section {
    Ingest,
    Langid,
    Cmw,
    NearMiss,
    Connections,
    Stats,
    TopClones,
    Run,
}

#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub size_stats: Option<SizeStats>,
    pub language_table: Vec<LanguageShare>,
    pub cmw_summary: Vec<(String, String)>,
    pub language_pairwise: Option<PairwiseMatrix>,
    pub nearmiss_summary: Vec<(String, String)>,
    pub tests: Vec<NamedTest>,
    pub top_clones: Vec<TopClone>,
    /// Relative path → (section, file content).
    pub files: BTreeMap<String, (Section, String)>,
}

impl ReportBundle {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.get(name).map(|(_, c)| c.as_str())
    }

    /// Writes the files of the given sections (all when empty) below
    /// `out_dir`, each through a temporary file and a rename. Returns the
    /// paths written.
    pub fn write(&self, out_dir: &Path, sections: &[Section]) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for (name, (section, content)) in &self.files {
            if !sections.is_empty() && !sections.contains(section) {
                continue;
            }
            let path = out_dir.join(name);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            crate::nearmiss::write_atomic(&path, content.as_bytes())?;
            written.push(path);
        }
        Ok(written)
    }
}

fn unit_bins() -> BinSpec {
    BinSpec::Width {
        origin: 0.0,
        width: 1.0,
    }
}

fn frequency_bins() -> BinSpec {
    BinSpec::Edges((0..=100).map(|k| k as f64 / 100.0).collect())
}

fn summary_of(values: &[f64]) -> Option<SummaryRow> {
    percentiles(values).ok()
}

fn count_where<T>(items: &[T], f: impl Fn(&T) -> bool) -> String {
    items.iter().filter(|x| f(x)).count().to_string()
}

fn profiles_csv(profiles: &[ConnectionProfile]) -> Result<String> {
    let mut t = Table::new(["notebook_id", "total", "normalized", "c0", "ic", "sc"])?;
    for p in profiles {
        t.row([
            p.notebook_id.clone(),
            p.total.to_string(),
            fmt_f64(p.normalized),
            p.c0.to_string(),
            fmt_f64(p.ic),
            p.sc.to_string(),
        ])?;
    }
    t.finish()
}

fn connection_tables(
    prefix: &str,
    profiles: &[ConnectionProfile],
    files: &mut BTreeMap<String, (Section, String)>,
    tests: &mut Vec<NamedTest>,
) -> Result<()> {
    let totals: Vec<f64> = profiles.iter().map(|p| p.total as f64).collect();
    let normalized: Vec<f64> = profiles.iter().map(|p| p.normalized).collect();
    let c = Section::Connections;
    files.insert(
        format!("{prefix}_connections.csv"),
        (c, profiles_csv(profiles)?),
    );
    files.insert(
        format!("{prefix}_connection_summary.csv"),
        (
            c,
            summary_table(&[
                ("absolute", summary_of(&totals)),
                ("normalized", summary_of(&normalized)),
            ])?,
        ),
    );
    files.insert(
        format!("figures/{prefix}_connections.csv"),
        (c, histogram_table(&histogram(&totals, &unit_bins()))?),
    );
    files.insert(
        format!("figures/{prefix}_connections_normalized.csv"),
        (c, histogram_table(&histogram(&normalized, &unit_bins()))?),
    );
    match paired_connection_tests(profiles) {
        Ok((ic, sc)) => {
            tests.push(NamedTest::new(
                format!("{prefix}_signed_rank_c0_ic"),
                Ok(ic),
            ));
            tests.push(NamedTest::new(
                format!("{prefix}_signed_rank_c0_sc"),
                Ok(sc),
            ));
        }
        Err(e) => {
            tests.push(NamedTest::new(
                format!("{prefix}_signed_rank_c0_ic"),
                Err(e),
            ));
        }
    }
    Ok(())
}

fn tests_csv(tests: &[NamedTest]) -> Result<String> {
    let mut t = Table::new(["test", "statistic", "value", "p", "notes"])?;
    for test in tests {
        match &test.outcome {
            Ok(TestOutcome::Tested(r)) => {
                let mut notes = r.notes.clone();
                notes.push(format!(
                    "n={}",
                    r.sizes
                        .iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join("/")
                ));
                if r.p_value < crate::stats::P_DISPLAY_FLOOR {
                    notes.push("p < 2.2e-16".into());
                }
                t.row([
                    test.name.clone(),
                    r.statistic.to_string(),
                    fmt_f64(r.value),
                    fmt_f64(r.p_value),
                    notes.join("; "),
                ])?;
            }
            Ok(TestOutcome::Degenerate {
                statistic, reason, ..
            }) => t.row([
                test.name.clone(),
                statistic.to_string(),
                String::new(),
                String::new(),
                format!("degenerate: {reason}"),
            ])?,
            Err(reason) => t.row([
                test.name.clone(),
                String::new(),
                String::new(),
                String::new(),
                format!("skipped: {reason}"),
            ])?,
        }
    }
    t.finish()
}

fn pairwise_csv(m: &PairwiseMatrix) -> Result<String> {
    let k = m.labels.len();
    let mut t = Table::new(
        std::iter::once(String::new()).chain(m.labels[..k.saturating_sub(1)].iter().cloned()),
    )?;
    for i in 1..k {
        let mut row = vec![m.labels[i].clone()];
        for j in 0..k - 1 {
            row.push(match (j < i).then(|| m.adjusted[i][j]).flatten() {
                Some(p) => format_p(p),
                None => String::new(),
            });
        }
        t.row(row)?;
    }
    t.finish()
}

/// Frequencies per language group (UNDEFINED excluded), in group order.
fn frequencies_by_language(
    corpus: &Corpus,
    notebooks: &[u32],
    freq: &[f64],
) -> Vec<(String, Vec<f64>)> {
    LanguageGroup::ALL
        .into_iter()
        .filter(|g| *g != LanguageGroup::Undefined)
        .map(|g| {
            let values: Vec<f64> = notebooks
                .iter()
                .zip(freq)
                .filter(|(n, _)| corpus.language(**n) == g)
                .map(|(_, f)| *f)
                .collect();
            (g.to_string(), values)
        })
        .filter(|(_, v)| !v.is_empty())
        .collect()
}

#[derive(Serialize)]
struct RunManifest<'a> {
    tool: &'static str,
    version: &'static str,
    manifest: String,
    manifest_md5: &'a str,
    config: &'a PipelineConfig,
    manifest_entries: usize,
    fork_entries: usize,
    analysed_notebooks: usize,
    snippets: usize,
    nearmiss_pairs: Option<usize>,
}

/// Builds every table and figure dataset. Near-miss analysis runs only
/// when `with_nearmiss` is set.
pub fn build_bundle(
    ingested: &IngestedCorpus,
    cfg: &PipelineConfig,
    with_nearmiss: bool,
) -> Result<ReportBundle> {
    cfg.validate()?;
    let corpus = &ingested.corpus;
    if corpus.is_empty() {
        return Err(Error::validation(
            ingested.manifest_path.display().to_string(),
            "no analysable notebooks after fork exclusion and parsing",
        ));
    }
    let mut files: BTreeMap<String, (Section, String)> = BTreeMap::new();
    let mut tests = Vec::new();

    // ingest
    let mut t = Table::new([
        "notebook_id",
        "repo_id",
        "is_fork",
        "status",
        "bytes",
        "code_cells",
    ])?;
    for o in &ingested.outcomes {
        t.row([
            o.notebook_id.clone(),
            o.repo_id.clone(),
            u8::from(o.is_fork).to_string(),
            o.status
                .map_or("FORK_EXCLUDED", ParseStatus::as_str)
                .to_string(),
            o.byte_size.to_string(),
            o.code_cells.to_string(),
        ])?;
    }
    files.insert("ingest_status.csv".into(), (Section::Ingest, t.finish()?));
    let size_stats = summarize_corpus(corpus.records())?;
    let rows: Vec<(&str, Option<SummaryRow>)> = size_stats
        .rows()
        .iter()
        .map(|(n, r)| (*n, Some(**r)))
        .collect();
    files.insert(
        "size_stats.csv".into(),
        (Section::Ingest, summary_table(&rows)?),
    );
    let metric = |f: &dyn Fn(&crate::ingest::NotebookRecord) -> f64| -> Vec<f64> {
        corpus.records().iter().map(f).collect()
    };
    let size_figures: [(&str, Vec<f64>, BinSpec); 4] = [
        (
            "bytes",
            metric(&|r| r.byte_size as f64),
            BinSpec::Width {
                origin: 0.0,
                width: 1024.0,
            },
        ),
        (
            "code_cells",
            metric(&|r| r.code_cells.len() as f64),
            unit_bins(),
        ),
        (
            "loc_nonblank",
            metric(&|r| r.loc_nonblank() as f64),
            unit_bins(),
        ),
        ("loc_total", metric(&|r| r.loc_total() as f64), unit_bins()),
    ];
    for (name, values, spec) in &size_figures {
        files.insert(
            format!("figures/notebook_{name}.csv"),
            (Section::Ingest, histogram_table(&histogram(values, spec))?),
        );
    }
    let status_count = |s: ParseStatus| count_where(&ingested.outcomes, |o| o.status == Some(s));
    let mut ingest_summary = vec![
        ("manifest_entries", ingested.manifest.len().to_string()),
        (
            "fork_entries_excluded",
            ingested.manifest.fork_count().to_string(),
        ),
    ];
    for s in [
        ParseStatus::Ok,
        ParseStatus::NotJson,
        ParseStatus::IllFormed,
        ParseStatus::LfsPointer,
        ParseStatus::CellsUnreadable,
        ParseStatus::CodeUnreadable,
    ] {
        ingest_summary.push((s.as_str(), status_count(s)));
    }
    ingest_summary.extend([
        ("analysed_notebooks", corpus.len().to_string()),
        (
            "byte_identical_duplicate_files",
            ingested.duplicate_files.to_string(),
        ),
        ("code_cells", corpus.snippet_count().to_string()),
        (
            "loc_nonblank",
            corpus
                .records()
                .iter()
                .map(|r| r.loc_nonblank())
                .sum::<usize>()
                .to_string(),
        ),
        (
            "loc_total",
            corpus
                .records()
                .iter()
                .map(|r| r.loc_total())
                .sum::<usize>()
                .to_string(),
        ),
    ]);
    files.insert(
        "ingest_summary.csv".into(),
        (Section::Ingest, key_values(&ingest_summary)?),
    );

    // langid
    let language_table = language_distribution(corpus.languages());
    let mut t = Table::new(["language", "count", "percent"])?;
    for share in &language_table {
        t.row([
            share.group.to_string(),
            share.count.to_string(),
            fmt_f64(share.percent),
        ])?;
    }
    files.insert("languages.csv".into(), (Section::Langid, t.finish()?));
    let mut t = Table::new(["notebook_id", "groups", "values", "cell_disagreement"])?;
    for n in 0..corpus.len() as u32 {
        let conflict = detect_conflicts(&corpus.record(n).language_evidence);
        if conflict.conflicting || corpus.cells_disagree(n) {
            t.row([
                corpus.notebook_id(n).to_string(),
                conflict
                    .groups
                    .iter()
                    .map(|g| g.as_str())
                    .collect::<Vec<_>>()
                    .join(";"),
                conflict
                    .values
                    .iter()
                    .cloned()
                    .collect::<Vec<_>>()
                    .join(";"),
                u8::from(corpus.cells_disagree(n)).to_string(),
            ])?;
        }
    }
    files.insert(
        "language_conflicts.csv".into(),
        (Section::Langid, t.finish()?),
    );

    // cmw
    let cmw = CmwAnalysis::run(corpus, cfg);
    let groups = &cmw.groups;
    let mut t = Table::new(["digest", "occurrences", "median_loc"])?;
    let mut members = Table::new(["digest", "notebook_id", "cell_index"])?;
    for g in &groups.groups {
        t.row([
            g.digest.to_string(),
            g.occurrence_count().to_string(),
            g.median_loc.to_string(),
        ])?;
        for m in &g.members {
            members.row([
                g.digest.to_string(),
                corpus.notebook_id(m.notebook).to_string(),
                m.cell.to_string(),
            ])?;
        }
    }
    files.insert("cmw_groups.csv".into(), (Section::Cmw, t.finish()?));
    files.insert("cmw_members.csv".into(), (Section::Cmw, members.finish()?));

    let frequencies: Vec<f64> = cmw.counts.iter().map(CloneCounts::frequency).collect();
    let mut t = Table::new([
        "notebook_id",
        "language",
        "code_cells",
        "considered",
        "cloned",
        "frequency",
    ])?;
    for (n, c) in cmw.counts.iter().enumerate() {
        let n = n as u32;
        t.row([
            corpus.notebook_id(n).to_string(),
            corpus.language(n).to_string(),
            corpus.cell_count(n).to_string(),
            c.nonempty.to_string(),
            c.cloned.to_string(),
            fmt_f64(c.frequency()),
        ])?;
    }
    files.insert(
        "cmw_clone_frequency.csv".into(),
        (Section::Cmw, t.finish()?),
    );

    let mut t = Table::new(["class", "size", "notebook_id"])?;
    for (i, class) in cmw.classes.iter().enumerate() {
        for &n in &class.members {
            t.row([
                i.to_string(),
                class.members.len().to_string(),
                corpus.notebook_id(n).to_string(),
            ])?;
        }
    }
    files.insert(
        "notebook_clone_classes.csv".into(),
        (Section::Cmw, t.finish()?),
    );

    let clone_groups: Vec<_> = groups
        .groups
        .iter()
        .filter(|g| g.is_clone_group())
        .collect();
    let clone_loc: Vec<f64> = clone_groups
        .iter()
        .flat_map(|g| std::iter::repeat_n(g.median_loc as f64, g.occurrence_count()))
        .collect();
    let group_loc: Vec<f64> = clone_groups.iter().map(|g| g.median_loc as f64).collect();
    files.insert(
        "cmw_line_counts.csv".into(),
        (
            Section::Cmw,
            summary_table(&[
                ("clone_loc", summary_of(&clone_loc)),
                ("clone_group_loc", summary_of(&group_loc)),
                ("clone_frequency", summary_of(&frequencies)),
            ])?,
        ),
    );
    let group_sizes: Vec<f64> = clone_groups
        .iter()
        .map(|g| g.occurrence_count() as f64)
        .collect();
    let class_sizes: Vec<f64> = cmw
        .classes
        .iter()
        .filter(|c| c.members.len() >= 2)
        .map(|c| c.members.len() as f64)
        .collect();
    for (name, values, spec) in [
        ("cmw_group_sizes", &group_sizes, unit_bins()),
        ("notebook_clone_class_sizes", &class_sizes, unit_bins()),
        ("cmw_clone_loc", &clone_loc, unit_bins()),
        ("cmw_group_loc", &group_loc, unit_bins()),
        ("cmw_clone_frequency", &frequencies, frequency_bins()),
    ] {
        files.insert(
            format!("figures/{name}.csv"),
            (Section::Cmw, histogram_table(&histogram(values, &spec))?),
        );
    }

    let considered: usize = cmw.counts.iter().map(|c| c.nonempty).sum();
    let cmw_summary: Vec<(String, String)> = [
        ("snippets", corpus.snippet_count().to_string()),
        ("empty_snippets", groups.empty_count.to_string()),
        ("considered_snippets", considered.to_string()),
        ("unique_snippets", groups.unique_snippets().to_string()),
        ("cloned_snippets", groups.cloned_snippets().to_string()),
        ("clone_groups", groups.clone_group_count().to_string()),
        (
            "clone_ratio",
            corpus_clone_ratio(groups).map(fmt_f64).unwrap_or_default(),
        ),
        (
            "notebooks_only_cloned",
            count_where(&cmw.counts, |c| c.nonempty > 0 && c.cloned == c.nonempty),
        ),
        (
            "notebooks_only_unique",
            count_where(&cmw.counts, |c| c.nonempty > 0 && c.cloned == 0),
        ),
        (
            "notebooks_with_self_clone",
            cmw.self_cloning.len().to_string(),
        ),
        (
            "notebook_clone_classes",
            count_where(&cmw.classes, |c| c.members.len() >= 2),
        ),
        (
            "notebooks_with_notebook_clone",
            cmw.classes
                .iter()
                .filter(|c| c.members.len() >= 2)
                .map(|c| c.members.len())
                .sum::<usize>()
                .to_string(),
        ),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    let kv: Vec<(&str, String)> = cmw_summary
        .iter()
        .map(|(k, v)| (k.as_str(), v.clone()))
        .collect();
    files.insert("cmw_summary.csv".into(), (Section::Cmw, key_values(&kv)?));

    // cmw statistics
    let all: Vec<u32> = (0..corpus.len() as u32).collect();
    let cells: Vec<f64> = all.iter().map(|&n| corpus.cell_count(n) as f64).collect();
    tests.push(NamedTest::new(
        "cmw_spearman_cells_frequency",
        spearman(&cells, &frequencies),
    ));
    let by_language = frequencies_by_language(corpus, &all, &frequencies);
    let language_groups: Vec<Vec<f64>> = by_language.iter().map(|(_, v)| v.clone()).collect();
    tests.push(NamedTest::new(
        "cmw_kruskal_frequency_language",
        kruskal_wallis(&language_groups),
    ));
    let language_pairwise = if by_language.len() >= 2 {
        let m = pairwise_rank_sum(&by_language)?;
        for i in 1..m.labels.len() {
            for j in 0..i {
                if let Some(p) = m.adjusted[i][j] {
                    let mut r =
                        crate::stats::wilcoxon_rank_sum(&by_language[j].1, &by_language[i].1)?;
                    if let TestOutcome::Tested(res) = &mut r {
                        res.notes.push(format!(
                            "hochberg-adjusted p; raw p={}",
                            fmt_f64(res.p_value)
                        ));
                        res.p_value = p;
                    }
                    tests.push(NamedTest::new(
                        format!("cmw_rank_sum_{}_{}", m.labels[j], m.labels[i]),
                        Ok(r),
                    ));
                }
            }
        }
        files.insert(
            "cmw_language_pairwise.csv".into(),
            (Section::Stats, pairwise_csv(&m)?),
        );
        Some(m)
    } else {
        None
    };

    // cmw connections
    connection_tables("cmw", &cmw.profiles, &mut files, &mut tests)?;

    // near-miss
    let mut nearmiss_summary = Vec::new();
    let mut nearmiss_pairs = None;
    if with_nearmiss {
        let nm = NearMissAnalysis::run(corpus, cfg)?;
        nearmiss_pairs = Some(nm.pairs.len());
        let mut t = Table::new(["notebook_id", "cell_index", "notebook_id", "cell_index"])?;
        for p in &nm.pairs {
            t.row([
                corpus.notebook_id(p.left.notebook).to_string(),
                p.left.cell.to_string(),
                corpus.notebook_id(p.right.notebook).to_string(),
                p.right.cell.to_string(),
            ])?;
        }
        files.insert(
            "nearmiss_pairs.csv".into(),
            (Section::NearMiss, t.finish()?),
        );

        let nm_freq = nm.status.frequencies();
        let mut t = Table::new([
            "notebook_id",
            "code_cells",
            "considered",
            "cloned",
            "frequency",
        ])?;
        for (i, &n) in nm.scope.iter().enumerate() {
            let c = nm.status.counts[i];
            t.row([
                corpus.notebook_id(n).to_string(),
                corpus.cell_count(n).to_string(),
                c.nonempty.to_string(),
                c.cloned.to_string(),
                fmt_f64(c.frequency()),
            ])?;
        }
        files.insert(
            "nearmiss_clone_frequency.csv".into(),
            (Section::NearMiss, t.finish()?),
        );

        let cloned_sloc: Vec<f64> = nm
            .scope
            .iter()
            .zip(&nm.status.cloned)
            .flat_map(|(&n, flags)| {
                flags
                    .iter()
                    .enumerate()
                    .filter(|(_, f)| **f)
                    .map(move |(c, _)| SnippetRef::new(n, c as u32))
            })
            .map(|s| corpus.snippet(s).lines.sloc as f64)
            .filter(|&sloc| sloc > 0.0)
            .collect();
        files.insert(
            "nearmiss_tables.csv".into(),
            (
                Section::NearMiss,
                summary_table(&[
                    ("clone_sloc", summary_of(&cloned_sloc)),
                    ("clone_frequency", summary_of(&nm_freq)),
                ])?,
            ),
        );
        files.insert(
            "figures/nearmiss_clone_sloc.csv".into(),
            (
                Section::NearMiss,
                histogram_table(&histogram(&cloned_sloc, &unit_bins()))?,
            ),
        );
        files.insert(
            "figures/nearmiss_clone_frequency.csv".into(),
            (
                Section::NearMiss,
                histogram_table(&histogram(&nm_freq, &frequency_bins()))?,
            ),
        );

        let snippets: usize = nm.scope.iter().map(|&n| corpus.cell_count(n)).sum();
        let considered: usize = nm.status.counts.iter().map(|c| c.nonempty).sum();
        let cloned: usize = nm.status.counts.iter().map(|c| c.cloned).sum();
        let intra = nm
            .pairs
            .iter()
            .filter(|p| p.left.notebook == p.right.notebook)
            .count();
        let self_cloning: HashSet<u32> = nm
            .pairs
            .iter()
            .filter(|p| p.left.notebook == p.right.notebook)
            .map(|p| p.left.notebook)
            .collect();
        nearmiss_summary = vec![
            (
                "language",
                cfg.nearmiss_language
                    .map_or("ALL".to_string(), |l| l.to_string()),
            ),
            ("theta", fmt_f64(cfg.detector.theta)),
            ("notebooks", nm.scope.len().to_string()),
            ("snippets", snippets.to_string()),
            ("empty_snippets", (snippets - considered).to_string()),
            ("considered_snippets", considered.to_string()),
            ("cloned_snippets", cloned.to_string()),
            (
                "clone_ratio",
                if considered == 0 {
                    String::new()
                } else {
                    fmt_f64(cloned as f64 / considered as f64)
                },
            ),
            ("pairs", nm.pairs.len().to_string()),
            ("intra_notebook_pairs", intra.to_string()),
            ("inter_notebook_pairs", (nm.pairs.len() - intra).to_string()),
            ("notebooks_with_self_clone", self_cloning.len().to_string()),
            (
                "notebooks_only_cloned",
                count_where(&nm.status.counts, |c| {
                    c.nonempty > 0 && c.cloned == c.nonempty
                }),
            ),
            (
                "notebooks_only_unique",
                count_where(&nm.status.counts, |c| c.nonempty > 0 && c.cloned == 0),
            ),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        let kv: Vec<(&str, String)> = nearmiss_summary
            .iter()
            .map(|(k, v)| (k.as_str(), v.clone()))
            .collect();
        files.insert(
            "nearmiss_summary.csv".into(),
            (Section::NearMiss, key_values(&kv)?),
        );

        let nm_cells: Vec<f64> = nm
            .scope
            .iter()
            .map(|&n| corpus.cell_count(n) as f64)
            .collect();
        tests.push(NamedTest::new(
            "nearmiss_spearman_cells_frequency",
            spearman(&nm_cells, &nm_freq),
        ));
        connection_tables("nearmiss", &nm.profiles, &mut files, &mut tests)?;
    }

    files.insert("tests.csv".into(), (Section::Stats, tests_csv(&tests)?));

    // top clones
    let top = top_clones(&groups.groups, corpus, cfg.top_n, 0)?;
    let top_long = top_clones(&groups.groups, corpus, cfg.top_n, cfg.top_min_loc)?;
    for (name, listing) in [
        ("top_clones.csv", &top),
        ("top_clones_min_loc.csv", &top_long),
    ] {
        let mut t = Table::new(["rank", "digest", "occurrences", "median_loc", "source"])?;
        for c in listing {
            t.row([
                c.rank.to_string(),
                c.digest.to_string(),
                c.occurrences.to_string(),
                c.median_loc.to_string(),
                c.source.clone(),
            ])?;
        }
        files.insert(name.into(), (Section::TopClones, t.finish()?));
    }

    let run = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        manifest: ingested.manifest_path.display().to_string(),
        manifest_md5: &ingested.manifest_md5,
        config: cfg,
        manifest_entries: ingested.manifest.len(),
        fork_entries: ingested.manifest.fork_count(),
        analysed_notebooks: corpus.len(),
        snippets: corpus.snippet_count(),
        nearmiss_pairs,
    };
    files.insert(
        "run_manifest.json".into(),
        (Section::Run, serde_json::to_string_pretty(&run)? + "\n"),
    );

    Ok(ReportBundle {
        size_stats: Some(size_stats),
        language_table,
        cmw_summary,
        language_pairwise,
        nearmiss_summary,
        tests,
        top_clones: top,
        files,
    })
}

/// Ingests the corpus and builds the full bundle on the configured thread
/// pool.
pub fn run_pipeline(manifest_path: &Path, cfg: &PipelineConfig) -> Result<ReportBundle> {
    cfg.install(|| {
        let ingested = ingest_corpus(manifest_path)?;
        build_bundle(&ingested, cfg, true)
    })?
}
