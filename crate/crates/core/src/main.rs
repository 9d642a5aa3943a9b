use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nbclone::cmw::DigestAlgorithm;
use nbclone::connections::SelfLoopMode;
use nbclone::langid::LanguageGroup;
use nbclone::nearmiss::{sanitize_pair_file, DetectorConfig};
use nbclone::report::{build_bundle, ingest_corpus, PipelineConfig, Section};
use nbclone::{Error, Result};

#[derive(Parser)]
#[command(
    name = "nbclone",
    version,
    about = "Clone analysis for Jupyter notebook corpora"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Tab-separated corpus manifest.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Near-miss similarity threshold.
    #[arg(long, global = true, default_value_t = 0.8)]
    theta: f64,
    #[arg(long, global = true, default_value_t = 0)]
    min_tokens: usize,
    #[arg(long, global = true, default_value_t = 500_000_000)]
    max_tokens: usize,
    /// Keep whitespace-only snippets in CMW groups.
    #[arg(long, global = true)]
    include_empty: bool,
    /// `once` or `twice`.
    #[arg(long, global = true, default_value = "once")]
    selfloop_mode: SelfLoopMode,
    /// Language group for near-miss detection, or `ALL`.
    #[arg(long, global = true, default_value = "PYTHON")]
    nearmiss_language: String,
    /// Normalise connections by non-empty snippets.
    #[arg(long, global = true)]
    normalize_nonempty: bool,
    /// `md5` or `sha256`.
    #[arg(long, global = true, default_value = "md5")]
    digest: DigestAlgorithm,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 20)]
    top_n: usize,
    #[arg(long, global = true, default_value_t = 4)]
    min_loc: usize,
    /// Persist near-miss partitions here and resume from them.
    #[arg(long, global = true)]
    checkpoint_dir: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 256)]
    partition_size: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Parse status and size statistics.
    Ingest,
    /// Language classification and conflicts.
    Langid,
    /// Copy-modulo-whitespace clone analysis.
    Cmw,
    /// Near-miss clone detection.
    Nearmiss,
    /// Connection profiles for both clone kinds.
    Connections,
    /// Statistical tests.
    Stats,
    /// Every artifact.
    Report,
    /// Most common CMW clones.
    TopClones,
    /// Clean an external clone-pair file.
    SanitizePairs {
        #[arg(long)]
        input: PathBuf,
    },
}

impl GlobalArgs {
    fn config(&self) -> Result<PipelineConfig> {
        let nearmiss_language = if self.nearmiss_language.eq_ignore_ascii_case("all") {
            None
        } else {
            Some(
                self.nearmiss_language
                    .to_ascii_uppercase()
                    .parse::<LanguageGroup>()?,
            )
        };
        let cfg = PipelineConfig {
            detector: DetectorConfig {
                theta: self.theta,
                min_tokens: self.min_tokens,
                max_tokens: self.max_tokens,
            },
            include_empty: self.include_empty,
            self_loop: self.selfloop_mode,
            nearmiss_language,
            normalize_by_nonempty: self.normalize_nonempty,
            digest: self.digest,
            top_n: self.top_n,
            top_min_loc: self.min_loc,
            threads: self.threads,
            checkpoint: self
                .checkpoint_dir
                .clone()
                .map(|d| (d, self.partition_size)),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<serde_json::Value> {
    if let Command::SanitizePairs { input } = &cli.command {
        let bytes = std::fs::read(input).map_err(|e| Error::io(input, e))?;
        let report = sanitize_pair_file(&bytes);
        let mut out = String::new();
        for p in &report.pairs {
            out.push_str(&format!(
                "{},{},{},{}\n",
                p.project_a, p.block_a, p.project_b, p.block_b
            ));
        }
        std::fs::create_dir_all(&cli.global.out_dir)
            .map_err(|e| Error::io(&cli.global.out_dir, e))?;
        let path = cli.global.out_dir.join("sanitized_pairs.csv");
        std::fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
        return Ok(serde_json::json!({
            "written": [path],
            "pairs": report.pairs.len(),
            "bytes_removed": report.bytes_removed,
            "duplicates_dropped": report.duplicates_dropped,
            "malformed_dropped": report.malformed_dropped,
            "blank_lines": report.blank_lines,
        }));
    }

    let cfg = cli.global.config()?;
    let manifest = cli
        .global
        .manifest
        .clone()
        .ok_or_else(|| Error::validation("arguments", "--manifest is required"))?;
    let (sections, nearmiss): (&[Section], bool) = match cli.command {
        Command::Ingest => (&[Section::Ingest], false),
        Command::Langid => (&[Section::Langid], false),
        Command::Cmw => (&[Section::Cmw], false),
        Command::Nearmiss => (&[Section::NearMiss], true),
        Command::Connections => (&[Section::Connections], true),
        Command::Stats => (&[Section::Stats], true),
        Command::TopClones => (&[Section::TopClones], false),
        Command::Report => (&[], true),
        Command::SanitizePairs { .. } => unreachable!(),
    };
    let bundle = cfg.install(|| {
        let ingested = ingest_corpus(&manifest)?;
        build_bundle(&ingested, &cfg, nearmiss)
    })??;
    let written = bundle.write(&cli.global.out_dir, sections)?;
    Ok(serde_json::json!({ "written": written }))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": e.kind(), "message": e.to_string() })
            );
            ExitCode::FAILURE
        }
    }
}
