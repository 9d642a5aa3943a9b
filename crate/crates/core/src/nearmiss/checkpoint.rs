use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use md5::{Digest as _, Md5};

use super::detect::{ClonePair, DetectorConfig, PairIndex};
use super::TokenBag;
use crate::corpus::SnippetRef;
use crate::{Error, Result};

/// Runs pair detection in fixed-size query partitions, committing each
/// finished partition to its own file in `dir`. A rerun skips committed
/// partitions, and replaying a partition rewrites the same file, so no pair
/// is ever reported twice.
#[derive(Debug, Clone)]
pub struct ResumableDetector {
    dir: PathBuf,
    partition_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Progress {
    pub partitions: usize,
    /// Partitions that were already committed before this run.
    pub skipped: usize,
    /// Partitions computed by this run.
    pub computed: usize,
}

impl Progress {
    pub fn is_complete(&self) -> bool {
        self.skipped + self.computed == self.partitions
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

/// Writes `bytes` to a temporary sibling and renames it over `path`.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

impl ResumableDetector {
    pub fn new(dir: impl Into<PathBuf>, partition_size: usize) -> Self {
        Self {
            dir: dir.into(),
            partition_size: partition_size.max(1),
        }
    }

    fn part_path(&self, p: usize) -> PathBuf {
        self.dir.join(format!("part-{p:06}.csv"))
    }

    fn fingerprint(
        bags: &[(SnippetRef, TokenBag)],
        cfg: &DetectorConfig,
        partition_size: usize,
    ) -> String {
        let mut h = Md5::new();
        h.update(format!(
            "{}|{}|{}|{}|",
            cfg.theta, cfg.min_tokens, cfg.max_tokens, partition_size
        ));
        for (r, bag) in bags {
            h.update(format!("{}:{}[", r.notebook, r.cell));
            for (t, c) in bag.iter() {
                h.update(t.as_bytes());
                h.update(format!("\u{0}{c}\u{0}"));
            }
            h.update("]");
        }
        hex::encode(h.finalize())
    }

    /// Processes partitions until all are committed or `limit` partitions
    /// have been computed in this call.
    pub fn run(
        &self,
        bags: &[(SnippetRef, TokenBag)],
        cfg: &DetectorConfig,
        limit: Option<usize>,
    ) -> Result<Progress> {
        fs::create_dir_all(&self.dir).map_err(io_err(&self.dir))?;
        let fingerprint = Self::fingerprint(bags, cfg, self.partition_size);
        let meta = self.dir.join("checkpoint.meta");
        match fs::read_to_string(&meta) {
            Ok(existing) if existing.trim() != fingerprint => {
                return Err(Error::validation(
                    format!("checkpoint {}", self.dir.display()),
                    "checkpoint was written for different input or configuration",
                ))
            }
            Ok(_) => {}
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                write_atomic(&meta, fingerprint.as_bytes())?;
            }
            Err(e) => return Err(Error::io(meta, e)),
        }

        let refs: Vec<&TokenBag> = bags.iter().map(|b| &b.1).collect();
        let index = PairIndex::build(&refs, cfg)?;
        let partitions = index.len().div_ceil(self.partition_size);
        let mut progress = Progress {
            partitions,
            skipped: 0,
            computed: 0,
        };
        for p in 0..partitions {
            let path = self.part_path(p);
            if path.exists() {
                progress.skipped += 1;
                continue;
            }
            if limit.is_some_and(|l| progress.computed >= l) {
                break;
            }
            let start = p * self.partition_size;
            let end = (start + self.partition_size).min(index.len());
            let mut out = String::new();
            for (a, b) in index.pairs_in(start..end) {
                if let Some(pair) = ClonePair::new(bags[a].0, bags[b].0) {
                    out.push_str(&format!(
                        "{},{},{},{}\n",
                        pair.left.notebook, pair.left.cell, pair.right.notebook, pair.right.cell
                    ));
                }
            }
            write_atomic(&path, out.as_bytes())?;
            progress.computed += 1;
        }
        Ok(progress)
    }

    /// Union of every committed partition, deduplicated and sorted.
    pub fn collect(&self) -> Result<Vec<ClonePair>> {
        let mut pairs = Vec::new();
        let mut p = 0;
        loop {
            let path = self.part_path(p);
            let text = match fs::read_to_string(&path) {
                Ok(t) => t,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => break,
                Err(e) => return Err(Error::io(path, e)),
            };
            for (i, line) in text.lines().enumerate() {
                let nums: Vec<u32> = line
                    .split(',')
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| {
                        Error::validation(
                            format!("{}:{}", path.display(), i + 1),
                            "bad pair record",
                        )
                    })?;
                if nums.len() != 4 {
                    return Err(Error::validation(
                        format!("{}:{}", path.display(), i + 1),
                        "bad pair record",
                    ));
                }
                if let Some(pair) = ClonePair::new(
                    SnippetRef::new(nums[0], nums[1]),
                    SnippetRef::new(nums[2], nums[3]),
                ) {
                    pairs.push(pair);
                }
            }
            p += 1;
        }
        pairs.sort_unstable();
        pairs.dedup();
        Ok(pairs)
    }

    /// Runs to completion and returns every pair.
    pub fn run_to_end(
        &self,
        bags: &[(SnippetRef, TokenBag)],
        cfg: &DetectorConfig,
    ) -> Result<Vec<ClonePair>> {
        self.run(bags, cfg, None)?;
        self.collect()
    }
}
