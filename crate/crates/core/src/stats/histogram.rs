use serde::Serialize;

/// How values are assigned to bins.
#[derive(Debug, Clone, PartialEq)]
pub enum BinSpec {
    /// Bins `[origin + k·width, origin + (k+1)·width)`.
    Width { origin: f64, width: f64 },
    /// `count` equal-width bins spanning `[min, max]`; the max lands in the
    /// last bin.
    Count(usize),
    /// Explicit ascending edges; bin k is `[edges[k], edges[k+1])`, the last
    /// bin is closed on the right. Values outside the edges are clamped into
    /// the first or last bin.
    Edges(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    /// Lower edge of the bin.
    pub lower: f64,
    pub count: u64,
}

/// Bin counts in ascending bin order. Zero-count bins are omitted.
pub fn histogram(values: &[f64], spec: &BinSpec) -> Vec<HistogramBin> {
    let values: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if values.is_empty() {
        return Vec::new();
    }
    let mut counts: std::collections::BTreeMap<i64, u64> = Default::default();
    let label: Box<dyn Fn(i64) -> f64> = match spec {
        BinSpec::Width { origin, width } => {
            assert!(*width > 0.0, "bin width must be positive");
            for v in &values {
                *counts
                    .entry(((v - origin) / width).floor() as i64)
                    .or_default() += 1;
            }
            let (origin, width) = (*origin, *width);
            Box::new(move |k| origin + k as f64 * width)
        }
        BinSpec::Count(n) => {
            let n = (*n).max(1);
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let width = if hi > lo { (hi - lo) / n as f64 } else { 1.0 };
            for v in &values {
                let k = (((v - lo) / width).floor() as i64).min(n as i64 - 1);
                *counts.entry(k).or_default() += 1;
            }
            Box::new(move |k| lo + k as f64 * width)
        }
        BinSpec::Edges(edges) => {
            assert!(edges.len() >= 2, "need at least two edges");
            let last = edges.len() as i64 - 2;
            for v in &values {
                let k = edges.partition_point(|e| e <= v) as i64 - 1;
                *counts.entry(k.clamp(0, last)).or_default() += 1;
            }
            let edges = edges.clone();
            Box::new(move |k| edges[k as usize])
        }
    };
    counts
        .into_iter()
        .map(|(k, count)| HistogramBin {
            lower: label(k),
            count,
        })
        .collect()
}
