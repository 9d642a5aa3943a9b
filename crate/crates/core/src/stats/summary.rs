use serde::Serialize;

use crate::{Error, Result};

/// Min, selected percentiles, mean and max of one variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryRow {
    pub min: f64,
    pub p10: f64,
    pub p25: f64,
    pub median: f64,
    pub mean: f64,
    pub p75: f64,
    pub p90: f64,
    pub max: f64,
}

impl SummaryRow {
    pub const HEADER: [&'static str; 8] =
        ["min", "p10", "p25", "median", "mean", "p75", "p90", "max"];

    pub fn values(&self) -> [f64; 8] {
        [
            self.min,
            self.p10,
            self.p25,
            self.median,
            self.mean,
            self.p75,
            self.p90,
            self.max,
        ]
    }
}

/// Linear-interpolation quantile of an ascending slice: with h = (n−1)·q,
/// v[⌊h⌋] + (h − ⌊h⌋)·(v[⌊h⌋+1] − v[⌊h⌋]).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= sorted.len() || frac == 0.0 {
        sorted[lo.min(sorted.len() - 1)]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

pub fn percentiles(values: &[f64]) -> Result<SummaryRow> {
    if values.is_empty() {
        return Err(Error::validation("percentiles", "empty input"));
    }
    super::check_finite(values, "percentiles")?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    Ok(SummaryRow {
        min: sorted[0],
        p10: quantile(&sorted, 0.10),
        p25: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.50),
        mean,
        p75: quantile(&sorted, 0.75),
        p90: quantile(&sorted, 0.90),
        max: sorted[sorted.len() - 1],
    })
}
