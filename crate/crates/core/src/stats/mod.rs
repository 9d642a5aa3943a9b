//! Rank statistics used by the clone reports: order statistics, Spearman
//! correlation, Kruskal-Wallis, Wilcoxon rank-sum and signed-rank tests,
//! Hochberg adjustment and histogram binning.
//!
//! Every p-value is an asymptotic approximation (normal, t or chi-square);
//! exact small-sample distributions are not computed.

mod adjust;
mod histogram;
mod rank;
mod summary;
mod tests;

pub use adjust::{hochberg_adjust, pairwise_rank_sum, PairwiseMatrix};
pub use histogram::{histogram, BinSpec, HistogramBin};
pub use rank::{average_ranks, tie_sizes};
pub use summary::{percentiles, quantile, SummaryRow};
pub use tests::{
    kruskal_wallis, spearman, wilcoxon_rank_sum, wilcoxon_signed_rank, Statistic, TestOutcome,
    TestResult,
};

/// p-values under this bound are displayed in clamped form.
pub const P_DISPLAY_FLOOR: f64 = 2.2e-16;

/// Human-readable p-value with four significant digits; values below
/// [`P_DISPLAY_FLOOR`] print as `< 2.2e-16`.
pub fn format_p(p: f64) -> String {
    if p < P_DISPLAY_FLOOR {
        "< 2.2e-16".to_string()
    } else if p >= 1e-4 {
        let decimals = (3 - p.log10().floor() as i32).max(0) as usize;
        format!("{p:.decimals$}")
    } else {
        format!("{p:.3e}")
    }
}

pub(crate) fn check_finite(values: &[f64], what: &str) -> crate::Result<()> {
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(crate::Error::validation(
            what,
            format!("non-finite value {bad}"),
        ));
    }
    Ok(())
}
