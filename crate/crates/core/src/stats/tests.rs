use std::fmt;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};
use statrs::function::gamma::gamma_ur;

use super::rank::{average_ranks, tie_term};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Statistic {
    /// Spearman's rho.
    Rho,
    /// Kruskal-Wallis H (chi-square distributed).
    H,
    /// Rank sum of the first sample.
    W,
    /// Sum of positive signed ranks.
    V,
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Statistic::Rho => "rho",
            Statistic::H => "H",
            Statistic::W => "W",
            Statistic::V => "V",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: Statistic,
    pub value: f64,
    pub p_value: f64,
    /// Sample size(s) the test actually used.
    pub sizes: Vec<usize>,
    pub notes: Vec<String>,
}

/// A test either produces a statistic with a p-value or is degenerate
/// (no variation to test).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TestOutcome {
    Tested(TestResult),
    Degenerate {
        statistic: Statistic,
        sizes: Vec<usize>,
        reason: String,
    },
}

impl TestOutcome {
    pub fn tested(&self) -> Option<&TestResult> {
        match self {
            TestOutcome::Tested(r) => Some(r),
            TestOutcome::Degenerate { .. } => None,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, TestOutcome::Degenerate { .. })
    }

    pub fn statistic(&self) -> Statistic {
        match self {
            TestOutcome::Tested(r) => r.statistic,
            TestOutcome::Degenerate { statistic, .. } => *statistic,
        }
    }
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

fn two_sided_normal(z: f64) -> f64 {
    (2.0 * standard_normal().sf(z.abs())).min(1.0)
}

fn signum_or_zero(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Spearman rank correlation with a two-sided p from the t approximation
/// on n − 2 degrees of freedom.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<TestOutcome> {
    if x.len() != y.len() {
        return Err(Error::validation(
            "spearman",
            format!("length mismatch {} vs {}", x.len(), y.len()),
        ));
    }
    if x.len() < 3 {
        return Err(Error::validation("spearman", "need at least 3 pairs"));
    }
    super::check_finite(x, "spearman")?;
    super::check_finite(y, "spearman")?;
    let n = x.len();
    let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
    if constant(x) || constant(y) {
        return Ok(TestOutcome::Degenerate {
            statistic: Statistic::Rho,
            sizes: vec![n],
            reason: "constant input vector".into(),
        });
    }
    let rho = pearson(&average_ranks(x), &average_ranks(y));
    let df = (n - 2) as f64;
    let p = if rho.abs() >= 1.0 {
        0.0
    } else {
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
        (2.0 * dist.sf(t.abs())).min(1.0)
    };
    Ok(TestOutcome::Tested(TestResult {
        statistic: Statistic::Rho,
        value: rho,
        p_value: p,
        sizes: vec![n],
        notes: vec!["t approximation".into()],
    }))
}

/// Kruskal-Wallis rank ANOVA with tie correction; p is the upper tail of
/// chi-square on k − 1 degrees of freedom.
pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<TestOutcome> {
    if groups.len() < 2 {
        return Err(Error::validation(
            "kruskal_wallis",
            "need at least 2 groups",
        ));
    }
    if groups.iter().any(Vec::is_empty) {
        return Err(Error::validation("kruskal_wallis", "empty group"));
    }
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    super::check_finite(&pooled, "kruskal_wallis")?;
    let total = pooled.len();
    if total < 3 {
        return Err(Error::validation(
            "kruskal_wallis",
            "need at least 3 observations",
        ));
    }
    let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
    let ranks = average_ranks(&pooled);
    let nf = total as f64;
    let centre = (nf + 1.0) / 2.0;
    let mut offset = 0;
    let mut between = 0.0;
    for &size in &sizes {
        let mean_rank = ranks[offset..offset + size].iter().sum::<f64>() / size as f64;
        between += size as f64 * (mean_rank - centre).powi(2);
        offset += size;
    }
    let raw = 12.0 / (nf * (nf + 1.0)) * between;
    let correction = 1.0 - tie_term(&pooled) / (nf * nf * nf - nf);
    let df = (groups.len() - 1) as f64;
    if correction <= 0.0 {
        return Ok(TestOutcome::Tested(TestResult {
            statistic: Statistic::H,
            value: 0.0,
            p_value: 1.0,
            sizes,
            notes: vec!["degenerate: all values identical".into()],
        }));
    }
    let h = (raw / correction).max(0.0);
    let mut notes = vec!["chi-square approximation".to_string()];
    if correction < 1.0 {
        notes.push("tie correction applied".into());
    }
    Ok(TestOutcome::Tested(TestResult {
        statistic: Statistic::H,
        value: h,
        p_value: if h > 0.0 {
            gamma_ur(df / 2.0, h / 2.0).clamp(0.0, 1.0)
        } else {
            1.0
        },
        sizes,
        notes,
    }))
}

/// Two-sample Wilcoxon rank-sum test. The statistic is the rank sum of `a`
/// in the joint ranking; p uses the tie-corrected normal approximation with
/// a 0.5 continuity correction.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64]) -> Result<TestOutcome> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::validation("wilcoxon_rank_sum", "empty sample"));
    }
    super::check_finite(a, "wilcoxon_rank_sum")?;
    super::check_finite(b, "wilcoxon_rank_sum")?;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = average_ranks(&pooled);
    let w: f64 = ranks[..a.len()].iter().sum();
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let n = na + nb;
    let variance = na * nb / 12.0 * ((n + 1.0) - tie_term(&pooled) / (n * (n - 1.0)));
    let sizes = vec![a.len(), b.len()];
    if variance <= 0.0 {
        return Ok(TestOutcome::Degenerate {
            statistic: Statistic::W,
            sizes,
            reason: "all values identical".into(),
        });
    }
    let diff = w - na * (n + 1.0) / 2.0;
    let z = (diff - 0.5 * signum_or_zero(diff)) / variance.sqrt();
    Ok(TestOutcome::Tested(TestResult {
        statistic: Statistic::W,
        value: w,
        p_value: two_sided_normal(z),
        sizes,
        notes: vec![
            "normal approximation with continuity correction".into(),
            format!("z={z}"),
        ],
    }))
}

/// Paired Wilcoxon signed-rank test on x − y. Zero differences are
/// dropped; V is the sum of ranks of the positive differences.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<TestOutcome> {
    if x.len() != y.len() {
        return Err(Error::validation(
            "wilcoxon_signed_rank",
            format!("length mismatch {} vs {}", x.len(), y.len()),
        ));
    }
    super::check_finite(x, "wilcoxon_signed_rank")?;
    super::check_finite(y, "wilcoxon_signed_rank")?;
    let diffs: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        return Ok(TestOutcome::Degenerate {
            statistic: Statistic::V,
            sizes: vec![0],
            reason: "all differences are zero".into(),
        });
    }
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&magnitudes);
    let v: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let n = diffs.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term(&magnitudes) / 48.0;
    let mut notes = vec!["normal approximation with continuity correction".to_string()];
    let dropped = x.len() - diffs.len();
    if dropped > 0 {
        notes.push(format!("{dropped} zero differences dropped"));
    }
    let centred = v - mean;
    let z = (centred - 0.5 * signum_or_zero(centred)) / variance.sqrt();
    Ok(TestOutcome::Tested(TestResult {
        statistic: Statistic::V,
        value: v,
        p_value: two_sided_normal(z),
        sizes: vec![diffs.len()],
        notes,
    }))
}

#[cfg(test)]
mod unit {
    use super::*;

    fn tested(o: TestOutcome) -> TestResult {
        match o {
            TestOutcome::Tested(r) => r,
            other => panic!("expected a test result, got {other:?}"),
        }
    }

    #[test]
    fn spearman_hand_example() {
        // d = (-1, 1, 0): 1 - 6*2/(3*8) = 0.5
        let r = tested(spearman(&[1.0, 2.0, 3.0], &[2.0, 1.0, 3.0]).unwrap());
        assert!((r.value - 0.5).abs() < 1e-12);
        assert!(r.p_value > 0.0 && r.p_value <= 1.0);
    }

    #[test]
    fn spearman_monotone() {
        let x: Vec<f64> = (0..20).map(f64::from).collect();
        let up: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let down: Vec<f64> = x.iter().map(|v| -v * v).collect();
        assert_eq!(tested(spearman(&x, &up).unwrap()).value, 1.0);
        assert_eq!(tested(spearman(&x, &down).unwrap()).value, -1.0);
        assert_eq!(tested(spearman(&x, &up).unwrap()).p_value, 0.0);
    }

    #[test]
    fn spearman_errors() {
        assert!(spearman(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(spearman(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
        assert!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0])
            .unwrap()
            .is_degenerate());
    }

    #[test]
    fn spearman_p_matches_t_reference() {
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        let y = [2.0, 1.0, 4.0, 3.0, 10.0, 5.0, 9.0, 6.0, 8.0, 7.0];
        let r = tested(spearman(&x, &y).unwrap());
        let d2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
        let classic = 1.0 - 6.0 * d2 / (10.0 * 99.0);
        assert!((r.value - classic).abs() < 1e-12);
        // scipy: t = rho*sqrt(8/(1-rho^2)), 2*stats.t.sf(|t|, 8) = 0.0216659234
        assert!((r.p_value - 0.021_665_923_4).abs() < 1e-9);
    }

    #[test]
    fn kruskal_hand_example() {
        // ranks {1,2} and {3,4}: 12/20 * (2*1 + 2*1) = 2.4
        let r = tested(kruskal_wallis(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap());
        assert!((r.value - 2.4).abs() < 1e-12);
        // chi-square(1) upper tail at 2.4
        assert!((r.p_value - 0.121_335_25).abs() < 1e-8);
    }

    #[test]
    fn kruskal_identical_groups_and_all_tied() {
        let r = tested(kruskal_wallis(&[vec![1.0, 5.0, 7.0], vec![7.0, 1.0, 5.0]]).unwrap());
        assert!(r.value.abs() < 1e-12);
        let r = tested(kruskal_wallis(&[vec![2.0, 2.0], vec![2.0]]).unwrap());
        assert_eq!(r.value, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(kruskal_wallis(&[vec![1.0]]).is_err());
        assert!(kruskal_wallis(&[vec![1.0], vec![]]).is_err());
    }

    #[test]
    fn kruskal_with_ties() {
        // pooled 1,2,2,3 -> ranks 1,2.5,2.5,4; group means 1.75, 3.25; centre 2.5
        // raw = 12/20 * (2*0.5625 + 2*0.5625) = 1.35; correction 1 - 6/60 = 0.9
        let r = tested(kruskal_wallis(&[vec![1.0, 2.0], vec![2.0, 3.0]]).unwrap());
        assert!((r.value - 1.5).abs() < 1e-12);
    }

    #[test]
    fn rank_sum_hand_example() {
        let r = tested(wilcoxon_rank_sum(&[1.0, 2.0], &[3.0, 4.0]).unwrap());
        assert_eq!(r.value, 3.0);
        let swapped = tested(wilcoxon_rank_sum(&[3.0, 4.0], &[1.0, 2.0]).unwrap());
        assert_eq!(swapped.value, 7.0);
        assert!((r.p_value - swapped.p_value).abs() < 1e-15);
        // scipy.stats.mannwhitneyu([1,2], [3,4], method='asymptotic') -> 0.2452781
        assert!((r.p_value - 0.245_278_1).abs() < 1e-6);
    }

    #[test]
    fn rank_sum_equal_samples() {
        let r = tested(wilcoxon_rank_sum(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap());
        assert_eq!(r.p_value, 1.0);
        assert!(wilcoxon_rank_sum(&[], &[1.0]).is_err());
        assert!(wilcoxon_rank_sum(&[1.0], &[1.0]).unwrap().is_degenerate());
    }

    #[test]
    fn signed_rank_examples() {
        let r = tested(wilcoxon_signed_rank(&[1.0, 2.0, 3.0], &[0.0; 3]).unwrap());
        assert_eq!(r.value, 6.0);
        let r = tested(wilcoxon_signed_rank(&[1.0, 0.0], &[0.0, 1.0]).unwrap());
        assert_eq!(r.value, 1.5);
        assert_eq!(r.p_value, 1.0);
        assert!(wilcoxon_signed_rank(&[1.0, 2.0], &[1.0, 2.0])
            .unwrap()
            .is_degenerate());
    }

    #[test]
    fn signed_rank_reference_p() {
        // scipy.stats.wilcoxon([3,5,2,7,9], [1]*5, correction=True,
        // method='approx') -> p = 0.0590582
        let r = tested(wilcoxon_signed_rank(&[3.0, 5.0, 2.0, 7.0, 9.0], &[1.0; 5]).unwrap());
        assert_eq!(r.value, 15.0);
        assert!((r.p_value - 0.059_058_2).abs() < 1e-5);
    }
}
