use serde::Serialize;

use super::tests::{wilcoxon_rank_sum, TestOutcome};
use crate::{Error, Result};

/// Hochberg step-up adjustment. With p sorted ascending,
/// adjusted(i) = min over j ≥ i of (m − j + 1)·p(j), capped at 1, returned
/// in input order.
pub fn hochberg_adjust(p_values: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::validation(
            "hochberg_adjust",
            format!("p-value {bad} outside [0, 1]"),
        ));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    let mut adjusted = vec![0.0; m];
    let mut running = f64::INFINITY;
    for (pos, &idx) in order.iter().enumerate().rev() {
        let multiplier = (m - pos) as f64;
        running = running.min(multiplier * p_values[idx]);
        adjusted[idx] = running.min(1.0);
    }
    Ok(adjusted)
}

/// Lower-triangle matrix of Hochberg-adjusted pairwise rank-sum p-values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseMatrix {
    pub labels: Vec<String>,
    /// `adjusted[i][j]` for j < i; `None` when the comparison was degenerate.
    pub adjusted: Vec<Vec<Option<f64>>>,
    pub raw: Vec<Vec<Option<f64>>>,
}

impl PairwiseMatrix {
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let (i, j) = if row > col { (row, col) } else { (col, row) };
        self.adjusted
            .get(i)
            .and_then(|r| r.get(j))
            .copied()
            .flatten()
    }
}

/// Pairwise two-sided rank-sum tests between every pair of groups, adjusted
/// jointly with Hochberg over the non-degenerate comparisons.
pub fn pairwise_rank_sum(groups: &[(String, Vec<f64>)]) -> Result<PairwiseMatrix> {
    let k = groups.len();
    let mut raw: Vec<Vec<Option<f64>>> = (0..k).map(|i| vec![None; i]).collect();
    let mut flat = Vec::new();
    for i in 1..k {
        for j in 0..i {
            let outcome = wilcoxon_rank_sum(&groups[j].1, &groups[i].1)?;
            if let TestOutcome::Tested(r) = outcome {
                raw[i][j] = Some(r.p_value);
                flat.push((i, j, r.p_value));
            }
        }
    }
    let adjusted_flat = hochberg_adjust(&flat.iter().map(|t| t.2).collect::<Vec<_>>())?;
    let mut adjusted: Vec<Vec<Option<f64>>> = (0..k).map(|i| vec![None; i]).collect();
    for ((i, j, _), adj) in flat.into_iter().zip(adjusted_flat) {
        adjusted[i][j] = Some(adj);
    }
    Ok(PairwiseMatrix {
        labels: groups.iter().map(|g| g.0.clone()).collect(),
        adjusted,
        raw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_up_by_hand() {
        assert_eq!(
            hochberg_adjust(&[0.01, 0.02, 0.04]).unwrap(),
            vec![0.03, 0.04, 0.04]
        );
        assert_eq!(
            hochberg_adjust(&[0.04, 0.01, 0.02]).unwrap(),
            vec![0.04, 0.03, 0.04]
        );
        assert_eq!(hochberg_adjust(&[0.05, 0.05]).unwrap(), vec![0.05, 0.05]);
        assert_eq!(hochberg_adjust(&[0.3]).unwrap(), vec![0.3]);
        assert_eq!(hochberg_adjust(&[0.6, 0.9]).unwrap(), vec![0.9, 0.9]);
        assert!(hochberg_adjust(&[]).unwrap().is_empty());
    }

    #[test]
    fn caps_at_one_and_validates() {
        assert_eq!(hochberg_adjust(&[0.5, 0.7, 0.8]).unwrap()[0], 0.8);
        assert!(hochberg_adjust(&[1.2]).is_err());
        assert!(hochberg_adjust(&[-0.1]).is_err());
        assert!(hochberg_adjust(&[f64::NAN]).is_err());
    }

    #[test]
    fn pairwise_shape() {
        let groups = vec![
            ("a".to_string(), vec![1.0, 2.0, 3.0, 4.0]),
            ("b".to_string(), vec![5.0, 6.0, 7.0, 8.0]),
            ("c".to_string(), vec![1.5, 2.5, 3.5, 4.5]),
        ];
        let m = pairwise_rank_sum(&groups).unwrap();
        assert_eq!(m.adjusted.len(), 3);
        assert!(m.adjusted[0].is_empty());
        let raw: Vec<f64> = vec![
            m.raw[1][0].unwrap(),
            m.raw[2][0].unwrap(),
            m.raw[2][1].unwrap(),
        ];
        let adj = hochberg_adjust(&raw).unwrap();
        assert_eq!(m.get(1, 0), Some(adj[0]));
        assert_eq!(m.get(0, 2), Some(adj[1]));
        assert_eq!(m.get(2, 1), Some(adj[2]));
    }
}
