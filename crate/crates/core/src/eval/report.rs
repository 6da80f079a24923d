//! Evaluation reports: per-lambda divergences, per-query errors, summary
//! statistics, and the metadata needed to reproduce them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::datamodel::Database;
use crate::error::Result;
use crate::eval::query::{cardinality, qerror_from_counts, ConjunctiveQuery};
use crate::parallel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QErrorSummary {
    pub mean: f64,
    pub median: f64,
    pub p75: f64,
    pub max: f64,
}

/// Mean, median (midpoint of the two central order statistics for even
/// counts), 75th percentile by nearest rank, and max.
pub fn summarize_qerrors(qerrors: &[f64]) -> QErrorSummary {
    assert!(!qerrors.is_empty());
    let mut sorted = qerrors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let p75 = sorted[((0.75 * n as f64).ceil() as usize).clamp(1, n) - 1];
    QErrorSummary {
        mean: sorted.iter().sum::<f64>() / n as f64,
        median,
        p75,
        max: sorted[n - 1],
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalMetadata {
    pub seed: u64,
    pub lambdas: Vec<usize>,
    pub query_count: usize,
    pub workload_source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// lambda -> average divergence in nats.
    pub kld: BTreeMap<usize, f64>,
    pub qerror: QErrorSummary,
    pub qerrors: Vec<f64>,
    pub metadata: EvalMetadata,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Cardinality error per query, evaluated in parallel with a deterministic
/// result order.
pub fn batch_qerrors(
    queries: &[ConjunctiveQuery],
    orig: &Database,
    synth: &Database,
) -> Result<Vec<f64>> {
    parallel::try_map_collect(queries, |q| {
        let a = cardinality(q, orig)?;
        let b = cardinality(q, synth)?;
        Ok(qerror_from_counts(a, b))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_matches_recomputation() {
        let qs = vec![1.0, 3.0, 2.0, 10.0, 1.5];
        let s = summarize_qerrors(&qs);
        assert!((s.mean - 3.5).abs() < 1e-12);
        assert_eq!(s.median, 2.0);
        assert_eq!(s.p75, 3.0);
        assert_eq!(s.max, 10.0);
    }

    #[test]
    fn even_count_median_is_midpoint() {
        let s = summarize_qerrors(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.median, 2.5);
        assert_eq!(s.p75, 3.0);
    }

    #[test]
    fn report_round_trips_through_json() {
        let report = EvalReport {
            kld: [(1, 0.1), (2, 0.2)].into_iter().collect(),
            qerror: summarize_qerrors(&[1.0, 2.0]),
            qerrors: vec![1.0, 2.0],
            metadata: EvalMetadata {
                seed: 7,
                lambdas: vec![1, 2],
                query_count: 2,
                workload_source: "generated".into(),
                epsilon: Some(3.2),
            },
        };
        let text = report.to_json().unwrap();
        assert_eq!(EvalReport::from_json(&text).unwrap(), report);
    }
}
