//! Binary classification metrics over predicted class-1 probabilities.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("probabilities ({p1s}) and labels ({labels}) have different lengths")]
    LengthMismatch { p1s: usize, labels: usize },
    #[error("empty input")]
    Empty,
    #[error("average precision is undefined without positive labels")]
    NoPositives,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auprc: f64,
}

impl Metrics {
    /// Three-decimal display line; CSVs carry full precision.
    pub fn display_line(&self) -> String {
        format!(
            "accuracy {:.3}  precision {:.3}  recall {:.3}  f1 {:.3}  auprc {:.3}",
            self.accuracy, self.precision, self.recall, self.f1, self.auprc
        )
    }
}

/// Compute accuracy (0.5 cut), precision, recall, F1, and AUPRC.
///
/// AUPRC is average precision: rank by descending probability (ties
/// broken by original index) and average the precision at each positive's
/// rank over the number of positives.
pub fn compute_metrics(p1s: &[f64], labels: &[u8]) -> Result<Metrics, MetricsError> {
    if p1s.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            p1s: p1s.len(),
            labels: labels.len(),
        });
    }
    if p1s.is_empty() {
        return Err(MetricsError::Empty);
    }
    let positives = labels.iter().filter(|&&y| y == 1).count();
    if positives == 0 {
        return Err(MetricsError::NoPositives);
    }

    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    let mut correct = 0usize;
    for (&p, &y) in p1s.iter().zip(labels) {
        let pred = (p > 0.5) as u8;
        if pred == y {
            correct += 1;
        }
        match (pred, y) {
            (1, 1) => tp += 1,
            (1, 0) => fp += 1,
            (0, 1) => fn_ += 1,
            _ => {}
        }
    }
    let accuracy = correct as f64 / labels.len() as f64;
    let precision = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fn_ == 0 {
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };

    Ok(Metrics {
        accuracy,
        precision,
        recall,
        f1,
        auprc: average_precision(p1s, labels, positives),
    })
}

fn average_precision(p1s: &[f64], labels: &[u8], positives: usize) -> f64 {
    let mut order: Vec<usize> = (0..p1s.len()).collect();
    order.sort_by(|&a, &b| p1s[b].total_cmp(&p1s[a]).then(a.cmp(&b)));
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank0, &idx) in order.iter().enumerate() {
        if labels[idx] == 1 {
            hits += 1;
            sum += hits as f64 / (rank0 + 1) as f64;
        }
    }
    sum / positives as f64
}
