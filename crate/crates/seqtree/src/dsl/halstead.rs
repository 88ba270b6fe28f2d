//! Halstead complexity of feature expressions.
//!
//! Operators are the AST node kinds; operands are the leaf tokens (set
//! literals, positions, motif strings, constants), keyed by their canonical
//! spelling.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::FeatureExpr;

/// Volume, difficulty, and effort for one expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalsteadMetrics {
    pub volume: f64,
    pub difficulty: f64,
    pub effort: f64,
}

/// Compute Halstead metrics.
///
/// With `n1`/`n2` the distinct operator/operand counts and `N1`/`N2` the
/// total occurrences: volume = (N1+N2)·log2(n1+n2), difficulty =
/// (n1/2)·(N2/n2), effort = volume·difficulty.
pub fn complexity(e: &FeatureExpr) -> HalsteadMetrics {
    let mut counts = Counts::default();
    tally(e, &mut counts);
    let n1 = counts.operators.len() as f64;
    let n2 = counts.operands.len() as f64;
    let total1: usize = counts.operators.values().sum();
    let total2: usize = counts.operands.values().sum();
    let volume = (total1 + total2) as f64 * (n1 + n2).log2();
    let difficulty = (n1 / 2.0) * (total2 as f64 / n2);
    HalsteadMetrics {
        volume,
        difficulty,
        effort: volume * difficulty,
    }
}

#[derive(Default)]
struct Counts {
    operators: BTreeMap<&'static str, usize>,
    operands: BTreeMap<String, usize>,
}

impl Counts {
    fn operator(&mut self, name: &'static str) {
        *self.operators.entry(name).or_insert(0) += 1;
    }

    fn operand(&mut self, token: String) {
        *self.operands.entry(token).or_insert(0) += 1;
    }
}

fn tally(e: &FeatureExpr, counts: &mut Counts) {
    counts.operator(e.kind_name());
    match e {
        FeatureExpr::Count { set, window } | FeatureExpr::Prop { set, window } => {
            counts.operand(set.to_string());
            counts.operand(window.a.to_string());
            counts.operand(window.b.to_string());
        }
        FeatureExpr::PosIn { pos, set } => {
            counts.operand(pos.to_string());
            counts.operand(set.to_string());
        }
        FeatureExpr::MotifCount { pat, window } | FeatureExpr::MotifPresent { pat, window } => {
            counts.operand(format!("\"{}\"", pat.as_str()));
            counts.operand(window.a.to_string());
            counts.operand(window.b.to_string());
        }
        FeatureExpr::Transitions { from, to, window } => {
            counts.operand(from.to_string());
            counts.operand(to.to_string());
            counts.operand(window.a.to_string());
            counts.operand(window.b.to_string());
        }
        FeatureExpr::StackEnergy { window } => {
            counts.operand(window.a.to_string());
            counts.operand(window.b.to_string());
        }
        FeatureExpr::Raw { index } => counts.operand(index.to_string()),
        FeatureExpr::Add(l, r)
        | FeatureExpr::Sub(l, r)
        | FeatureExpr::And(l, r)
        | FeatureExpr::Or(l, r) => {
            tally(l, counts);
            tally(r, counts);
        }
        FeatureExpr::Scale(c, inner) => {
            counts.operand(c.to_string());
            tally(inner, counts);
        }
        FeatureExpr::Not(inner) => tally(inner, counts),
    }
}

/// Median of a slice; the mean of the two middle values for even lengths.
/// Returns `None` on empty input.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    })
}
