//! Gini impurity and threshold search.

use super::TreeError;

/// Class counts at a (potential) node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImpurityCounts {
    pub n0: usize,
    pub n1: usize,
}

impl ImpurityCounts {
    pub fn total(self) -> usize {
        self.n0 + self.n1
    }
}

/// Binary Gini impurity: 1 - p0^2 - p1^2, in [0, 0.5].
///
/// The impurity of an empty set is defined as 0 so that zero-weight sides
/// of a degenerate split contribute nothing.
pub fn gini(c: ImpurityCounts) -> f64 {
    let n = c.total();
    if n == 0 {
        return 0.0;
    }
    let p0 = c.n0 as f64 / n as f64;
    let p1 = c.n1 as f64 / n as f64;
    1.0 - p0 * p0 - p1 * p1
}

/// Size-weighted child impurity of splitting at `tau` (left side holds
/// values <= tau).
pub fn split_score(values: &[f64], labels: &[u8], tau: f64) -> Result<f64, TreeError> {
    if values.len() != labels.len() {
        return Err(TreeError::LengthMismatch {
            values: values.len(),
            labels: labels.len(),
        });
    }
    if values.is_empty() {
        return Err(TreeError::EmptyNode);
    }
    let mut left = ImpurityCounts { n0: 0, n1: 0 };
    let mut right = ImpurityCounts { n0: 0, n1: 0 };
    for (&v, &y) in values.iter().zip(labels) {
        let side = if v <= tau { &mut left } else { &mut right };
        match y {
            0 => side.n0 += 1,
            _ => side.n1 += 1,
        }
    }
    Ok(weighted_children_impurity(left, right))
}

fn weighted_children_impurity(left: ImpurityCounts, right: ImpurityCounts) -> f64 {
    let n = (left.total() + right.total()) as f64;
    let wl = left.total() as f64 / n;
    let wr = right.total() as f64 / n;
    wl * gini(left) + wr * gini(right)
}

/// The best threshold for one feature: the eligible midpoint between
/// consecutive distinct sorted values minimizing the split score, ties
/// broken by the smaller threshold.
///
/// A threshold is eligible when both sides keep at least `min_child` rows.
/// Returns `None` when the values are constant or no threshold is eligible.
pub fn best_threshold(values: &[f64], labels: &[u8], min_child: usize) -> Option<(f64, f64)> {
    debug_assert_eq!(values.len(), labels.len());
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mut order: Vec<(f64, u8)> = values.iter().copied().zip(labels.iter().copied()).collect();
    order.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

    let total1: usize = labels.iter().map(|&y| y as usize).sum();
    let total = ImpurityCounts {
        n0: n - total1,
        n1: total1,
    };
    let mut left = ImpurityCounts { n0: 0, n1: 0 };
    let mut best: Option<(f64, f64)> = None;
    for i in 0..n - 1 {
        match order[i].1 {
            0 => left.n0 += 1,
            _ => left.n1 += 1,
        }
        let (lo, hi) = (order[i].0, order[i + 1].0);
        if lo == hi {
            continue;
        }
        let n_left = i + 1;
        let n_right = n - n_left;
        if n_left < min_child || n_right < min_child {
            continue;
        }
        // Guard against the midpoint rounding up to `hi`, which would move
        // `hi` to the left side at prediction time.
        let mut tau = (lo + hi) / 2.0;
        if tau >= hi {
            tau = lo;
        }
        let right = ImpurityCounts {
            n0: total.n0 - left.n0,
            n1: total.n1 - left.n1,
        };
        let score = weighted_children_impurity(left, right);
        if best.is_none_or(|(_, s)| score < s) {
            best = Some((tau, score));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gini_hand_values() {
        assert_eq!(gini(ImpurityCounts { n0: 2, n1: 2 }), 0.5);
        assert_eq!(gini(ImpurityCounts { n0: 4, n1: 0 }), 0.0);
        assert_eq!(gini(ImpurityCounts { n0: 3, n1: 1 }), 0.375);
        assert_eq!(gini(ImpurityCounts { n0: 0, n1: 0 }), 0.0);
    }

    #[test]
    fn split_score_pure_children() {
        let s = split_score(&[0.0, 0.0, 1.0, 1.0], &[0, 0, 1, 1], 0.5).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn split_score_degenerate_side_equals_parent_gini() {
        let labels = [0, 1, 1, 0];
        let s = split_score(&[1.0, 1.0, 1.0, 1.0], &labels, 0.5).unwrap();
        assert_eq!(s, gini(ImpurityCounts { n0: 2, n1: 2 }));
    }

    #[test]
    fn split_score_balanced_halves() {
        let s = split_score(&[1.0, 2.0, 3.0, 4.0], &[0, 1, 0, 1], 2.5).unwrap();
        assert_eq!(s, 0.5);
    }

    #[test]
    fn split_score_length_mismatch() {
        assert!(matches!(
            split_score(&[1.0], &[0, 1], 0.0),
            Err(TreeError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn best_threshold_separable() {
        let (tau, eta) = best_threshold(&[1.0, 2.0, 3.0, 4.0], &[0, 0, 1, 1], 1).unwrap();
        assert_eq!(tau, 2.5);
        assert_eq!(eta, 0.0);
    }

    #[test]
    fn best_threshold_single_midpoint() {
        let (tau, eta) = best_threshold(&[0.0, 1.0, 0.0, 1.0], &[0, 1, 0, 1], 1).unwrap();
        assert_eq!(tau, 0.5);
        assert_eq!(eta, 0.0);
    }

    #[test]
    fn best_threshold_constant_values() {
        assert_eq!(best_threshold(&[2.0, 2.0, 2.0], &[0, 1, 0], 1), None);
    }

    #[test]
    fn best_threshold_min_child_filters() {
        // Only the middle midpoint leaves 2 rows on each side.
        let values = [1.0, 2.0, 3.0, 4.0];
        let labels = [0, 0, 0, 1];
        let (tau, _) = best_threshold(&values, &labels, 2).unwrap();
        assert_eq!(tau, 2.5);
        assert_eq!(best_threshold(&values, &labels, 3), None);
    }

    #[test]
    fn best_threshold_tie_takes_smaller_tau() {
        // Symmetric case: thresholds 1.5 and 2.5 both give score 1/3.
        let values = [1.0, 2.0, 3.0];
        let labels = [1, 0, 1];
        let (tau, eta) = best_threshold(&values, &labels, 1).unwrap();
        assert_eq!(tau, 1.5);
        assert!((eta - 1.0 / 3.0).abs() < 1e-15);
    }
}
