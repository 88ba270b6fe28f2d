//! Property tests over the expression language and threshold search.

mod common;

use proptest::prelude::*;

use seqtree::dsl::{self, eval_expr, parse, render};
use seqtree::induction::{best_threshold, gini, split_score, ImpurityCounts};
use seqtree::seqdata::{kmer_counts, one_hot, SequenceDataset};

fn seq_strategy(len: usize) -> impl Strategy<Value = String> {
    proptest::collection::vec(prop_oneof![Just('A'), Just('C'), Just('G'), Just('T')], len)
        .prop_map(|chars| chars.into_iter().collect())
}

proptest! {
    #[test]
    fn expr_round_trip(case_seed in 0u64..u64::MAX) {
        let mut rng = common::rng(case_seed);
        let seq_len = 4 + (case_seed % 60) as usize;
        let expr = common::random_expr(&mut rng, seq_len);
        let text = render(&expr);
        prop_assert_eq!(parse(&text).unwrap(), expr);
    }

    #[test]
    fn eval_is_total_and_deterministic(case_seed in 0u64..u64::MAX) {
        let mut rng = common::rng(case_seed);
        let seq_len = 4 + (case_seed % 40) as usize;
        let expr = common::random_expr(&mut rng, seq_len);
        dsl::validate(&expr, seq_len).unwrap();
        let seq = common::random_seq(&mut rng, seq_len);
        let a = eval_expr(&expr, &seq);
        let b = eval_expr(&expr, &seq);
        prop_assert!(a.is_finite());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn one_hot_injective_and_kmer_sums(seqs in proptest::collection::vec(seq_strategy(9), 2..12), k in 1usize..4) {
        let n = seqs.len();
        let ds = SequenceDataset::new("p", seqs.clone(), vec![0; n]).unwrap();
        let encoded = one_hot(&ds);
        for i in 0..n {
            for j in (i + 1)..n {
                if seqs[i] != seqs[j] {
                    prop_assert_ne!(encoded.row(i), encoded.row(j));
                } else {
                    prop_assert_eq!(encoded.row(i), encoded.row(j));
                }
            }
        }
        let kmers = kmer_counts(&ds, k).unwrap();
        for row in 0..n {
            prop_assert_eq!(kmers.row(row).iter().sum::<f64>(), (9 - k + 1) as f64);
        }
    }

    /// Replacing f by a*f + b (a > 0) must not change the chosen partition:
    /// the threshold maps affinely, so membership of every value is
    /// preserved.
    #[test]
    fn best_threshold_partition_is_scale_shift_invariant(
        values in proptest::collection::vec(-50i32..50, 2..40),
        label_bits in proptest::collection::vec(0u8..2, 40),
        a in 1u32..9,
        b in -20i32..20,
        min_child in 1usize..3,
    ) {
        let values: Vec<f64> = values.iter().map(|&v| v as f64 / 4.0).collect();
        let labels: Vec<u8> = values.iter().zip(&label_bits).map(|(_, &l)| l).collect();
        let transformed: Vec<f64> = values.iter().map(|&v| a as f64 * v + b as f64).collect();

        let original = best_threshold(&values, &labels, min_child);
        let mapped = best_threshold(&transformed, &labels, min_child);
        prop_assert_eq!(original.is_some(), mapped.is_some());
        if let (Some((tau, eta)), Some((tau2, eta2))) = (original, mapped) {
            let left: Vec<bool> = values.iter().map(|&v| v <= tau).collect();
            let left2: Vec<bool> = transformed.iter().map(|&v| v <= tau2).collect();
            prop_assert_eq!(left, left2);
            prop_assert!((eta - eta2).abs() <= 1e-12);
        }
    }

    /// A realized split's weighted child impurity never exceeds the parent
    /// impurity.
    #[test]
    fn split_impurity_is_monotone(
        values in proptest::collection::vec(0i32..6, 2..50),
        label_bits in proptest::collection::vec(0u8..2, 50),
    ) {
        let values: Vec<f64> = values.iter().map(|&v| v as f64).collect();
        let labels: Vec<u8> = values.iter().zip(&label_bits).map(|(_, &l)| l).collect();
        let n1: usize = labels.iter().map(|&l| l as usize).sum();
        let parent = gini(ImpurityCounts { n0: labels.len() - n1, n1 });
        if let Some((tau, eta)) = best_threshold(&values, &labels, 1) {
            prop_assert!(eta <= parent + 1e-12);
            prop_assert_eq!(split_score(&values, &labels, tau).unwrap(), eta);
        }
    }
}
