//! Shared test oracles: brute-force threshold search, a naive greedy tree
//! reference, prefix-enumeration average precision, and a random
//! expression generator. Everything here is independent of the library's
//! implementation paths it checks.

#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use seqtree::dsl::{FeatureExpr, Motif, NucSet, Rational, Window};
use seqtree::induction::{DecisionTree, Node};
use seqtree::seqdata::{SequenceDataset, BASES};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_seq(rng: &mut ChaCha8Rng, len: usize) -> String {
    (0..len).map(|_| BASES[rng.gen_range(0..4)] as char).collect()
}

/// Random sequences with random labels (no signal).
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, seq_len: usize) -> SequenceDataset {
    let sequences = (0..n).map(|_| random_seq(rng, seq_len)).collect();
    let labels = (0..n).map(|_| rng.gen_range(0..2) as u8).collect();
    SequenceDataset::new("random", sequences, labels).unwrap()
}

fn gini2(n0: usize, n1: usize) -> f64 {
    let n = n0 + n1;
    if n == 0 {
        return 0.0;
    }
    let p0 = n0 as f64 / n as f64;
    let p1 = n1 as f64 / n as f64;
    1.0 - p0 * p0 - p1 * p1
}

/// Exhaustive threshold search over every midpoint between consecutive
/// distinct sorted values, scoring each by direct partition counting.
pub fn brute_best_threshold(
    values: &[f64],
    labels: &[u8],
    min_child: usize,
) -> Option<(f64, f64)> {
    let mut distinct: Vec<f64> = values.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut best: Option<(f64, f64)> = None;
    for pair in distinct.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let mut tau = (lo + hi) / 2.0;
        if tau >= hi {
            tau = lo;
        }
        let mut l = [0usize; 2];
        let mut r = [0usize; 2];
        for (&v, &y) in values.iter().zip(labels) {
            if v <= tau {
                l[y as usize] += 1;
            } else {
                r[y as usize] += 1;
            }
        }
        let (nl, nr) = (l[0] + l[1], r[0] + r[1]);
        if nl < min_child || nr < min_child {
            continue;
        }
        let n = (nl + nr) as f64;
        let score = (nl as f64 / n) * gini2(l[0], l[1]) + (nr as f64 / n) * gini2(r[0], r[1]);
        if best.is_none_or(|(_, s)| score < s) {
            best = Some((tau, score));
        }
    }
    best
}

/// Reference greedy tree: axis-aligned splits on one-hot coordinates,
/// recursive (depth-first) construction.
#[derive(Debug, PartialEq)]
pub enum RefNode {
    Leaf {
        p1: f64,
        n: usize,
    },
    Split {
        col: usize,
        tau: f64,
        left: Box<RefNode>,
        right: Box<RefNode>,
    },
}

fn one_hot_value(seq: &str, col: usize) -> f64 {
    let pos = col / 4;
    (seq.as_bytes()[pos] == BASES[col % 4]) as u8 as f64
}

pub fn naive_cart(ds: &SequenceDataset, max_depth: usize, min_leaf: usize) -> RefNode {
    let rows: Vec<usize> = (0..ds.len()).collect();
    naive_cart_node(ds, &rows, 0, max_depth, min_leaf)
}

fn naive_cart_node(
    ds: &SequenceDataset,
    rows: &[usize],
    depth: usize,
    max_depth: usize,
    min_leaf: usize,
) -> RefNode {
    let n = rows.len();
    let n1: usize = rows.iter().map(|&r| ds.label(r) as usize).sum();
    let n0 = n - n1;
    let p1 = n1 as f64 / n as f64;
    if n0 == 0 || n1 == 0 || depth >= max_depth || n < 2 * min_leaf {
        return RefNode::Leaf { p1, n };
    }
    let labels: Vec<u8> = rows.iter().map(|&r| ds.label(r)).collect();
    let mut best: Option<(f64, f64, usize)> = None; // (score, tau, col)
    for col in 0..4 * ds.seq_len() {
        let values: Vec<f64> = rows.iter().map(|&r| one_hot_value(ds.sequence(r), col)).collect();
        if let Some((tau, score)) = brute_best_threshold(&values, &labels, min_leaf) {
            if best.is_none_or(|(s, _, _)| score < s) {
                best = Some((score, tau, col));
            }
        }
    }
    let Some((score, tau, col)) = best else {
        return RefNode::Leaf { p1, n };
    };
    if gini2(n0, n1) - score <= 1e-12 {
        return RefNode::Leaf { p1, n };
    }
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&r| one_hot_value(ds.sequence(r), col) <= tau);
    RefNode::Split {
        col,
        tau,
        left: Box::new(naive_cart_node(ds, &left_rows, depth + 1, max_depth, min_leaf)),
        right: Box::new(naive_cart_node(ds, &right_rows, depth + 1, max_depth, min_leaf)),
    }
}

/// Structural comparison of a grown tree against the reference, exact in
/// features, thresholds, and leaf statistics.
pub fn assert_tree_matches_reference(tree: &Node, reference: &RefNode, path: &str) {
    match (tree, reference) {
        (Node::Leaf { p1, n }, RefNode::Leaf { p1: rp1, n: rn }) => {
            assert_eq!(p1, rp1, "leaf p1 at `{path}`");
            assert_eq!(n, rn, "leaf n at `{path}`");
        }
        (
            Node::Internal { split, left, right },
            RefNode::Split {
                col,
                tau,
                left: rl,
                right: rr,
            },
        ) => {
            assert_eq!(
                split.expr.to_string(),
                format!("raw({col})"),
                "split feature at `{path}`"
            );
            assert_eq!(split.threshold, *tau, "threshold at `{path}`");
            assert_tree_matches_reference(left, rl, &format!("{path}L"));
            assert_tree_matches_reference(right, rr, &format!("{path}R"));
        }
        (got, want) => panic!("node kind mismatch at `{path}`: {got:?} vs {want:?}"),
    }
}

/// Route every training row through the tree, collecting the row sets of
/// all internal nodes (by path) for guarantee and floor checks.
pub fn internal_node_subsets(tree: &DecisionTree, ds: &SequenceDataset) -> Vec<(String, Vec<usize>)> {
    let mut acc: std::collections::BTreeMap<String, Vec<usize>> = Default::default();
    for row in 0..ds.len() {
        let mut node = &tree.root;
        let mut path = String::new();
        loop {
            match node {
                Node::Leaf { .. } => break,
                Node::Internal { split, left, right } => {
                    acc.entry(path.clone()).or_default().push(row);
                    let v = seqtree::dsl::eval_expr(&split.expr, ds.sequence(row));
                    if v <= split.threshold {
                        path.push('L');
                        node = left;
                    } else {
                        path.push('R');
                        node = right;
                    }
                }
            }
        }
    }
    acc.into_iter().collect()
}

/// Best raw-feature score over a row subset, via the brute-force
/// threshold oracle only.
pub fn brute_best_raw_score(ds: &SequenceDataset, rows: &[usize], min_child: usize) -> Option<f64> {
    let labels: Vec<u8> = rows.iter().map(|&r| ds.label(r)).collect();
    let mut best: Option<f64> = None;
    for col in 0..4 * ds.seq_len() {
        let values: Vec<f64> = rows.iter().map(|&r| one_hot_value(ds.sequence(r), col)).collect();
        if let Some((_, score)) = brute_best_threshold(&values, &labels, min_child) {
            if best.is_none_or(|s| score < s) {
                best = Some(score);
            }
        }
    }
    best
}

/// Average precision by enumerating every ranking prefix and summing
/// precision-weighted recall increments.
pub fn brute_average_precision(p1s: &[f64], labels: &[u8]) -> f64 {
    let mut order: Vec<usize> = (0..p1s.len()).collect();
    order.sort_by(|&a, &b| p1s[b].total_cmp(&p1s[a]).then(a.cmp(&b)));
    let positives = labels.iter().filter(|&&y| y == 1).count();
    let mut tp = 0usize;
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    for k in 1..=order.len() {
        if labels[order[k - 1]] == 1 {
            tp += 1;
        }
        let precision = tp as f64 / k as f64;
        let recall = tp as f64 / positives as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    ap
}

fn random_set(rng: &mut ChaCha8Rng) -> NucSet {
    loop {
        let mut bases = Vec::new();
        for &b in BASES.iter() {
            if rng.gen_bool(0.4) {
                bases.push(b);
            }
        }
        if let Some(set) = NucSet::from_bases(&bases) {
            return set;
        }
    }
}

fn random_window(rng: &mut ChaCha8Rng, seq_len: usize) -> Window {
    let a = rng.gen_range(0..seq_len) as u32;
    let b = rng.gen_range(a as usize..seq_len) as u32;
    Window::new(a, b)
}

fn random_motif(rng: &mut ChaCha8Rng, max_len: usize) -> Motif {
    let len = rng.gen_range(1..=max_len.clamp(1, 6));
    let pat: String = (0..len).map(|_| BASES[rng.gen_range(0..4)] as char).collect();
    Motif::new(&pat).unwrap()
}

/// A random indicator-valued expression (the only operands boolean
/// combinators accept).
pub fn random_indicator(rng: &mut ChaCha8Rng, seq_len: usize, depth: usize, windows: &mut usize) -> FeatureExpr {
    if depth <= 1 || rng.gen_bool(0.5) {
        if *windows > 0 && rng.gen_bool(0.4) {
            *windows -= 1;
            return FeatureExpr::MotifPresent {
                pat: random_motif(rng, 4),
                window: random_window(rng, seq_len),
            };
        }
        return FeatureExpr::PosIn {
            pos: rng.gen_range(0..seq_len) as u32,
            set: random_set(rng),
        };
    }
    match rng.gen_range(0..3) {
        0 => FeatureExpr::And(
            Box::new(random_indicator(rng, seq_len, depth - 1, windows)),
            Box::new(random_indicator(rng, seq_len, depth - 1, windows)),
        ),
        1 => FeatureExpr::Or(
            Box::new(random_indicator(rng, seq_len, depth - 1, windows)),
            Box::new(random_indicator(rng, seq_len, depth - 1, windows)),
        ),
        _ => FeatureExpr::Not(Box::new(random_indicator(rng, seq_len, depth - 1, windows))),
    }
}

/// A random expression valid for `seq_len` under the standard structural
/// caps (depth 8, 6 windows).
pub fn random_expr(rng: &mut ChaCha8Rng, seq_len: usize) -> FeatureExpr {
    let mut windows = 6usize;
    let depth = rng.gen_range(1..=4);
    random_expr_inner(rng, seq_len, depth, &mut windows)
}

fn random_expr_inner(
    rng: &mut ChaCha8Rng,
    seq_len: usize,
    depth: usize,
    windows: &mut usize,
) -> FeatureExpr {
    let leaf_only = depth <= 1;
    match rng.gen_range(if leaf_only { 0..8 } else { 0..12 }) {
        0 if *windows > 0 => {
            *windows -= 1;
            FeatureExpr::Count {
                set: random_set(rng),
                window: random_window(rng, seq_len),
            }
        }
        1 if *windows > 0 => {
            *windows -= 1;
            FeatureExpr::Prop {
                set: random_set(rng),
                window: random_window(rng, seq_len),
            }
        }
        2 => FeatureExpr::PosIn {
            pos: rng.gen_range(0..seq_len) as u32,
            set: random_set(rng),
        },
        3 if *windows > 0 => {
            *windows -= 1;
            FeatureExpr::MotifCount {
                pat: random_motif(rng, 5),
                window: random_window(rng, seq_len),
            }
        }
        4 if *windows > 0 => {
            *windows -= 1;
            FeatureExpr::MotifPresent {
                pat: random_motif(rng, 5),
                window: random_window(rng, seq_len),
            }
        }
        5 if *windows > 0 => {
            *windows -= 1;
            FeatureExpr::Transitions {
                from: random_set(rng),
                to: random_set(rng),
                window: random_window(rng, seq_len),
            }
        }
        6 if *windows > 0 => {
            *windows -= 1;
            FeatureExpr::StackEnergy {
                window: random_window(rng, seq_len),
            }
        }
        0..=7 => FeatureExpr::Raw {
            index: rng.gen_range(0..4 * seq_len) as u32,
        },
        8 => FeatureExpr::Add(
            Box::new(random_expr_inner(rng, seq_len, depth - 1, windows)),
            Box::new(random_expr_inner(rng, seq_len, depth - 1, windows)),
        ),
        9 => FeatureExpr::Sub(
            Box::new(random_expr_inner(rng, seq_len, depth - 1, windows)),
            Box::new(random_expr_inner(rng, seq_len, depth - 1, windows)),
        ),
        10 => {
            let num = rng.gen_range(-6i64..=6).max(-6);
            let den = rng.gen_range(1i64..=4);
            FeatureExpr::Scale(
                Rational::new(num, den).unwrap(),
                Box::new(random_expr_inner(rng, seq_len, depth - 1, windows)),
            )
        }
        _ => {
            let before = (*windows).min(3);
            let mut left = before;
            let e = random_indicator(rng, seq_len, depth.min(3), &mut left);
            *windows -= before - left;
            e
        }
    }
}
