//! Greedy tree induction over sequence features.
//!
//! Nodes split on (expression, threshold) pairs supplied by a pluggable
//! [`FeatureGenerator`]; growth is breadth-first so that generation across
//! a depth's frontier can run concurrently. Finished trees are immutable.

mod document;
mod split;

pub use document::{load_tree, load_tree_from, save_tree, save_tree_to};
pub use split::{best_threshold, gini, split_score, ImpurityCounts};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{self, DslError, DslLimits, FeatureExpr};
use crate::featgen::{
    GenError, NodeContext, Origin, PathCondition, SemanticRep, TranscriptRecord,
};
use crate::seqdata::{SequenceDataset, SubsetRef};

/// Score improvements at or below this are treated as noise and stop
/// growth at the node.
pub const IMPROVEMENT_EPSILON: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("values ({values}) and labels ({labels}) have different lengths")]
    LengthMismatch { values: usize, labels: usize },
    #[error("empty node")]
    EmptyNode,
    #[error("invalid induction config: {0}")]
    BadConfig(String),
    #[error("sequence length {found} does not match tree's {expected}")]
    SequenceLength { expected: usize, found: usize },
    #[error("invalid character `{ch}` in input sequence")]
    SequenceAlphabet { ch: char },
    #[error("tree document: {0}")]
    Schema(String),
    #[error("tree document expression: {0}")]
    Dsl(#[from] DslError),
    #[error("feature generation failed at node `{path}`: {source}")]
    Generator {
        path: String,
        #[source]
        source: GenError,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Which feature source drives induction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Generated features at every node, raw features as the fallback floor.
    Deft,
    /// Axis-aligned splits on one-hot position coordinates.
    CartOnehot,
    /// Axis-aligned splits on k-mer occurrence counts.
    CartKmer,
    /// Generated features only at the root; greedy growth over that bank.
    DeftNoAdapt,
}

impl Mode {
    pub fn needs_backend(self) -> bool {
        matches!(self, Mode::Deft | Mode::DeftNoAdapt)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Deft => "deft",
            Mode::CartOnehot => "cart_onehot",
            Mode::CartKmer => "cart_kmer",
            Mode::DeftNoAdapt => "deft_no_adapt",
        }
    }
}

/// The node impurity criterion. Gini is the only option.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Impurity {
    #[default]
    Gini,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InductionConfig {
    pub mode: Mode,
    pub max_depth: usize,
    pub min_leaf_frac: f64,
    #[serde(default)]
    pub impurity: Impurity,
    pub label_threshold: f64,
    pub seed: u64,
    /// k for `cart_kmer` features.
    pub kmer_k: usize,
}

impl InductionConfig {
    pub fn new(mode: Mode, max_depth: usize, seed: u64) -> InductionConfig {
        InductionConfig {
            mode,
            max_depth,
            min_leaf_frac: 0.01,
            impurity: Impurity::Gini,
            label_threshold: 0.5,
            seed,
            kmer_k: 2,
        }
    }

    pub fn validate(&self) -> Result<(), TreeError> {
        if self.max_depth < 1 {
            return Err(TreeError::BadConfig("max_depth must be >= 1".into()));
        }
        if !(self.min_leaf_frac > 0.0 && self.min_leaf_frac < 0.5) {
            return Err(TreeError::BadConfig(
                "min_leaf_frac must be strictly between 0 and 0.5".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.label_threshold) {
            return Err(TreeError::BadConfig(
                "label_threshold must be in [0,1]".into(),
            ));
        }
        if self.kmer_k == 0 {
            return Err(TreeError::BadConfig("kmer_k must be >= 1".into()));
        }
        Ok(())
    }

    /// Minimum rows per leaf for a training set of `n` rows; never zero.
    pub fn min_leaf(&self, n: usize) -> usize {
        ((self.min_leaf_frac * n as f64).ceil() as usize).max(1)
    }
}

/// Comparison operator of a splitting condition. Left branches always hold
/// rows with feature value <= threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompareOp {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
}

impl CompareOp {
    /// The natural-language form used in node-context prompts.
    pub fn as_words(self) -> &'static str {
        match self {
            CompareOp::Le => "smaller than",
            CompareOp::Gt => "greater than",
        }
    }
}

/// A realized split: feature expression, its semantics, and the threshold
/// with its achieved score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub expr: FeatureExpr,
    pub semantics: SemanticRep,
    pub op: CompareOp,
    pub threshold: f64,
    pub score: f64,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Internal {
        split: SplitSpec,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        p1: f64,
        n: usize,
    },
}

impl Node {
    pub fn leaf_count(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Internal { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    pub fn internal_count(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Internal { left, right, .. } => {
                1 + left.internal_count() + right.internal_count()
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

/// Why a node stopped splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafReason {
    Pure,
    MaxDepth,
    MinLeaf,
    NoImprovement,
    NoFeasibleSplit,
}

/// One growth event, recorded in breadth-first order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum ProvenanceRecord {
    Split {
        path: String,
        origin: Origin,
        score: f64,
        /// Best achievable raw-feature score at this node, when the
        /// generator computed it.
        raw_best: Option<f64>,
        n: usize,
    },
    Leaf {
        path: String,
        reason: LeafReason,
        n: usize,
        p1: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeMeta {
    pub format_version: u32,
    pub seq_len: usize,
    pub dataset: String,
    pub config: InductionConfig,
    pub provenance: Vec<ProvenanceRecord>,
}

/// A fitted decision tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub meta: TreeMeta,
    pub root: Node,
}

impl DecisionTree {
    /// Walk with `(path, node)` callbacks, parents before children.
    pub fn visit<'t>(&'t self, mut f: impl FnMut(&str, &'t Node)) {
        fn rec<'t>(node: &'t Node, path: &mut String, f: &mut impl FnMut(&str, &'t Node)) {
            f(path, node);
            if let Node::Internal { left, right, .. } = node {
                path.push('L');
                rec(left, path, f);
                path.pop();
                path.push('R');
                rec(right, path, f);
                path.pop();
            }
        }
        let mut path = String::new();
        rec(&self.root, &mut path, &mut f);
    }
}

/// What a generator proposes for one node.
#[derive(Debug)]
pub struct SplitProposal {
    pub split: Option<SplitSpec>,
    /// Independently computed best raw-feature score on the node subset,
    /// when the generator evaluates raw features.
    pub raw_best: Option<f64>,
    pub transcript: Vec<TranscriptRecord>,
}

/// Per-node split proposer. Implementations must be shareable across the
/// concurrently processed frontier.
pub trait FeatureGenerator: Sync {
    fn propose_split(
        &self,
        ctx: &NodeContext<'_>,
        min_child: usize,
    ) -> Result<SplitProposal, GenError>;
}

/// A fixed candidate bank: the generator behind the cart modes and the
/// root-bank ablation.
pub struct FixedBankGenerator {
    candidates: Vec<BankEntry>,
}

struct BankEntry {
    expr: FeatureExpr,
    semantics: SemanticRep,
    origin: Origin,
    volume: f64,
}

impl FixedBankGenerator {
    pub fn new(candidates: Vec<(FeatureExpr, SemanticRep, Origin)>) -> FixedBankGenerator {
        let candidates = candidates
            .into_iter()
            .map(|(expr, semantics, origin)| {
                let volume = dsl::complexity(&expr).volume;
                BankEntry {
                    expr,
                    semantics,
                    origin,
                    volume,
                }
            })
            .collect();
        FixedBankGenerator { candidates }
    }

    /// All one-hot coordinates of a length-`seq_len` sequence, with
    /// synthesized semantics.
    pub fn one_hot_bank(seq_len: usize) -> FixedBankGenerator {
        let candidates = (0..4 * seq_len as u32)
            .map(|j| {
                let expr = FeatureExpr::Raw { index: j };
                (expr, SemanticRep::for_raw_coordinate(j), Origin::Raw)
            })
            .collect();
        FixedBankGenerator::new(candidates)
    }

    /// Whole-sequence occurrence counts of every k-mer, in lexicographic
    /// order, expressed as `motif_count` over the full window.
    pub fn kmer_bank(seq_len: usize, k: usize) -> FixedBankGenerator {
        let candidates = (0..4usize.pow(k as u32))
            .map(|code| {
                let kmer = crate::seqdata::kmer_name(code, k);
                let expr = dsl::parse(&format!("motif_count(\"{kmer}\",0,{})", seq_len - 1))
                    .expect("k-mer expression is grammatical");
                let semantics = SemanticRep::for_kmer(&kmer);
                (expr, semantics, Origin::Raw)
            })
            .collect();
        FixedBankGenerator::new(candidates)
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

impl FeatureGenerator for FixedBankGenerator {
    fn propose_split(
        &self,
        ctx: &NodeContext<'_>,
        min_child: usize,
    ) -> Result<SplitProposal, GenError> {
        use rayon::prelude::*;

        let subset = &ctx.subset;
        let labels: Vec<u8> = subset.labels().collect();
        // Argmin over (score, volume, bank index); the tuple order makes
        // the parallel reduction deterministic.
        let best = self
            .candidates
            .par_iter()
            .enumerate()
            .filter_map(|(idx, entry)| {
                let values: Vec<f64> = subset
                    .sequences()
                    .map(|seq| dsl::eval_expr(&entry.expr, seq))
                    .collect();
                best_threshold(&values, &labels, min_child)
                    .map(|(tau, score)| (score, entry.volume, idx, tau))
            })
            .min_by(|a, b| {
                a.0.total_cmp(&b.0)
                    .then(a.1.total_cmp(&b.1))
                    .then(a.2.cmp(&b.2))
            });

        let split = best.map(|(score, _, idx, tau)| {
            let entry = &self.candidates[idx];
            SplitSpec {
                expr: entry.expr.clone(),
                semantics: entry.semantics.clone(),
                op: CompareOp::Le,
                threshold: tau,
                score,
                origin: entry.origin,
            }
        });
        Ok(SplitProposal {
            split,
            raw_best: None,
            transcript: Vec::new(),
        })
    }
}

struct PendingNode<'a> {
    path: String,
    subset: SubsetRef<'a>,
    depth: usize,
    conditions: Vec<PathCondition>,
}

enum Decision {
    Leaf { p1: f64, n: usize },
    Split(SplitSpec),
}

/// Grow a tree over `train` using `gen` for split proposals.
pub fn grow_tree(
    train: &SequenceDataset,
    cfg: &InductionConfig,
    gen: &dyn FeatureGenerator,
) -> Result<DecisionTree, TreeError> {
    grow_tree_logged(train, cfg, gen).map(|(tree, _)| tree)
}

/// As [`grow_tree`], additionally returning the backend transcript records
/// in breadth-first node order.
pub fn grow_tree_logged(
    train: &SequenceDataset,
    cfg: &InductionConfig,
    gen: &dyn FeatureGenerator,
) -> Result<(DecisionTree, Vec<TranscriptRecord>), TreeError> {
    use rayon::prelude::*;

    cfg.validate()?;
    if train.is_empty() {
        return Err(TreeError::EmptyNode);
    }
    let min_leaf = cfg.min_leaf(train.len());
    let mut decisions: Vec<(String, Decision)> = Vec::new();
    let mut provenance: Vec<ProvenanceRecord> = Vec::new();
    let mut transcript: Vec<TranscriptRecord> = Vec::new();

    let mut frontier = vec![PendingNode {
        path: String::new(),
        subset: train.full_subset(),
        depth: 0,
        conditions: Vec::new(),
    }];

    while !frontier.is_empty() {
        // Split the level into nodes that stop here and nodes to generate
        // features for.
        let mut active: Vec<PendingNode<'_>> = Vec::new();
        for node in frontier.drain(..) {
            let (n0, n1) = node.subset.class_counts();
            let n = node.subset.len();
            let p1 = n1 as f64 / n as f64;
            let reason = if n0 == 0 || n1 == 0 {
                Some(LeafReason::Pure)
            } else if node.depth >= cfg.max_depth {
                Some(LeafReason::MaxDepth)
            } else if n < 2 * min_leaf {
                Some(LeafReason::MinLeaf)
            } else {
                None
            };
            if let Some(reason) = reason {
                provenance.push(ProvenanceRecord::Leaf {
                    path: node.path.clone(),
                    reason,
                    n,
                    p1,
                });
                decisions.push((node.path, Decision::Leaf { p1, n }));
            } else {
                active.push(node);
            }
        }

        // Feature generation for same-depth nodes is independent; run it
        // across the frontier in parallel and re-apply results in order.
        let proposals: Vec<Result<SplitProposal, GenError>> = active
            .par_iter()
            .map(|node| {
                let ctx = NodeContext {
                    path: node.conditions.clone(),
                    subset: node.subset.clone(),
                    depth: node.depth,
                };
                gen.propose_split(&ctx, min_leaf)
            })
            .collect();

        let mut next = Vec::new();
        for (node, proposal) in active.into_iter().zip(proposals) {
            let proposal = proposal.map_err(|source| TreeError::Generator {
                path: if node.path.is_empty() {
                    "root".into()
                } else {
                    node.path.clone()
                },
                source,
            })?;
            transcript.extend(proposal.transcript);
            let (n0, n1) = node.subset.class_counts();
            let n = node.subset.len();
            let p1 = n1 as f64 / n as f64;
            let parent_gini = gini(ImpurityCounts { n0, n1 });

            let reason = if proposal.split.is_none() {
                Some(LeafReason::NoFeasibleSplit)
            } else if proposal
                .split
                .as_ref()
                .is_some_and(|s| parent_gini - s.score <= IMPROVEMENT_EPSILON)
            {
                Some(LeafReason::NoImprovement)
            } else {
                None
            };
            if let Some(reason) = reason {
                provenance.push(ProvenanceRecord::Leaf {
                    path: node.path.clone(),
                    reason,
                    n,
                    p1,
                });
                decisions.push((node.path, Decision::Leaf { p1, n }));
                continue;
            }
            let split = proposal.split.expect("checked above");

            let mut left_ix = Vec::new();
            let mut right_ix = Vec::new();
            for &row in node.subset.indices() {
                let seq = node.subset.parent().sequence(row as usize);
                if dsl::eval_expr(&split.expr, seq) <= split.threshold {
                    left_ix.push(row);
                } else {
                    right_ix.push(row);
                }
            }
            debug_assert!(left_ix.len() >= min_leaf && right_ix.len() >= min_leaf);

            provenance.push(ProvenanceRecord::Split {
                path: node.path.clone(),
                origin: split.origin,
                score: split.score,
                raw_best: proposal.raw_best,
                n,
            });

            for (branch, ix) in [('L', left_ix), ('R', right_ix)] {
                let mut conditions = node.conditions.clone();
                conditions.push(PathCondition {
                    name: split.semantics.name.clone(),
                    description: split.semantics.description.clone(),
                    op: if branch == 'L' {
                        CompareOp::Le
                    } else {
                        CompareOp::Gt
                    },
                    threshold: split.threshold,
                });
                next.push(PendingNode {
                    path: format!("{}{branch}", node.path),
                    subset: SubsetRef::new(node.subset.parent(), ix),
                    depth: node.depth + 1,
                    conditions,
                });
            }
            decisions.push((node.path, Decision::Split(split)));
        }
        frontier = next;
    }

    let mut by_path: std::collections::HashMap<String, Decision> = decisions.into_iter().collect();
    let root = assemble(&mut by_path, String::new());
    let tree = DecisionTree {
        meta: TreeMeta {
            format_version: document::FORMAT_VERSION,
            seq_len: train.seq_len(),
            dataset: train.name().to_string(),
            config: cfg.clone(),
            provenance,
        },
        root,
    };
    Ok((tree, transcript))
}

fn assemble(by_path: &mut std::collections::HashMap<String, Decision>, path: String) -> Node {
    match by_path.remove(&path).expect("every grown path has a decision") {
        Decision::Leaf { p1, n } => Node::Leaf { p1, n },
        Decision::Split(split) => {
            let left = assemble(by_path, format!("{path}L"));
            let right = assemble(by_path, format!("{path}R"));
            Node::Internal {
                split,
                left: Box::new(left),
                right: Box::new(right),
            }
        }
    }
}

/// Route a sequence to a leaf: left on `f(x) <= threshold`, right
/// otherwise. Returns the leaf's class-1 probability and the hard label at
/// the configured cut.
pub fn predict(tree: &DecisionTree, seq: &str) -> Result<(f64, u8), TreeError> {
    if seq.len() != tree.meta.seq_len {
        return Err(TreeError::SequenceLength {
            expected: tree.meta.seq_len,
            found: seq.len(),
        });
    }
    if let Some(ch) = seq.chars().find(|c| !matches!(c, 'A' | 'C' | 'G' | 'T')) {
        return Err(TreeError::SequenceAlphabet { ch });
    }
    let mut node = &tree.root;
    loop {
        match node {
            Node::Leaf { p1, .. } => {
                let label = (*p1 > tree.meta.config.label_threshold) as u8;
                return Ok((*p1, label));
            }
            Node::Internal { split, left, right } => {
                node = if dsl::eval_expr(&split.expr, seq) <= split.threshold {
                    left
                } else {
                    right
                };
            }
        }
    }
}

/// Validate a loaded tree: every expression must be in range for the
/// recorded sequence length, leaf probabilities must be proper, and all
/// split operators must be the left-is-<= convention.
pub fn validate_tree(tree: &DecisionTree) -> Result<(), TreeError> {
    tree.meta.config.validate()?;
    let limits = DslLimits::perf(); // documents may carry perf-mode features
    let mut err = None;
    tree.visit(|path, node| {
        if err.is_some() {
            return;
        }
        match node {
            Node::Internal { split, .. } => {
                if let Err(e) = dsl::validate_with(&split.expr, tree.meta.seq_len, limits) {
                    err = Some(TreeError::Dsl(e));
                } else if split.op != CompareOp::Le {
                    err = Some(TreeError::Schema(format!(
                        "split at `{path}` must use the <= operator"
                    )));
                } else if !split.threshold.is_finite() {
                    err = Some(TreeError::Schema(format!(
                        "split at `{path}` has a non-finite threshold"
                    )));
                }
            }
            Node::Leaf { p1, .. } => {
                if !(0.0..=1.0).contains(p1) {
                    err = Some(TreeError::Schema(format!(
                        "leaf at `{path}` has p1 outside [0,1]"
                    )));
                }
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featgen::DeftGenerator;
    use crate::llm::FailingBackend;
    use crate::seqdata::{synth_motif, SynthOptions};

    fn cart_cfg(max_depth: usize) -> InductionConfig {
        InductionConfig::new(Mode::CartOnehot, max_depth, 0)
    }

    #[test]
    fn pure_training_set_is_a_single_leaf() {
        let ds = SequenceDataset::new("t", vec!["ACGT".into(), "TTTT".into()], vec![1, 1]).unwrap();
        let gen = FixedBankGenerator::one_hot_bank(4);
        let tree = grow_tree(&ds, &cart_cfg(3), &gen).unwrap();
        assert!(matches!(tree.root, Node::Leaf { p1, n: 2 } if p1 == 1.0));
        assert_eq!(
            tree.meta.provenance,
            vec![ProvenanceRecord::Leaf {
                path: String::new(),
                reason: LeafReason::Pure,
                n: 2,
                p1: 1.0,
            }]
        );
    }

    #[test]
    fn separable_by_one_position_grows_depth_one() {
        let ds = SequenceDataset::new(
            "t",
            vec!["ACGT".into(), "AAAA".into(), "TCGT".into(), "GTTT".into()],
            vec![1, 1, 0, 0],
        )
        .unwrap();
        let gen = FixedBankGenerator::one_hot_bank(4);
        let tree = grow_tree(&ds, &cart_cfg(4), &gen).unwrap();
        assert_eq!(tree.root.depth(), 1);
        let Node::Internal { split, left, right } = &tree.root else {
            panic!("expected a split");
        };
        // pos0==A separates perfectly; raw index 0 is the first such column.
        assert_eq!(split.expr.to_string(), "raw(0)");
        assert!(matches!(**left, Node::Leaf { p1, .. } if p1 == 0.0));
        assert!(matches!(**right, Node::Leaf { p1, .. } if p1 == 1.0));
        for (row, expected) in [(0, 1u8), (1, 1), (2, 0), (3, 0)] {
            let (_, label) = predict(&tree, ds.sequence(row)).unwrap();
            assert_eq!(label, expected);
        }
    }

    #[test]
    fn depth_and_leaf_floor_are_enforced() {
        let ds = synth_motif(200, 10, "TA", false, 5, SynthOptions::default()).unwrap();
        let mut cfg = cart_cfg(3);
        cfg.min_leaf_frac = 0.1; // floor of 20 rows per leaf
        let gen = FixedBankGenerator::one_hot_bank(10);
        let tree = grow_tree(&ds, &cfg, &gen).unwrap();
        assert!(tree.root.depth() <= 3);
        tree.visit(|_, node| {
            if let Node::Leaf { n, .. } = node {
                assert!(*n >= 20, "leaf with {n} rows under floor 20");
            }
        });
    }

    #[test]
    fn predict_manual_traversal() {
        // Root pos_in(0,{A}) <= 0.5; an A goes right to the 0.9 leaf.
        let doc_tree = DecisionTree {
            meta: TreeMeta {
                format_version: document::FORMAT_VERSION,
                seq_len: 4,
                dataset: "fixture".into(),
                config: cart_cfg(1),
                provenance: vec![],
            },
            root: Node::Internal {
                split: SplitSpec {
                    expr: crate::dsl::parse("pos_in(0,{A})").unwrap(),
                    semantics: SemanticRep::new("r", "first_is_A", "d").unwrap(),
                    op: CompareOp::Le,
                    threshold: 0.5,
                    score: 0.1,
                    origin: Origin::LlmInit,
                },
                left: Box::new(Node::Leaf { p1: 0.1, n: 5 }),
                right: Box::new(Node::Leaf { p1: 0.9, n: 5 }),
            },
        };
        assert_eq!(predict(&doc_tree, "ACGT").unwrap(), (0.9, 1));
        assert_eq!(predict(&doc_tree, "CCGT").unwrap(), (0.1, 0));
        assert!(matches!(
            predict(&doc_tree, "ACG"),
            Err(TreeError::SequenceLength { .. })
        ));
        assert!(matches!(
            predict(&doc_tree, "ACGU"),
            Err(TreeError::SequenceAlphabet { ch: 'U' })
        ));
    }

    #[test]
    fn document_round_trip_is_byte_identical() {
        let ds = synth_motif(60, 8, "TA", false, 9, SynthOptions::default()).unwrap();
        let gen = FixedBankGenerator::one_hot_bank(8);
        let tree = grow_tree(&ds, &cart_cfg(3), &gen).unwrap();
        let doc = save_tree(&tree);
        let loaded = load_tree(&doc).unwrap();
        assert_eq!(loaded, tree);
        assert_eq!(save_tree(&loaded), doc);
    }

    #[test]
    fn tampered_document_fails_validation() {
        let ds = SequenceDataset::new(
            "t",
            vec!["ACGT".into(), "AAAA".into(), "TCGT".into(), "GTTT".into()],
            vec![1, 1, 0, 0],
        )
        .unwrap();
        let gen = FixedBankGenerator::one_hot_bank(4);
        let tree = grow_tree(&ds, &cart_cfg(2), &gen).unwrap();
        let doc = save_tree(&tree);
        assert!(doc.contains("\"expr\": \"raw(0)\""), "{doc}");
        // A window beyond the recorded sequence length must fail on load.
        let out_of_range = doc.replace("\"expr\": \"raw(0)\"", "\"expr\": \"count({A},0,200)\"");
        assert!(matches!(load_tree(&out_of_range), Err(TreeError::Dsl(_))));
        // Unparseable expression text must fail too.
        let garbled = doc.replace("\"expr\": \"raw(0)\"", "\"expr\": \"frob(0)\"");
        assert!(load_tree(&garbled).is_err());
    }

    #[test]
    fn unknown_format_version_is_rejected() {
        let ds = SequenceDataset::new("t", vec!["AC".into(), "GT".into()], vec![0, 1]).unwrap();
        let gen = FixedBankGenerator::one_hot_bank(2);
        let tree = grow_tree(&ds, &cart_cfg(1), &gen).unwrap();
        let doc = save_tree(&tree).replace("\"format_version\": 1", "\"format_version\": 99");
        assert!(matches!(load_tree(&doc), Err(TreeError::Schema(_))));
    }

    #[test]
    fn kmer_bank_row_features_match_counts() {
        let ds = SequenceDataset::new(
            "t",
            vec!["TATA".into(), "CCCC".into(), "TAGG".into(), "GGGG".into()],
            vec![1, 0, 1, 0],
        )
        .unwrap();
        let cfg = InductionConfig::new(Mode::CartKmer, 2, 0);
        let gen = FixedBankGenerator::kmer_bank(4, 2);
        assert_eq!(gen.len(), 16);
        let tree = grow_tree(&ds, &cfg, &gen).unwrap();
        // TA count separates the classes at the root.
        let Node::Internal { split, .. } = &tree.root else {
            panic!("expected a split")
        };
        assert_eq!(split.expr.to_string(), "motif_count(\"TA\",0,3)");
    }

    #[test]
    fn failed_backend_degrades_deft_to_cart() {
        let ds = synth_motif(120, 8, "TA", true, 3, SynthOptions::default()).unwrap();
        let mut deft_cfg = InductionConfig::new(Mode::Deft, 3, 0);
        deft_cfg.min_leaf_frac = 0.05;
        let deft_gen = DeftGenerator {
            backend: &FailingBackend,
            task: crate::featgen::TaskContext::new("d", ds.len(), ds.seq_len()),
            cfg: crate::featgen::GenerationConfig {
                population_size: 3,
                reflections: 2,
                ..Default::default()
            },
        };
        let deft_tree = grow_tree(&ds, &deft_cfg, &deft_gen).unwrap();

        let mut cart_cfg = InductionConfig::new(Mode::CartOnehot, 3, 0);
        cart_cfg.min_leaf_frac = 0.05;
        let cart_tree = grow_tree(&ds, &cart_cfg, &FixedBankGenerator::one_hot_bank(8)).unwrap();

        // Same splits and thresholds everywhere.
        let mut deft_splits = Vec::new();
        deft_tree.visit(|path, node| {
            if let Node::Internal { split, .. } = node {
                deft_splits.push((path.to_string(), split.expr.to_string(), split.threshold));
            }
        });
        let mut cart_splits = Vec::new();
        cart_tree.visit(|path, node| {
            if let Node::Internal { split, .. } = node {
                cart_splits.push((path.to_string(), split.expr.to_string(), split.threshold));
            }
        });
        assert!(!deft_splits.is_empty());
        assert_eq!(deft_splits, cart_splits);
    }
}
