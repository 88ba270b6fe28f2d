//! Decision trees over fixed-length DNA sequences whose splits can use
//! generated high-level features from a small interpretable expression
//! language.
//!
//! - [`seqdata`]: datasets, synthetic motif benchmarks, one-hot and k-mer
//!   encoders, train/test splitting.
//! - [`dsl`]: the feature expression language (parse, validate, evaluate,
//!   render, Halstead complexity).
//! - [`induction`]: Gini-scored greedy tree growth, prediction, and the
//!   tree document format.
//! - [`featgen`]: per-node population initialization, reflection-based
//!   refinement, and split selection against a text backend.
//! - [`llm`]: the OpenAI-compatible chat client and the scripted offline
//!   backend.
//! - [`metrics`] and [`experiment`]: evaluation and the sweep runner
//!   behind the CLI.

pub mod dsl;
pub mod experiment;
pub mod featgen;
pub mod induction;
pub mod llm;
pub mod metrics;
pub mod seqdata;

pub use induction::{grow_tree, load_tree, predict, save_tree, DecisionTree, InductionConfig, Mode};
pub use seqdata::{load_csv, synth_motif, train_test_split, SequenceDataset};
