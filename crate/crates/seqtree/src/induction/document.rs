//! Tree document serialization.
//!
//! The document is versioned JSON embedding the canonical DSL text of every
//! split, thresholds at full precision, the induction config, and the
//! growth provenance log. `save(load(save(t)))` is byte-identical to
//! `save(t)`; loading re-parses and re-validates every expression.

use std::path::Path;

use super::{validate_tree, DecisionTree, TreeError};

pub const FORMAT_VERSION: u32 = 1;

/// Serialize a tree to its canonical document text.
pub fn save_tree(tree: &DecisionTree) -> String {
    let mut doc = serde_json::to_string_pretty(tree).expect("tree serialization is infallible");
    doc.push('\n');
    doc
}

pub fn save_tree_to(tree: &DecisionTree, path: impl AsRef<Path>) -> Result<(), TreeError> {
    let path = path.as_ref();
    std::fs::write(path, save_tree(tree)).map_err(|source| TreeError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parse and validate a tree document.
pub fn load_tree(doc: &str) -> Result<DecisionTree, TreeError> {
    let tree: DecisionTree =
        serde_json::from_str(doc).map_err(|e| TreeError::Schema(e.to_string()))?;
    if tree.meta.format_version != FORMAT_VERSION {
        return Err(TreeError::Schema(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            tree.meta.format_version
        )));
    }
    validate_tree(&tree)?;
    Ok(tree)
}

pub fn load_tree_from(path: impl AsRef<Path>) -> Result<DecisionTree, TreeError> {
    let path = path.as_ref();
    let doc = std::fs::read_to_string(path).map_err(|source| TreeError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_tree(&doc)
}
