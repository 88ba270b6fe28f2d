//! Prompt assembly.
//!
//! Templates are external text assets with named placeholders ({TASK},
//! {NODE_CONTEXT}, {POPULATION}, {GRAMMAR}, {INTERPRETABILITY}, {NAME},
//! {DESCRIPTION}); the standard and performance variants differ only in
//! the interpretability paragraph.

use super::{Ablation, GenError, NodeContext, Population, TaskContext};
use crate::induction::CompareOp;

/// System message for every exchange.
pub const SYSTEM_PROMPT: &str =
    "You are an expert assistant for DNA sequence analysis and interpretable feature engineering.";

/// Task description substituted under the no-prior ablation.
pub const GENERIC_TASK_STUB: &str = "This is a dataset for a binary classification task. The goal is to find features of the input that separate the two classes.";

pub const NODE_CONTEXT_BEGIN: &str = "<Beginning Splitting conditions from root to current node>";
pub const NODE_CONTEXT_END: &str = "<End of Splitting conditions from root to current node>";
pub const POPULATION_BEGIN: &str = "<Beginning of the population of features>";
pub const POPULATION_END: &str = "<End of the population of features>";

/// The instruction templates driving generation.
#[derive(Debug, Clone)]
pub struct PromptTemplates {
    pub init: String,
    pub explore: String,
    pub exploit: String,
    pub code: String,
    pub interp_standard: String,
    pub interp_perf: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        PromptTemplates {
            init: include_str!("../../assets/prompts/init.txt").to_string(),
            explore: include_str!("../../assets/prompts/explore.txt").to_string(),
            exploit: include_str!("../../assets/prompts/exploit.txt").to_string(),
            code: include_str!("../../assets/prompts/code.txt").to_string(),
            interp_standard: include_str!("../../assets/prompts/interp_standard.txt").to_string(),
            interp_perf: include_str!("../../assets/prompts/interp_perf.txt").to_string(),
        }
    }
}

impl TaskContext {
    /// The {TASK} block: task description, input schema, and the size of
    /// the subset at the current node.
    pub fn render(&self, subset_len: usize, ablation: Ablation) -> String {
        let description = if ablation == Ablation::NoPrior || self.description.is_empty() {
            GENERIC_TASK_STUB
        } else {
            self.description.as_str()
        };
        format!(
            "Your goal is to help with the task of growing a decision tree for binary DNA sequence classification. {description} Given a current node that we want to split in the tree, you will construct a new feature based on the original DNA sequence, such that this new feature is discriminative for the prediction task. {}The possible nucleotide values are A, C, G, T.\n\nThe features are:\n{}\n\nThe dataset has {subset_len} samples.",
            self.render_regions(),
            self.feature_schema,
        )
    }

    /// The region-annotation sentences, also embedded in code prompts.
    pub fn render_regions(&self) -> String {
        match self.site {
            Some(site) => format!(
                "The raw feature is the DNA sequence of length {} centered on the site of interest. Positions from 0 to {} included correspond to the upstream region. Position {site} corresponds to the site. Positions from {} to {} included are in the downstream region. ",
                self.seq_len,
                site.saturating_sub(1),
                site + 1,
                self.seq_len - 1,
            ),
            None => format!("The raw feature is the DNA sequence of length {}. ", self.seq_len),
        }
    }
}

/// Format a score for prompts: at most four decimals, trailing zeros
/// trimmed (0.195 stays "0.195", 0.2667 stays "0.2667").
pub fn format_score(eta: f64) -> String {
    let text = format!("{eta:.4}");
    let trimmed = text.trim_end_matches('0').trim_end_matches('.');
    if trimmed.is_empty() || trimmed == "-" {
        "0".to_string()
    } else {
        trimmed.to_string()
    }
}

/// Serialize the path from root to the node as natural-language splitting
/// conditions, one per line in root-to-node order, wrapped in sentinel
/// lines. Thresholds use three decimals.
pub fn render_node_context(ctx: &NodeContext<'_>) -> String {
    let mut out = String::new();
    out.push_str(NODE_CONTEXT_BEGIN);
    out.push('\n');
    for cond in &ctx.path {
        let words = match cond.op {
            CompareOp::Le => CompareOp::Le.as_words(),
            CompareOp::Gt => CompareOp::Gt.as_words(),
        };
        out.push_str(&format!(
            "{} {words} {:.3} ({})\n",
            cond.name, cond.threshold, cond.description
        ));
    }
    out.push_str(NODE_CONTEXT_END);
    out
}

/// Serialize a scored population for reflection prompts, in population
/// order: one block per candidate with score, name, description, and the
/// rendered expression in the code slot.
pub fn render_population_prompt(pop: &Population) -> Result<String, GenError> {
    if pop.candidates.is_empty() {
        return Err(GenError::EmptyPopulation);
    }
    let mut out = String::new();
    out.push_str(POPULATION_BEGIN);
    out.push('\n');
    out.push_str("Here is the list of features along with their score:\n");
    for (i, cand) in pop.candidates.iter().enumerate() {
        let score_text = match cand.score {
            super::CandidateScore::Scored { eta, .. } => format_score(eta),
            // Infeasible candidates carry an infinite score ordering-wise.
            super::CandidateScore::Infeasible => "inf".to_string(),
            super::CandidateScore::Unscored => {
                return Err(GenError::UnscoredCandidate(cand.semantics.name.clone()))
            }
        };
        out.push_str(&format!("Feature {}\n", i + 1));
        out.push_str(&format!("Score: {score_text}\n"));
        out.push_str(&format!(" Feature name: {}\n", cand.semantics.name));
        out.push_str(&format!(" Feature description: {}\n", cand.semantics.description));
        out.push_str(&format!(" Feature code: {}\n", cand.expr));
    }
    out.push_str(POPULATION_END);
    Ok(out)
}

/// Fill a template's named placeholders.
pub fn fill(template: &str, slots: &[(&str, &str)]) -> String {
    let mut out = template.trim_end().to_string();
    for (name, value) in slots {
        out = out.replace(&format!("{{{name}}}"), value);
    }
    out
}
