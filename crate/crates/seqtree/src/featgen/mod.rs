//! Per-node feature generation: population initialization, reflection, and
//! final split selection against an abstract text backend.
//!
//! Candidates pair a feature expression with its natural-language
//! semantics; unparseable or out-of-range proposals are rejected and
//! re-sampled within an attempt budget. Raw one-hot features always join
//! the initial population, so the selected split is never worse than the
//! best axis-aligned one.

mod prompts;

pub use prompts::{
    fill, format_score, render_node_context, render_population_prompt, PromptTemplates,
    GENERIC_TASK_STUB, NODE_CONTEXT_BEGIN, NODE_CONTEXT_END, POPULATION_BEGIN, POPULATION_END,
    SYSTEM_PROMPT,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{self, DslLimits, FeatureExpr};
use crate::induction::{best_threshold, CompareOp, SplitSpec};
use crate::llm::{LlmError, TextBackend};
use crate::seqdata::{SubsetRef, BASES};

/// Tolerance for the raw-feature guarantee check.
pub const GUARANTEE_EPSILON: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("backend: {0}")]
    Backend(#[from] LlmError),
    #[error("proposal rejected after {attempts} attempts: {reason}")]
    Rejected { attempts: usize, reason: String },
    #[error("population is empty")]
    EmptyPopulation,
    #[error("candidate `{0}` has no score yet")]
    UnscoredCandidate(String),
    #[error("selected score {chosen} exceeds best raw score {raw_best}")]
    GuaranteeViolated { chosen: f64, raw_best: f64 },
}

/// Natural-language specification of a candidate feature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticRep {
    pub rationale: String,
    pub name: String,
    pub description: String,
}

impl SemanticRep {
    /// Validate field constraints: a short single-line name and a
    /// non-empty description.
    pub fn new(
        rationale: impl Into<String>,
        name: impl Into<String>,
        description: impl Into<String>,
    ) -> Result<SemanticRep, String> {
        let rep = SemanticRep {
            rationale: rationale.into(),
            name: name.into(),
            description: description.into(),
        };
        if rep.name.is_empty() {
            return Err("feature name is empty".into());
        }
        if rep.name.len() > 80 {
            return Err(format!("feature name is {} chars (max 80)", rep.name.len()));
        }
        if rep.name.contains('\n') || rep.name.contains('\r') {
            return Err("feature name contains a newline".into());
        }
        if rep.description.is_empty() {
            return Err("feature description is empty".into());
        }
        Ok(rep)
    }

    /// Synthesized semantics for a raw one-hot coordinate. These are
    /// artifact-authored stand-ins, flagged as such in the rationale.
    pub fn for_raw_coordinate(index: u32) -> SemanticRep {
        let pos = index / 4;
        let base = BASES[(index % 4) as usize] as char;
        SemanticRep {
            rationale: "Synthesized semantics for a raw one-hot input coordinate.".into(),
            name: format!("pos_{pos}_is_{base}"),
            description: format!(
                "Position {pos} is base {base}: 1 if the nucleotide at position {pos} is {base}, else 0."
            ),
        }
    }

    /// Synthesized semantics for a whole-sequence k-mer count.
    pub fn for_kmer(kmer: &str) -> SemanticRep {
        SemanticRep {
            rationale: "Synthesized semantics for a k-mer count input feature.".into(),
            name: format!("kmer_{kmer}_count"),
            description: format!(
                "Number of overlapping occurrences of {kmer} anywhere in the sequence."
            ),
        }
    }
}

/// Where a candidate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    LlmInit,
    LlmExplore,
    LlmExploit,
    Raw,
}

/// Scoring state of a candidate on the current node subset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum CandidateScore {
    Unscored,
    /// No eligible threshold exists; ordered after every feasible
    /// candidate and never selected while a feasible one exists.
    Infeasible,
    Scored { eta: f64, threshold: f64 },
}

impl CandidateScore {
    pub fn eta(self) -> Option<f64> {
        match self {
            CandidateScore::Scored { eta, .. } => Some(eta),
            _ => None,
        }
    }

    pub fn is_scored(self) -> bool {
        !matches!(self, CandidateScore::Unscored)
    }
}

/// A candidate feature with semantics and scoring state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub expr: FeatureExpr,
    pub semantics: SemanticRep,
    pub origin: Origin,
    pub score: CandidateScore,
    /// Halstead volume, cached for tie-breaking.
    pub volume: f64,
}

impl Candidate {
    pub fn new(expr: FeatureExpr, semantics: SemanticRep, origin: Origin) -> Candidate {
        let volume = dsl::complexity(&expr).volume;
        Candidate {
            expr,
            semantics,
            origin,
            score: CandidateScore::Unscored,
            volume,
        }
    }

    /// Sort key: feasible before infeasible, then score ascending, then
    /// lower Halstead volume. Stable sorts preserve generation order for
    /// exact ties.
    fn order_key(&self) -> (u8, f64, f64) {
        match self.score {
            CandidateScore::Scored { eta, .. } => (0, eta, self.volume),
            CandidateScore::Infeasible => (1, f64::INFINITY, self.volume),
            CandidateScore::Unscored => (2, f64::INFINITY, self.volume),
        }
    }
}

/// The evolving candidate set at one node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub candidates: Vec<Candidate>,
    /// Top-M capacity applied at each selection step.
    pub capacity: usize,
}

impl Population {
    pub fn new(capacity: usize) -> Population {
        Population {
            candidates: Vec::new(),
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Lowest score among feasible candidates.
    pub fn min_score(&self) -> Option<f64> {
        self.candidates
            .iter()
            .filter_map(|c| c.score.eta())
            .min_by(f64::total_cmp)
    }

    fn sort(&mut self) {
        self.candidates.sort_by(|a, b| {
            let (fa, sa, va) = a.order_key();
            let (fb, sb, vb) = b.order_key();
            fa.cmp(&fb).then(sa.total_cmp(&sb)).then(va.total_cmp(&vb))
        });
    }

    /// Keep the `capacity` best candidates under the documented order.
    fn select_top_m(&mut self) {
        self.sort();
        self.candidates.truncate(self.capacity);
    }

    /// The `capacity` best candidates without mutating the population;
    /// used to render reflection prompts from an oversized initial
    /// population.
    fn top_m_view(&self) -> Population {
        let mut view = self.clone();
        view.select_top_m();
        view
    }

    /// Persist a population (e.g. a root feature bank) as JSON.
    pub fn save(&self) -> String {
        let mut doc = serde_json::to_string_pretty(self).expect("population serializes");
        doc.push('\n');
        doc
    }

    pub fn load(doc: &str) -> Result<Population, GenError> {
        serde_json::from_str(doc)
            .map_err(|e| GenError::Rejected {
                attempts: 0,
                reason: format!("population document: {e}"),
            })
    }
}

/// One splitting condition on the path from root to a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathCondition {
    pub name: String,
    pub description: String,
    pub op: CompareOp,
    pub threshold: f64,
}

/// Everything the generator knows about the node being split.
#[derive(Debug, Clone)]
pub struct NodeContext<'a> {
    /// Conditions from root to this node, in order; length equals depth.
    pub path: Vec<PathCondition>,
    pub subset: SubsetRef<'a>,
    pub depth: usize,
}

impl NodeContext<'_> {
    /// Stable node identifier for logs: "root", "L", "LR", ...
    pub fn path_id(&self) -> String {
        if self.path.is_empty() {
            "root".to_string()
        } else {
            self.path
                .iter()
                .map(|c| if c.op == CompareOp::Le { 'L' } else { 'R' })
                .collect()
        }
    }
}

/// Natural-language description of the prediction task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskContext {
    pub description: String,
    pub feature_schema: String,
    pub dataset_size: usize,
    pub seq_len: usize,
    /// Optional site position splitting the sequence into
    /// upstream/site/downstream regions.
    pub site: Option<usize>,
}

impl TaskContext {
    pub fn new(description: impl Into<String>, dataset_size: usize, seq_len: usize) -> TaskContext {
        TaskContext {
            description: description.into(),
            feature_schema: format!("raw_sequence: text (average length: {seq_len}.0 characters)"),
            dataset_size,
            seq_len,
            site: None,
        }
    }

    pub fn with_site(mut self, site: usize) -> TaskContext {
        self.site = Some(site);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InterpretabilityMode {
    #[default]
    Standard,
    /// Interpretability constraints relaxed; structural caps raised.
    Perf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    #[default]
    None,
    /// Replace the task description with generic text.
    NoPrior,
    /// Skip all reflection iterations.
    NoRef,
}

/// Generation hyperparameters and templates.
#[derive(Debug, Clone)]
pub struct GenerationConfig {
    /// Population size M.
    pub population_size: usize,
    /// Reflection iterations K.
    pub reflections: usize,
    pub interpretability: InterpretabilityMode,
    pub ablation: Ablation,
    /// Extra samples allowed per proposal when a reply fails to parse.
    pub max_parse_retries: usize,
    pub templates: PromptTemplates,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            population_size: 10,
            reflections: 20,
            interpretability: InterpretabilityMode::Standard,
            ablation: Ablation::None,
            max_parse_retries: 2,
            templates: PromptTemplates::default(),
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.population_size < 1 {
            return Err("population_size must be >= 1".into());
        }
        Ok(())
    }

    pub fn dsl_limits(&self) -> DslLimits {
        match self.interpretability {
            InterpretabilityMode::Standard => DslLimits::standard(),
            InterpretabilityMode::Perf => DslLimits::perf(),
        }
    }

    fn interp_paragraph(&self) -> &str {
        match self.interpretability {
            InterpretabilityMode::Standard => &self.templates.interp_standard,
            InterpretabilityMode::Perf => &self.templates.interp_perf,
        }
    }

    /// Effective reflection count after ablations.
    pub fn effective_reflections(&self) -> usize {
        if self.ablation == Ablation::NoRef {
            0
        } else {
            self.reflections
        }
    }

    /// Global attempt budget used when regenerating rejected proposals.
    fn attempt_budget(&self) -> usize {
        3 * self.population_size
    }
}

/// Kind of backend exchange, recorded per transcript entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExchangeKind {
    SemInit,
    SemExplore,
    SemExploit,
    Code,
}

impl ExchangeKind {
    fn origin(self) -> Origin {
        match self {
            ExchangeKind::SemInit => Origin::LlmInit,
            ExchangeKind::SemExplore => Origin::LlmExplore,
            ExchangeKind::SemExploit => Origin::LlmExploit,
            ExchangeKind::Code => Origin::Raw, // not used
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Accepted,
    Rejected { reason: String },
    BackendError { message: String },
}

/// One backend exchange: prompt, reply, verdict, and the candidate's score
/// once known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub node_path: String,
    pub kind: ExchangeKind,
    pub prompt: String,
    pub reply: Option<String>,
    pub verdict: Verdict,
    pub score: Option<f64>,
}

/// Sample one semantic representation, retrying malformed replies up to
/// `max_parse_retries` additional times before signaling rejection.
pub fn propose_semantics(
    backend: &dyn TextBackend,
    user_prompt: &str,
    kind: ExchangeKind,
    node_path: &str,
    max_parse_retries: usize,
    records: &mut Vec<TranscriptRecord>,
) -> Result<SemanticRep, GenError> {
    let mut last_reason = String::new();
    for _ in 0..=max_parse_retries {
        let reply = match backend.chat(SYSTEM_PROMPT, user_prompt) {
            Ok(reply) => reply,
            Err(e) => {
                records.push(TranscriptRecord {
                    node_path: node_path.to_string(),
                    kind,
                    prompt: user_prompt.to_string(),
                    reply: None,
                    verdict: Verdict::BackendError {
                        message: e.to_string(),
                    },
                    score: None,
                });
                return Err(GenError::Backend(e));
            }
        };
        match parse_semantics_reply(&reply) {
            Ok(sem) => {
                records.push(TranscriptRecord {
                    node_path: node_path.to_string(),
                    kind,
                    prompt: user_prompt.to_string(),
                    reply: Some(reply),
                    verdict: Verdict::Accepted,
                    score: None,
                });
                return Ok(sem);
            }
            Err(reason) => {
                records.push(TranscriptRecord {
                    node_path: node_path.to_string(),
                    kind,
                    prompt: user_prompt.to_string(),
                    reply: Some(reply),
                    verdict: Verdict::Rejected {
                        reason: reason.clone(),
                    },
                    score: None,
                });
                last_reason = reason;
            }
        }
    }
    Err(GenError::Rejected {
        attempts: max_parse_retries + 1,
        reason: last_reason,
    })
}

/// Extract the JSON object from a reply and validate the triplet.
fn parse_semantics_reply(reply: &str) -> Result<SemanticRep, String> {
    #[derive(Deserialize)]
    struct Triplet {
        rationale: String,
        description: String,
        name: String,
    }
    let start = reply.find('{').ok_or("reply contains no JSON object")?;
    let end = reply.rfind('}').ok_or("reply contains no closing brace")?;
    if end < start {
        return Err("malformed JSON object".into());
    }
    let triplet: Triplet = serde_json::from_str(&reply[start..=end])
        .map_err(|e| format!("JSON triplet: {e}"))?;
    SemanticRep::new(triplet.rationale, triplet.name, triplet.description)
}

/// Translate a semantic representation into a validated expression,
/// retrying then rejecting as in [`propose_semantics`].
pub fn propose_expr(
    backend: &dyn TextBackend,
    sem: &SemanticRep,
    task: &TaskContext,
    cfg: &GenerationConfig,
    node_path: &str,
    records: &mut Vec<TranscriptRecord>,
) -> Result<FeatureExpr, GenError> {
    let prompt = fill(
        &cfg.templates.code,
        &[
            ("NAME", sem.name.as_str()),
            ("DESCRIPTION", sem.description.as_str()),
            (
                "TASK",
                &format!(
                    "{}The possible nucleotide values are A, C, G, T.",
                    task.render_regions()
                ),
            ),
            ("GRAMMAR", dsl::GRAMMAR_BNF.trim_end()),
        ],
    );
    let limits = cfg.dsl_limits();
    let mut last_reason = String::new();
    for _ in 0..=cfg.max_parse_retries {
        let reply = match backend.chat(SYSTEM_PROMPT, &prompt) {
            Ok(reply) => reply,
            Err(e) => {
                records.push(TranscriptRecord {
                    node_path: node_path.to_string(),
                    kind: ExchangeKind::Code,
                    prompt: prompt.clone(),
                    reply: None,
                    verdict: Verdict::BackendError {
                        message: e.to_string(),
                    },
                    score: None,
                });
                return Err(GenError::Backend(e));
            }
        };
        let outcome = parse_expr_reply(&reply, task.seq_len, limits);
        match outcome {
            Ok(expr) => {
                records.push(TranscriptRecord {
                    node_path: node_path.to_string(),
                    kind: ExchangeKind::Code,
                    prompt: prompt.clone(),
                    reply: Some(reply),
                    verdict: Verdict::Accepted,
                    score: None,
                });
                return Ok(expr);
            }
            Err(reason) => {
                records.push(TranscriptRecord {
                    node_path: node_path.to_string(),
                    kind: ExchangeKind::Code,
                    prompt: prompt.clone(),
                    reply: Some(reply),
                    verdict: Verdict::Rejected {
                        reason: reason.clone(),
                    },
                    score: None,
                });
                last_reason = reason;
            }
        }
    }
    Err(GenError::Rejected {
        attempts: cfg.max_parse_retries + 1,
        reason: last_reason,
    })
}

fn parse_expr_reply(reply: &str, seq_len: usize, limits: DslLimits) -> Result<FeatureExpr, String> {
    let mut text = reply.trim();
    if let Some(stripped) = text.strip_prefix("```") {
        let stripped = stripped.trim_start_matches(|c: char| c.is_ascii_alphanumeric());
        text = stripped.trim_end_matches('`').trim();
    }
    text = text.trim_matches('`').trim();
    let expr = dsl::parse(text).map_err(|e| format!("parse: {e}"))?;
    dsl::validate_with(&expr, seq_len, limits).map_err(|e| format!("validate: {e}"))?;
    Ok(expr)
}

fn score_candidates(pop: &mut [Candidate], subset: &SubsetRef<'_>, min_child: usize) {
    use rayon::prelude::*;
    let labels: Vec<u8> = subset.labels().collect();
    pop.par_iter_mut().for_each(|cand| {
        if cand.score.is_scored() {
            return;
        }
        let values: Vec<f64> = subset
            .sequences()
            .map(|seq| dsl::eval_expr(&cand.expr, seq))
            .collect();
        cand.score = match best_threshold(&values, &labels, min_child) {
            Some((threshold, eta)) => CandidateScore::Scored { eta, threshold },
            None => CandidateScore::Infeasible,
        };
    });
}

/// Best achievable raw-feature score at this subset, computed directly
/// from the one-hot coordinates. This is the floor the selection guarantee
/// is checked against.
pub fn best_raw_score(subset: &SubsetRef<'_>, min_child: usize) -> Option<f64> {
    use rayon::prelude::*;
    let seq_len = subset.parent().seq_len();
    let labels: Vec<u8> = subset.labels().collect();
    (0..4 * seq_len as u32)
        .into_par_iter()
        .filter_map(|j| {
            let expr = FeatureExpr::Raw { index: j };
            let values: Vec<f64> = subset
                .sequences()
                .map(|seq| dsl::eval_expr(&expr, seq))
                .collect();
            best_threshold(&values, &labels, min_child).map(|(_, eta)| eta)
        })
        .min_by(f64::total_cmp)
}

/// One full proposal: semantics, then code. On success the index of the
/// accepted code record is returned so its score can be filled in later.
fn propose_candidate(
    backend: &dyn TextBackend,
    sem_prompt: &str,
    kind: ExchangeKind,
    task: &TaskContext,
    cfg: &GenerationConfig,
    node_path: &str,
    records: &mut Vec<TranscriptRecord>,
) -> Result<(Candidate, usize), GenError> {
    let sem = propose_semantics(
        backend,
        sem_prompt,
        kind,
        node_path,
        cfg.max_parse_retries,
        records,
    )?;
    let expr = propose_expr(backend, &sem, task, cfg, node_path, records)?;
    let code_record = records.len() - 1;
    Ok((Candidate::new(expr, sem, kind.origin()), code_record))
}

/// Initialize the population: up to M accepted generated candidates
/// (rejections are re-sampled within a 3M attempt budget) plus every raw
/// one-hot coordinate, all scored on the node subset.
///
/// Transient backend failures only reduce the generated side — a
/// population containing just the raw features is valid.
pub fn init_population(
    ctx: &NodeContext<'_>,
    task: &TaskContext,
    cfg: &GenerationConfig,
    backend: &dyn TextBackend,
    min_child: usize,
    records: &mut Vec<TranscriptRecord>,
) -> Result<Population, GenError> {
    let node_path = ctx.path_id();
    let node_block = render_node_context(ctx);
    let task_block = task.render(ctx.subset.len(), cfg.ablation);
    let sem_prompt = fill(
        &cfg.templates.init,
        &[
            ("TASK", task_block.as_str()),
            ("NODE_CONTEXT", node_block.as_str()),
            ("INTERPRETABILITY", cfg.interp_paragraph().trim_end()),
        ],
    );

    let mut pop = Population::new(cfg.population_size);
    let mut score_slots: Vec<(usize, usize)> = Vec::new(); // (candidate idx, record idx)
    let mut attempts = 0;
    while pop.len() < cfg.population_size && attempts < cfg.attempt_budget() {
        attempts += 1;
        match propose_candidate(
            backend,
            &sem_prompt,
            ExchangeKind::SemInit,
            task,
            cfg,
            &node_path,
            records,
        ) {
            Ok((cand, code_record)) => {
                score_slots.push((pop.len(), code_record));
                pop.candidates.push(cand);
            }
            Err(GenError::Rejected { .. }) => continue,
            Err(GenError::Backend(e)) if e.is_transient() => continue,
            Err(other) => return Err(other),
        }
    }

    for index in 0..4 * ctx.subset.parent().seq_len() as u32 {
        pop.candidates.push(Candidate::new(
            FeatureExpr::Raw { index },
            SemanticRep::for_raw_coordinate(index),
            Origin::Raw,
        ));
    }
    score_candidates(&mut pop.candidates, &ctx.subset, min_child);
    for (cand_idx, record_idx) in score_slots {
        records[record_idx].score = pop.candidates[cand_idx].score.eta();
    }
    Ok(pop)
}

/// One reflection iteration: sample M proposals under each of the
/// exploration and exploitation instructions, score the accepted ones, and
/// keep the Top-M of old and new. The population minimum score never
/// increases.
///
/// A transient backend failure aborts the iteration: the previous
/// population is returned unchanged and the failure is logged.
pub fn reflect_once(
    pop: Population,
    ctx: &NodeContext<'_>,
    task: &TaskContext,
    cfg: &GenerationConfig,
    backend: &dyn TextBackend,
    min_child: usize,
    records: &mut Vec<TranscriptRecord>,
) -> Result<Population, GenError> {
    if pop.is_empty() {
        return Err(GenError::EmptyPopulation);
    }
    let node_path = ctx.path_id();
    let node_block = render_node_context(ctx);
    let task_block = task.render(ctx.subset.len(), cfg.ablation);
    // Prompts carry at most M blocks; only the oversized initial
    // population is wider than that.
    let population_block = render_population_prompt(&pop.top_m_view())?;

    let mut merged = pop;
    let mut new_slots: Vec<(usize, usize)> = Vec::new();
    let mut new_candidates: Vec<Candidate> = Vec::new();
    for (kind, template) in [
        (ExchangeKind::SemExplore, &cfg.templates.explore),
        (ExchangeKind::SemExploit, &cfg.templates.exploit),
    ] {
        let sem_prompt = fill(
            template,
            &[
                ("TASK", task_block.as_str()),
                ("NODE_CONTEXT", node_block.as_str()),
                ("POPULATION", population_block.as_str()),
                ("INTERPRETABILITY", cfg.interp_paragraph().trim_end()),
            ],
        );
        let mut accepted = 0;
        let mut attempts = 0;
        while accepted < cfg.population_size && attempts < cfg.attempt_budget() {
            attempts += 1;
            match propose_candidate(backend, &sem_prompt, kind, task, cfg, &node_path, records) {
                Ok((cand, code_record)) => {
                    new_slots.push((new_candidates.len(), code_record));
                    new_candidates.push(cand);
                    accepted += 1;
                }
                Err(GenError::Rejected { .. }) => continue,
                Err(GenError::Backend(e)) if e.is_transient() => {
                    // Iteration aborted; the previous population stands.
                    return Ok(merged);
                }
                Err(other) => return Err(other),
            }
        }
    }

    score_candidates(&mut new_candidates, &ctx.subset, min_child);
    for (cand_idx, record_idx) in &new_slots {
        records[*record_idx].score = new_candidates[*cand_idx].score.eta();
    }
    merged.candidates.extend(new_candidates);
    merged.select_top_m();
    Ok(merged)
}

/// Pick the final split from a population: the minimum-score feasible
/// candidate under the documented tie order, checked against the
/// independently computed raw floor.
pub fn select_split(
    pop: &Population,
    raw_best: Option<f64>,
) -> Result<Option<SplitSpec>, GenError> {
    let best = pop
        .candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.score.eta().is_some())
        .min_by(|(ia, a), (ib, b)| {
            let (_, sa, va) = a.order_key();
            let (_, sb, vb) = b.order_key();
            // Index last: exact ties keep the earliest candidate.
            sa.total_cmp(&sb).then(va.total_cmp(&vb)).then(ia.cmp(ib))
        });
    let Some((_, cand)) = best else {
        return Ok(None);
    };
    let CandidateScore::Scored { eta, threshold } = cand.score else {
        unreachable!("filtered to scored candidates");
    };
    if let Some(raw_best) = raw_best {
        if eta > raw_best + GUARANTEE_EPSILON {
            return Err(GenError::GuaranteeViolated {
                chosen: eta,
                raw_best,
            });
        }
    }
    Ok(Some(SplitSpec {
        expr: cand.expr.clone(),
        semantics: cand.semantics.clone(),
        op: CompareOp::Le,
        threshold,
        score: eta,
        origin: cand.origin,
    }))
}

/// Run the full generation loop once on the whole training set and return
/// the final population, extended with any raw features that selection
/// evicted. The result serves as a static feature bank for growth without
/// per-node adaptation.
pub fn root_feature_bank(
    train: &crate::seqdata::SequenceDataset,
    task: &TaskContext,
    cfg: &GenerationConfig,
    backend: &dyn TextBackend,
    min_child: usize,
    records: &mut Vec<TranscriptRecord>,
) -> Result<Vec<Candidate>, GenError> {
    let ctx = NodeContext {
        path: Vec::new(),
        subset: train.full_subset(),
        depth: 0,
    };
    let mut pop = init_population(&ctx, task, cfg, backend, min_child, records)?;
    for _ in 0..cfg.effective_reflections() {
        pop = reflect_once(pop, &ctx, task, cfg, backend, min_child, records)?;
    }
    let mut bank = pop.candidates;
    for index in 0..4 * train.seq_len() as u32 {
        let expr = FeatureExpr::Raw { index };
        if !bank.iter().any(|c| c.expr == expr) {
            bank.push(Candidate::new(
                expr,
                SemanticRep::for_raw_coordinate(index),
                Origin::Raw,
            ));
        }
    }
    Ok(bank)
}

/// The adaptive generator: a full init+reflect+select loop at every node.
pub struct DeftGenerator<'b> {
    pub backend: &'b dyn TextBackend,
    pub task: TaskContext,
    pub cfg: GenerationConfig,
}

impl crate::induction::FeatureGenerator for DeftGenerator<'_> {
    fn propose_split(
        &self,
        ctx: &NodeContext<'_>,
        min_child: usize,
    ) -> Result<crate::induction::SplitProposal, GenError> {
        let mut records = Vec::new();
        let mut pop = init_population(ctx, &self.task, &self.cfg, self.backend, min_child, &mut records)?;
        for _ in 0..self.cfg.effective_reflections() {
            pop = reflect_once(pop, ctx, &self.task, &self.cfg, self.backend, min_child, &mut records)?;
        }
        let raw_best = best_raw_score(&ctx.subset, min_child);
        let split = select_split(&pop, raw_best)?;
        Ok(crate::induction::SplitProposal {
            split,
            raw_best,
            transcript: records,
        })
    }
}
