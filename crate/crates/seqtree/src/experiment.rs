//! Experiment runner: config schema, seed × depth sweeps, and report
//! emission for the CLI.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl;
use crate::featgen::{
    self, root_feature_bank, Ablation, DeftGenerator, GenerationConfig, InterpretabilityMode,
    Origin, TaskContext, TranscriptRecord,
};
use crate::induction::{
    grow_tree_logged, predict, DecisionTree, FeatureGenerator, FixedBankGenerator,
    InductionConfig, Mode, Node, ProvenanceRecord, TreeError,
};
use crate::llm::{BackendParams, HttpBackend, LlmError, ScriptedBackend, TextBackend};
use crate::metrics::{compute_metrics, Metrics, MetricsError};
use crate::seqdata::{self, DataError, SequenceDataset, SynthOptions};

pub const METRICS_HEADER: &str = "seed,depth,n_train,n_test,train_accuracy,train_precision,train_recall,train_f1,train_auprc,test_accuracy,test_precision,test_recall,test_f1,test_auprc";
pub const AGGREGATE_HEADER: &str = "depth,train_accuracy_mean,train_accuracy_std,train_precision_mean,train_precision_std,train_recall_mean,train_recall_std,train_f1_mean,train_f1_std,train_auprc_mean,train_auprc_std,test_accuracy_mean,test_accuracy_std,test_precision_mean,test_precision_std,test_recall_mean,test_recall_std,test_f1_mean,test_f1_std,test_auprc_mean,test_auprc_std";
pub const HALSTEAD_HEADER: &str =
    "seed,depth,generated_splits,volume_median,difficulty_median,effort_median";
pub const PROVENANCE_HEADER: &str =
    "seed,depth,path,event,origin,name,expr,threshold,score,raw_best,leaf_reason,n,p1";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config `{path}`: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Gen(#[from] featgen::GenError),
    #[error(transparent)]
    Backend(#[from] LlmError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn config_err(path: &str, message: impl Into<String>) -> ExperimentError {
    ExperimentError::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Where the rows come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DatasetSource {
    Csv {
        path: PathBuf,
    },
    Synth {
        n: usize,
        seq_len: usize,
        motif: String,
        balance: bool,
        seed: u64,
    },
}

/// How generation talks to a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendChoice {
    None,
    Openai(BackendParams),
    Scripted { fixture: PathBuf },
}

/// A fully validated run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: DatasetSource,
    pub mode: Mode,
    pub output_dir: PathBuf,
    pub seeds: Vec<u64>,
    pub depths: Vec<usize>,
    pub test_frac: f64,
    pub min_leaf_frac: f64,
    pub label_threshold: f64,
    pub kmer_k: usize,
    pub population_size: usize,
    pub reflections: usize,
    pub interpretability: InterpretabilityMode,
    pub ablation: Ablation,
    pub max_parse_retries: usize,
    pub backend: BackendChoice,
    pub task_description: Option<String>,
    pub task_site: Option<usize>,
}

impl RunConfig {
    pub fn new(dataset: DatasetSource, mode: Mode, output_dir: impl Into<PathBuf>) -> RunConfig {
        RunConfig {
            dataset,
            mode,
            output_dir: output_dir.into(),
            seeds: vec![0],
            depths: vec![1],
            test_frac: 0.2,
            min_leaf_frac: 0.01,
            label_threshold: 0.5,
            kmer_k: 2,
            population_size: 10,
            reflections: 20,
            interpretability: InterpretabilityMode::Standard,
            ablation: Ablation::None,
            max_parse_retries: 2,
            backend: BackendChoice::None,
            task_description: None,
            task_site: None,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        match &self.dataset {
            DatasetSource::Csv { path } => {
                if path.as_os_str().is_empty() {
                    return Err(config_err("dataset.path", "must not be empty"));
                }
            }
            DatasetSource::Synth { n, seq_len, motif, .. } => {
                if *n < 2 {
                    return Err(config_err("dataset.n", "must be >= 2"));
                }
                if *seq_len == 0 {
                    return Err(config_err("dataset.seq_len", "must be >= 1"));
                }
                if motif.is_empty() || motif.len() > *seq_len {
                    return Err(config_err(
                        "dataset.motif",
                        "length must be between 1 and seq_len",
                    ));
                }
            }
        }
        if self.seeds.is_empty() {
            return Err(config_err("run.seeds", "must list at least one seed"));
        }
        if self.depths.is_empty() || self.depths.contains(&0) {
            return Err(config_err("run.depths", "must list depths >= 1"));
        }
        if !(self.test_frac > 0.0 && self.test_frac < 1.0) {
            return Err(config_err("run.test_frac", "must be strictly between 0 and 1"));
        }
        if !(self.min_leaf_frac > 0.0 && self.min_leaf_frac < 0.5) {
            return Err(config_err(
                "induction.min_leaf_frac",
                "must be strictly between 0 and 0.5",
            ));
        }
        if self.kmer_k == 0 {
            return Err(config_err("induction.kmer_k", "must be >= 1"));
        }
        if self.population_size == 0 {
            return Err(config_err("generation.population_size", "must be >= 1"));
        }
        if self.mode.needs_backend() && self.backend == BackendChoice::None {
            return Err(config_err(
                "backend.kind",
                format!("mode `{}` requires a backend", self.mode.as_str()),
            ));
        }
        if let BackendChoice::Openai(params) = &self.backend {
            params.validate().map_err(|m| config_err("backend", m))?;
        }
        Ok(())
    }

    /// Parse and validate the TOML config format documented in the README.
    pub fn from_toml(text: &str) -> Result<RunConfig, ExperimentError> {
        let file: ConfigFile =
            toml::from_str(text).map_err(|e| config_err("<config>", e.to_string()))?;
        let cfg = file.resolve()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<RunConfig, ExperimentError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        RunConfig::from_toml(&text)
    }

    fn generation_config(&self) -> GenerationConfig {
        GenerationConfig {
            population_size: self.population_size,
            reflections: self.reflections,
            interpretability: self.interpretability,
            ablation: self.ablation,
            max_parse_retries: self.max_parse_retries,
            templates: Default::default(),
        }
    }

    fn induction_config(&self, depth: usize, seed: u64) -> InductionConfig {
        let mut cfg = InductionConfig::new(self.mode, depth, seed);
        cfg.min_leaf_frac = self.min_leaf_frac;
        cfg.label_threshold = self.label_threshold;
        cfg.kmer_k = self.kmer_k;
        cfg
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    dataset: DatasetTable,
    run: RunTable,
    #[serde(default)]
    induction: InductionTable,
    #[serde(default)]
    generation: GenerationTable,
    backend: Option<BackendTable>,
    task: Option<TaskTable>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetTable {
    source: String,
    path: Option<PathBuf>,
    n: Option<usize>,
    seq_len: Option<usize>,
    motif: Option<String>,
    #[serde(default)]
    balance: bool,
    #[serde(default)]
    seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RunTable {
    mode: Mode,
    output_dir: PathBuf,
    seeds: Vec<u64>,
    depths: Vec<usize>,
    #[serde(default = "default_test_frac")]
    test_frac: f64,
}

fn default_test_frac() -> f64 {
    0.2
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct InductionTable {
    min_leaf_frac: Option<f64>,
    label_threshold: Option<f64>,
    kmer_k: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct GenerationTable {
    population_size: Option<usize>,
    reflections: Option<usize>,
    interpretability: Option<InterpretabilityMode>,
    ablation: Option<Ablation>,
    max_parse_retries: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BackendTable {
    kind: String,
    fixture: Option<PathBuf>,
    base_url: Option<String>,
    model: Option<String>,
    temperature: Option<f64>,
    top_p: Option<f64>,
    timeout_secs: Option<u64>,
    max_retries: Option<usize>,
    max_in_flight: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskTable {
    description: Option<String>,
    site: Option<usize>,
}

impl ConfigFile {
    fn resolve(self) -> Result<RunConfig, ExperimentError> {
        let dataset = match self.dataset.source.as_str() {
            "csv" => DatasetSource::Csv {
                path: self
                    .dataset
                    .path
                    .ok_or_else(|| config_err("dataset.path", "required when source = \"csv\""))?,
            },
            "synth" => DatasetSource::Synth {
                n: self
                    .dataset
                    .n
                    .ok_or_else(|| config_err("dataset.n", "required when source = \"synth\""))?,
                seq_len: self.dataset.seq_len.ok_or_else(|| {
                    config_err("dataset.seq_len", "required when source = \"synth\"")
                })?,
                motif: self.dataset.motif.ok_or_else(|| {
                    config_err("dataset.motif", "required when source = \"synth\"")
                })?,
                balance: self.dataset.balance,
                seed: self.dataset.seed,
            },
            other => {
                return Err(config_err(
                    "dataset.source",
                    format!("`{other}` is not \"csv\" or \"synth\""),
                ))
            }
        };

        let backend = match self.backend {
            None => BackendChoice::None,
            Some(table) => match table.kind.as_str() {
                "scripted" => BackendChoice::Scripted {
                    fixture: table.fixture.ok_or_else(|| {
                        config_err("backend.fixture", "required when kind = \"scripted\"")
                    })?,
                },
                "openai" => {
                    let defaults = BackendParams::default();
                    BackendChoice::Openai(BackendParams {
                        base_url: table.base_url.unwrap_or(defaults.base_url),
                        model: table.model.unwrap_or(defaults.model),
                        temperature: table.temperature.unwrap_or(defaults.temperature),
                        top_p: table.top_p.unwrap_or(defaults.top_p),
                        timeout_secs: table.timeout_secs.unwrap_or(defaults.timeout_secs),
                        max_retries: table.max_retries.unwrap_or(defaults.max_retries),
                        max_in_flight: table.max_in_flight.unwrap_or(defaults.max_in_flight),
                    })
                }
                other => {
                    return Err(config_err(
                        "backend.kind",
                        format!("`{other}` is not \"openai\" or \"scripted\""),
                    ))
                }
            },
        };

        let mut cfg = RunConfig::new(dataset, self.run.mode, self.run.output_dir);
        cfg.seeds = self.run.seeds;
        cfg.depths = self.run.depths;
        cfg.test_frac = self.run.test_frac;
        if let Some(v) = self.induction.min_leaf_frac {
            cfg.min_leaf_frac = v;
        }
        if let Some(v) = self.induction.label_threshold {
            cfg.label_threshold = v;
        }
        if let Some(v) = self.induction.kmer_k {
            cfg.kmer_k = v;
        }
        if let Some(v) = self.generation.population_size {
            cfg.population_size = v;
        }
        if let Some(v) = self.generation.reflections {
            cfg.reflections = v;
        }
        if let Some(v) = self.generation.interpretability {
            cfg.interpretability = v;
        }
        if let Some(v) = self.generation.ablation {
            cfg.ablation = v;
        }
        if let Some(v) = self.generation.max_parse_retries {
            cfg.max_parse_retries = v;
        }
        cfg.backend = backend;
        if let Some(task) = self.task {
            cfg.task_description = task.description;
            cfg.task_site = task.site;
        }
        Ok(cfg)
    }
}

/// Metrics for one (seed, depth) cell.
#[derive(Debug, Clone, Copy)]
pub struct RunRow {
    pub seed: u64,
    pub depth: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub train: Metrics,
    pub test: Metrics,
}

/// Everything a finished run produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub rows: Vec<RunRow>,
    pub output_dir: PathBuf,
    pub tree_paths: Vec<PathBuf>,
}

/// Load or synthesize the configured dataset.
pub fn load_dataset(cfg: &RunConfig) -> Result<SequenceDataset, ExperimentError> {
    match &cfg.dataset {
        DatasetSource::Csv { path } => Ok(seqdata::load_csv(path)?),
        DatasetSource::Synth {
            n,
            seq_len,
            motif,
            balance,
            seed,
        } => Ok(seqdata::synth_motif(
            *n,
            *seq_len,
            motif,
            *balance,
            *seed,
            SynthOptions::default(),
        )?),
    }
}

fn task_context(cfg: &RunConfig, train: &SequenceDataset) -> TaskContext {
    let description = cfg.task_description.clone().unwrap_or_else(|| {
        format!(
            "This is a binary classification dataset over DNA sequences named {}.",
            train.name()
        )
    });
    let mut task = TaskContext::new(description, train.len(), train.seq_len());
    if let Some(site) = cfg.task_site {
        task = task.with_site(site);
    }
    task
}

/// Predict every row and score against the labels.
pub fn evaluate_tree(tree: &DecisionTree, ds: &SequenceDataset) -> Result<Metrics, ExperimentError> {
    let mut p1s = Vec::with_capacity(ds.len());
    for row in 0..ds.len() {
        let (p1, _) = predict(tree, ds.sequence(row))?;
        p1s.push(p1);
    }
    Ok(compute_metrics(&p1s, ds.labels())?)
}

enum BuiltGenerator<'b> {
    Fixed(FixedBankGenerator),
    Deft(Box<DeftGenerator<'b>>),
}

impl BuiltGenerator<'_> {
    fn as_dyn(&self) -> &dyn FeatureGenerator {
        match self {
            BuiltGenerator::Fixed(g) => g,
            BuiltGenerator::Deft(g) => g.as_ref(),
        }
    }
}

/// Run the configured sweep and write all reports under `output_dir`.
///
/// Layout: `trees/seed{S}_depth{D}.tree.json`, `metrics.csv`,
/// `aggregate.csv`, `halstead.csv`, `provenance.csv`,
/// `resolved_config.json`, `stacking_energy.tsv`, and (for backend modes)
/// `transcripts/seed{S}_depth{D}.jsonl`.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunOutcome, ExperimentError> {
    cfg.validate()?;
    let ds = load_dataset(cfg)?;

    let out = &cfg.output_dir;
    let trees_dir = out.join("trees");
    std::fs::create_dir_all(&trees_dir).map_err(io_err(&trees_dir))?;

    // Cart modes never construct a backend client.
    let backend: Option<Box<dyn TextBackend>> = if cfg.mode.needs_backend() {
        Some(match &cfg.backend {
            BackendChoice::Scripted { fixture } => Box::new(ScriptedBackend::load(fixture)?),
            BackendChoice::Openai(params) => Box::new(HttpBackend::new(params.clone())?),
            BackendChoice::None => unreachable!("validate() rejects this"),
        })
    } else {
        None
    };
    if backend.is_some() {
        let dir = out.join("transcripts");
        std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    }

    let mut rows = Vec::new();
    let mut tree_paths = Vec::new();
    let mut halstead_csv = format!("{HALSTEAD_HEADER}\n");
    let mut provenance = csv::Writer::from_writer(Vec::new());
    provenance
        .write_record(PROVENANCE_HEADER.split(','))
        .expect("header record");

    for &seed in &cfg.seeds {
        let (train, test) = seqdata::train_test_split(&ds, cfg.test_frac, seed)?;
        let task = task_context(cfg, &train);
        let gen_cfg = cfg.generation_config();

        // The root bank for no-adapt mode is built once per seed and
        // reused across depths.
        let no_adapt_bank: Option<Vec<_>> = if cfg.mode == Mode::DeftNoAdapt {
            let backend = backend.as_deref().expect("validated");
            let min_child = root_min_child(cfg, train.len());
            let mut records = Vec::new();
            let bank = root_feature_bank(&train, &task, &gen_cfg, backend, min_child, &mut records)?;
            write_transcript(out, &format!("seed{seed}_bank"), &records)?;
            Some(
                bank.into_iter()
                    .map(|c| (c.expr, c.semantics, c.origin))
                    .collect(),
            )
        } else {
            None
        };

        for &depth in &cfg.depths {
            let icfg = cfg.induction_config(depth, seed);
            let generator = match cfg.mode {
                Mode::CartOnehot => {
                    BuiltGenerator::Fixed(FixedBankGenerator::one_hot_bank(train.seq_len()))
                }
                Mode::CartKmer => BuiltGenerator::Fixed(FixedBankGenerator::kmer_bank(
                    train.seq_len(),
                    cfg.kmer_k,
                )),
                Mode::Deft => BuiltGenerator::Deft(Box::new(DeftGenerator {
                    backend: backend.as_deref().expect("validated"),
                    task: task.clone(),
                    cfg: gen_cfg.clone(),
                })),
                Mode::DeftNoAdapt => {
                    // Growth over the fixed bank issues no backend calls.
                    let bank = no_adapt_bank.as_ref().expect("built above");
                    BuiltGenerator::Fixed(FixedBankGenerator::new(bank.clone()))
                }
            };

            let (tree, transcript) = grow_tree_logged(&train, &icfg, generator.as_dyn())?;
            if cfg.mode == Mode::Deft {
                write_transcript(out, &format!("seed{seed}_depth{depth}"), &transcript)?;
            }

            let tree_path = trees_dir.join(format!("seed{seed}_depth{depth}.tree.json"));
            crate::induction::save_tree_to(&tree, &tree_path)?;
            tree_paths.push(tree_path);

            let train_metrics = evaluate_tree(&tree, &train)?;
            let test_metrics = evaluate_tree(&tree, &test)?;
            rows.push(RunRow {
                seed,
                depth,
                n_train: train.len(),
                n_test: test.len(),
                train: train_metrics,
                test: test_metrics,
            });

            append_halstead_row(&mut halstead_csv, seed, depth, &tree);
            append_provenance_rows(&mut provenance, seed, depth, &tree);
        }
    }

    write_reports(cfg, out, &rows, &halstead_csv, provenance)?;
    Ok(RunOutcome {
        rows,
        output_dir: out.clone(),
        tree_paths,
    })
}

fn root_min_child(cfg: &RunConfig, n_train: usize) -> usize {
    ((cfg.min_leaf_frac * n_train as f64).ceil() as usize).max(1)
}

fn write_transcript(
    out: &Path,
    label: &str,
    records: &[TranscriptRecord],
) -> Result<(), ExperimentError> {
    let path = out.join("transcripts").join(format!("{label}.jsonl"));
    let mut text = String::new();
    for record in records {
        text.push_str(&serde_json::to_string(record).expect("record serializes"));
        text.push('\n');
    }
    std::fs::write(&path, text).map_err(io_err(&path))
}

fn fmt_f64(v: f64) -> String {
    // Shortest round-trip decimal; full precision per the report contract.
    format!("{v}")
}

fn append_halstead_row(csv: &mut String, seed: u64, depth: usize, tree: &DecisionTree) {
    let mut volumes = Vec::new();
    let mut difficulties = Vec::new();
    let mut efforts = Vec::new();
    tree.visit(|_, node| {
        if let Node::Internal { split, .. } = node {
            if split.origin != Origin::Raw {
                let m = dsl::complexity(&split.expr);
                volumes.push(m.volume);
                difficulties.push(m.difficulty);
                efforts.push(m.effort);
            }
        }
    });
    let fmt_med = |vals: &[f64]| dsl::median(vals).map(fmt_f64).unwrap_or_default();
    let _ = writeln!(
        csv,
        "{seed},{depth},{},{},{},{}",
        volumes.len(),
        fmt_med(&volumes),
        fmt_med(&difficulties),
        fmt_med(&efforts),
    );
}

fn append_provenance_rows(
    writer: &mut csv::Writer<Vec<u8>>,
    seed: u64,
    depth: usize,
    tree: &DecisionTree,
) {
    // Join the provenance log with the per-node split details.
    let mut splits = std::collections::HashMap::new();
    tree.visit(|path, node| {
        if let Node::Internal { split, .. } = node {
            splits.insert(path.to_string(), split.clone());
        }
    });
    for record in &tree.meta.provenance {
        let row: Vec<String> = match record {
            ProvenanceRecord::Split {
                path,
                origin,
                score,
                raw_best,
                n,
            } => {
                let split = &splits[path];
                vec![
                    seed.to_string(),
                    depth.to_string(),
                    display_path(path),
                    "split".into(),
                    format!("{origin:?}").to_lowercase(),
                    split.semantics.name.clone(),
                    split.expr.to_string(),
                    fmt_f64(split.threshold),
                    fmt_f64(*score),
                    raw_best.map(fmt_f64).unwrap_or_default(),
                    String::new(),
                    n.to_string(),
                    String::new(),
                ]
            }
            ProvenanceRecord::Leaf {
                path,
                reason,
                n,
                p1,
            } => vec![
                seed.to_string(),
                depth.to_string(),
                display_path(path),
                "leaf".into(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                format!("{reason:?}").to_lowercase(),
                n.to_string(),
                fmt_f64(*p1),
            ],
        };
        writer.write_record(&row).expect("provenance record");
    }
}

fn display_path(path: &str) -> String {
    if path.is_empty() {
        "root".to_string()
    } else {
        path.to_string()
    }
}

fn write_reports(
    cfg: &RunConfig,
    out: &Path,
    rows: &[RunRow],
    halstead_csv: &str,
    provenance: csv::Writer<Vec<u8>>,
) -> Result<(), ExperimentError> {
    let mut metrics_csv = format!("{METRICS_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            metrics_csv,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.seed,
            r.depth,
            r.n_train,
            r.n_test,
            fmt_f64(r.train.accuracy),
            fmt_f64(r.train.precision),
            fmt_f64(r.train.recall),
            fmt_f64(r.train.f1),
            fmt_f64(r.train.auprc),
            fmt_f64(r.test.accuracy),
            fmt_f64(r.test.precision),
            fmt_f64(r.test.recall),
            fmt_f64(r.test.f1),
            fmt_f64(r.test.auprc),
        );
    }

    let mut aggregate_csv = format!("{AGGREGATE_HEADER}\n");
    let mut depths: Vec<usize> = rows.iter().map(|r| r.depth).collect();
    depths.sort_unstable();
    depths.dedup();
    for depth in depths {
        let cells: Vec<&RunRow> = rows.iter().filter(|r| r.depth == depth).collect();
        let mut line = depth.to_string();
        for metric in [
            |m: &Metrics| m.accuracy,
            |m: &Metrics| m.precision,
            |m: &Metrics| m.recall,
            |m: &Metrics| m.f1,
            |m: &Metrics| m.auprc,
        ] {
            let values: Vec<f64> = cells.iter().map(|r| metric(&r.train)).collect();
            let (mean, std) = mean_std(&values);
            let _ = write!(line, ",{},{}", fmt_f64(mean), fmt_f64(std));
        }
        for metric in [
            |m: &Metrics| m.accuracy,
            |m: &Metrics| m.precision,
            |m: &Metrics| m.recall,
            |m: &Metrics| m.f1,
            |m: &Metrics| m.auprc,
        ] {
            let values: Vec<f64> = cells.iter().map(|r| metric(&r.test)).collect();
            let (mean, std) = mean_std(&values);
            let _ = write!(line, ",{},{}", fmt_f64(mean), fmt_f64(std));
        }
        aggregate_csv.push_str(&line);
        aggregate_csv.push('\n');
    }

    let write = |name: &str, content: &str| -> Result<(), ExperimentError> {
        let path = out.join(name);
        std::fs::write(&path, content).map_err(io_err(&path))
    };
    write("metrics.csv", &metrics_csv)?;
    write("aggregate.csv", &aggregate_csv)?;
    write("halstead.csv", halstead_csv)?;
    let provenance_bytes = provenance.into_inner().expect("in-memory writer");
    write(
        "provenance.csv",
        std::str::from_utf8(&provenance_bytes).expect("provenance is UTF-8"),
    )?;
    // Every run echoes its resolved config and the energy table it used.
    let mut cfg_json = serde_json::to_string_pretty(cfg).expect("config serializes");
    cfg_json.push('\n');
    write("resolved_config.json", &cfg_json)?;
    write("stacking_energy.tsv", dsl::stacking_energy_table_text())?;
    Ok(())
}

/// Mean and sample standard deviation (0 for a single value).
fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Human-readable tree rendering: one block per node, with the split
/// name, threshold, expression, and leaf probabilities.
pub fn inspect_tree(tree: &DecisionTree) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "dataset: {}  (seq_len {}, mode {}, max_depth {})",
        tree.meta.dataset,
        tree.meta.seq_len,
        tree.meta.config.mode.as_str(),
        tree.meta.config.max_depth
    );
    let _ = writeln!(
        out,
        "internal nodes: {}  leaves: {}",
        tree.root.internal_count(),
        tree.root.leaf_count()
    );
    fn rec(node: &Node, label: &str, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        match node {
            Node::Leaf { p1, n } => {
                let _ = writeln!(out, "{pad}{label} leaf p1={p1:.3} (n={n})");
            }
            Node::Internal { split, left, right } => {
                let _ = writeln!(
                    out,
                    "{pad}{label} {} <= {:.3}  [{}, score {}]",
                    split.semantics.name,
                    split.threshold,
                    match split.origin {
                        Origin::Raw => "raw",
                        Origin::LlmInit => "generated:init",
                        Origin::LlmExplore => "generated:explore",
                        Origin::LlmExploit => "generated:exploit",
                    },
                    featgen::format_score(split.score),
                );
                let _ = writeln!(out, "{pad}    {}", split.semantics.description);
                let _ = writeln!(out, "{pad}    expr: {}", split.expr);
                rec(left, "[<=]", indent + 1, out);
                rec(right, "[> ]", indent + 1, out);
            }
        }
    }
    rec(&tree.root, "[root]", 0, &mut out);
    out
}

/// Complexity table for a tree document: one row per internal node plus
/// medians over the generated (non-raw) splits.
pub fn halstead_report(tree: &DecisionTree) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<40} {:>10} {:>12} {:>10}", "feature", "volume", "difficulty", "effort");
    let mut volumes = Vec::new();
    let mut difficulties = Vec::new();
    let mut efforts = Vec::new();
    tree.visit(|_, node| {
        if let Node::Internal { split, .. } = node {
            let m = dsl::complexity(&split.expr);
            let _ = writeln!(
                out,
                "{:<40} {:>10.3} {:>12.3} {:>10.3}",
                split.semantics.name, m.volume, m.difficulty, m.effort
            );
            if split.origin != Origin::Raw {
                volumes.push(m.volume);
                difficulties.push(m.difficulty);
                efforts.push(m.effort);
            }
        }
    });
    match dsl::median(&volumes) {
        Some(v) => {
            let _ = writeln!(
                out,
                "{:<40} {:>10.3} {:>12.3} {:>10.3}",
                format!("median over {} generated splits", volumes.len()),
                v,
                dsl::median(&difficulties).unwrap(),
                dsl::median(&efforts).unwrap()
            );
        }
        None => {
            let _ = writeln!(out, "no generated splits (all splits are raw features)");
        }
    }
    out
}
