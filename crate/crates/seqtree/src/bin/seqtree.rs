//! Command-line interface: dataset synthesis, training sweeps, prediction,
//! evaluation, and tree inspection.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use seqtree::experiment::{self, RunConfig};
use seqtree::induction::load_tree_from;
use seqtree::metrics::compute_metrics;
use seqtree::seqdata::{self, SynthOptions};

#[derive(Parser)]
#[command(name = "seqtree", version, about = "Decision trees over DNA sequences with generated split features")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic motif-presence dataset CSV.
    Synth(SynthArgs),
    /// Run a training sweep from a TOML config file.
    Train(TrainArgs),
    /// Apply a tree document to a dataset CSV, writing p1,label rows.
    Predict(PredictArgs),
    /// Score a predictions CSV against a labeled dataset CSV.
    Eval(EvalArgs),
    /// Render a tree document as human-readable text.
    Inspect(TreeArg),
    /// Complexity table for the features used by a tree document.
    Halstead(TreeArg),
}

#[derive(Args)]
struct SynthArgs {
    /// Motif whose presence defines the positive class.
    #[arg(long)]
    motif: String,
    /// Number of sequences.
    #[arg(long)]
    n: usize,
    /// Sequence length.
    #[arg(long = "len")]
    seq_len: usize,
    /// Rejection-sample so class counts differ by at most one.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    balance: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// TOML run configuration (see README for the key schema).
    #[arg(short, long)]
    config: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Tree document produced by `train`.
    #[arg(long)]
    tree: PathBuf,
    /// Input CSV with a raw_sequence column (label optional).
    #[arg(long)]
    data: PathBuf,
    /// Output CSV path for p1,label rows.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Predictions CSV from `predict`.
    #[arg(long)]
    preds: PathBuf,
    /// Labeled dataset CSV the predictions were made on, in the same row
    /// order.
    #[arg(long)]
    data: PathBuf,
}

#[derive(Args)]
struct TreeArg {
    #[arg(long)]
    tree: PathBuf,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Synth(args) => synth(args),
        Command::Train(args) => train(args),
        Command::Predict(args) => predict(args),
        Command::Eval(args) => eval(args),
        Command::Inspect(args) => {
            let tree = load_tree_from(&args.tree)?;
            print!("{}", experiment::inspect_tree(&tree));
            Ok(())
        }
        Command::Halstead(args) => {
            let tree = load_tree_from(&args.tree)?;
            print!("{}", experiment::halstead_report(&tree));
            Ok(())
        }
    }
}

fn synth(args: SynthArgs) -> Result<()> {
    let ds = seqdata::synth_motif(
        args.n,
        args.seq_len,
        &args.motif,
        args.balance,
        args.seed,
        SynthOptions::default(),
    )?;
    ds.save_csv(&args.output)?;
    let ones: usize = ds.labels().iter().map(|&l| l as usize).sum();
    println!(
        "wrote {} rows ({} positive, {} negative) to {}",
        ds.len(),
        ones,
        ds.len() - ones,
        args.output.display()
    );
    Ok(())
}

fn train(args: TrainArgs) -> Result<()> {
    let cfg = RunConfig::from_toml_file(&args.config)
        .with_context(|| format!("loading {}", args.config.display()))?;
    let outcome = experiment::run_experiment(&cfg)?;
    for row in &outcome.rows {
        println!(
            "seed {} depth {}: train {} | test {}",
            row.seed,
            row.depth,
            row.train.display_line(),
            row.test.display_line()
        );
    }
    println!("reports written to {}", outcome.output_dir.display());
    Ok(())
}

fn predict(args: PredictArgs) -> Result<()> {
    let tree = load_tree_from(&args.tree)?;
    let ds = seqdata::load_csv_sequences(&args.data)?;
    let mut out = String::from("p1,label\n");
    for seq in &ds {
        let (p1, label) = seqtree::induction::predict(&tree, seq)?;
        out.push_str(&format!("{p1},{label}\n"));
    }
    std::fs::write(&args.output, out)
        .with_context(|| format!("writing {}", args.output.display()))?;
    println!("wrote {} predictions to {}", ds.len(), args.output.display());
    Ok(())
}

fn eval(args: EvalArgs) -> Result<()> {
    let data = seqdata::load_csv(&args.data)?;
    let preds = load_predictions(&args.preds)?;
    if preds.len() != data.len() {
        bail!(
            "predictions ({}) and dataset ({}) row counts differ",
            preds.len(),
            data.len()
        );
    }
    let metrics = compute_metrics(&preds, data.labels())?;
    println!("{}", metrics.display_line());
    Ok(())
}

fn load_predictions(path: &PathBuf) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let p1_col = headers
        .iter()
        .position(|h| h == "p1")
        .context("predictions CSV needs a `p1` column")?;
    let mut p1s = Vec::new();
    for record in reader.records() {
        let record = record?;
        let value: f64 = record
            .get(p1_col)
            .unwrap_or("")
            .parse()
            .context("p1 values must be numbers")?;
        p1s.push(value);
    }
    Ok(p1s)
}
