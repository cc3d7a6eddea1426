//! `jbgnn` command-line tool.
//!
//! Every subcommand prints one JSON object on stdout. Diagnostics go to
//! stderr. Exit status is 0 on success, 1 for bad input and 2 when the
//! numerics break down.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jbgnn::data::{read_dataset, read_labels, write_assignments, write_dataset, write_report, DatasetBundle};
use jbgnn::graph::{sbm_generate, SbmConfig};
use jbgnn::metrics::{acc, nmi, nmi_with, LabelVector, NmiNorm};
use jbgnn::model::{bench_steps, hard_assign, train, ModelConfig};
use jbgnn::{Error, LossKind};
use serde_json::{json, Value};

/// Untimed steps before `bench` starts measuring.
const BENCH_WARMUP: usize = 10;

#[derive(Parser)]
#[command(name = "jbgnn", version, about = "Balance-only GNN graph clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a clustering model on a dataset directory.
    Train(TrainArgs),
    /// Score predicted cluster labels against ground truth.
    Eval(EvalArgs),
    /// Time full optimization steps.
    Bench(BenchArgs),
    /// Write a stochastic block model dataset.
    Sbm(SbmArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Number of clusters.
    #[arg(long)]
    k: usize,
    #[arg(long, default_value = "jb")]
    loss: LossKind,
    /// Propagation strength in [0, 1].
    #[arg(long, default_value_t = 0.85, value_parser = unit_interval)]
    delta: f64,
    #[arg(long, default_value_t = 10, value_parser = at_least_one)]
    mp_layers: usize,
    #[arg(long, default_value_t = 64, value_parser = at_least_one)]
    mp_channels: usize,
    #[arg(long, default_value_t = 16, value_parser = at_least_one)]
    mlp_channels: usize,
    #[arg(long, default_value_t = 1, value_parser = at_least_one)]
    mlp_hidden: usize,
    #[arg(long, default_value_t = 5e-5, value_parser = positive)]
    lr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// L1-normalize each feature row before training.
    #[arg(long)]
    row_normalize_features: bool,
    /// Use A - ddᵀ instead of A - ddᵀ/2E in the DMoN loss.
    #[arg(long)]
    dmon_literal: bool,
}

impl ModelArgs {
    fn config(&self, epochs: usize) -> ModelConfig {
        ModelConfig {
            delta: self.delta,
            mp_layers: self.mp_layers,
            mp_channels: self.mp_channels,
            mlp_hidden_layers: self.mlp_hidden,
            mlp_channels: self.mlp_channels,
            k: self.k,
            lr: self.lr,
            epochs,
            loss: self.loss,
            seed: self.seed,
            dmon_normalize: !self.dmon_literal,
            row_normalize_features: self.row_normalize_features,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Canonical dataset directory.
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 2000)]
    epochs: usize,
    /// Write hard cluster labels here, one per line.
    #[arg(long)]
    out_assignments: Option<PathBuf>,
    /// Write the JSON training report here.
    #[arg(long)]
    out_report: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value = "arithmetic")]
    nmi_norm: NmiNorm,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 100, value_parser = at_least_one)]
    steps: usize,
}

#[derive(Args)]
struct SbmArgs {
    #[arg(long, value_parser = at_least_one)]
    blocks: usize,
    /// Nodes per block.
    #[arg(long, value_parser = at_least_one)]
    size: usize,
    #[arg(long, value_parser = unit_interval)]
    p_in: f64,
    #[arg(long, value_parser = unit_interval)]
    p_out: f64,
    #[arg(long, value_parser = at_least_one)]
    feature_dim: usize,
    /// Standard deviation of the feature noise.
    #[arg(long)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} is not a positive number"))
    }
}

fn at_least_one(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".to_string()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn cmd_train(args: TrainArgs) -> jbgnn::Result<Value> {
    let bundle = read_dataset(&args.data)?;
    let config = args.model.config(args.epochs);
    let (s, report) = train(&bundle.graph, &bundle.features, &config, bundle.labels.as_ref())?;
    let pred = hard_assign(&s);
    if let Some(path) = &args.out_assignments {
        write_assignments(&pred, path)?;
    }
    if let Some(path) = &args.out_report {
        write_report(&report, path)?;
    }
    let mut out = json!({
        "loss_kind": report.loss_kind,
        "epochs": report.loss.len(),
        "final_loss": report.final_loss(),
        "seconds_per_step": report.seconds_per_step,
        "total_seconds": report.total_seconds,
    });
    if let Some(labels) = &bundle.labels {
        out["acc"] = json!(acc(labels, &pred)?);
        out["nmi"] = json!(nmi(labels, &pred)?);
    }
    Ok(out)
}

fn cmd_eval(args: EvalArgs) -> jbgnn::Result<Value> {
    let pred = LabelVector::from_labels(read_labels(&args.pred)?);
    let truth = LabelVector::from_labels(read_labels(&args.labels)?);
    Ok(json!({
        "acc": acc(&truth, &pred)?,
        "nmi": nmi_with(&truth, &pred, args.nmi_norm)?,
        "n": truth.len(),
    }))
}

fn cmd_bench(args: BenchArgs) -> jbgnn::Result<Value> {
    let bundle = read_dataset(&args.data)?;
    let config = args.model.config(0);
    let timing = bench_steps(&bundle.graph, &bundle.features, &config, BENCH_WARMUP, args.steps)?;
    Ok(serde_json::to_value(timing).expect("timing serializes"))
}

fn cmd_sbm(args: SbmArgs) -> jbgnn::Result<Value> {
    let config = SbmConfig {
        feature_dim: args.feature_dim,
        noise_sigma: args.noise,
        seed: args.seed,
        ..SbmConfig::uniform(args.blocks, args.size, args.p_in, args.p_out)
    };
    let (graph, features, labels) = sbm_generate(&config)?;
    let bundle = DatasetBundle::new("sbm", graph, features, Some(labels), args.blocks)?;
    write_dataset(&bundle, &args.out)?;
    Ok(serde_json::to_value(&bundle.meta).expect("meta serializes"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Sbm(a) => cmd_sbm(a),
    };
    match result {
        Ok(value) => {
            println!("{value}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("jbgnn: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_input() {
        1
    } else {
        2
    }
}
