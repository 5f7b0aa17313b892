mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use graphgen::canonize::{canonize, CanonizeOptions, DEFAULT_FRONTIER_CAP};
use graphgen::codec::VocabSpec;
use graphgen::datagen::{parse_dataset, rwr_sample, split_dataset, write_gspan, DatasetFormat, ParseMode, RwrConfig};
use graphgen::graph::{augment_labels, strip_augmentation};
use graphgen::metrics::evaluate;
use graphgen::model::{generate_graphs, load_checkpoint, save_checkpoint, Checkpoint, Trainer};
use graphgen::{InvariantSpec, LabeledGraph};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "graphgen", version, about = "Train generative models over labeled graph databases")]
struct Cli {
    /// Seed for every random stage; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More log output (-v debug, -vv trace).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the minimum DFS code of every graph in a dataset.
    Canonize(CanonizeArgs),
    /// Split a dataset, train a model and write its checkpoint.
    Train(TrainArgs),
    /// Sample graphs from a trained checkpoint.
    Generate(GenerateArgs),
    /// Compare generated graphs against reference and training graphs.
    Evaluate(EvaluateArgs),
    /// Draw random-walk-with-restart subgraphs from large graphs.
    SampleSubgraphs(SampleArgs),
    /// Prefix node labels with vertex invariants.
    Augment(AugmentArgs),
}

#[derive(Args)]
struct InvariantArgs {
    /// Prefix node labels with their degree.
    #[arg(long)]
    degree: bool,
    /// Prefix node labels with their clustering coefficient.
    #[arg(long)]
    clustering: bool,
    #[arg(long, default_value_t = 2)]
    cc_decimals: usize,
}

impl InvariantArgs {
    fn spec(&self) -> InvariantSpec {
        InvariantSpec { use_degree: self.degree, use_clustering_coefficient: self.clustering, cc_decimals: self.cc_decimals }
    }
}

#[derive(Args)]
struct CanonizeArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Print per-graph search expansion counts to stderr.
    #[arg(long)]
    stats: bool,
    #[arg(long, default_value_t = DEFAULT_FRONTIER_CAP)]
    frontier_cap: usize,
    #[command(flatten)]
    invariants: InvariantArgs,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Dataset path; overrides [data] path.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output directory; overrides [output] dir.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Continue from the checkpoint in the output directory.
    #[arg(long)]
    resume: bool,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Number of graphs; defaults to [generate] count.
    #[arg(short)]
    n: Option<usize>,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(short, long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    generated: PathBuf,
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    training: PathBuf,
    /// Directory receiving metrics.json and metrics.csv.
    #[arg(short, long)]
    output: PathBuf,
    #[arg(short, long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Subgraphs per input graph.
    #[arg(long, default_value_t = 1)]
    samples: usize,
    #[arg(long, default_value_t = 0.15)]
    restart: f64,
    #[arg(long, default_value_t = 150)]
    iterations: usize,
}

#[derive(Args)]
struct AugmentArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    invariants: InvariantArgs,
}

/// Contents of `vocab.json` next to a checkpoint.
#[derive(Serialize, Deserialize)]
struct VocabFile {
    invariants: InvariantSpec,
    vocab: VocabSpec,
}

fn read_graphs(path: &Path, mode: ParseMode) -> Result<Vec<LabeledGraph>> {
    if !path.exists() {
        bail!("dataset {} does not exist", path.display());
    }
    parse_dataset(path, DatasetFormat::GSpan, mode).with_context(|| format!("reading {}", path.display()))
}

/// Writes to `path`, or to stdout without one.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Write-then-rename so an interrupted run never leaves a partial file.
fn replace_file(path: &Path, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    write(&tmp)?;
    fs::rename(&tmp, path).with_context(|| format!("replacing {}", path.display()))
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    cfg.apply_env(std::env::vars())?;
    if let Some(s) = seed {
        cfg.train.seed = s;
        cfg.split_seed = s;
        cfg.eval.seed = s;
    }
    Ok(cfg)
}

fn cmd_canonize(args: &CanonizeArgs) -> Result<()> {
    let graphs = read_graphs(&args.input, ParseMode::Strict)?;
    let spec = args.invariants.spec();
    let opts = CanonizeOptions { frontier_cap: args.frontier_cap };
    let results: Vec<_> = graphs.par_iter().map(|g| canonize(&augment_labels(g, &spec), &opts)).collect();
    let mut text = String::new();
    let mut stats = String::from("graph\tnodes\tedges\texpansions\tmax_frontier\n");
    for (i, (g, r)) in graphs.iter().zip(results).enumerate() {
        let c = r.with_context(|| format!("graph {i}"))?;
        text.push_str(&format!("t # {i}\n{}", c.code));
        stats.push_str(&format!("{i}\t{}\t{}\t{}\t{}\n", g.node_count(), g.edge_count(), c.expansions, c.max_frontier));
    }
    if args.stats {
        eprint!("{stats}");
    }
    emit(args.output.as_deref(), &text)
}

fn cmd_train(args: &TrainArgs, seed: Option<u64>) -> Result<()> {
    let mut cfg = load_config(args.config.as_deref(), seed)?;
    if let Some(d) = &args.data {
        cfg.dataset = Some(d.clone());
    }
    if let Some(o) = &args.output {
        cfg.output = o.clone();
    }
    let data = cfg.dataset.clone().context("no dataset given ([data] path or --data)")?;
    let graphs = read_graphs(&data, cfg.parse_mode)?;
    let split = split_dataset(&graphs, cfg.split, cfg.split_seed)?;
    info!("{} graphs: {} train, {} valid, {} test", graphs.len(), split.train.len(), split.valid.len(), split.test.len());

    let out = &cfg.output;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for (name, part) in [("train.txt", &split.train), ("valid.txt", &split.valid), ("test.txt", &split.test)] {
        emit(Some(&out.join(name)), &write_gspan(part)?)?;
    }

    let inv = cfg.invariants;
    let train: Vec<_> = split.train.iter().map(|g| augment_labels(g, &inv)).collect();
    let valid: Vec<_> = split.valid.iter().map(|g| augment_labels(g, &inv)).collect();
    let ckpt_path = out.join("model.ckpt");
    let mut trainer = if args.resume {
        if !ckpt_path.exists() {
            bail!("cannot resume: {} does not exist", ckpt_path.display());
        }
        let ckpt = load_checkpoint::<f64>(&ckpt_path)?;
        let t = Trainer::resume(ckpt, &train, &valid, &cfg.train)?;
        info!("resuming after epoch {}", t.history.last_epoch());
        t
    } else {
        Trainer::<f64>::new(&train, &valid, &cfg.train)?
    };
    let vocab = VocabFile { invariants: inv, vocab: trainer.model.vocab.clone() };
    emit(Some(&out.join("vocab.json")), &(serde_json::to_string_pretty(&vocab)? + "\n"))?;
    info!("{} parameters, vocabulary width {}", trainer.model.network.parameter_count(), vocab.vocab.k());

    let save = |c: &Checkpoint<f64>| replace_file(&ckpt_path, |p| Ok(save_checkpoint(c, p)?));
    while !trainer.is_done() {
        let r = trainer.run_epoch()?;
        if r.epoch % 10 == 0 {
            info!("epoch {}: train {:.6} valid {:.6}", r.epoch, r.train_loss, r.valid_loss);
        }
        save(&trainer.checkpoint())?;
        replace_file(&out.join("history.csv"), |p| Ok(fs::write(p, trainer.history.to_csv())?))?;
    }
    let ckpt = trainer.checkpoint();
    save(&ckpt)?;
    let h = &trainer.history;
    emit(Some(&out.join("history.csv")), &h.to_csv())?;
    info!("finished after {} epochs, best epoch {}", h.last_epoch(), h.best_epoch);
    Ok(())
}

fn cmd_generate(args: &GenerateArgs, seed: Option<u64>) -> Result<()> {
    let cfg = load_config(args.config.as_deref(), None)?;
    let ckpt = load_checkpoint::<f64>(&args.checkpoint).with_context(|| format!("loading {}", args.checkpoint.display()))?;
    let model = ckpt.model;
    let vocab_path = args.checkpoint.with_file_name("vocab.json");
    let inv = if vocab_path.exists() {
        let text = fs::read_to_string(&vocab_path)?;
        let v: VocabFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", vocab_path.display()))?;
        if v.vocab != model.vocab {
            bail!("{} does not match the checkpoint vocabulary", vocab_path.display());
        }
        v.invariants
    } else {
        warn!("no vocab.json next to the checkpoint; labels are written as sampled");
        InvariantSpec::default()
    };
    let n = args.n.unwrap_or(cfg.gen_count);
    let max_len = args.max_len.or(cfg.gen_max_len).unwrap_or(model.max_len);
    let mut graphs = generate_graphs(&model, n, max_len, seed.unwrap_or(0))?;
    for g in &mut graphs {
        for v in 0..g.node_count() {
            let l = strip_augmentation(g.label(v), &inv).to_string();
            g.set_label(v, l);
        }
    }
    info!("generated {} graphs", graphs.len());
    emit(Some(&args.output), &write_gspan(&graphs)?)
}

fn cmd_evaluate(args: &EvaluateArgs, seed: Option<u64>) -> Result<()> {
    let cfg = load_config(args.config.as_deref(), seed)?;
    let generated = read_graphs(&args.generated, ParseMode::Strict)?;
    let reference = read_graphs(&args.reference, ParseMode::Strict)?;
    let training = read_graphs(&args.training, ParseMode::Strict)?;
    let report = evaluate(&generated, &reference, &training, &cfg.eval)?;
    fs::create_dir_all(&args.output).with_context(|| format!("creating {}", args.output.display()))?;
    emit(Some(&args.output.join("metrics.json")), &(report.to_json()? + "\n"))?;
    emit(Some(&args.output.join("metrics.csv")), &report.to_csv())
}

fn cmd_sample(args: &SampleArgs, seed: Option<u64>) -> Result<()> {
    let graphs = read_graphs(&args.input, ParseMode::Strict)?;
    let seed = seed.unwrap_or(0);
    let mut out = Vec::new();
    for (i, g) in graphs.iter().enumerate() {
        let cfg = RwrConfig {
            restart: args.restart,
            iterations: args.iterations,
            samples: args.samples,
            seed: seed.wrapping_add(i as u64),
        };
        out.extend(rwr_sample(g, &cfg).with_context(|| format!("graph {i}"))?);
    }
    emit(args.output.as_deref(), &write_gspan(&out)?)
}

fn cmd_augment(args: &AugmentArgs) -> Result<()> {
    let graphs = read_graphs(&args.input, ParseMode::Strict)?;
    let spec = args.invariants.spec();
    let out: Vec<_> = graphs.iter().map(|g| augment_labels(g, &spec)).collect();
    emit(args.output.as_deref(), &write_gspan(&out)?)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    match &cli.command {
        Command::Canonize(a) => cmd_canonize(a),
        Command::Train(a) => cmd_train(a, cli.seed),
        Command::Generate(a) => cmd_generate(a, cli.seed),
        Command::Evaluate(a) => cmd_evaluate(a, cli.seed),
        Command::SampleSubgraphs(a) => cmd_sample(a, cli.seed),
        Command::Augment(a) => cmd_augment(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).format_timestamp(None).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
