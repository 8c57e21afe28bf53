use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use qhtree::cost::{self, DesignParams};
use qhtree::data::{self, DatasetSchema};
use qhtree::eval::{self, LearnerOptions};
use qhtree::power::{self, TraceSet, TuningConstraints};
use qhtree::synth::{self, SynthKind};
use qhtree::{HyperParams, ObserverMode};

#[derive(Parser)]
#[command(name = "qhtree", version, about = "Streaming decision trees with quantile sketches")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Min-max scale numeric attributes into [-1, 1].
    Normalize(NormalizeArgs),
    /// Prequential (test-then-train) run over a CSV stream.
    Train(TrainArgs),
    /// One prequential run per quantile count.
    Sweep(SweepArgs),
    /// Write a synthetic labelled stream.
    Synth(SynthArgs),
    /// Evaluate the analytical latency, throughput and resource models.
    Cost(CostArgs),
    /// Cluster power traces, rank signals and emit a tree configuration.
    PowerFlow(PowerFlowArgs),
}

#[derive(Args)]
struct NormalizeArgs {
    #[arg(long)]
    schema: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Input has a header row (also written to the output).
    #[arg(long)]
    header: bool,
}

#[derive(Args, Clone)]
struct LearnerArgs {
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    header: bool,
    #[arg(long, default_value_t = 200)]
    nmin: u64,
    #[arg(long, default_value_t = 10)]
    split_points: usize,
    #[arg(long, default_value_t = 0.05)]
    tau: f64,
    #[arg(long, default_value_t = 1e-3)]
    delta: f64,
    #[arg(long, default_value_t = 0.01)]
    lambda: f64,
    #[arg(long, default_value_t = 15)]
    max_depth: usize,
    #[arg(long, default_value_t = 1024)]
    max_leaves: usize,
    #[arg(long, default_value_t = 1024)]
    elements: usize,
    /// Emulate the Q2.30 datapath.
    #[arg(long)]
    fixed_point: bool,
    #[arg(long, default_value_t = eval::DEFAULT_CURVE_INTERVAL)]
    curve_interval: u64,
}

impl LearnerArgs {
    fn options(&self, mode: ObserverMode, quantiles: usize) -> LearnerOptions {
        LearnerOptions {
            mode,
            hp: HyperParams {
                n_min: self.nmin,
                split_points: self.split_points,
                tau: self.tau,
                delta: self.delta,
                lambda: self.lambda,
                quantiles,
                max_depth: self.max_depth,
                max_leaves: self.max_leaves,
                elements: self.elements,
                ..HyperParams::default()
            },
            fixed_point: self.fixed_point,
            curve_interval: self.curve_interval,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    learner: LearnerArgs,
    #[arg(long, default_value = "quantile")]
    observer: ObserverMode,
    #[arg(long, default_value_t = 8)]
    quantiles: usize,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Accuracy curve CSV.
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Write the final tree in text form.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    learner: LearnerArgs,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32,64,128,256,512")]
    quantiles: Vec<usize>,
    /// Also run the Gaussian observer and print its accuracy.
    #[arg(long)]
    baseline: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    kind: SynthKind,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    schema_out: Option<PathBuf>,
    #[arg(long)]
    header: bool,
}

#[derive(Args)]
struct CostArgs {
    /// JSON file with design parameters; flags override its fields.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    labels: Option<u64>,
    #[arg(long)]
    numeric: Option<u64>,
    #[arg(long)]
    categorical: Option<u64>,
    /// Value counts of categorical attributes, e.g. `2x44` or `3,17`.
    #[arg(long)]
    values: Option<String>,
    #[arg(long)]
    quantiles: Option<u64>,
    #[arg(long)]
    elements: Option<u64>,
    #[arg(long)]
    depth: Option<u64>,
    /// Clock frequency in MHz.
    #[arg(long)]
    freq: Option<f64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    cold_start: Option<f64>,
    /// Solve the cold-start cycles from a measured execution time in ms.
    #[arg(long, value_name = "MS")]
    fit_cold_start: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PowerFlowArgs {
    #[arg(long)]
    traces: PathBuf,
    /// Inclusive k range `lo:hi`.
    #[arg(long, default_value = "2:5")]
    k_range: String,
    #[arg(long, default_value_t = 8)]
    n_max: u64,
    #[arg(long, default_value_t = 5)]
    l_max: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Write the relabelled, signal-reduced training stream.
    #[arg(long)]
    data_out: Option<PathBuf>,
    #[arg(long)]
    schema_out: Option<PathBuf>,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Normalize(a) => normalize(a),
        Command::Train(a) => train(a),
        Command::Sweep(a) => sweep(a),
        Command::Synth(a) => synth_cmd(a),
        Command::Cost(a) => cost_cmd(a),
        Command::PowerFlow(a) => power_flow(a),
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn normalize(a: NormalizeArgs) -> Result<()> {
    let schema = DatasetSchema::load(&a.schema)?;
    let samples = data::read_csv(&a.input, &schema, a.header)?;
    let (samples, stats) = data::normalize(&schema, samples);
    data::write_csv(&a.out, &schema, &samples, a.header)?;
    if let Some(path) = a.stats {
        write_json(&path, &stats)?;
    }
    log::info!("normalized {} rows", samples.len());
    Ok(())
}

fn train(a: TrainArgs) -> Result<()> {
    let l = &a.learner;
    let schema = DatasetSchema::load(&l.schema)?;
    let opts = l.options(a.observer, a.quantiles);
    let stream = data::parse_csv(&l.data, &schema, l.header)?;
    let (report, tree) = eval::run_prequential(&schema, stream, &opts)?;
    println!(
        "accuracy {:.4} over {} samples, {} splits ({} bound, {} tie), {} leaves, depth {}",
        report.accuracy,
        report.samples_seen,
        report.splits,
        report.splits_by_bound,
        report.splits_by_tie,
        report.leaves,
        report.depth
    );
    if let Some(p) = &a.report {
        report.write_json(p)?;
    }
    if let Some(p) = &a.curve {
        report.write_curve_csv(p)?;
    }
    if let Some(p) = &a.dump {
        std::fs::write(p, tree.dump()).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let l = &a.learner;
    let schema = DatasetSchema::load(&l.schema)?;
    let samples = data::read_csv(&l.data, &schema, l.header)?;
    let opts = l.options(ObserverMode::Quantile, 8);
    let rows = eval::sweep_quantiles(&schema, &samples, &opts, &a.quantiles);
    match &a.out {
        Some(p) => {
            let file = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            let mut w = BufWriter::new(file);
            eval::write_sweep_csv(&rows, &mut w)?;
            w.flush()?;
        }
        None => eval::write_sweep_csv(&rows, std::io::stdout().lock())?,
    }
    if a.baseline {
        let g = eval::evaluate(&schema, &samples, &l.options(ObserverMode::Gaussian, 8))?;
        println!("gaussian,{:.6},", g.accuracy);
    }
    Ok(())
}

fn synth_cmd(a: SynthArgs) -> Result<()> {
    let (schema, samples) = synth::gen_synthetic(a.kind, a.n, a.seed)?;
    data::write_csv(&a.out, &schema, &samples, a.header)?;
    if let Some(p) = a.schema_out {
        std::fs::write(&p, schema.to_json()).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn cost_cmd(a: CostArgs) -> Result<()> {
    let mut p = match &a.params {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).context("parsing design parameters")?
        }
        None => DesignParams::default(),
    };
    if let Some(v) = a.labels {
        p.labels = v;
    }
    if let Some(v) = a.numeric {
        p.numeric = v;
    }
    if let Some(v) = &a.values {
        p.values = cost::parse_values(v)?;
        p.categorical = p.values.len() as u64;
    }
    if let Some(v) = a.categorical {
        p.categorical = v;
    }
    if let Some(v) = a.quantiles {
        p.quantiles = v;
    }
    if let Some(v) = a.elements {
        p.elements = v;
    }
    if let Some(v) = a.depth {
        p.depth = v;
    }
    if let Some(v) = a.freq {
        p.freq_mhz = v;
    }
    if let Some(v) = a.samples {
        p.samples = v;
    }
    if let Some(v) = a.cold_start {
        p.cold_start_cycles = v;
    }
    if let Some(ms) = a.fit_cold_start {
        p.cold_start_cycles = cost::fit_cold_start(&p, ms * 1e-3);
        println!("fitted cold start {:.0} cycles", p.cold_start_cycles);
    }
    let report = cost::report(&p)?;
    println!("{report}");
    if let Some(path) = &a.out {
        write_json(path, &report)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct RunConfig {
    observer: ObserverMode,
    fixed_point: bool,
    hyper_params: HyperParams,
}

#[derive(Serialize)]
struct ModelConfig {
    k: usize,
    centers: Vec<f64>,
    silhouette: Vec<power::KScore>,
    signals: Vec<String>,
    ranking: Vec<String>,
    constraints: TuningConstraints,
    check: power::ConstraintReport,
    run_config: RunConfig,
}

fn parse_range(s: &str) -> Result<(usize, usize)> {
    let Some((lo, hi)) = s.split_once(':') else {
        bail!("k range must look like lo:hi, got '{s}'");
    };
    Ok((lo.trim().parse()?, hi.trim().parse()?))
}

fn power_flow(a: PowerFlowArgs) -> Result<()> {
    let (lo, hi) = parse_range(&a.k_range)?;
    let constraints = TuningConstraints {
        max_numeric: a.n_max,
        max_labels: a.l_max,
        ..TuningConstraints::default()
    };
    let traces = TraceSet::read_csv(&a.traces)?;
    let sel = power::select_k(&traces.power, lo, hi, &constraints, a.seed)?;
    let labeled = power::relabel_traces(&traces, &sel.clustering)?;
    let ranking = power::rank_attributes(&labeled, &constraints);
    let hp = HyperParams {
        quantiles: constraints.quantiles as usize,
        elements: constraints.elements as usize,
        max_depth: constraints.max_depth as usize,
        ..HyperParams::default()
    };
    let design = DesignParams {
        labels: sel.k as u64,
        numeric: ranking.selected.len() as u64,
        quantiles: constraints.quantiles,
        elements: constraints.elements,
        depth: constraints.max_depth,
        ..DesignParams::default()
    };
    let check = power::check_constraints(&design, &constraints);
    if !check.pass {
        log::warn!("hardware constraints violated: {}", check.violations.join(", "));
    }
    println!(
        "k={} centers={:?} signals={:?} bram {:.1}%",
        sel.k,
        sel.clustering.centers,
        ranking.selected,
        check.bram_fraction * 100.0
    );
    if a.data_out.is_some() || a.schema_out.is_some() {
        let (schema, samples) = labeled.select(&ranking.selected)?.to_stream()?;
        if let Some(p) = &a.data_out {
            data::write_csv(p, &schema, &samples, true)?;
        }
        if let Some(p) = &a.schema_out {
            std::fs::write(p, schema.to_json()).with_context(|| format!("writing {}", p.display()))?;
        }
    }
    let config = ModelConfig {
        k: sel.k,
        centers: sel.clustering.centers.clone(),
        silhouette: sel.scores,
        signals: ranking.selected,
        ranking: ranking.order,
        constraints,
        check,
        run_config: RunConfig {
            observer: ObserverMode::Quantile,
            fixed_point: false,
            hyper_params: hp,
        },
    };
    write_json(&a.out, &config)
}
