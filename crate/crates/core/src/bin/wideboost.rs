use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use wideboost::beta::{BetaKind, BetaSpec};
use wideboost::booster::{load_model, save_model, train, BoostParams};
use wideboost::dataset::{load_path, Dataset, LabelSpec, SplitSpec, Task};
use wideboost::harness::{self, catalog, synthetic, Benchmark, SearchMode, SearchSpace};
use wideboost::metrics::{self, format_sig6, MetricKind};
use wideboost::objective::LossKind;
use wideboost::tree::TreeParams;
use wideboost::Error;

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(name = "wideboost", version, about = "Wide gradient boosted trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model and write it as JSON.
    Train(TrainArgs),
    /// Write raw scores (or labels) for every row of a data file.
    Predict(PredictArgs),
    /// Score a model on a labelled data file.
    Eval(EvalArgs),
    /// Train once per output width and record per-round test metrics.
    Sweep(SweepArgs),
    /// Random hyperparameter search, wide or standard.
    Tune(TuneArgs),
    /// List benchmark sources, or check a local file against one.
    Datasets(DatasetsArgs),
    /// Write a synthetic titanic- or adult-format CSV.
    Synth(SynthArgs),
}

#[derive(Args)]
struct DataArgs {
    /// CSV or LibSVM (.svm/.libsvm) file.
    #[arg(long)]
    data: PathBuf,
    /// Label column: a header name, a 0-based index, or "last".
    #[arg(long, default_value = "last")]
    label: String,
    /// The CSV has no header row.
    #[arg(long)]
    no_header: bool,
}

impl DataArgs {
    fn load(&self, task: Task) -> CliResult<Dataset> {
        let label: LabelSpec = self.label.parse()?;
        Ok(load_path(&self.data, &label, task, !self.no_header)?)
    }

    fn name(&self) -> String {
        self.data
            .file_stem()
            .map_or_else(|| "data".to_string(), |s| s.to_string_lossy().into_owned())
    }
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long, default_value_t = 0.2)]
    test_fraction: f64,
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
}

impl SplitArgs {
    fn spec(&self) -> SplitSpec {
        SplitSpec::new(self.test_fraction, self.split_seed)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    task: Task,
    /// Defaults to the loss matching the task.
    #[arg(long)]
    loss: Option<LossKind>,
    /// Output width; defaults to the label dimension.
    #[arg(long)]
    q: Option<usize>,
    #[arg(long, default_value = "I")]
    beta_kind: BetaKind,
    #[arg(long, default_value_t = 0)]
    beta_seed: u64,
    #[arg(long, default_value_t = 100)]
    rounds: usize,
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    #[arg(long, default_value_t = 6)]
    max_depth: usize,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    min_child_weight: f64,
    #[arg(long, default_value_t = 1)]
    min_samples_leaf: usize,
    #[arg(long, default_value_t = 0.0)]
    base_score: f64,
    /// Optional evaluation file, scored after every round.
    #[arg(long)]
    eval: Option<PathBuf>,
    #[arg(long)]
    model: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Same layout as the training file, label column included.
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    out: PathBuf,
    /// Write class labels instead of raw scores.
    #[arg(long)]
    labels: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// error, rmse or logloss; defaults to the task's comparison metric.
    #[arg(long)]
    metric: Option<MetricKind>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    task: Task,
    #[arg(long, value_delimiter = ',', default_value = "7,8,9,10,20")]
    widths: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    rounds: usize,
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    #[arg(long, default_value_t = 2)]
    max_depth: usize,
    #[arg(long, default_value_t = 0)]
    beta_seed: u64,
    /// Use this β kind at every width instead of R below d and I above.
    #[arg(long)]
    beta_kind: Option<BetaKind>,
    #[command(flatten)]
    split: SplitArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    task: Task,
    /// wb, gb, or budgeted (wide search followed by a tree-budget-matched
    /// standard search).
    #[arg(long, default_value = "wb")]
    mode: String,
    #[arg(long, default_value_t = 30)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    rounds: usize,
    /// Tuning metric; defaults to the task's comparison metric.
    #[arg(long)]
    metric: Option<MetricKind>,
    /// Repeat the search with consecutive seeds and report min/mean.
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[command(flatten)]
    split: SplitArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DatasetsArgs {
    /// Catalog name to verify a local file against.
    #[arg(long, requires = "data")]
    verify: Option<String>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value = "last")]
    label: String,
    #[arg(long)]
    no_header: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// titanic or adult
    #[arg(long)]
    kind: String,
    #[arg(long)]
    rows: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn run_train(args: TrainArgs) -> CliResult<()> {
    let data = args.data.load(args.task)?;
    let loss = args.loss.unwrap_or_else(|| LossKind::for_task(args.task));
    let d = data.label_dim();
    let params = BoostParams {
        rounds: args.rounds,
        learning_rate: args.eta,
        tree: TreeParams {
            max_depth: args.max_depth,
            min_child_weight: args.min_child_weight,
            lambda: args.lambda,
            gamma: args.gamma,
            min_samples_leaf: args.min_samples_leaf,
        },
        beta: BetaSpec::new(args.beta_kind, args.q.unwrap_or(d), d, args.beta_seed),
        loss,
        base_score: args.base_score,
    };
    let eval = match &args.eval {
        Some(path) => {
            let label: LabelSpec = args.data.label.parse()?;
            Some(load_path(path, &label, args.task, !args.data.no_header)?)
        }
        None => None,
    };
    let (model, trace) = train(&data, &params, eval.as_ref())?;
    save_model(&model, &args.model)?;
    println!(
        "trained {} rounds x {} trees; final training loss {}",
        model.rounds(),
        model.width(),
        format_sig6(*trace.train_loss.last().expect("initial loss recorded"))
    );
    if let (Some(metric), Some(v)) = (trace.metric, trace.final_value()) {
        println!("eval {metric} {}", format_sig6(v));
    }
    Ok(())
}

fn run_predict(args: PredictArgs) -> CliResult<()> {
    let model = load_model(&args.model)?;
    let data = args.data.load(model.task())?;
    let mut out = String::new();
    if args.labels {
        out.push_str("label\n");
        for label in model.predict_labels(data.features().view())? {
            out.push_str(&format!("{label}\n"));
        }
    } else {
        let scores = model.predict(data.features().view())?;
        let header: Vec<String> = (0..scores.ncols()).map(|k| format!("score_{k}")).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in scores.rows() {
            let cells: Vec<String> = row.iter().map(f64::to_string).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
    }
    fs::write(&args.out, out)?;
    Ok(())
}

fn run_eval(args: EvalArgs) -> CliResult<()> {
    let model = load_model(&args.model)?;
    let data = args.data.load(model.task())?;
    let kind = args.metric.unwrap_or_else(|| MetricKind::for_task(model.task()));
    let scores = model.predict(data.features().view())?;
    let report = metrics::evaluate(kind, scores.view(), &data)?;
    println!("{report}");
    Ok(())
}

fn run_sweep(args: SweepArgs) -> CliResult<()> {
    let data = args.data.load(args.task)?;
    let bench = Benchmark::split(args.data.name(), &data, &args.split.spec())?;
    let mut params = harness::sweep_params(LossKind::for_task(args.task), data.label_dim(), args.rounds);
    params.learning_rate = args.eta;
    params.tree.max_depth = args.max_depth;
    params.beta.seed = args.beta_seed;
    let report = harness::width_sweep(&bench, &args.widths, &params, args.beta_kind)?;
    for p in &report.points {
        println!(
            "q={:<4} beta={:<4} final {} {}",
            p.q,
            p.beta_kind.to_string(),
            report.metric,
            p.final_metric.map_or_else(|| "-".into(), format_sig6)
        );
    }
    write_json(&args.out, &report)
}

fn print_report(report: &harness::ExperimentReport) {
    match &report.best {
        Some(best) => println!(
            "{} {}: best {} {} (q={}, beta={}, round {})",
            report.dataset,
            report.mode,
            report.metric,
            best.best_metric.map_or_else(|| "-".into(), format_sig6),
            best.config.q,
            best.config.beta_kind,
            best.best_round.unwrap_or(0)
        ),
        None => println!("{} {}: every trial failed", report.dataset, report.mode),
    }
    if let Some(p) = report.pct_improvement {
        println!("improvement of wide over standard: {p:.1}%");
    }
}

fn run_tune(args: TuneArgs) -> CliResult<()> {
    let mode: SearchMode = args.mode.parse()?;
    let data = args.data.load(args.task)?;
    let bench = Benchmark::split(args.data.name(), &data, &args.split.spec())?;
    let space = SearchSpace {
        metric: args.metric,
        ..SearchSpace::with_rounds(args.rounds)
    };
    if args.repeats > 1 {
        let mode = if mode == SearchMode::BudgetedGb { SearchMode::Gb } else { mode };
        let summary = harness::repeat_search(&bench, &space, args.trials, args.seed, mode, args.repeats)?;
        println!(
            "{} {} over {} repeats: min {} mean {}",
            summary.dataset,
            summary.mode,
            args.repeats,
            summary.min.map_or_else(|| "-".into(), format_sig6),
            summary.mean.map_or_else(|| "-".into(), format_sig6)
        );
        return write_json(&args.out, &summary);
    }
    let report = match mode {
        SearchMode::Wb => harness::compare(&bench, &space, args.trials, args.seed)?.0,
        SearchMode::Gb => harness::random_search(&bench, &space, args.trials, args.seed, SearchMode::Gb)?,
        SearchMode::BudgetedGb => {
            let wb = harness::random_search(&bench, &space, args.trials, args.seed, SearchMode::Wb)?;
            print_report(&wb);
            let best = wb
                .best
                .ok_or_else(|| Error::InvalidInput("every wide trial failed".into()))?;
            harness::budgeted_gb(&bench, &best, &space, args.trials, args.seed)?
        }
    };
    print_report(&report);
    write_json(&args.out, &report)
}

fn run_datasets(args: DatasetsArgs) -> CliResult<()> {
    match (args.verify, args.data) {
        (Some(name), Some(path)) => {
            let entry = catalog::lookup(&name)
                .ok_or_else(|| Error::InvalidParam(format!("unknown dataset '{name}'")))?;
            let label: LabelSpec = args.label.parse()?;
            let data = load_path(&path, &label, entry.task, !args.no_header)?;
            let check = catalog::verify(entry, &data);
            println!(
                "{}: {} features ({} source columns), {} outputs; expected {} and {}",
                check.name,
                check.encoded_features,
                check.source_columns,
                check.outputs,
                check.expected_features,
                check.expected_outputs
            );
            if !check.ok {
                return Err(Box::new(Error::InvalidDataset(format!(
                    "{} does not match the expected shape",
                    path.display()
                ))));
            }
            println!("ok");
        }
        _ => {
            for e in catalog::CATALOG {
                println!(
                    "{:<14} {:<10} p={:<4} d={:<3} rounds={:<4} {}",
                    e.name,
                    e.task.to_string(),
                    e.features,
                    e.outputs,
                    e.rounds,
                    e.url
                );
            }
        }
    }
    Ok(())
}

fn run_synth(args: SynthArgs) -> CliResult<()> {
    let text = match args.kind.as_str() {
        "titanic" => synthetic::titanic_csv(args.rows, args.seed),
        "adult" => synthetic::adult_csv(args.rows, args.seed),
        other => {
            return Err(Box::new(Error::InvalidParam(format!(
                "unknown synthetic kind '{other}'"
            ))))
        }
    };
    fs::write(&args.out, text)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => run_train(a),
        Command::Predict(a) => run_predict(a),
        Command::Eval(a) => run_eval(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Tune(a) => run_tune(a),
        Command::Datasets(a) => run_datasets(a),
        Command::Synth(a) => run_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
