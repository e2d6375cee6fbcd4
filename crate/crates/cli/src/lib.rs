//! The `qaoa` command line: graph tools, single runs, experiment grids and
//! reports.

mod report;

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use qaoa_core::gradient::Backend;
use qaoa_core::graph::{enumerate_connected_graphs, min_vertex_covers};
use qaoa_core::harness::{
    self, read_csv_file, write_csv, CellKey, ExperimentConfig, ExperimentKind, RunOptions,
};
use qaoa_core::optimizers::Method;
use qaoa_core::simulator::NoiseModel;
use qaoa_core::{Graph, PenaltyWeights};

pub use report::{render_report, ReportFormat, ReportKind, ReportOutput, ReportSpec};

/// Seed used by `run` when none is given.
pub const DEMO_SEED: u64 = 20_240_101;

#[derive(Debug, Parser)]
#[command(name = "qaoa", version, about = "QAOA benchmarks for minimum vertex cover")]
pub struct Cli {
    /// Master seed; required for `experiment`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Parallel worker cap; defaults to all cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output file or directory, depending on the command.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate or solve graphs.
    #[command(subcommand)]
    Graphs(GraphsCommand),
    /// Optimize one QAOA instance and print its record.
    Run(RunArgs),
    /// Execute an experiment config.
    Experiment(ExperimentArgs),
    /// Summarize a results CSV as CSV and SVG.
    Report(ReportArgs),
}

#[derive(Debug, Subcommand)]
pub enum GraphsCommand {
    /// Write one edge-list file per connected graph on N vertices.
    Enumerate {
        #[arg(long)]
        n: usize,
    },
    /// Print the minimum cover size and all optimal covers.
    Solve { file: PathBuf },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Edge-list graph file.
    pub file: PathBuf,
    #[arg(long)]
    pub depth: usize,
    #[arg(long)]
    pub optimizer: String,
    #[arg(long)]
    pub backend: String,
    #[arg(long, default_value_t = 2000)]
    pub shots: u64,
    /// Noise calibration file; defaults to the built-in device-class values.
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    /// Evaluation budget; defaults to the experiment default for the backend.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Penalty weight on uncovered edges.
    #[arg(long, default_value_t = 2.0)]
    pub a: f64,
    /// Weight on cover size.
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    pub config: PathBuf,
    /// Continue an interrupted run in the same output directory.
    #[arg(long)]
    pub resume: bool,
    /// Stop after this many new cells (the run can be resumed).
    #[arg(long)]
    pub max_cells: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Results CSV produced by `experiment`.
    pub records: PathBuf,
    #[arg(long, value_enum)]
    pub kind: ReportKind,
    /// Comma-separated grouping keys (graph, depth, optimizer, backend).
    #[arg(long, value_delimiter = ',')]
    pub group_by: Vec<String>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Both)]
    pub format: ReportFormat,
}

/// A failed command: message for stderr and the exit status.
#[derive(Debug)]
pub struct Failure {
    pub message: String,
    pub code: i32,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure {
            message: e.to_string(),
            code: 1,
        }
    }
}

type CmdResult = Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command.
/// Returns the exit status.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> CmdResult {
    match &cli.command {
        Command::Graphs(GraphsCommand::Enumerate { n }) => cmd_enumerate(cli, *n, stdout),
        Command::Graphs(GraphsCommand::Solve { file }) => cmd_solve(file, stdout),
        Command::Run(args) => cmd_run(cli, args, stdout),
        Command::Experiment(args) => cmd_experiment(cli, args, stdout),
        Command::Report(args) => cmd_report(cli, args, stdout),
    }
}

fn cmd_enumerate(cli: &Cli, n: usize, stdout: &mut dyn Write) -> CmdResult {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("graphs"));
    std::fs::create_dir_all(&dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let graphs = enumerate_connected_graphs(n)?;
    let width = graphs.len().to_string().len().max(2);
    for (i, g) in graphs.iter().enumerate() {
        let path = dir.join(format!("n{n}-{i:0width$}.txt"));
        g.write_file(&path)?;
    }
    writeln!(stdout, "wrote {} graphs to {}", graphs.len(), dir.display())?;
    Ok(())
}

fn cmd_solve(file: &Path, stdout: &mut dyn Write) -> CmdResult {
    let g = Graph::read_file(file)?;
    let sol = min_vertex_covers(&g)?;
    let covers: Vec<String> = sol.covers.iter().map(|c| c.to_string()).collect();
    writeln!(stdout, "size={}, covers={}", sol.size, covers.join(","))?;
    Ok(())
}

/// A one-cell optimizer comparison built from the flags, so that single
/// runs share seeding and record layout with experiments.
fn cmd_run(cli: &Cli, args: &RunArgs, stdout: &mut dyn Write) -> CmdResult {
    let method: Method = args.optimizer.parse()?;
    let backend: Backend = args.backend.parse()?;
    let weights = PenaltyWeights::new(args.a, args.b)?;
    let graph = Graph::read_file(&args.file)?;
    let noise = match &args.calibration {
        Some(p) => NoiseModel::load(p)?,
        None => NoiseModel::default(),
    };
    let id = args
        .file
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "graph".into());
    let mut budgets = harness::Budgets::default();
    if let Some(b) = args.budget {
        budgets.statevector = b;
        budgets.shots = b;
        budgets.noisy = b;
    }
    let cfg = ExperimentConfig {
        kind: ExperimentKind::SuccessProbability,
        graphs: vec![harness::NamedGraph {
            id: id.clone(),
            graph,
        }],
        depths: vec![args.depth],
        optimizers: Vec::new(),
        backends: vec![backend],
        shots: args.shots,
        trials: 1,
        weights,
        calibration: args.calibration.clone(),
        noise,
        master_seed: None,
        budgets,
        noisy_optimizer: method,
        exact_optimizer: method,
        hyperparams: Default::default(),
        record_wall_time: false,
        content_hash: String::new(),
    };
    let key = CellKey {
        graph_id: id,
        depth: args.depth,
        optimizer: method,
        backend,
        trial: 0,
    };
    let record = harness::run_cell(&cfg, &key, cli.seed.unwrap_or(DEMO_SEED))?;
    writeln!(
        stdout,
        "graph={} depth={} optimizer={} backend={} seed={}",
        record.graph_id, record.depth, record.optimizer, record.backend, record.seed
    )?;
    writeln!(stdout, "final_expectation={}", record.final_expectation)?;
    if let Some(p) = record.success_prob {
        writeln!(stdout, "success_prob={p}")?;
    }
    writeln!(stdout, "evals_used={}", record.evals_used)?;
    let params: Vec<String> = record.params.iter().map(|v| v.to_string()).collect();
    writeln!(stdout, "params={}", params.join(","))?;

    if let Some(path) = &cli.out {
        let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
        let mut buf = Vec::new();
        write_csv(&mut buf, std::slice::from_ref(&record), false)?;
        let text = String::from_utf8(buf)?;
        let body = if fresh {
            text.as_str()
        } else {
            text.split_once('\n').map_or("", |(_, rest)| rest)
        };
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| format!("{}: {e}", path.display()))?;
        f.write_all(body.as_bytes())?;
    }
    Ok(())
}

fn cmd_experiment(cli: &Cli, args: &ExperimentArgs, stdout: &mut dyn Write) -> CmdResult {
    let Some(seed) = cli.seed else {
        return Err(Failure {
            message: "experiment mode needs an explicit --seed".into(),
            code: 2,
        });
    };
    let cfg = ExperimentConfig::load(&args.config)?;
    let out = cli.out.clone().unwrap_or_else(|| {
        let stem = args
            .config
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "experiment".into());
        PathBuf::from("results").join(stem)
    });
    let opts = RunOptions {
        master_seed: Some(seed),
        jobs: cli.jobs,
        resume: args.resume,
        max_cells: args.max_cells,
    };
    let outcome = harness::run_experiment(&cfg, Some(&out), &opts)?;
    let total = harness::plan_cells(&cfg).len();
    writeln!(
        stdout,
        "{}: {} of {} cells done ({} computed now)",
        cfg.kind,
        outcome.records.len(),
        total,
        outcome.computed
    )?;
    if !outcome.complete {
        return Err(Failure {
            message: format!(
                "run incomplete; rerun with --resume and --out {} to finish",
                out.display()
            ),
            code: 3,
        });
    }
    writeln!(stdout, "results: {}", out.join(harness::RESULTS_FILE).display())?;
    Ok(())
}

fn cmd_report(cli: &Cli, args: &ReportArgs, stdout: &mut dyn Write) -> CmdResult {
    let records = read_csv_file(&args.records)?;
    let group_by = args
        .group_by
        .iter()
        .map(|s| s.parse())
        .collect::<Result<Vec<_>, _>>()?;
    let spec = ReportSpec {
        kind: args.kind,
        group_by,
        format: args.format,
    };
    let output = render_report(&records, &spec)?;
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("report"));
    std::fs::create_dir_all(&dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let stem = args.kind.file_stem();
    if let Some(csv) = &output.csv {
        let path = dir.join(format!("{stem}.csv"));
        std::fs::write(&path, csv).map_err(|e| format!("{}: {e}", path.display()))?;
        writeln!(stdout, "wrote {}", path.display())?;
    }
    if let Some(svg) = &output.svg {
        let path = dir.join(format!("{stem}.svg"));
        std::fs::write(&path, svg).map_err(|e| format!("{}: {e}", path.display()))?;
        writeln!(stdout, "wrote {}", path.display())?;
    }
    Ok(())
}

impl ReportKind {
    fn file_stem(self) -> &'static str {
        match self {
            ReportKind::BoxplotTable => "boxplot_table",
            ReportKind::DepthCurve => "depth_curve",
            ReportKind::SuccessCurve => "success_curve",
        }
    }
}
