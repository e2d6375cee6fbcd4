//! Seeded, resumable experiment grids.
//!
//! A run expands an [`ExperimentConfig`] into cells (graph, depth,
//! optimizer, backend, trial), optimizes each cell independently on a
//! worker pool and appends every finished record to a JSON-lines journal.
//! Rerunning with `resume` skips journaled cells. Once the grid is
//! complete the records are written as CSV in grid order, next to a
//! metadata sidecar holding the config hash and code version.

mod config;
mod record;
mod stats;

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradient::{parameter_shift_grad, Backend, QaoaObjective};
use crate::optimizers::{minimize, FnGradient, GradientOracle, Method, OptimizerConfig};
use crate::seed;
use crate::simulator::QaoaParams;

pub use config::{Budgets, ExperimentConfig, ExperimentKind, GraphSource, NamedGraph};
pub use record::{read_csv, read_csv_file, write_csv, CellKey, RunRecord, CSV_HEADER};
pub use stats::{aggregate, GroupKey, GroupSummary, GroupValues, Stats};

pub const RESULTS_FILE: &str = "results.csv";
pub const JOURNAL_FILE: &str = "records.jsonl";
pub const META_FILE: &str = "meta.json";

/// Execution knobs that do not change the results.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Master seed; must agree with the config's `master_seed` when both
    /// are given, and one of them is required.
    pub master_seed: Option<u64>,
    /// Worker threads; `None` uses all available cores.
    pub jobs: Option<usize>,
    /// Continue from an existing journal in the output directory.
    pub resume: bool,
    /// Stop after computing this many new cells, leaving the run
    /// incomplete, as an interruption would.
    pub max_cells: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// All records known so far, in grid order.
    pub records: Vec<RunRecord>,
    /// Cells computed by this invocation.
    pub computed: usize,
    /// Whether every cell of the grid has a record.
    pub complete: bool,
}

/// Contents of the metadata sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub version: String,
    pub kind: ExperimentKind,
    pub config_hash: String,
    pub master_seed: u64,
    pub cells: usize,
    pub completed: usize,
    pub complete: bool,
}

/// Per-trial seed from the cell coordinates.
pub fn trial_seed(master: u64, key: &CellKey) -> u64 {
    seed::combine(&[
        master,
        seed::hash_str(&key.graph_id),
        key.depth as u64,
        seed::hash_str(key.optimizer.name()),
        seed::hash_str(key.backend.name()),
        u64::from(key.trial),
    ])
}

/// Cells of the grid in output order.
pub fn plan_cells(cfg: &ExperimentConfig) -> Vec<CellKey> {
    let mut cells = Vec::new();
    for g in &cfg.graphs {
        for &depth in &cfg.depths {
            let pairs: Vec<(Method, Backend)> = match cfg.kind {
                ExperimentKind::OptimizerComparison => cfg
                    .optimizers
                    .iter()
                    .flat_map(|&m| cfg.backends.iter().map(move |&b| (m, b)))
                    .collect(),
                _ => cfg.backends.iter().map(|&b| (cfg.sweep_method(b), b)).collect(),
            };
            for (optimizer, backend) in pairs {
                for trial in 0..cfg.trials {
                    cells.push(CellKey {
                        graph_id: g.id.clone(),
                        depth,
                        optimizer,
                        backend,
                        trial,
                    });
                }
            }
        }
    }
    cells
}

/// Optimizes one cell from initial angles drawn uniformly in `[0, 2π)`.
pub fn run_cell(cfg: &ExperimentConfig, key: &CellKey, master_seed: u64) -> Result<RunRecord> {
    let start = Instant::now();
    let graph = cfg
        .graphs
        .iter()
        .find(|g| g.id == key.graph_id)
        .ok_or_else(|| Error::contract(format!("unknown graph id `{}`", key.graph_id)))?;
    let seed = trial_seed(master_seed, key);
    let obj = QaoaObjective::new(
        graph.graph.clone(),
        cfg.weights,
        key.depth,
        key.backend,
        cfg.shots,
        seed::derive(seed, 1),
        cfg.noise.clone(),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed, 0));
    let x0: Vec<f64> = (0..2 * key.depth).map(|_| rng.gen_range(0.0..TAU)).collect();

    let mut opt = OptimizerConfig::new(
        key.optimizer,
        cfg.budgets.for_backend(key.backend),
        seed::derive(seed, 2),
    )
    .with_noise_level(obj.noise_level());
    opt.hyper = cfg.hyperparams.clone();

    // Parameters always have the right shape here, so backend errors cannot
    // occur; NaN would still stop the optimizer cleanly.
    let f = |x: &[f64]| obj.evaluate(x).unwrap_or(f64::NAN);
    let grad = FnGradient::new(
        |x: &[f64]| {
            QaoaParams::from_flat(x)
                .and_then(|p| parameter_shift_grad(&obj, &p))
                .unwrap_or_else(|_| vec![f64::NAN; x.len()])
        },
        obj.gradient_cost(),
    );
    let oracle: Option<&dyn GradientOracle> = key.optimizer.is_gradient_based().then_some(&grad);
    let trace = minimize(&f, &x0, &opt, oracle)?;
    if trace.aborted {
        return Err(Error::contract(format!(
            "objective returned a non-finite value in cell {key:?}"
        )));
    }

    let success_prob = match cfg.kind {
        ExperimentKind::SuccessProbability => {
            Some(obj.success_probability(&trace.best_params, seed::derive(seed, 3))?)
        }
        _ => None,
    };
    let exact_expectation = Some(obj.exact_expectation(&trace.best_params)?);
    Ok(RunRecord {
        graph_id: key.graph_id.clone(),
        depth: key.depth,
        optimizer: key.optimizer,
        backend: key.backend,
        trial: key.trial,
        seed,
        final_expectation: trace.best_value,
        success_prob,
        evals_used: trace.evaluations_used,
        params: trace.best_params,
        exact_expectation,
        wall_ms: start.elapsed().as_millis() as u64,
    })
}

fn resolve_seed(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<u64> {
    match (cfg.master_seed, opts.master_seed) {
        (Some(a), Some(b)) if a != b => Err(Error::field(
            "master_seed",
            format!("config says {a} but {b} was requested"),
        )),
        (Some(s), _) | (None, Some(s)) => Ok(s),
        (None, None) => Err(Error::field(
            "master_seed",
            "no master seed given; set it in the config or pass one explicitly",
        )),
    }
}

fn check_kind(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if cfg.kind != kind {
        return Err(Error::contract(format!(
            "config describes a {} experiment, not {}",
            cfg.kind, kind
        )));
    }
    Ok(())
}

/// Full grid of graphs, depths, optimizers, backends and trials.
pub fn run_optimizer_comparison(
    cfg: &ExperimentConfig,
    out_dir: Option<&Path>,
    opts: &RunOptions,
) -> Result<RunOutcome> {
    check_kind(cfg, ExperimentKind::OptimizerComparison)?;
    run_experiment(cfg, out_dir, opts)
}

/// Per graph and depth, trials with the noisy method on sampled backends
/// and the exact method on the state vector.
pub fn run_depth_sweep(
    cfg: &ExperimentConfig,
    out_dir: Option<&Path>,
    opts: &RunOptions,
) -> Result<RunOutcome> {
    check_kind(cfg, ExperimentKind::DepthSweep)?;
    run_experiment(cfg, out_dir, opts)
}

/// As the depth sweep, additionally recording the probability of sampling
/// an optimal cover from the optimized state.
pub fn run_success_probability(
    cfg: &ExperimentConfig,
    out_dir: Option<&Path>,
    opts: &RunOptions,
) -> Result<RunOutcome> {
    check_kind(cfg, ExperimentKind::SuccessProbability)?;
    run_experiment(cfg, out_dir, opts)
}

/// Runs whichever experiment `cfg` describes. Without an output directory
/// nothing is persisted and `resume` is meaningless.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out_dir: Option<&Path>,
    opts: &RunOptions,
) -> Result<RunOutcome> {
    let master = resolve_seed(cfg, opts)?;
    let cells = plan_cells(cfg);
    let meta = |completed: usize| RunMeta {
        version: env!("CARGO_PKG_VERSION").to_owned(),
        kind: cfg.kind,
        config_hash: cfg.content_hash.clone(),
        master_seed: master,
        cells: cells.len(),
        completed,
        complete: completed == cells.len(),
    };

    let mut done: HashMap<CellKey, RunRecord> = HashMap::new();
    let journal = match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let journal_path = dir.join(JOURNAL_FILE);
            if journal_path.exists() {
                if !opts.resume {
                    return Err(Error::contract(format!(
                        "{} already holds results; resume or choose another output directory",
                        dir.display()
                    )));
                }
                check_meta(&dir.join(META_FILE), &meta(0))?;
                for r in read_journal(&journal_path)? {
                    done.insert(r.key(), r);
                }
            }
            write_meta(&dir.join(META_FILE), &meta(done.len()))?;
            let file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&journal_path)
                .map_err(|e| Error::io(&journal_path, e))?;
            Some((journal_path, Mutex::new(BufWriter::new(file))))
        }
        None => None,
    };
    let planned: HashMap<&CellKey, usize> = cells.iter().enumerate().map(|(i, k)| (k, i)).collect();
    if let Some(stray) = done.keys().find(|k| !planned.contains_key(k)) {
        return Err(Error::contract(format!("journal holds a cell outside the grid: {stray:?}")));
    }

    let mut pending: Vec<&CellKey> = cells.iter().filter(|k| !done.contains_key(*k)).collect();
    if let Some(limit) = opts.max_cells {
        pending.truncate(limit);
    }

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = opts.jobs {
        pool = pool.num_threads(jobs.max(1));
    }
    let pool = pool
        .build()
        .map_err(|e| Error::contract(format!("cannot start worker pool: {e}")))?;
    let fresh: Vec<RunRecord> = pool.install(|| {
        pending
            .par_iter()
            .map(|key| {
                let record = run_cell(cfg, key, master)?;
                if let Some((path, sink)) = &journal {
                    let line = serde_json::to_string(&record)?;
                    let mut w = sink.lock().expect("journal lock poisoned");
                    writeln!(w, "{line}")
                        .and_then(|_| w.flush())
                        .map_err(|e| Error::io(path, e))?;
                }
                Ok(record)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let computed = fresh.len();
    for r in fresh {
        done.insert(r.key(), r);
    }

    let mut records: Vec<RunRecord> = done.into_values().collect();
    records.sort_by_key(|r| planned[&r.key()]);
    let complete = records.len() == cells.len();
    if let Some(dir) = out_dir {
        if complete {
            let path = dir.join(RESULTS_FILE);
            let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
            write_csv(BufWriter::new(file), &records, cfg.record_wall_time)?;
        }
        write_meta(&dir.join(META_FILE), &meta(records.len()))?;
    }
    Ok(RunOutcome {
        records,
        computed,
        complete,
    })
}

fn write_meta(path: &Path, meta: &RunMeta) -> Result<()> {
    let text = serde_json::to_string_pretty(meta)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn check_meta(path: &Path, expected: &RunMeta) -> Result<()> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let found: RunMeta = serde_json::from_str(&text)?;
    if found.config_hash != expected.config_hash || found.master_seed != expected.master_seed {
        return Err(Error::contract(format!(
            "{} belongs to a different config or seed; refusing to resume",
            path.display()
        )));
    }
    Ok(())
}

/// Reads journaled records. A torn final line, as left by a kill during a
/// write, is dropped and truncated away so appends start on a clean line.
fn read_journal(path: &PathBuf) -> Result<Vec<RunRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    let mut valid_len = 0u64;
    let lines: Vec<String> = BufReader::new(file)
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(path, e))?;
    let total = lines.len();
    for (i, line) in lines.into_iter().enumerate() {
        if line.trim().is_empty() {
            valid_len += line.len() as u64 + 1;
            continue;
        }
        match serde_json::from_str::<RunRecord>(&line) {
            Ok(r) => {
                records.push(r);
                valid_len += line.len() as u64 + 1;
            }
            Err(_) if i + 1 == total => {
                let f = OpenOptions::new().write(true).open(path).map_err(|e| Error::io(path, e))?;
                f.set_len(valid_len).map_err(|e| Error::io(path, e))?;
            }
            Err(e) => {
                return Err(Error::Parse {
                    source_name: path.display().to_string(),
                    line: i + 1,
                    message: e.to_string(),
                })
            }
        }
    }
    Ok(records)
}
