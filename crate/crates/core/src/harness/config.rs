use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gradient::Backend;
use crate::graph::{enumerate_connected_graphs, Graph};
use crate::hamiltonian::PenaltyWeights;
use crate::optimizers::{Hyperparams, Method};
use crate::simulator::NoiseModel;

/// The three experiments of the study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    #[serde(alias = "OPTIMIZER_COMPARISON")]
    OptimizerComparison,
    #[serde(alias = "DEPTH_SWEEP")]
    DepthSweep,
    #[serde(alias = "SUCCESS_PROBABILITY")]
    SuccessProbability,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::OptimizerComparison => "optimizer_comparison",
            ExperimentKind::DepthSweep => "depth_sweep",
            ExperimentKind::SuccessProbability => "success_probability",
        }
    }

    fn default_depths(self) -> Vec<usize> {
        match self {
            ExperimentKind::OptimizerComparison => (1..=5).collect(),
            _ => (1..=10).collect(),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where the instance graphs come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSource {
    /// Connected graphs on `n` vertices in enumeration order, optionally
    /// restricted to `edges` edges and then to the listed positions.
    Enumerated {
        n: usize,
        #[serde(default)]
        edges: Option<usize>,
        #[serde(default)]
        indices: Option<Vec<usize>>,
    },
    /// Edge-list files, relative to the config file.
    Files { paths: Vec<PathBuf> },
}

/// A graph with its stable identifier in records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedGraph {
    pub id: String,
    pub graph: Graph,
}

/// Evaluation budget per backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    pub statevector: u64,
    pub shots: u64,
    pub noisy: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            statevector: 20_000,
            shots: 400,
            noisy: 400,
        }
    }
}

impl Budgets {
    pub fn for_backend(&self, backend: Backend) -> u64 {
        match backend {
            Backend::Statevector => self.statevector,
            Backend::Shots => self.shots,
            Backend::Noisy => self.noisy,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeights {
    a: f64,
    b: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: ExperimentKind,
    graphs: GraphSource,
    #[serde(default)]
    depths: Option<Vec<usize>>,
    #[serde(default)]
    optimizers: Option<Vec<String>>,
    #[serde(default)]
    backends: Option<Vec<Backend>>,
    #[serde(default = "default_shots")]
    shots: u64,
    #[serde(default = "default_trials")]
    trials: u32,
    #[serde(default)]
    weights: Option<RawWeights>,
    #[serde(default)]
    calibration: Option<PathBuf>,
    #[serde(default)]
    master_seed: Option<u64>,
    #[serde(default)]
    budgets: Budgets,
    #[serde(default)]
    noisy_optimizer: Option<String>,
    #[serde(default)]
    exact_optimizer: Option<String>,
    #[serde(default)]
    hyperparams: Hyperparams,
    #[serde(default)]
    record_wall_time: bool,
}

fn default_shots() -> u64 {
    2000
}

fn default_trials() -> u32 {
    1
}

/// A validated experiment description.
///
/// `optimizers` drives the optimizer comparison; the sweeps instead pick
/// `noisy_optimizer` on sampled backends and `exact_optimizer` on the state
/// vector.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub graphs: Vec<NamedGraph>,
    pub depths: Vec<usize>,
    pub optimizers: Vec<Method>,
    pub backends: Vec<Backend>,
    pub shots: u64,
    pub trials: u32,
    pub weights: PenaltyWeights,
    pub calibration: Option<PathBuf>,
    pub noise: NoiseModel,
    pub master_seed: Option<u64>,
    pub budgets: Budgets,
    pub noisy_optimizer: Method,
    pub exact_optimizer: Method,
    pub hyperparams: Hyperparams,
    /// Write measured wall times to the CSV; off by default so that
    /// results are byte-reproducible.
    pub record_wall_time: bool,
    /// SHA-256 over the config text and the calibration file contents.
    pub content_hash: String,
}

fn parse_method(name: &str, field: &str) -> Result<Method> {
    Method::from_str(name).map_err(|e| match e {
        Error::Contract(msg) => Error::field(field, msg),
        other => other,
    })
}

impl ExperimentConfig {
    /// Reads and validates a config file; relative paths inside it resolve
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base)
    }

    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text)?;
        let kind = raw.kind;

        let depths = raw.depths.unwrap_or_else(|| kind.default_depths());
        if depths.is_empty() {
            return Err(Error::field("depths", "must not be empty"));
        }
        if let Some(&d) = depths.iter().find(|&&d| d == 0) {
            return Err(Error::field("depths", format!("depth {d} must be at least 1")));
        }
        if depths.iter().collect::<BTreeSet<_>>().len() != depths.len() {
            return Err(Error::field("depths", "contains duplicates"));
        }
        if raw.trials == 0 {
            return Err(Error::field("trials", "must be at least 1"));
        }

        let backends = raw.backends.unwrap_or_else(|| match kind {
            ExperimentKind::OptimizerComparison => vec![Backend::Statevector],
            _ => vec![Backend::Noisy, Backend::Statevector],
        });
        if backends.is_empty() {
            return Err(Error::field("backends", "must not be empty"));
        }
        if backends.iter().collect::<BTreeSet<_>>().len() != backends.len() {
            return Err(Error::field("backends", "contains duplicates"));
        }
        if raw.shots == 0 && backends.iter().any(|b| !b.is_exact()) {
            return Err(Error::field("shots", "sampled backends need at least one shot"));
        }

        let optimizers = match (&raw.optimizers, kind) {
            (Some(names), _) => names
                .iter()
                .enumerate()
                .map(|(i, n)| parse_method(n, &format!("optimizers[{i}]")))
                .collect::<Result<Vec<_>>>()?,
            (None, ExperimentKind::OptimizerComparison) => Method::ALL.to_vec(),
            (None, _) => Vec::new(),
        };
        if kind == ExperimentKind::OptimizerComparison {
            if optimizers.is_empty() {
                return Err(Error::field("optimizers", "must not be empty"));
            }
            if optimizers.iter().collect::<BTreeSet<_>>().len() != optimizers.len() {
                return Err(Error::field("optimizers", "contains duplicates"));
            }
        } else if !optimizers.is_empty() {
            return Err(Error::field(
                "optimizers",
                "only used by optimizer_comparison; sweeps use noisy_optimizer and exact_optimizer",
            ));
        }
        let noisy_optimizer = match &raw.noisy_optimizer {
            Some(n) => parse_method(n, "noisy_optimizer")?,
            None => Method::Spsa,
        };
        let exact_optimizer = match &raw.exact_optimizer {
            Some(n) => parse_method(n, "exact_optimizer")?,
            None => Method::Bfgs,
        };

        let weights = match raw.weights {
            Some(w) => PenaltyWeights::new(w.a, w.b).map_err(|e| Error::field("weights", e.to_string()))?,
            None => PenaltyWeights::default(),
        };

        let max_depth = *depths.iter().max().expect("nonempty");
        for &b in &backends {
            let budget = raw.budgets.for_backend(b);
            let floor = 4 * max_depth as u64 + 1;
            if budget < floor {
                return Err(Error::field(
                    format!("budgets.{}", b.name()),
                    format!("{budget} is below {floor}, the minimum for depth {max_depth}"),
                ));
            }
        }

        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        let (calibration, noise) = match &raw.calibration {
            Some(p) => {
                let full = base_dir.join(p);
                if !full.is_file() {
                    return Err(Error::field(
                        "calibration",
                        format!("file {} does not exist", full.display()),
                    ));
                }
                let cal_text = std::fs::read_to_string(&full).map_err(|e| Error::io(&full, e))?;
                hasher.update([0u8]);
                hasher.update(cal_text.as_bytes());
                (Some(full), NoiseModel::from_toml_str(&cal_text)?)
            }
            None => (None, NoiseModel::default()),
        };

        let graphs = load_graphs(&raw.graphs, base_dir, &mut hasher)?;
        if backends.contains(&Backend::Noisy) {
            for g in &graphs {
                noise
                    .check_register(g.graph.n_vertices())
                    .map_err(|e| Error::field("calibration", format!("graph {}: {e}", g.id)))?;
            }
        }

        Ok(Self {
            kind,
            graphs,
            depths,
            optimizers,
            backends,
            shots: raw.shots,
            trials: raw.trials,
            weights,
            calibration,
            noise,
            master_seed: raw.master_seed,
            budgets: raw.budgets,
            noisy_optimizer,
            exact_optimizer,
            hyperparams: raw.hyperparams,
            record_wall_time: raw.record_wall_time,
            content_hash: format!("{:x}", hasher.finalize()),
        })
    }

    /// The method a cell on `backend` uses in the sweeps.
    pub fn sweep_method(&self, backend: Backend) -> Method {
        if backend.is_exact() {
            self.exact_optimizer
        } else {
            self.noisy_optimizer
        }
    }
}

fn load_graphs(source: &GraphSource, base_dir: &Path, hasher: &mut Sha256) -> Result<Vec<NamedGraph>> {
    let graphs = match source {
        GraphSource::Enumerated { n, edges, indices } => {
            if !(1..=7).contains(n) {
                return Err(Error::field("graphs.n", format!("{n} is outside 1..=7")));
            }
            let all = enumerate_connected_graphs(*n)?;
            let (pool, prefix): (Vec<Graph>, String) = match edges {
                Some(m) => (
                    all.into_iter().filter(|g| g.n_edges() == *m).collect(),
                    format!("n{n}e{m}"),
                ),
                None => (all, format!("n{n}")),
            };
            let picked: Vec<usize> = match indices {
                Some(ix) => ix.clone(),
                None => (0..pool.len()).collect(),
            };
            if picked.is_empty() {
                return Err(Error::field("graphs", "selects no graphs"));
            }
            picked
                .iter()
                .enumerate()
                .map(|(k, &i)| {
                    let graph = pool.get(i).cloned().ok_or_else(|| {
                        Error::field(
                            format!("graphs.indices[{k}]"),
                            format!("index {i} out of range; {} graphs match", pool.len()),
                        )
                    })?;
                    Ok(NamedGraph {
                        id: format!("{prefix}-{i:02}"),
                        graph,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
        GraphSource::Files { paths } => {
            if paths.is_empty() {
                return Err(Error::field("graphs.paths", "must not be empty"));
            }
            paths
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    let full = base_dir.join(p);
                    if !full.is_file() {
                        return Err(Error::field(
                            format!("graphs.paths[{k}]"),
                            format!("file {} does not exist", full.display()),
                        ));
                    }
                    let graph = Graph::read_file(&full)?;
                    let id = full
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| format!("file{k}"));
                    Ok(NamedGraph { id, graph })
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    let mut seen = BTreeSet::new();
    for g in &graphs {
        if !seen.insert(g.id.clone()) {
            return Err(Error::field("graphs", format!("duplicate graph id `{}`", g.id)));
        }
        hasher.update([0u8]);
        hasher.update(g.id.as_bytes());
        hasher.update(g.graph.to_edge_list().as_bytes());
    }
    Ok(graphs)
}
