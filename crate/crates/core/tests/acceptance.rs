//! Acceptance criteria 1-10. Each test prints one `criterion N: PASS|FAIL`
//! line with the measured quantities, then asserts.
//!
//! The noisy experiments (7, 8) sample 2000 shots per evaluation by
//! default; set `QAOA_ACCEPTANCE_FULL=1` for 10000.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qaoa_core::gradient::{parameter_shift_grad, Backend, QaoaObjective};
use qaoa_core::graph::{enumerate_connected_graphs, min_vertex_covers};
use qaoa_core::hamiltonian::{build_ising, diagonal};
use qaoa_core::harness::{
    run_depth_sweep, run_experiment, run_success_probability, ExperimentConfig, RunOptions,
    RunRecord, RESULTS_FILE,
};
use qaoa_core::optimizers::{minimize, FnGradient, GradientOracle, Method, OptimizerConfig};
use qaoa_core::simulator::{
    build_qaoa_circuit, expectation_from_counts, run_statevector, sample, NoiseModel, QaoaParams,
    QuantumState,
};
use qaoa_core::{Graph, PenaltyWeights};

/// Runs criteria one at a time so wall-clock limits are not shared.
static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

/// Writes straight to the process stdout so the line survives libtest's
/// output capture for passing tests.
fn verdict(n: u32, name: &str, pass: bool, detail: &str) {
    let _ = writeln!(
        std::io::stdout().lock(),
        "criterion {n} ({name}): {} | {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} failed: {detail}");
}

fn within(elapsed: Duration, limit: Duration) -> (bool, String) {
    (elapsed < limit, format!("runtime {:.2}s < {:.0}s", elapsed.as_secs_f64(), limit.as_secs_f64()))
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn five_vertex_graphs() -> Vec<Graph> {
    enumerate_connected_graphs(5).unwrap()
}

// ---------------------------------------------------------------------------
// Independent oracles.

/// Connected isomorphism classes on `n` vertices by exhaustive search: every
/// edge subset, canonicalized as the smallest edge mask over all vertex
/// permutations.
fn brute_force_class_count(n: usize) -> usize {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let perms = permutations(n);
    let mut classes = BTreeSet::new();
    for mask in 0u32..(1 << pairs.len()) {
        let edges: Vec<(usize, usize)> =
            (0..pairs.len()).filter(|i| mask >> i & 1 == 1).map(|i| pairs[i]).collect();
        if !connected(n, &edges) {
            continue;
        }
        let canon = perms
            .iter()
            .map(|p| {
                edges.iter().fold(0u32, |acc, &(u, v)| {
                    let (a, b) = (p[u].min(p[v]), p[u].max(p[v]));
                    acc | 1 << pairs.iter().position(|&e| e == (a, b)).unwrap()
                })
            })
            .min()
            .unwrap();
        classes.insert(canon);
    }
    classes.len()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &(a, b) in edges {
            let other = if a == u { b } else if b == u { a } else { continue };
            if !seen[other] {
                seen[other] = true;
                stack.push(other);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// A·(uncovered edges) + B·(cover size), with bit i of `z` = vertex i.
fn cost_oracle(g: &Graph, a: f64, b: f64, z: u32) -> f64 {
    let uncovered = g
        .edges()
        .iter()
        .filter(|&&(u, v)| z >> u & 1 == 0 && z >> v & 1 == 0)
        .count();
    a * uncovered as f64 + b * z.count_ones() as f64
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_var(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
}

/// Per-depth curve pooled over graphs: the mean of per-graph statistics and
/// the standard error of that mean from the within-graph trial variance.
struct Curve {
    value: BTreeMap<usize, f64>,
    se: BTreeMap<usize, f64>,
}

fn curve(records: &[&RunRecord], stat: impl Fn(&[f64]) -> f64, field: impl Fn(&RunRecord) -> f64) -> Curve {
    let mut cells: BTreeMap<usize, BTreeMap<&str, Vec<f64>>> = BTreeMap::new();
    for r in records {
        cells.entry(r.depth).or_default().entry(&r.graph_id).or_default().push(field(r));
    }
    let mut value = BTreeMap::new();
    let mut se = BTreeMap::new();
    for (d, graphs) in cells {
        let g = graphs.len() as f64;
        value.insert(d, graphs.values().map(|v| stat(v)).sum::<f64>() / g);
        let var_sum: f64 = graphs.values().map(|v| sample_var(v) / v.len() as f64).sum();
        se.insert(d, var_sum.sqrt() / g);
    }
    Curve { value, se }
}

fn fmt_curve(c: &BTreeMap<usize, f64>) -> String {
    c.iter().map(|(d, v)| format!("p{d}={v:.3}")).collect::<Vec<_>>().join(" ")
}

fn shots() -> u64 {
    match std::env::var("QAOA_ACCEPTANCE_FULL") {
        Ok(v) if v == "1" => 10_000,
        _ => 2_000,
    }
}

fn shipped_config(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&repo_root().join("configs").join(name)).unwrap()
}

fn run_opts() -> RunOptions {
    RunOptions {
        master_seed: Some(20_240_601),
        ..RunOptions::default()
    }
}

// ---------------------------------------------------------------------------

#[test]
fn criterion_01_graph_census() {
    let _g = serial();
    let start = Instant::now();
    let counts: Vec<usize> = (1..=5).map(|n| enumerate_connected_graphs(n).unwrap().len()).collect();
    let oracle: Vec<usize> = (1..=5).map(brute_force_class_count).collect();
    let graphs = five_vertex_graphs();
    // Pairwise non-isomorphic and connected, checked with the oracle's
    // canonicalization through a fresh enumeration of each class.
    let perms = permutations(5);
    let distinct: BTreeSet<Vec<(usize, usize)>> = graphs
        .iter()
        .map(|g| {
            perms
                .iter()
                .map(|p| {
                    let mut e: Vec<(usize, usize)> = g
                        .edges()
                        .iter()
                        .map(|&(u, v)| (p[u].min(p[v]), p[u].max(p[v])))
                        .collect();
                    e.sort_unstable();
                    e
                })
                .min()
                .unwrap()
        })
        .collect();
    let all_connected = graphs.iter().all(|g| connected(5, g.edges()));
    let (fast, time) = within(start.elapsed(), Duration::from_secs(1));
    let pass = counts == [1, 1, 2, 6, 21] && counts == oracle && distinct.len() == 21 && all_connected && fast;
    verdict(
        1,
        "graph census",
        pass,
        &format!("counts {counts:?}, brute force {oracle:?}, distinct classes {}, {time}", distinct.len()),
    );
}

#[test]
fn criterion_02_hamiltonian_oracle() {
    let _g = serial();
    let start = Instant::now();
    let w = PenaltyWeights::default();
    let mut worst = 0.0f64;
    let mut argmin_ok = true;
    for g in five_vertex_graphs() {
        let d = diagonal(&build_ising(&g, w)).unwrap();
        assert_eq!(d.len(), 32);
        let costs: Vec<f64> = (0..32u32).map(|z| cost_oracle(&g, w.a(), w.b(), z)).collect();
        for (x, y) in d.iter().zip(&costs) {
            worst = worst.max((x - y).abs());
        }
        let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
        let argmin: Vec<u32> = (0..32u32).filter(|&z| d[z as usize] <= min + 1e-9).collect();
        let covers: Vec<u32> = min_vertex_covers(&g).unwrap().covers.iter().map(|c| c.bits()).collect();
        argmin_ok &= argmin == covers;
    }
    let (fast, time) = within(start.elapsed(), Duration::from_secs(1));
    verdict(
        2,
        "hamiltonian oracle",
        worst <= 1e-12 && argmin_ok && fast,
        &format!("max |diagonal - cost| = {worst:.1e} (tol 1e-12), argmin sets equal: {argmin_ok}, {time}"),
    );
}

#[test]
fn criterion_03_backend_agreement() {
    let _g = serial();
    let start = Instant::now();
    let graphs = five_vertex_graphs();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let g = graphs[rng.gen_range(0..graphs.len())].clone();
        let p = rng.gen_range(1..=3);
        let theta: Vec<f64> = (0..2 * p).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        let make = |backend| {
            QaoaObjective::new(g.clone(), PenaltyWeights::default(), p, backend, 1, 0, NoiseModel::ideal()).unwrap()
        };
        let sv = make(Backend::Statevector).exact_expectation(&theta).unwrap();
        let dm = make(Backend::Noisy).exact_expectation(&theta).unwrap();
        worst = worst.max((sv - dm).abs());
    }
    let (fast, time) = within(start.elapsed(), Duration::from_secs(10));
    verdict(
        3,
        "backend agreement",
        worst < 1e-9 && fast,
        &format!("max |statevector - density| over 50 cases = {worst:.1e} (tol 1e-9), {time}"),
    );
}

#[test]
fn criterion_04_gradient_correctness() {
    let _g = serial();
    let start = Instant::now();
    let graphs = five_vertex_graphs();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let h = 1e-5;
    let mut worst = 0.0f64;
    let mut worst_beta = 0.0f64;
    for _ in 0..20 {
        let g = graphs[rng.gen_range(0..graphs.len())].clone();
        let p = rng.gen_range(1..=3);
        let obj = QaoaObjective::new(g, PenaltyWeights::default(), p, Backend::Statevector, 0, 0, NoiseModel::default())
            .unwrap();
        let theta: Vec<f64> = (0..2 * p).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        let shift = parameter_shift_grad(&obj, &QaoaParams::from_flat(&theta).unwrap()).unwrap();
        for i in 0..theta.len() {
            let mut up = theta.clone();
            let mut down = theta.clone();
            up[i] += h;
            down[i] -= h;
            let fd = (obj.evaluate(&up).unwrap() - obj.evaluate(&down).unwrap()) / (2.0 * h);
            worst = worst.max((fd - shift[i]).abs());
        }
        let mut zero_gamma = theta.clone();
        zero_gamma[..p].fill(0.0);
        let g0 = parameter_shift_grad(&obj, &QaoaParams::from_flat(&zero_gamma).unwrap()).unwrap();
        worst_beta = g0[p..].iter().fold(worst_beta, |m, v| m.max(v.abs()));
    }
    let (fast, time) = within(start.elapsed(), Duration::from_secs(30));
    verdict(
        4,
        "gradient correctness",
        worst < 1e-5 && worst_beta < 1e-10 && fast,
        &format!(
            "max |shift - central FD| = {worst:.1e} (tol 1e-5), max |dF/dβ| at γ=0 = {worst_beta:.1e} (tol 1e-10), {time}"
        ),
    );
}

#[test]
fn criterion_05_shot_noise_scaling() {
    let _g = serial();
    let start = Instant::now();
    let g = five_vertex_graphs().into_iter().find(|g| g.n_edges() == 5).unwrap();
    let w = PenaltyWeights::default();
    let c = build_qaoa_circuit(&build_ising(&g, w), &QaoaParams::new(vec![0.4], vec![0.7]).unwrap());
    let state = QuantumState::Pure(run_statevector(&c).unwrap());
    let shot_counts = [100u64, 1_000, 10_000, 100_000];
    let mut points = Vec::new();
    for &s in &shot_counts {
        let estimates: Vec<f64> = (0..100u64)
            .map(|seed| expectation_from_counts(&sample(&state, s, None, seed * 7919 + s).unwrap(), &g, w).unwrap())
            .collect();
        points.push(((s as f64).ln(), sample_var(&estimates).sqrt().ln()));
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / 4.0;
    let my = points.iter().map(|p| p.1).sum::<f64>() / 4.0;
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let (fast, time) = within(start.elapsed(), Duration::from_secs(60));
    verdict(
        5,
        "shot-noise scaling",
        (slope + 0.5).abs() <= 0.1 && fast,
        &format!("log-log slope {slope:.3} (target -0.5 ± 0.1), {time}"),
    );
}

#[test]
fn criterion_06_statevector_depth_trend() {
    let _g = serial();
    let mut cfg = shipped_config("depth_sweep.toml");
    cfg.backends = vec![Backend::Statevector];
    cfg.trials = 20;
    let out = run_depth_sweep(&cfg, None, &run_opts()).unwrap();
    let records: Vec<&RunRecord> = out.records.iter().collect();
    let best = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
    let c = curve(&records, best, |r| r.final_expectation);
    let mut violations = Vec::new();
    for p in 1..10 {
        let (a, b) = (c.value[&p], c.value[&(p + 1)]);
        let se = c.se[&p].max(c.se[&(p + 1)]);
        if b > a + se {
            violations.push(format!("p{p}->p{}: +{:.4} > se {se:.4}", p + 1, b - a));
        }
    }
    verdict(
        6,
        "statevector depth trend",
        violations.is_empty(),
        &format!("best-of-20 mean over 3 graphs: {}; violations: {violations:?}", fmt_curve(&c.value)),
    );
}

#[test]
fn criterion_07_noisy_depth_minimum() {
    let _g = serial();
    let mut cfg = shipped_config("depth_sweep.toml");
    cfg.backends = vec![Backend::Noisy];
    cfg.trials = 30;
    cfg.shots = shots();
    let out = run_depth_sweep(&cfg, None, &run_opts()).unwrap();
    let records: Vec<&RunRecord> = out.records.iter().collect();
    let c = curve(&records, mean, |r| r.final_expectation);
    let (&p_star, &v_star) = c.value.iter().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let v10 = c.value[&10];
    let pooled = ((c.se[&p_star].powi(2) + c.se[&10].powi(2)) / 2.0).sqrt();
    let pass = (2..=9).contains(&p_star) && v10 - v_star >= pooled;
    verdict(
        7,
        "noisy depth non-monotonicity",
        pass,
        &format!(
            "{} shots, 3 graphs x 30 trials: {}; p*={p_star}, mean(p10)-mean(p*)={:.4} vs pooled se {pooled:.4}",
            cfg.shots,
            fmt_curve(&c.value),
            v10 - v_star
        ),
    );
}

#[test]
fn criterion_08_success_probability_peak() {
    let _g = serial();
    let mut cfg = shipped_config("success_probability.toml");
    cfg.trials = 30;
    cfg.shots = shots();
    let out = run_success_probability(&cfg, None, &run_opts()).unwrap();
    let noisy: Vec<&RunRecord> = out.records.iter().filter(|r| r.backend == Backend::Noisy).collect();
    let exact: Vec<&RunRecord> = out.records.iter().filter(|r| r.backend == Backend::Statevector).collect();

    let success = curve(&noisy, mean, |r| r.success_prob.unwrap());
    let energy = curve(&noisy, mean, |r| r.final_expectation);
    let (&p_peak, &s_peak) = success.value.iter().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let (&p_star, _) = energy.value.iter().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let s10 = success.value[&10];
    let pooled = ((success.se[&p_peak].powi(2) + success.se[&10].powi(2)) / 2.0).sqrt();
    let peak_ok = (2..=9).contains(&p_peak) && p_peak.abs_diff(p_star) <= 3 && s_peak - s10 >= pooled;

    let mut per_graph = Vec::new();
    let mut exact_ok = true;
    for g in &cfg.graphs {
        let at = |p: usize| {
            let v: Vec<f64> = exact
                .iter()
                .filter(|r| r.graph_id == g.id && r.depth == p)
                .map(|r| r.success_prob.unwrap())
                .collect();
            mean(&v)
        };
        let (s1, s10) = (at(1), at(10));
        exact_ok &= s10 > s1;
        per_graph.push(format!("{} p1={s1:.3} p10={s10:.3}", g.id));
    }
    verdict(
        8,
        "success-probability peak",
        peak_ok && exact_ok,
        &format!(
            "noisy {}; peak p={p_peak} (expectation p*={p_star}), peak-p10={:.4} vs pooled se {pooled:.4}; statevector {}",
            fmt_curve(&success.value),
            s_peak - s10,
            per_graph.join(", ")
        ),
    );
}

#[test]
fn criterion_09_optimizer_sanity() {
    let _g = serial();
    let start = Instant::now();
    let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (v - i as f64).powi(2)).sum::<f64>();
    let grad = FnGradient::new(
        |x: &[f64]| x.iter().enumerate().map(|(i, v)| 2.0 * (v - i as f64)).collect(),
        1,
    );
    let mut failures = Vec::new();
    let mut results = Vec::new();
    for m in Method::ALL {
        let cfg = OptimizerConfig::new(m, 3000, 9);
        let g: Option<&dyn GradientOracle> = m.is_gradient_based().then_some(&grad);
        let t = minimize(&f, &[0.0; 6], &cfg, g).unwrap();
        let tol = match m {
            Method::Spsa => 1e-2,
            Method::NelderMead | Method::Powell => 1e-4,
            _ => 1e-6,
        };
        results.push(format!("{m}={:.1e}", t.best_value));
        if t.best_value.is_nan() || t.best_value >= tol || t.evaluations_used > 3000 {
            failures.push(format!("{m}: {:.2e} >= {tol:.0e}", t.best_value));
        }
    }

    // Noisy sphere: value at the returned point, noise-free.
    let mut true_means = BTreeMap::new();
    let mut noisy_means = BTreeMap::new();
    for m in [Method::Spsa, Method::NelderMead] {
        let (mut truth, mut noisy) = (0.0, 0.0);
        for seed in 0..20u64 {
            let rng = std::cell::RefCell::new(ChaCha8Rng::seed_from_u64(1000 + seed));
            let f = |x: &[f64]| {
                let mut r = rng.borrow_mut();
                let (u1, u2): (f64, f64) = (r.gen(), r.gen());
                let normal = (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
                x.iter().map(|v| v * v).sum::<f64>() + 0.01 * normal
            };
            let cfg = OptimizerConfig::new(m, 5000, seed).with_noise_level(0.01);
            let t = minimize(&f, &[1.0; 4], &cfg, None).unwrap();
            truth += t.best_params.iter().map(|v| v * v).sum::<f64>() / 20.0;
            noisy += t.best_value / 20.0;
        }
        true_means.insert(m, truth);
        noisy_means.insert(m, noisy);
    }
    let spsa_wins = true_means[&Method::Spsa] < true_means[&Method::NelderMead];
    let spsa_small = noisy_means[&Method::Spsa] < 0.05;
    let (fast, time) = within(start.elapsed(), Duration::from_secs(60));
    verdict(
        9,
        "optimizer sanity",
        failures.is_empty() && spsa_wins && spsa_small && fast,
        &format!(
            "quadratic {}; failures {failures:?}; noisy sphere mean true value spsa {:.2e} vs nelder_mead {:.2e}, spsa mean best_value {:.2e} (< 0.05); {time}",
            results.join(" "),
            true_means[&Method::Spsa],
            true_means[&Method::NelderMead],
            noisy_means[&Method::Spsa],
        ),
    );
}

#[test]
fn criterion_10_determinism() {
    let _g = serial();
    let start = Instant::now();
    let cfg = shipped_config("smoke.toml");
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let run = run_experiment(&cfg, Some(&out), &run_opts()).unwrap();
        assert!(run.complete);
        outputs.push(std::fs::read(out.join(RESULTS_FILE)).unwrap());
    }
    let rows = String::from_utf8_lossy(&outputs[0]).lines().count() - 1;
    let (fast, time) = within(start.elapsed(), Duration::from_secs(10));
    verdict(
        10,
        "determinism",
        outputs[0] == outputs[1] && rows == 1 && fast,
        &format!("smoke CSV byte-identical: {}, {rows} row(s), {time}", outputs[0] == outputs[1]),
    );
}
