use std::path::Path;

use qaoa_core::harness::{
    aggregate, plan_cells, run_depth_sweep, run_experiment, run_optimizer_comparison,
    ExperimentConfig, GroupKey, RunOptions, JOURNAL_FILE, RESULTS_FILE,
};

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(text, Path::new(".")).unwrap()
}

const GRID: &str = r#"
kind = "optimizer_comparison"
master_seed = 2024
depths = [1, 2]
optimizers = ["spsa", "nelder_mead", "lbfgs"]
backends = ["statevector", "shots"]
shots = 256
trials = 2
[graphs]
source = "enumerated"
n = 4
indices = [0, 5]
[budgets]
statevector = 300
shots = 120
"#;

fn opts(jobs: usize) -> RunOptions {
    RunOptions {
        jobs: Some(jobs),
        ..RunOptions::default()
    }
}

#[test]
fn grid_size_and_order() {
    let cfg = config(GRID);
    let out = run_optimizer_comparison(&cfg, None, &opts(1)).unwrap();
    assert_eq!(out.records.len(), 2 * 2 * 3 * 2 * 2);
    let keys: Vec<_> = out.records.iter().map(|r| r.key()).collect();
    assert_eq!(keys, plan_cells(&cfg));
    let groups = aggregate(&out.records, &[GroupKey::Optimizer, GroupKey::Depth, GroupKey::Backend]).unwrap();
    assert_eq!(groups.len(), 3 * 2 * 2);
    assert!(groups.iter().all(|g| g.expectation.count == 2 * 2));
    for r in &out.records {
        assert_eq!(r.params.len(), 2 * r.depth);
        assert!(r.evals_used <= if r.backend.is_exact() { 300 } else { 120 });
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let cfg = config(GRID);
    let serial = run_experiment(&cfg, None, &opts(1)).unwrap();
    let parallel = run_experiment(&cfg, None, &opts(3)).unwrap();
    assert_eq!(serial.records, {
        let mut p = parallel.records;
        for (a, b) in p.iter_mut().zip(&serial.records) {
            a.wall_ms = b.wall_ms;
        }
        p
    });
}

#[test]
fn interrupted_runs_resume_to_identical_csv() {
    let cfg = config(GRID);
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full");
    let part = dir.path().join("part");
    run_experiment(&cfg, Some(&full), &opts(2)).unwrap();

    let first = run_experiment(
        &cfg,
        Some(&part),
        &RunOptions {
            max_cells: Some(7),
            ..opts(2)
        },
    )
    .unwrap();
    assert!(!first.complete);
    assert_eq!(first.computed, 7);
    assert!(!part.join(RESULTS_FILE).exists());

    // Simulate a kill in the middle of a journal write.
    let journal = part.join(JOURNAL_FILE);
    let mut text = std::fs::read_to_string(&journal).unwrap();
    text.push_str("{\"graph_id\":\"n4-0");
    std::fs::write(&journal, text).unwrap();

    assert!(run_experiment(&cfg, Some(&part), &opts(1)).is_err(), "needs resume");
    let second = run_experiment(
        &cfg,
        Some(&part),
        &RunOptions {
            resume: true,
            max_cells: Some(10),
            ..opts(1)
        },
    )
    .unwrap();
    assert_eq!(second.computed, 10);
    let last = run_experiment(
        &cfg,
        Some(&part),
        &RunOptions {
            resume: true,
            ..opts(3)
        },
    )
    .unwrap();
    assert!(last.complete);
    assert_eq!(last.computed, 48 - 17);
    assert_eq!(
        std::fs::read(full.join(RESULTS_FILE)).unwrap(),
        std::fs::read(part.join(RESULTS_FILE)).unwrap()
    );
}

#[test]
fn resume_refuses_a_changed_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(GRID);
    run_experiment(&cfg, Some(dir.path()), &RunOptions { max_cells: Some(2), ..opts(1) }).unwrap();
    let changed = config(&GRID.replace("trials = 2", "trials = 3"));
    let err = run_experiment(&changed, Some(dir.path()), &RunOptions { resume: true, ..opts(1) });
    assert!(err.is_err());
}

#[test]
fn statevector_sweep_respects_ground_energy() {
    let cfg = config(
        r#"
kind = "depth_sweep"
master_seed = 3
depths = [1, 2, 3]
backends = ["statevector"]
trials = 2
[graphs]
source = "enumerated"
n = 5
edges = 5
[budgets]
statevector = 3000
"#,
    );
    let out = run_depth_sweep(&cfg, None, &opts(1)).unwrap();
    assert_eq!(out.records.len(), 5 * 3 * 2);
    for r in &out.records {
        let g = &cfg.graphs.iter().find(|g| g.id == r.graph_id).unwrap().graph;
        let ground = qaoa_core::graph::min_vertex_covers(g).unwrap().size as f64;
        assert!(r.final_expectation >= ground - 1e-9);
        assert!(r.success_prob.is_none());
    }
}
