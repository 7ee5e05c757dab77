use std::path::{Path, PathBuf};

use rkopt::harness::experiment::{bks_line, read_results, METHODS_FILE, RESULTS_FILE, SUMMARY_FILE, WILCOXON_FILE};
use rkopt::harness::{read_bks, run_experiment, ExperimentConfig, Method, TimeRule};
use rkopt::keys::RngStream;
use rkopt::problems::{Instance, PMedianInstance, ProblemKind};
use rkopt::solvers::SolverKind;

fn write_instances(dir: &Path, count: usize) -> Vec<PathBuf> {
    let mut rng = RngStream::new(99, 0);
    (0..count)
        .map(|i| {
            let inst = Instance::PMedian(PMedianInstance::random(7 + i, 2, 1, &mut rng).unwrap());
            let p = dir.join(format!("pm{i}.txt"));
            inst.write(&p).unwrap();
            p
        })
        .collect()
}

fn config(dir: &Path, instances: Vec<PathBuf>, methods: Vec<Method>, runs: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(ProblemKind::PMedian, instances, dir.join("out"));
    cfg.alpha = Some(1);
    cfg.methods = methods;
    cfg.runs = runs;
    cfg.time_limit = TimeRule::Unlimited;
    cfg.max_evaluations = Some(1500);
    cfg.parallel = false;
    cfg
}

#[test]
fn single_cell() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instances(dir.path(), 1);
    let cfg = config(dir.path(), inst, vec![Method::Solver(SolverKind::Sa)], 1);
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.rows.len(), 1);
    assert_eq!(report.summary.len(), 1);
    assert_eq!(report.failed, 0);
    let summary = std::fs::read_to_string(cfg.output.join(SUMMARY_FILE)).unwrap();
    assert_eq!(summary.lines().count(), 2);
}

#[test]
fn reruns_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instances(dir.path(), 2);
    let mut cfg = config(dir.path(), inst, vec![Method::Portfolio, Method::Solver(SolverKind::Ga)], 2);
    cfg.workers = 3;
    run_experiment(&cfg).unwrap();
    let first: Vec<String> = [RESULTS_FILE, SUMMARY_FILE, WILCOXON_FILE]
        .iter()
        .map(|f| std::fs::read_to_string(cfg.output.join(f)).unwrap())
        .collect();
    run_experiment(&cfg).unwrap();
    for (f, old) in [RESULTS_FILE, SUMMARY_FILE, WILCOXON_FILE].iter().zip(&first) {
        assert_eq!(&std::fs::read_to_string(cfg.output.join(f)).unwrap(), old, "{f}");
    }
}

#[test]
fn bks_count_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instances(dir.path(), 3);
    let mut bks = String::new();
    for p in &inst {
        let opt = Instance::load(ProblemKind::PMedian, p, Some(1)).unwrap().brute_force().unwrap();
        let name = p.file_stem().unwrap().to_str().unwrap();
        bks.push_str(&bks_line(name, opt.objective));
        bks.push('\n');
    }
    let bks_path = dir.path().join("bks.txt");
    std::fs::write(&bks_path, bks).unwrap();
    let mut cfg = config(
        dir.path(),
        inst,
        vec![Method::Solver(SolverKind::Sa), Method::Solver(SolverKind::Pso)],
        5,
    );
    cfg.bks = Some(bks_path.clone());
    cfg.max_evaluations = Some(300);
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.rows.len(), 30);
    let known = read_bks(&bks_path).unwrap();
    let rows = read_results(&cfg.output.join(RESULTS_FILE)).unwrap();
    assert_eq!(rows, report.rows);
    for m in &report.methods {
        let expected = known
            .iter()
            .filter(|(inst, &b)| {
                let best = rows
                    .iter()
                    .filter(|r| &r.instance == *inst && r.method == m.method)
                    .filter_map(|r| r.objective)
                    .fold(f64::INFINITY, f64::min);
                best <= b + 1e-9 * b.abs().max(1.0)
            })
            .count();
        assert_eq!(m.bks_count, expected, "{}", m.method);
    }
    for s in &report.summary {
        assert!(s.rpd_avg.unwrap() >= s.rpd_best.unwrap());
    }
    let methods = std::fs::read_to_string(cfg.output.join(METHODS_FILE)).unwrap();
    assert!(methods.starts_with("method,instances,bks_count"));
}

#[test]
fn unreadable_instance_is_a_failed_cell() {
    let dir = tempfile::tempdir().unwrap();
    let mut inst = write_instances(dir.path(), 1);
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "3 1\n").unwrap();
    inst.push(bad);
    let cfg = config(dir.path(), inst, vec![Method::Solver(SolverKind::Ils)], 2);
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.rows.len(), 4);
    assert_eq!(report.failed, 2);
    assert!(report.rows[2].error.as_deref().unwrap().contains("bad.txt"));
}

#[test]
fn config_file_drives_experiment() {
    let dir = tempfile::tempdir().unwrap();
    write_instances(dir.path(), 1);
    let cfg_path = dir.path().join("exp.cfg");
    std::fs::write(
        &cfg_path,
        "problem = anpmp\nalpha = 1\ninstances = pm0.txt\nmethods = VNS\nruns = 2\n\
         time_limit = 0.2\nseed = 5\noutput = res\n",
    )
    .unwrap();
    let cfg = ExperimentConfig::read(&cfg_path).unwrap();
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert!(report.rows.iter().all(|r| r.time_to_best.is_some()));
    assert!(dir.path().join("res").join(RESULTS_FILE).exists());
}

#[test]
fn shipped_configs_reach_every_bks() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    for problem in ["anpmp", "ncgpp", "thlp"] {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::read(&data.join(problem).join("bench.cfg")).unwrap();
        cfg.output = dir.path().to_path_buf();
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.failed, 0);
        assert_eq!(report.rows.len(), 3 * 9 * 5);
        let rko = report.methods.iter().find(|m| m.method == "RKO").unwrap();
        assert_eq!(rko.bks_count, 3, "{problem}");
    }
}
