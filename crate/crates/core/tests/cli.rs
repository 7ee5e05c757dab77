use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rkopt::keys::RngStream;
use rkopt::problems::{Instance, NcgppInstance};

fn rkopt(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rkopt"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn ncgpp_file(dir: &Path) -> PathBuf {
    let mut rng = RngStream::new(8, 0);
    let inst = Instance::Ncgpp(NcgppInstance::random(7, 2, 0.1, &mut rng).unwrap());
    let p = dir.join("nc.txt");
    inst.write(&p).unwrap();
    p
}

#[test]
fn oracle_and_solve_agree() {
    let dir = tempfile::tempdir().unwrap();
    ncgpp_file(dir.path());
    let o = rkopt(&["oracle", "-p", "ncgpp", "-i", "nc.txt"], dir.path());
    assert!(o.status.success(), "{o:?}");
    let line = stdout(&o);
    let (name, value) = line.trim().split_once(' ').unwrap();
    assert_eq!(name, "nc");
    let o = rkopt(
        &["solve", "-p", "ncgpp", "-i", "nc.txt", "--max-evals", "5000", "--sequential", "--trace", "t.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    assert!(text.contains(&format!("objective: {value}")), "{text}");
    assert!(text.contains("solution: "));
    let trace = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert!(trace.starts_with("solver,seconds,evaluations,objective\n"));
}

#[test]
fn evaluation_budget_results_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    ncgpp_file(dir.path());
    for out in ["a.csv", "b.csv"] {
        let o = rkopt(
            &["solve", "-p", "ncgpp", "-i", "nc.txt", "--max-evals", "2000", "--sequential", "--seed", "4", "-o", out],
            dir.path(),
        );
        assert!(o.status.success(), "{o:?}");
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn bench_profile_stats() {
    let dir = tempfile::tempdir().unwrap();
    ncgpp_file(dir.path());
    std::fs::write(
        dir.path().join("exp.cfg"),
        "problem = ncgpp\ninstances = nc.txt\nmethods = portfolio SA\nruns = 5\n\
         time_limit = none\nmax_evaluations = 1000\nparallel = false\noutput = out\n",
    )
    .unwrap();
    let o = rkopt(&["bench", "exp.cfg"], dir.path());
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).starts_with("method,instances,bks_count"));
    let o = rkopt(&["profile", "out/results.csv", "-o", "p.csv"], dir.path());
    assert!(o.status.success(), "{o:?}");
    let p = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
    assert!(p.starts_with("method,tau,log2_tau,rho\n"));
    let o = rkopt(&["stats", "out/results.csv"], dir.path());
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).starts_with("row,RKO,SA\n"));
    assert!(dir.path().join("out/wilcoxon.csv").exists());
}

#[test]
fn failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    ncgpp_file(dir.path());
    std::fs::write(
        dir.path().join("exp.cfg"),
        "problem = ncgpp\ninstances = nc.txt missing.txt\nmethods = SA\nruns = 1\n\
         time_limit = none\nmax_evaluations = 200\noutput = out\n",
    )
    .unwrap();
    let o = rkopt(&["bench", "exp.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = rkopt(&["solve", "-p", "ncgpp", "-i", "missing.txt"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.txt"));
    let o = rkopt(&["solve", "-p", "anpmp", "-i", "nc.txt"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
