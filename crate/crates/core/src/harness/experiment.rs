//! Runs every (instance, method, run) cell of an experiment and writes the
//! result, summary, profile and signed-rank files.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use super::metrics::{performance_profile, rpd, wilcoxon_one_sided, Profile};
use crate::error::{Error, Result};
use crate::eval::reaches_target;
use crate::problems::Instance;
use crate::solvers::{run_portfolio, solve, SolveOptions, SolverKind};

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const METHODS_FILE: &str = "methods.csv";
pub const PROFILE_FILE: &str = "profile.csv";
pub const WILCOXON_FILE: &str = "wilcoxon.csv";

/// One line of the results file. Failed cells carry an error and no
/// objective; `time_to_best` is empty for evaluation-budget runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub instance: String,
    pub method: String,
    pub run: usize,
    pub seed: u64,
    pub objective: Option<f64>,
    pub feasible: Option<bool>,
    pub time_to_best: Option<f64>,
    pub evals_to_best: Option<u64>,
    pub evaluations: Option<u64>,
    pub error: Option<String>,
}

impl ResultRow {
    pub fn ok(&self) -> bool {
        self.error.is_none() && self.objective.is_some()
    }

    /// Effort to reach the best: seconds when recorded, else evaluations.
    pub fn effort(&self) -> Option<f64> {
        self.time_to_best.or(self.evals_to_best.map(|e| e as f64))
    }
}

/// Per (instance, method) aggregate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub instance: String,
    pub method: String,
    pub runs: usize,
    pub best: Option<f64>,
    pub rpd_best: Option<f64>,
    pub rpd_avg: Option<f64>,
    pub mean_time_to_best: Option<f64>,
    pub bks: Option<f64>,
    /// 1 when the best of the runs matches the BKS.
    pub bks_hit: u8,
}

/// Per-method totals over all instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    pub method: String,
    pub instances: usize,
    pub bks_count: usize,
    pub mean_rpd_best: Option<f64>,
    pub mean_rpd_avg: Option<f64>,
    pub mean_time_to_best: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
    pub methods: Vec<MethodRow>,
    pub failed: usize,
}

fn fnv1a(hash: &mut u64, bytes: &[u8]) {
    for &b in bytes {
        *hash ^= b as u64;
        *hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
}

/// Stable per-cell seed: FNV-1a over the cell coordinates, finished with a
/// SplitMix64 round.
pub fn cell_seed(master: u64, instance: &str, method: &str, run: usize) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    fnv1a(&mut h, &master.to_le_bytes());
    fnv1a(&mut h, instance.as_bytes());
    fnv1a(&mut h, &[0xff]);
    fnv1a(&mut h, method.as_bytes());
    fnv1a(&mut h, &[0xff]);
    fnv1a(&mut h, &(run as u64).to_le_bytes());
    let mut z = h.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Name of an instance in result files: the file stem.
pub fn instance_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Reads `instance value` lines; `#` starts a comment.
pub fn read_bks(path: &Path) -> Result<HashMap<String, f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut map = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::parse(path, i + 1, "expected: instance value"));
        };
        let v: f64 = value
            .parse()
            .map_err(|_| Error::parse(path, i + 1, format!("not a number: {value:?}")))?;
        map.insert(name.to_string(), v);
    }
    Ok(map)
}

pub fn bks_line(name: &str, value: f64) -> String {
    format!("{name} {value}")
}

/// Runs one cell; failures become rows with an error message.
pub fn run_cell(cfg: &ExperimentConfig, instance: &Instance, name: &str, method: Method, run: usize) -> ResultRow {
    let seed = cell_seed(cfg.seed, name, method.name(), run);
    let mut row = ResultRow {
        instance: name.to_string(),
        method: method.name().to_string(),
        run,
        seed,
        objective: None,
        feasible: None,
        time_to_best: None,
        evals_to_best: None,
        evaluations: None,
        error: None,
    };
    let outcome = cfg.stop_for(instance).and_then(|stop| {
        let mut opts = SolveOptions::new(seed, stop).with_q_learning(cfg.q_learning);
        opts.pool_capacity = cfg.pool_capacity;
        if !cfg.parallel {
            opts = opts.sequential();
        }
        match method {
            Method::Portfolio => run_portfolio(instance.decoder(), &SolverKind::ALL, &cfg.params, &opts).map(|r| r.best),
            Method::Solver(k) => solve(instance.decoder(), k, &cfg.params, &opts),
        }
    });
    match outcome {
        Ok(r) => {
            row.objective = Some(r.fitness.objective);
            row.feasible = Some(r.fitness.feasible);
            row.time_to_best = cfg.records_time().then_some(r.time_to_best);
            row.evals_to_best = Some(r.evals_to_best);
            row.evaluations = Some(r.evaluations);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Executes all cells on `cfg.workers` threads and writes the report files
/// into `cfg.output`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let names: Vec<String> = cfg.instances.iter().map(|p| instance_name(p)).collect();
    let loaded: Vec<Result<Instance>> = cfg
        .instances
        .iter()
        .map(|p| Instance::load(cfg.problem, p, cfg.alpha))
        .collect();
    let mut cells = Vec::new();
    for i in 0..names.len() {
        for &m in &cfg.methods {
            for r in 0..cfg.runs {
                cells.push((i, m, r));
            }
        }
    }
    let slots: Mutex<Vec<Option<ResultRow>>> = Mutex::new(vec![None; cells.len()]);
    let next = AtomicUsize::new(0);
    let work = || loop {
        let c = next.fetch_add(1, Ordering::Relaxed);
        let Some(&(i, m, r)) = cells.get(c) else { break };
        let row = match &loaded[i] {
            Ok(inst) => run_cell(cfg, inst, &names[i], m, r),
            Err(e) => ResultRow {
                instance: names[i].clone(),
                method: m.name().to_string(),
                run: r,
                seed: cell_seed(cfg.seed, &names[i], m.name(), r),
                objective: None,
                feasible: None,
                time_to_best: None,
                evals_to_best: None,
                evaluations: None,
                error: Some(e.to_string()),
            },
        };
        slots.lock().expect("result slots")[c] = Some(row);
    };
    std::thread::scope(|s| {
        for _ in 0..cfg.workers.min(cells.len()).max(1) {
            s.spawn(work);
        }
    });
    let rows: Vec<ResultRow> = slots
        .into_inner()
        .expect("result slots")
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect();

    let bks = match &cfg.bks {
        Some(p) => read_bks(p)?,
        None => HashMap::new(),
    };
    std::fs::create_dir_all(&cfg.output).map_err(|e| Error::io(&cfg.output, e))?;
    write_results(&cfg.output.join(RESULTS_FILE), &rows)?;
    let summary = summarize(&rows, &bks);
    write_csv(&cfg.output.join(SUMMARY_FILE), &summary)?;
    let methods = method_totals(&summary);
    write_csv(&cfg.output.join(METHODS_FILE), &methods)?;
    let (order, profile) = profile_from_rows(&rows, &bks, cfg.tolerance)?;
    write_text(&cfg.output.join(PROFILE_FILE), &profile.to_csv(&order))?;
    write_text(&cfg.output.join(WILCOXON_FILE), &wilcoxon_matrix(&rows, &bks))?;
    let failed = rows.iter().filter(|r| !r.ok()).count();
    Ok(Report {
        rows,
        summary,
        methods,
        failed,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let csv_err = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    if rows.is_empty() {
        let header = "instance,method,run,seed,objective,feasible,time_to_best,evals_to_best,evaluations,error\n";
        return write_text(path, header);
    }
    write_csv(path, rows)
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    r.deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| Error::parse(path, i + 2, e.to_string())))
        .collect()
}

/// Instances and methods in order of first appearance.
fn axes(rows: &[ResultRow]) -> (Vec<String>, Vec<String>) {
    let mut inst: Vec<String> = Vec::new();
    let mut meth: Vec<String> = Vec::new();
    for r in rows {
        if !inst.contains(&r.instance) {
            inst.push(r.instance.clone());
        }
        if !meth.contains(&r.method) {
            meth.push(r.method.clone());
        }
    }
    (inst, meth)
}

/// Baseline per instance: the BKS file entry, else the best objective any
/// method reached.
fn baselines(rows: &[ResultRow], bks: &HashMap<String, f64>) -> HashMap<String, f64> {
    let mut base: HashMap<String, f64> = HashMap::new();
    for r in rows.iter().filter(|r| r.ok()) {
        let z = r.objective.expect("ok row");
        let e = base.entry(r.instance.clone()).or_insert(z);
        *e = e.min(z);
    }
    for (k, &v) in bks {
        if base.contains_key(k) {
            base.insert(k.clone(), v);
        }
    }
    base
}

/// Percent deviation when the baseline is positive; otherwise 0 at the
/// baseline and infinite above it.
fn gap(z: f64, baseline: f64) -> f64 {
    match rpd(z, baseline) {
        Ok(g) => g,
        Err(_) if reaches_target(z, baseline) => 0.0,
        Err(_) => f64::INFINITY,
    }
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn summarize(rows: &[ResultRow], bks: &HashMap<String, f64>) -> Vec<SummaryRow> {
    let (inst, meth) = axes(rows);
    let mut out = Vec::new();
    for i in &inst {
        let known = bks.get(i).copied();
        for m in &meth {
            let cell: Vec<&ResultRow> = rows.iter().filter(|r| &r.instance == i && &r.method == m).collect();
            if cell.is_empty() {
                continue;
            }
            let z: Vec<f64> = cell.iter().filter_map(|r| if r.ok() { r.objective } else { None }).collect();
            let best = z.iter().copied().reduce(f64::min);
            let rpds: Option<Vec<f64>> = known.and_then(|b| z.iter().map(|&v| rpd(v, b).ok()).collect());
            let times: Vec<f64> = cell.iter().filter(|r| r.ok()).filter_map(|r| r.effort()).collect();
            out.push(SummaryRow {
                instance: i.clone(),
                method: m.clone(),
                runs: cell.len(),
                best,
                rpd_best: rpds.as_ref().and_then(|v| v.iter().copied().reduce(f64::min)),
                rpd_avg: rpds.as_deref().and_then(mean),
                mean_time_to_best: mean(&times),
                bks: known,
                bks_hit: match (best, known) {
                    (Some(z), Some(b)) if reaches_target(z, b) => 1,
                    _ => 0,
                },
            });
        }
    }
    out
}

pub fn method_totals(summary: &[SummaryRow]) -> Vec<MethodRow> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<&SummaryRow>> = HashMap::new();
    for s in summary {
        if !order.contains(&s.method) {
            order.push(s.method.clone());
        }
        groups.entry(s.method.clone()).or_default().push(s);
    }
    order
        .into_iter()
        .map(|m| {
            let g = &groups[&m];
            let pick = |f: fn(&SummaryRow) -> Option<f64>| -> Vec<f64> { g.iter().filter_map(|s| f(s)).collect() };
            MethodRow {
                instances: g.len(),
                bks_count: g.iter().map(|s| s.bks_hit as usize).sum(),
                mean_rpd_best: mean(&pick(|s| s.rpd_best)),
                mean_rpd_avg: mean(&pick(|s| s.rpd_avg)),
                mean_time_to_best: mean(&pick(|s| s.mean_time_to_best)),
                method: m,
            }
        })
        .collect()
}

/// Profile over mean time-to-best per (instance, method); returns the
/// method names in column order.
pub fn profile_from_rows(rows: &[ResultRow], bks: &HashMap<String, f64>, tolerance: f64) -> Result<(Vec<String>, Profile)> {
    let (inst, meth) = axes(rows);
    let base = baselines(rows, bks);
    let mut times = Vec::new();
    let mut gaps = Vec::new();
    for i in &inst {
        let mut t_row = Vec::new();
        let mut g_row = Vec::new();
        for m in &meth {
            let ok: Vec<&ResultRow> = rows
                .iter()
                .filter(|r| &r.instance == i && &r.method == m && r.ok())
                .collect();
            let efforts: Vec<f64> = ok.iter().filter_map(|r| r.effort()).collect();
            let best = ok.iter().filter_map(|r| r.objective).reduce(f64::min);
            t_row.push(mean(&efforts).unwrap_or(f64::INFINITY));
            g_row.push(match (best, base.get(i)) {
                (Some(z), Some(&b)) => gap(z, b),
                _ => f64::INFINITY,
            });
        }
        times.push(t_row);
        gaps.push(g_row);
    }
    Ok((meth, performance_profile(&times, &gaps, tolerance)?))
}

/// p-values of "row better than column", paired by (instance, run) on the
/// deviation from the instance baseline.
pub fn wilcoxon_matrix(rows: &[ResultRow], bks: &HashMap<String, f64>) -> String {
    let (_, meth) = axes(rows);
    let base = baselines(rows, bks);
    let mut obs: HashMap<&str, BTreeMap<(String, usize), f64>> = HashMap::new();
    for r in rows.iter().filter(|r| r.ok()) {
        let b = base[&r.instance];
        let z = r.objective.expect("ok row");
        let v = if b > 0.0 { gap(z, b) } else { z - b };
        obs.entry(r.method.as_str()).or_default().insert((r.instance.clone(), r.run), v);
    }
    let empty = BTreeMap::new();
    let mut s = String::from("row");
    for m in &meth {
        s.push(',');
        s.push_str(m);
    }
    s.push('\n');
    for a in &meth {
        s.push_str(a);
        for b in &meth {
            s.push(',');
            if a == b {
                s.push('-');
                continue;
            }
            let xa = obs.get(a.as_str()).unwrap_or(&empty);
            let xb = obs.get(b.as_str()).unwrap_or(&empty);
            let (x, y): (Vec<f64>, Vec<f64>) = xa
                .iter()
                .filter_map(|(k, &v)| xb.get(k).map(|&w| (v, w)))
                .unzip();
            match wilcoxon_one_sided(&x, &y) {
                Ok(w) => s.push_str(&format!("{:.6e}", w.p_value)),
                Err(_) => s.push_str("NA"),
            }
        }
        s.push('\n');
    }
    s
}

/// Default output location next to a results file.
pub fn sibling(path: &Path, name: &str) -> PathBuf {
    path.parent().unwrap_or(Path::new(".")).join(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(instance: &str, method: &str, run: usize, z: f64, t: f64) -> ResultRow {
        ResultRow {
            instance: instance.into(),
            method: method.into(),
            run,
            seed: 0,
            objective: Some(z),
            feasible: Some(true),
            time_to_best: Some(t),
            evals_to_best: Some(1),
            evaluations: Some(1),
            error: None,
        }
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        let a = cell_seed(1, "x", "SA", 0);
        assert_eq!(a, cell_seed(1, "x", "SA", 0));
        assert_ne!(a, cell_seed(1, "x", "SA", 1));
        assert_ne!(a, cell_seed(2, "x", "SA", 0));
        assert_ne!(a, cell_seed(1, "y", "SA", 0));
        assert_ne!(a, cell_seed(1, "x", "GA", 0));
        assert_ne!(cell_seed(1, "ab", "c", 0), cell_seed(1, "a", "bc", 0));
    }

    #[test]
    fn summary_values() {
        let rows = vec![
            row("i", "A", 0, 110.0, 2.0),
            row("i", "A", 1, 100.0, 4.0),
            row("i", "B", 0, 120.0, 1.0),
        ];
        let bks = HashMap::from([("i".to_string(), 100.0)]);
        let s = summarize(&rows, &bks);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].best, Some(100.0));
        assert_eq!(s[0].rpd_best, Some(0.0));
        assert_eq!(s[0].rpd_avg, Some(5.0));
        assert_eq!(s[0].mean_time_to_best, Some(3.0));
        assert_eq!(s[0].bks_hit, 1);
        assert_eq!(s[1].bks_hit, 0);
        let m = method_totals(&s);
        assert_eq!(m[0].bks_count, 1);
        assert_eq!(m[1].mean_rpd_best, Some(20.0));
    }

    #[test]
    fn zero_baseline_has_no_rpd() {
        let rows = vec![row("i", "A", 0, 0.0, 1.0)];
        let bks = HashMap::from([("i".to_string(), 0.0)]);
        let s = summarize(&rows, &bks);
        assert_eq!(s[0].rpd_best, None);
        assert_eq!(s[0].bks_hit, 1);
        let (_, p) = profile_from_rows(&rows, &bks, 0.0).unwrap();
        assert_eq!(p.rho(0, 1.0), 1.0);
    }

    #[test]
    fn failed_rows_are_kept() {
        let mut bad = row("i", "A", 1, 0.0, 0.0);
        bad.objective = None;
        bad.error = Some("boom".into());
        let rows = vec![row("i", "A", 0, 5.0, 1.0), bad];
        let s = summarize(&rows, &HashMap::new());
        assert_eq!(s[0].runs, 2);
        assert_eq!(s[0].best, Some(5.0));
    }

    #[test]
    fn matrix_shape() {
        let mut rows = Vec::new();
        for r in 0..6 {
            rows.push(row("i", "A", r, 10.0 + r as f64, 1.0));
            rows.push(row("i", "B", r, 20.0 + r as f64, 1.0));
        }
        let m = wilcoxon_matrix(&rows, &HashMap::new());
        let lines: Vec<&str> = m.lines().collect();
        assert_eq!(lines[0], "row,A,B");
        assert_eq!(lines[1], format!("A,-,{:.6e}", 1.0 / 64.0));
        assert_eq!(lines[2], "B,1.000000e0,-");
    }

    #[test]
    fn results_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        let mut rows = vec![row("a,b", "SA", 0, 1.5, 0.25)];
        rows[0].time_to_best = None;
        write_results(&p, &rows).unwrap();
        assert_eq!(read_results(&p).unwrap(), rows);
    }

    #[test]
    fn bks_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bks.txt");
        std::fs::write(&p, "# name value\nx 12.5\n\ny 3\n").unwrap();
        let m = read_bks(&p).unwrap();
        assert_eq!(m["x"], 12.5);
        assert_eq!(m["y"], 3.0);
        std::fs::write(&p, "x\n").unwrap();
        assert!(matches!(read_bks(&p), Err(Error::Parse { line: 1, .. })));
    }
}
