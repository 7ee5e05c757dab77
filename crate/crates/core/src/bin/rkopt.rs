use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rkopt::harness::experiment::{
    bks_line, instance_name, method_totals, profile_from_rows, read_bks, read_results, run_experiment,
    sibling, wilcoxon_matrix, write_results, ResultRow,
};
use rkopt::harness::{ExperimentConfig, Method};
use rkopt::keys::RngStream;
use rkopt::problems::{
    Instance, NcgppInstance, PMedianInstance, ProblemKind, SetCoverInstance, ThlpInstance, TspInstance,
};
use rkopt::solvers::{run_portfolio, write_traces, ParamSet, SolveOptions, SolverKind};
use rkopt::{Error, Result, StopCriterion};

#[derive(Parser)]
#[command(name = "rkopt", version, about = "Random-key metaheuristic portfolio")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print the best solution.
    Solve(SolveArgs),
    /// Run a full experiment from a config file.
    Bench {
        config: PathBuf,
        /// Override the number of concurrent cells.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Build a performance-profile CSV from a results CSV.
    Profile {
        results: PathBuf,
        #[arg(long)]
        bks: Option<PathBuf>,
        /// Percent deviation above which a run counts as unsolved.
        #[arg(long, default_value_t = 0.0)]
        tolerance: f64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Build the signed-rank p-value matrix from a results CSV.
    Stats {
        results: PathBuf,
        #[arg(long)]
        bks: Option<PathBuf>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Solve a tiny instance exhaustively and print its BKS line.
    Oracle {
        #[command(flatten)]
        instance: InstanceArgs,
    },
    /// Write a random instance.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, short)]
    problem: ProblemKind,
    /// Cities, set-cover rows, vertices, base stations or nodes.
    #[arg(long)]
    n: usize,
    /// Set-cover columns, medians, RNCs or hubs (unused for the TSP).
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Set-cover density, NCGPP capacity slack or THLP discount.
    #[arg(long)]
    param: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct InstanceArgs {
    /// tsp, setcover, anpmp, ncgpp or thlp.
    #[arg(long, short)]
    problem: ProblemKind,
    #[arg(long, short)]
    instance: PathBuf,
    /// Medians each vertex is assigned to (p-median family only).
    #[arg(long)]
    alpha: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// "portfolio" or one solver name.
    #[arg(long, short, default_value = "portfolio")]
    method: Method,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Time limit in seconds; defaults to the per-problem rule unless
    /// only --max-evals is given.
    #[arg(long)]
    time: Option<f64>,
    /// Evaluation budget per solver.
    #[arg(long)]
    max_evals: Option<u64>,
    /// Stop once this objective is reached.
    #[arg(long)]
    target: Option<f64>,
    #[arg(long)]
    q_learning: bool,
    /// Run portfolio solvers one after another on one thread.
    #[arg(long)]
    sequential: bool,
    /// Write a one-row results CSV here.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Write improvement traces here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

fn load(a: &InstanceArgs) -> Result<Instance> {
    Instance::load(a.problem, &a.instance, a.alpha)
}

fn solve_cmd(a: &SolveArgs) -> Result<()> {
    let inst = load(&a.instance)?;
    let timed = a.time.is_some() || a.max_evals.is_none();
    let mut stop = match (a.time, a.max_evals) {
        (Some(t), Some(m)) => StopCriterion::time(t)?.with_max_evaluations(m),
        (Some(t), None) => StopCriterion::time(t)?,
        (None, Some(m)) => StopCriterion::evaluations(m)?,
        (None, None) => StopCriterion::time(inst.default_time_limit())?,
    };
    if let Some(t) = a.target {
        stop = stop.with_target(t);
    }
    let mut opts = SolveOptions::new(a.seed, stop).with_q_learning(a.q_learning);
    if a.sequential {
        opts = opts.sequential();
    }
    let params = ParamSet::for_problem(inst.kind());
    let kinds: Vec<SolverKind> = match a.method {
        Method::Portfolio => SolverKind::ALL.to_vec(),
        Method::Solver(k) => vec![k],
    };
    let out = run_portfolio(inst.decoder(), &kinds, &params, &opts)?;
    let best = &out.best;
    println!("objective: {}", best.fitness.objective);
    println!("feasible: {}", best.fitness.feasible);
    println!("time_to_best: {:.6}", best.time_to_best);
    println!("evaluations: {}", best.evaluations);
    println!("solution: {}", inst.decoder().describe(best.keys.as_slice()));
    if let Some(path) = &a.output {
        let row = ResultRow {
            instance: instance_name(&a.instance.instance),
            method: a.method.name().to_string(),
            run: 0,
            seed: a.seed,
            objective: Some(best.fitness.objective),
            feasible: Some(best.fitness.feasible),
            time_to_best: timed.then_some(best.time_to_best),
            evals_to_best: Some(best.evals_to_best),
            evaluations: Some(best.evaluations),
            error: None,
        };
        write_results(path, &[row])?;
    }
    if let Some(path) = &a.trace {
        let mut all = vec![out.best.clone()];
        all.extend(out.solvers.iter().cloned());
        write_traces(path, &all)?;
    }
    Ok(())
}

fn generate(a: &GenerateArgs) -> Result<()> {
    let mut rng = RngStream::new(a.seed, 0);
    let inst = match a.problem {
        ProblemKind::Tsp => Instance::Tsp(TspInstance::random(a.n, &mut rng)?),
        ProblemKind::SetCover => {
            Instance::SetCover(SetCoverInstance::random(a.n, a.k, a.param.unwrap_or(0.3), &mut rng)?)
        }
        ProblemKind::PMedian => Instance::PMedian(PMedianInstance::random(a.n, a.k, 1, &mut rng)?),
        ProblemKind::Ncgpp => Instance::Ncgpp(NcgppInstance::random(a.n, a.k, a.param.unwrap_or(0.1), &mut rng)?),
        ProblemKind::Thlp => Instance::Thlp(ThlpInstance::random(a.n, a.k, a.param.unwrap_or(0.5), &mut rng)?),
    };
    inst.write(&a.output)
}

fn bks_map(path: Option<&Path>) -> Result<HashMap<String, f64>> {
    path.map_or_else(|| Ok(HashMap::new()), read_bks)
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Solve(a) => solve_cmd(&a).map(|_| true),
        Command::Bench { config, workers } => {
            let mut cfg = ExperimentConfig::read(&config)?;
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let report = run_experiment(&cfg)?;
            println!("method,instances,bks_count,mean_rpd_best,mean_time_to_best");
            for m in method_totals(&report.summary) {
                let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.4}"));
                println!(
                    "{},{},{},{},{}",
                    m.method,
                    m.instances,
                    m.bks_count,
                    opt(m.mean_rpd_best),
                    opt(m.mean_time_to_best)
                );
            }
            for r in report.rows.iter().filter(|r| !r.ok()) {
                eprintln!(
                    "failed: {} {} run {}: {}",
                    r.instance,
                    r.method,
                    r.run,
                    r.error.as_deref().unwrap_or("no result")
                );
            }
            println!("results in {}", cfg.output.display());
            Ok(report.failed == 0)
        }
        Command::Profile { results, bks, tolerance, output } => {
            let rows = read_results(&results)?;
            let (names, profile) = profile_from_rows(&rows, &bks_map(bks.as_deref())?, tolerance)?;
            let out = output.unwrap_or_else(|| sibling(&results, "profile.csv"));
            write(&out, &profile.to_csv(&names))?;
            println!("{}", out.display());
            Ok(true)
        }
        Command::Stats { results, bks, output } => {
            let rows = read_results(&results)?;
            let matrix = wilcoxon_matrix(&rows, &bks_map(bks.as_deref())?);
            let out = output.unwrap_or_else(|| sibling(&results, "wilcoxon.csv"));
            write(&out, &matrix)?;
            print!("{matrix}");
            Ok(true)
        }
        Command::Oracle { instance } => {
            let inst = load(&instance)?;
            let opt = inst.brute_force()?;
            println!("{}", bks_line(&instance_name(&instance.instance), opt.objective));
            eprintln!("{}", opt.certificate);
            Ok(true)
        }
        Command::Generate(a) => generate(&a).map(|_| true),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
