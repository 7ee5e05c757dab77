//! The eight metaheuristics and the portfolio that runs them against one
//! shared elite pool.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use crate::control::QController;
use crate::error::{Error, Result};
use crate::eval::{Evaluator, RunResult, StopCriterion, TracePoint};
use crate::keys::{Decoder, RngStream};
use crate::pool::{init_pool, ElitePool, SharedPool, DEFAULT_CAPACITY};

mod brkga;
mod ga;
mod grasp;
mod ils;
mod lns;
pub mod params;
mod pso;
mod sa;
mod vns;

pub use brkga::{partition_sizes, run_brkga};
pub use ga::run_ga;
pub use grasp::run_grasp;
pub use ils::run_ils;
pub use lns::{lns_repair, run_lns};
pub use params::{
    BrkgaParams, GaParams, GraspParams, IlsParams, LnsParams, ParamSet, PsoParams, SaParams,
    Tunable, VnsParams,
};
pub use pso::{pso_step, run_pso};
pub use sa::run_sa;
pub use vns::run_vns;

/// Annealing temperatures below this are reset to the initial value.
pub const REHEAT_THRESHOLD: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    Brkga,
    Ga,
    Sa,
    Grasp,
    Ils,
    Vns,
    Pso,
    Lns,
}

impl SolverKind {
    pub const ALL: [SolverKind; 8] = [
        SolverKind::Brkga,
        SolverKind::Ga,
        SolverKind::Sa,
        SolverKind::Grasp,
        SolverKind::Ils,
        SolverKind::Vns,
        SolverKind::Pso,
        SolverKind::Lns,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Brkga => "BRKGA",
            SolverKind::Ga => "GA",
            SolverKind::Sa => "SA",
            SolverKind::Grasp => "GRASP",
            SolverKind::Ils => "ILS",
            SolverKind::Vns => "VNS",
            SolverKind::Pso => "PSO",
            SolverKind::Lns => "LNS",
        }
    }

    /// RNG stream of this solver inside a run; stream 0 seeds the pool.
    pub fn stream(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown solver {s:?}")))
    }
}

/// Metropolis rule: always accept `delta <= 0`, otherwise with probability
/// `exp(-delta / t)`.
pub fn metropolis_accept(delta: f64, t: f64, rng: &mut RngStream) -> bool {
    delta <= 0.0 || rng.unit() < (-delta / t).exp()
}

/// `round(x)` with halves rounded up.
pub(crate) fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor().max(0.0) as usize
}

/// Parameters of one solver, optionally re-chosen each iteration by a
/// Q-learning controller.
pub struct Schedule<P: Tunable + Clone> {
    params: P,
    controller: Option<QController>,
    last_best: f64,
    started: bool,
}

impl<P: Tunable + Clone> Schedule<P> {
    pub fn new(params: P, control: Option<RngStream>) -> Result<Self> {
        let controller = match control {
            Some(rng) => Some(QController::new(params.grid()?, &params.values(), rng)),
            None => None,
        };
        Ok(Schedule {
            params,
            controller,
            last_best: f64::INFINITY,
            started: false,
        })
    }

    /// Configuration for the iteration about to start. With control
    /// enabled, the previous iteration is rewarded by how the solver's best
    /// objective moved.
    pub fn next(&mut self, ev: &Evaluator<'_>) -> &P {
        if let Some(c) = self.controller.as_mut() {
            let best = ev.best_objective();
            let progress = ev.progress();
            let values = if self.started {
                c.step(self.last_best, best, progress)
            } else {
                self.started = true;
                c.start(progress)
            };
            self.params.apply(&values);
            self.last_best = best;
        }
        &self.params
    }

    pub fn params(&self) -> &P {
        &self.params
    }
}

/// How a run is executed.
#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub seed: u64,
    pub stop: StopCriterion,
    pub pool_capacity: usize,
    /// Let each solver tune its parameters online.
    pub q_learning: bool,
    /// Run solvers on separate threads. When false they run one after
    /// another, each with the full budget, which makes runs reproducible.
    pub parallel: bool,
}

impl SolveOptions {
    pub fn new(seed: u64, stop: StopCriterion) -> Self {
        SolveOptions {
            seed,
            stop,
            pool_capacity: DEFAULT_CAPACITY,
            q_learning: false,
            parallel: true,
        }
    }

    pub fn sequential(mut self) -> Self {
        self.parallel = false;
        self
    }

    pub fn with_q_learning(mut self, on: bool) -> Self {
        self.q_learning = on;
        self
    }
}

/// Runs one solver to completion on an existing evaluator.
pub fn run_solver(
    kind: SolverKind,
    params: &ParamSet,
    q_learning: bool,
    ev: &mut Evaluator<'_>,
    rng: &mut RngStream,
) -> Result<()> {
    let control = q_learning.then(|| RngStream::new(rng.seed(), 100 + kind.stream()));
    match kind {
        SolverKind::Brkga => run_brkga(Schedule::new(params.brkga, control)?, ev, rng),
        SolverKind::Ga => run_ga(Schedule::new(params.ga, control)?, ev, rng),
        SolverKind::Sa => run_sa(Schedule::new(params.sa, control)?, ev, rng),
        SolverKind::Grasp => run_grasp(Schedule::new(params.grasp, control)?, ev, rng),
        SolverKind::Ils => run_ils(Schedule::new(params.ils, control)?, ev, rng),
        SolverKind::Vns => run_vns(Schedule::new(params.vns, control)?, ev, rng),
        SolverKind::Pso => run_pso(Schedule::new(params.pso, control)?, ev, rng),
        SolverKind::Lns => run_lns(Schedule::new(params.lns, control)?, ev, rng),
    }
}

#[derive(Clone, Debug)]
pub struct PortfolioResult {
    /// Overall best, with the merged improvement trace.
    pub best: RunResult,
    /// Best of the pool initialization phase.
    pub init: Option<RunResult>,
    /// One result per enabled solver, in the order given.
    pub solvers: Vec<RunResult>,
    pub pool: ElitePool,
}

/// Initializes one shared pool and runs every solver in `kinds` against it.
pub fn run_portfolio(
    decoder: &dyn Decoder,
    kinds: &[SolverKind],
    params: &ParamSet,
    opts: &SolveOptions,
) -> Result<PortfolioResult> {
    if kinds.is_empty() {
        return Err(Error::InvalidParameter("no solver enabled".into()));
    }
    if decoder.dimension() == 0 {
        return Err(Error::InvalidDimension(0));
    }
    params.validate()?;
    let start = Instant::now();
    let mut init_rng = RngStream::new(opts.seed, 0);
    let mut init_ev = Evaluator::new(decoder, None, opts.stop, start);
    let pool = init_pool(opts.pool_capacity, &mut init_ev, &mut init_rng)?;
    let init = init_ev.into_result("init");
    let shared = SharedPool::new(pool);

    let run_one = |kind: SolverKind, start: Instant| -> Result<Option<RunResult>> {
        let mut rng = RngStream::new(opts.seed, kind.stream());
        let mut ev = Evaluator::new(decoder, Some(&shared), opts.stop, start);
        run_solver(kind, params, opts.q_learning, &mut ev, &mut rng)?;
        Ok(ev.into_result(kind.name()))
    };

    let outcomes: Vec<Result<Option<RunResult>>> = if opts.parallel && kinds.len() > 1 {
        std::thread::scope(|s| {
            let handles: Vec<_> = kinds
                .iter()
                .map(|&k| s.spawn(move || run_one(k, start)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|e| std::panic::resume_unwind(e)))
                .collect()
        })
    } else {
        kinds
            .iter()
            .map(|&k| run_one(k, if kinds.len() == 1 { start } else { Instant::now() }))
            .collect()
    };
    let mut solvers = Vec::with_capacity(kinds.len());
    for o in outcomes {
        if let Some(r) = o? {
            solvers.push(r);
        }
    }

    let concurrent = opts.parallel && kinds.len() > 1;
    let best = merge(init.as_ref(), &solvers, concurrent).ok_or(Error::EmptyPool)?;
    Ok(PortfolioResult {
        best,
        init,
        solvers,
        pool: shared.into_inner(),
    })
}

/// Runs one solver with its own pool, exactly as a one-solver portfolio.
pub fn solve(
    decoder: &dyn Decoder,
    kind: SolverKind,
    params: &ParamSet,
    opts: &SolveOptions,
) -> Result<RunResult> {
    let mut r = run_portfolio(decoder, &[kind], params, opts)?;
    r.best.solver = kind.name().to_string();
    Ok(r.best)
}

/// Ties on the objective go to the earliest find when the solvers shared a
/// clock, otherwise to the first source in order.
fn merge(init: Option<&RunResult>, solvers: &[RunResult], concurrent: bool) -> Option<RunResult> {
    let sources: Vec<&RunResult> = init.into_iter().chain(solvers).collect();
    let winner = sources
        .iter()
        .copied()
        .min_by(|a, b| {
            a.fitness
                .objective
                .total_cmp(&b.fitness.objective)
                .then(if concurrent { a.time_to_best.total_cmp(&b.time_to_best) } else { std::cmp::Ordering::Equal })
        })?;
    let mut points: Vec<TracePoint> = sources.iter().flat_map(|r| r.trace.iter().copied()).collect();
    points.sort_by(|a, b| a.seconds.total_cmp(&b.seconds).then(b.objective.total_cmp(&a.objective)));
    let mut trace: Vec<TracePoint> = Vec::new();
    for p in points {
        if trace.last().is_none_or(|l| p.objective < l.objective) {
            trace.push(p);
        }
    }
    let evaluations = sources.iter().map(|r| r.evaluations).sum();
    Some(RunResult {
        solver: "portfolio".into(),
        keys: winner.keys.clone(),
        fitness: winner.fitness,
        time_to_best: winner.time_to_best,
        evals_to_best: winner.evals_to_best,
        evaluations,
        trace,
    })
}

/// Writes `solver,seconds,objective` lines for every trace point.
pub fn write_traces(path: &Path, results: &[RunResult]) -> Result<()> {
    let mut out = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    writeln!(out, "solver,seconds,evaluations,objective").map_err(|e| Error::io(path, e))?;
    for r in results {
        for p in &r.trace {
            writeln!(out, "{},{},{},{}", r.solver, p.seconds, p.evaluations, p.objective)
                .map_err(|e| Error::io(path, e))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::PMedianInstance;

    #[test]
    fn names_round_trip() {
        for k in SolverKind::ALL {
            assert_eq!(k.name().parse::<SolverKind>().unwrap(), k);
            assert_eq!(k.name().to_lowercase().parse::<SolverKind>().unwrap(), k);
        }
        assert!("tabu".parse::<SolverKind>().is_err());
    }

    #[test]
    fn metropolis_frequencies() {
        let mut rng = RngStream::new(17, 0);
        for (delta, t) in [(1.0, 1.0), (5.0, 10.0), (2.0, 0.5)] {
            let expect = f64::exp(-delta / t);
            let hits = (0..10_000).filter(|_| metropolis_accept(delta, t, &mut rng)).count();
            let freq = hits as f64 / 10_000.0;
            assert!((freq - expect).abs() < 0.05, "{freq} vs {expect}");
        }
        assert!((0..100).all(|_| metropolis_accept(0.0, 1e-9, &mut rng)));
        assert!((0..100).all(|_| metropolis_accept(-3.0, 1e-9, &mut rng)));
    }

    #[test]
    fn rounding_half_up() {
        assert_eq!(round_half_up(2.5), 3);
        assert_eq!(round_half_up(2.49), 2);
        assert_eq!(round_half_up(0.0), 0);
    }

    fn tiny() -> PMedianInstance {
        PMedianInstance::random(10, 2, 1, &mut RngStream::new(21, 0)).unwrap()
    }

    #[test]
    fn single_solver_portfolio_equals_solve() {
        let inst = tiny();
        let params = ParamSet::pmedian();
        let opts = SolveOptions::new(3, StopCriterion::evaluations(3000).unwrap()).sequential();
        for kind in SolverKind::ALL {
            let a = solve(&inst, kind, &params, &opts).unwrap();
            let b = run_portfolio(&inst, &[kind], &params, &opts).unwrap();
            assert_eq!(a.keys, b.best.keys, "{kind}");
            assert_eq!(a.fitness, b.best.fitness);
            assert_eq!(a.evaluations, b.best.evaluations);
        }
    }

    #[test]
    fn portfolio_best_dominates_members() {
        let inst = tiny();
        let opts = SolveOptions::new(5, StopCriterion::evaluations(2000).unwrap());
        let r = run_portfolio(&inst, &SolverKind::ALL, &ParamSet::pmedian(), &opts).unwrap();
        for s in &r.solvers {
            assert!(r.best.fitness.objective <= s.fitness.objective);
        }
        assert!(r.pool.best().unwrap().fitness.objective <= r.best.fitness.objective + 1e-9);
        for w in r.best.trace.windows(2) {
            assert!(w[1].objective < w[0].objective);
            assert!(w[1].seconds >= w[0].seconds);
        }
    }

    #[test]
    fn empty_portfolio_rejected() {
        let opts = SolveOptions::new(1, StopCriterion::evaluations(10).unwrap());
        assert!(run_portfolio(&tiny(), &[], &ParamSet::pmedian(), &opts).is_err());
    }

    #[test]
    fn trace_csv() {
        let inst = tiny();
        let opts = SolveOptions::new(1, StopCriterion::evaluations(500).unwrap()).sequential();
        let r = solve(&inst, SolverKind::Ils, &ParamSet::pmedian(), &opts).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("trace.csv");
        write_traces(&p, std::slice::from_ref(&r)).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 1 + r.trace.len());
        assert!(text.starts_with("solver,seconds,evaluations,objective\n"));
    }
}
