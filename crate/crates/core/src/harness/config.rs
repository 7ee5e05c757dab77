//! Experiment configuration read from plain `key = value` text.
//!
//! ```text
//! problem = anpmp
//! alpha = 2
//! instances = data/a.txt data/b.txt
//! methods = portfolio BRKGA SA
//! runs = 5
//! time_limit = auto          # or seconds, or "none" with max_evaluations
//! max_evaluations = 20000
//! seed = 7
//! output = out
//! bks = data/bks.txt
//! param.SA.t0 = 100
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::eval::StopCriterion;
use crate::pool::DEFAULT_CAPACITY;
use crate::problems::{Instance, ProblemKind};
use crate::solvers::{ParamSet, SolverKind};

/// A compared method: the full portfolio or one solver on its own.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Portfolio,
    Solver(SolverKind),
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Portfolio => "RKO",
            Method::Solver(k) => k.name(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("portfolio") || s.eq_ignore_ascii_case("rko") {
            Ok(Method::Portfolio)
        } else {
            s.parse().map(Method::Solver)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeRule {
    /// Per-problem default from the instance size.
    Auto,
    Seconds(f64),
    /// Evaluation budget only.
    Unlimited,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub alpha: Option<usize>,
    pub instances: Vec<PathBuf>,
    pub methods: Vec<Method>,
    pub params: ParamSet,
    pub q_learning: bool,
    pub runs: usize,
    pub time_limit: TimeRule,
    pub max_evaluations: Option<u64>,
    pub seed: u64,
    pub output: PathBuf,
    pub bks: Option<PathBuf>,
    /// Performance-profile tolerance in percent.
    pub tolerance: f64,
    /// Cells executed concurrently.
    pub workers: usize,
    /// Portfolio solvers on separate threads.
    pub parallel: bool,
    pub pool_capacity: usize,
}

impl ExperimentConfig {
    /// Defaults for everything but the instance list.
    pub fn new(problem: ProblemKind, instances: Vec<PathBuf>, output: PathBuf) -> Self {
        let mut methods = vec![Method::Portfolio];
        methods.extend(SolverKind::ALL.map(Method::Solver));
        ExperimentConfig {
            problem,
            alpha: None,
            instances,
            methods,
            params: ParamSet::for_problem(problem),
            q_learning: false,
            runs: 5,
            time_limit: TimeRule::Auto,
            max_evaluations: None,
            seed: 1,
            output,
            bks: None,
            tolerance: 0.0,
            workers: 1,
            parallel: true,
            pool_capacity: DEFAULT_CAPACITY,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(path, &text, base)
    }

    /// Parses config text; relative paths are taken from `base`.
    pub fn parse(path: &Path, text: &str, base: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        let mut problem = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(path, i + 1, "expected key = value"))?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if k == "problem" {
                problem = Some(v.parse::<ProblemKind>().map_err(|e| Error::parse(path, i + 1, e.to_string()))?);
            }
            entries.push((i + 1, k, v));
        }
        let problem = problem.ok_or_else(|| Error::parse(path, 0, "missing problem"))?;
        let mut cfg = ExperimentConfig::new(problem, Vec::new(), base.join("results"));
        let resolve = |v: &str| -> PathBuf {
            let p = Path::new(v);
            if p.is_absolute() { p.to_path_buf() } else { base.join(p) }
        };
        let items = |v: &str| -> Vec<String> {
            v.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect()
        };
        let mut methods = None;
        let mut overrides = Vec::new();
        for (line, k, v) in entries {
            let bad = |msg: String| Error::parse(path, line, msg);
            let num = |v: &str| -> Result<f64> {
                v.parse::<f64>().map_err(|_| bad(format!("{k}: not a number: {v:?}")))
            };
            let int = |v: &str| -> Result<u64> {
                v.parse::<u64>().map_err(|_| bad(format!("{k}: not a whole number: {v:?}")))
            };
            match k.as_str() {
                "problem" => {}
                "alpha" => cfg.alpha = Some(int(&v)? as usize),
                "instances" | "instance" => cfg.instances.extend(items(&v).iter().map(|s| resolve(s))),
                "methods" | "solvers" => {
                    let list: &mut Vec<Method> = methods.get_or_insert_with(Vec::new);
                    for s in items(&v) {
                        if s.eq_ignore_ascii_case("all") {
                            list.extend(SolverKind::ALL.map(Method::Solver));
                        } else {
                            list.push(s.parse().map_err(|e: Error| bad(e.to_string()))?);
                        }
                    }
                }
                "params" => {
                    cfg.q_learning = match v.to_ascii_lowercase().as_str() {
                        "table" => false,
                        "qlearning" | "q-learning" | "q_learning" => true,
                        _ => return Err(bad(format!("params must be table or qlearning, got {v:?}"))),
                    }
                }
                "runs" => cfg.runs = int(&v)? as usize,
                "time_limit" => {
                    cfg.time_limit = match v.to_ascii_lowercase().as_str() {
                        "auto" => TimeRule::Auto,
                        "none" => TimeRule::Unlimited,
                        _ => TimeRule::Seconds(num(&v)?),
                    }
                }
                "max_evaluations" => cfg.max_evaluations = Some(int(&v)?),
                "seed" => cfg.seed = int(&v)?,
                "output" => cfg.output = resolve(&v),
                "bks" => cfg.bks = Some(resolve(&v)),
                "tolerance" => cfg.tolerance = num(&v)?,
                "workers" => cfg.workers = int(&v)? as usize,
                "parallel" => {
                    cfg.parallel = v.parse::<bool>().map_err(|_| bad(format!("parallel must be true or false, got {v:?}")))?
                }
                "pool_size" => cfg.pool_capacity = int(&v)? as usize,
                _ => match k.strip_prefix("param.").and_then(|r| r.split_once('.')) {
                    Some((solver, name)) => {
                        let kind: SolverKind = solver.parse().map_err(|e: Error| bad(e.to_string()))?;
                        overrides.push((line, kind, name.to_string(), num(&v)?));
                    }
                    None => return Err(bad(format!("unknown key {k:?}"))),
                },
            }
        }
        if let Some(m) = methods {
            cfg.methods = m;
        }
        for (line, kind, name, v) in overrides {
            cfg.params.set(kind, &name, v).map_err(|e| Error::parse(path, line, e.to_string()))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.runs == 0 {
            return fail("runs must be at least 1");
        }
        if self.instances.is_empty() {
            return fail("no instances given");
        }
        if self.methods.is_empty() {
            return fail("no methods given");
        }
        if self.workers == 0 {
            return fail("workers must be at least 1");
        }
        if self.problem == ProblemKind::PMedian && self.alpha.is_none() {
            return fail("the p-median problem needs alpha");
        }
        match self.time_limit {
            TimeRule::Seconds(t) if !(t > 0.0 && t.is_finite()) => return fail("time limit must be positive"),
            TimeRule::Unlimited if self.max_evaluations.is_none() => {
                return fail("time_limit = none needs max_evaluations")
            }
            _ => {}
        }
        if self.max_evaluations == Some(0) {
            return fail("max_evaluations must be positive");
        }
        self.params.validate()
    }

    /// Stop rule for one cell on `instance`.
    pub fn stop_for(&self, instance: &Instance) -> Result<StopCriterion> {
        let stop = match self.time_limit {
            TimeRule::Auto => Some(StopCriterion::time(instance.default_time_limit())?),
            TimeRule::Seconds(t) => Some(StopCriterion::time(t)?),
            TimeRule::Unlimited => None,
        };
        match (stop, self.max_evaluations) {
            (Some(s), Some(m)) => Ok(s.with_max_evaluations(m)),
            (Some(s), None) => Ok(s),
            (None, Some(m)) => StopCriterion::evaluations(m),
            (None, None) => Err(Error::InvalidParameter("no stop rule".into())),
        }
    }

    /// Wall-clock columns are only meaningful under a time limit.
    pub fn records_time(&self) -> bool {
        self.time_limit != TimeRule::Unlimited
    }
}
