//! Central evaluation point for a solver: counts decodes, enforces the stop
//! criterion, keeps the best solution seen and forwards every improvement to
//! the shared elite pool.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::keys::{Decoder, Fitness, RandomKeys};
use crate::pool::SharedPool;

/// Decodes between two wall-clock reads.
const CLOCK_STRIDE: u64 = 64;

/// When a run stops. At least one of the time or evaluation bounds is set;
/// `target` additionally stops as soon as an objective at or below it is seen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StopCriterion {
    pub time_limit: Option<Duration>,
    pub max_evaluations: Option<u64>,
    pub target: Option<f64>,
}

impl StopCriterion {
    pub fn time(seconds: f64) -> Result<Self> {
        if !(seconds > 0.0) || !seconds.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time limit must be positive, got {seconds}"
            )));
        }
        Ok(StopCriterion {
            time_limit: Some(Duration::from_secs_f64(seconds)),
            max_evaluations: None,
            target: None,
        })
    }

    pub fn evaluations(max: u64) -> Result<Self> {
        if max == 0 {
            return Err(Error::InvalidParameter("evaluation budget must be positive".into()));
        }
        Ok(StopCriterion {
            time_limit: None,
            max_evaluations: Some(max),
            target: None,
        })
    }

    pub fn with_max_evaluations(mut self, max: u64) -> Self {
        self.max_evaluations = Some(max);
        self
    }

    pub fn with_target(mut self, target: f64) -> Self {
        self.target = Some(target);
        self
    }

    /// Fraction of the budget consumed, in `[0, 1]`.
    pub fn progress(&self, elapsed: Duration, evaluations: u64) -> f64 {
        let by_time = self
            .time_limit
            .map(|t| elapsed.as_secs_f64() / t.as_secs_f64());
        let by_evals = self
            .max_evaluations
            .map(|m| evaluations as f64 / m as f64);
        let p = match (by_time, by_evals) {
            (Some(a), Some(b)) => a.max(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => 0.0,
        };
        p.clamp(0.0, 1.0)
    }
}

/// `target` counts as reached once the objective is within a relative 1e-9.
pub fn reaches_target(objective: f64, target: f64) -> bool {
    objective <= target + 1e-9 * target.abs().max(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint {
    pub seconds: f64,
    pub evaluations: u64,
    pub objective: f64,
}

/// Outcome of one solver run.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub solver: String,
    pub keys: RandomKeys,
    pub fitness: Fitness,
    pub time_to_best: f64,
    pub evals_to_best: u64,
    pub evaluations: u64,
    /// Strictly decreasing objectives, non-decreasing times.
    pub trace: Vec<TracePoint>,
}

pub struct Evaluator<'a> {
    decoder: &'a dyn Decoder,
    pool: Option<&'a SharedPool>,
    stop: StopCriterion,
    start: Instant,
    evals: u64,
    next_clock_check: u64,
    out_of_time: bool,
    best: Option<(RandomKeys, Fitness)>,
    time_to_best: f64,
    evals_to_best: u64,
    trace: Vec<TracePoint>,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        decoder: &'a dyn Decoder,
        pool: Option<&'a SharedPool>,
        stop: StopCriterion,
        start: Instant,
    ) -> Self {
        Evaluator {
            decoder,
            pool,
            stop,
            start,
            evals: 0,
            next_clock_check: 0,
            out_of_time: false,
            best: None,
            time_to_best: 0.0,
            evals_to_best: 0,
            trace: Vec::new(),
        }
    }

    pub fn decoder(&self) -> &'a dyn Decoder {
        self.decoder
    }

    pub fn pool(&self) -> Option<&'a SharedPool> {
        self.pool
    }

    pub fn dimension(&self) -> usize {
        self.decoder.dimension()
    }

    pub fn evaluations(&self) -> u64 {
        self.evals
    }

    pub fn stop(&self) -> &StopCriterion {
        &self.stop
    }

    pub fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }

    /// Fraction of the budget consumed so far.
    pub fn progress(&self) -> f64 {
        self.stop.progress(self.elapsed(), self.evals)
    }

    pub fn best(&self) -> Option<&(RandomKeys, Fitness)> {
        self.best.as_ref()
    }

    pub fn best_objective(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |(_, f)| f.objective)
    }

    /// Decodes `keys`, which must match the decoder dimension.
    pub fn eval(&mut self, keys: &RandomKeys) -> Fitness {
        debug_assert_eq!(keys.len(), self.decoder.dimension());
        debug_assert!(keys.is_valid(), "key out of range: {keys:?}");
        let fit = self.decoder.decode(keys);
        self.evals += 1;
        if fit.objective < self.best_objective() {
            let seconds = self.elapsed().as_secs_f64();
            self.time_to_best = seconds;
            self.evals_to_best = self.evals;
            self.trace.push(TracePoint {
                seconds,
                evaluations: self.evals,
                objective: fit.objective,
            });
            if let Some(pool) = self.pool {
                pool.offer(keys, fit);
            }
            self.best = Some((keys.clone(), fit));
        }
        fit
    }

    /// Whether the stop criterion has been met. The clock is read at most
    /// once every 64 decodes.
    pub fn expired(&mut self) -> bool {
        if let Some(max) = self.stop.max_evaluations {
            if self.evals >= max {
                return true;
            }
        }
        if let Some(target) = self.stop.target {
            if reaches_target(self.best_objective(), target) {
                return true;
            }
        }
        if self.out_of_time {
            return true;
        }
        if let Some(limit) = self.stop.time_limit {
            if self.evals >= self.next_clock_check {
                self.next_clock_check = self.evals + CLOCK_STRIDE;
                self.out_of_time = self.start.elapsed() >= limit;
            }
        }
        self.out_of_time
    }

    pub fn into_result(self, solver: impl Into<String>) -> Option<RunResult> {
        let (keys, fitness) = self.best?;
        Some(RunResult {
            solver: solver.into(),
            keys,
            fitness,
            time_to_best: self.time_to_best,
            evals_to_best: self.evals_to_best,
            evaluations: self.evals,
            trace: self.trace,
        })
    }
}
