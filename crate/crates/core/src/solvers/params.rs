//! Solver parameter records, tuned defaults per problem family and the
//! configuration grids used by online parameter control.

use crate::control::ParameterGrid;
use crate::error::{Error, Result};
use crate::problems::ProblemKind;

use super::SolverKind;

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}

fn unit(name: &str, v: f64) -> Result<()> {
    check((0.0..=1.0).contains(&v), || format!("{name} = {v} must lie in [0, 1]"))
}

fn rate_pair(lo: f64, hi: f64) -> Result<()> {
    check(0.0 <= lo && lo <= hi && hi <= 1.0, || {
        format!("shaking rates must satisfy 0 <= {lo} <= {hi} <= 1")
    })
}

fn cooling(t0: f64, alpha: f64) -> Result<()> {
    check(t0 > 0.0 && t0.is_finite(), || format!("initial temperature {t0} must be positive"))?;
    check(alpha > 0.0 && alpha < 1.0, || format!("cooling rate {alpha} must lie in (0, 1)"))
}

fn population(p: usize) -> Result<()> {
    check(p >= 2, || format!("population size {p} must be at least 2"))
}

/// Parameters that online control may vary. `axes` lists the tunable
/// parameters with their current values; `apply` writes a configuration
/// back in the same order.
pub trait Tunable {
    fn axes(&self) -> Vec<(&'static str, f64)>;

    fn clip(&self, name: &str, value: f64) -> f64;

    fn apply(&mut self, values: &[f64]);

    /// Three-point grid `{0.5x, x, 1.5x}` around the current values.
    fn grid(&self) -> Result<ParameterGrid> {
        ParameterGrid::around(&self.axes(), |name, v| self.clip(name, v))
    }

    fn values(&self) -> Vec<f64> {
        self.axes().into_iter().map(|(_, v)| v).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BrkgaParams {
    pub population: usize,
    pub elite: f64,
    pub mutant: f64,
    pub rho: f64,
}

impl BrkgaParams {
    pub fn validate(&self) -> Result<()> {
        population(self.population)?;
        check(self.elite > 0.0 && self.elite < 0.5, || {
            format!("elite fraction {} must lie in (0, 0.5)", self.elite)
        })?;
        check(self.mutant >= 0.0 && self.elite + self.mutant < 1.0, || {
            format!("mutant fraction {} leaves no offspring", self.mutant)
        })?;
        check(self.rho > 0.5 && self.rho <= 1.0, || {
            format!("inheritance probability {} must lie in (0.5, 1]", self.rho)
        })
    }
}

impl Tunable for BrkgaParams {
    fn axes(&self) -> Vec<(&'static str, f64)> {
        vec![("pe", self.elite), ("pm", self.mutant), ("rho", self.rho)]
    }

    fn clip(&self, name: &str, v: f64) -> f64 {
        match name {
            "rho" => v.clamp(0.51, 1.0),
            _ => v.clamp(0.01, 0.49),
        }
    }

    fn apply(&mut self, v: &[f64]) {
        self.elite = v[0];
        self.mutant = v[1];
        self.rho = v[2];
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaParams {
    pub population: usize,
    pub crossover: f64,
    pub mutation: f64,
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        population(self.population)?;
        unit("crossover probability", self.crossover)?;
        unit("mutation probability", self.mutation)
    }
}

impl Tunable for GaParams {
    fn axes(&self) -> Vec<(&'static str, f64)> {
        vec![("pc", self.crossover), ("mu", self.mutation)]
    }

    fn clip(&self, _: &str, v: f64) -> f64 {
        v.clamp(0.0, 1.0)
    }

    fn apply(&mut self, v: &[f64]) {
        self.crossover = v[0];
        self.mutation = v[1];
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaParams {
    pub t0: f64,
    pub iterations: usize,
    pub alpha: f64,
    pub beta_min: f64,
    pub beta_max: f64,
}

impl SaParams {
    pub fn validate(&self) -> Result<()> {
        cooling(self.t0, self.alpha)?;
        check(self.iterations >= 1, || "iterations per temperature must be positive".into())?;
        rate_pair(self.beta_min, self.beta_max)
    }
}

impl Tunable for SaParams {
    fn axes(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("samax", self.iterations as f64),
            ("alpha", self.alpha),
            ("beta_min", self.beta_min),
            ("beta_max", self.beta_max),
        ]
    }

    fn clip(&self, name: &str, v: f64) -> f64 {
        match name {
            "samax" => v.round().max(1.0),
            "alpha" => v.clamp(0.5, 0.999),
            _ => v.clamp(0.0, 1.0),
        }
    }

    fn apply(&mut self, v: &[f64]) {
        self.iterations = v[0] as usize;
        self.alpha = v[1];
        self.beta_min = v[2].min(v[3]);
        self.beta_max = v[2].max(v[3]);
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraspParams {
    pub h_start: f64,
    pub h_end: f64,
    /// Acceptance temperature and its cooling rate.
    pub t0: f64,
    pub alpha: f64,
}

impl GraspParams {
    pub fn validate(&self) -> Result<()> {
        check(0.0 < self.h_end && self.h_end <= self.h_start && self.h_start <= 1.0, || {
            format!("grid densities must satisfy 0 < {} <= {} <= 1", self.h_end, self.h_start)
        })?;
        cooling(self.t0, self.alpha)
    }
}

impl Tunable for GraspParams {
    fn axes(&self) -> Vec<(&'static str, f64)> {
        vec![("hs", self.h_start), ("he", self.h_end)]
    }

    fn clip(&self, _: &str, v: f64) -> f64 {
        v.clamp(1e-6, 1.0)
    }

    fn apply(&mut self, v: &[f64]) {
        self.h_start = v[0].max(v[1]);
        self.h_end = v[0].min(v[1]);
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IlsParams {
    pub beta_min: f64,
    pub beta_max: f64,
}

impl IlsParams {
    pub fn validate(&self) -> Result<()> {
        rate_pair(self.beta_min, self.beta_max)
    }
}

impl Tunable for IlsParams {
    fn axes(&self) -> Vec<(&'static str, f64)> {
        vec![("beta_min", self.beta_min), ("beta_max", self.beta_max)]
    }

    fn clip(&self, _: &str, v: f64) -> f64 {
        v.clamp(0.0, 1.0)
    }

    fn apply(&mut self, v: &[f64]) {
        self.beta_min = v[0].min(v[1]);
        self.beta_max = v[0].max(v[1]);
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VnsParams {
    pub beta_min: f64,
    pub k_max: usize,
}

impl VnsParams {
    pub fn validate(&self) -> Result<()> {
        check(self.beta_min > 0.0 && self.beta_min <= 1.0, || {
            format!("beta_min = {} must lie in (0, 1]", self.beta_min)
        })?;
        check(self.k_max >= 1, || "k_max must be positive".into())
    }
}

impl Tunable for VnsParams {
    fn axes(&self) -> Vec<(&'static str, f64)> {
        vec![("beta_min", self.beta_min), ("kmax", self.k_max as f64)]
    }

    fn clip(&self, name: &str, v: f64) -> f64 {
        match name {
            "kmax" => v.round().max(1.0),
            _ => v.clamp(1e-6, 1.0),
        }
    }

    fn apply(&mut self, v: &[f64]) {
        self.beta_min = v[0];
        self.k_max = v[1] as usize;
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsoParams {
    pub population: usize,
    pub c1: f64,
    pub c2: f64,
    pub inertia: f64,
}

impl PsoParams {
    pub fn validate(&self) -> Result<()> {
        population(self.population)?;
        check(self.c1 >= 0.0 && self.c2 >= 0.0, || "acceleration coefficients must be non-negative".into())?;
        check(self.inertia >= 0.0, || "inertia must be non-negative".into())
    }
}

impl Tunable for PsoParams {
    fn axes(&self) -> Vec<(&'static str, f64)> {
        vec![("c1", self.c1), ("c2", self.c2), ("w", self.inertia)]
    }

    fn clip(&self, _: &str, v: f64) -> f64 {
        v.max(0.0)
    }

    fn apply(&mut self, v: &[f64]) {
        self.c1 = v[0];
        self.c2 = v[1];
        self.inertia = v[2];
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LnsParams {
    pub t0: f64,
    pub alpha: f64,
    pub beta_min: f64,
    pub beta_max: f64,
}

impl LnsParams {
    pub fn validate(&self) -> Result<()> {
        cooling(self.t0, self.alpha)?;
        rate_pair(self.beta_min, self.beta_max)
    }
}

impl Tunable for LnsParams {
    fn axes(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("alpha", self.alpha),
            ("beta_min", self.beta_min),
            ("beta_max", self.beta_max),
        ]
    }

    fn clip(&self, name: &str, v: f64) -> f64 {
        match name {
            "alpha" => v.clamp(0.5, 0.999),
            _ => v.clamp(0.0, 1.0),
        }
    }

    fn apply(&mut self, v: &[f64]) {
        self.alpha = v[0];
        self.beta_min = v[1].min(v[2]);
        self.beta_max = v[1].max(v[2]);
    }
}

/// One parameter record per solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamSet {
    pub brkga: BrkgaParams,
    pub ga: GaParams,
    pub sa: SaParams,
    pub grasp: GraspParams,
    pub ils: IlsParams,
    pub vns: VnsParams,
    pub pso: PsoParams,
    pub lns: LnsParams,
}

const GRASP: GraspParams = GraspParams {
    h_start: 0.125,
    h_end: 0.00012,
    t0: 1e4,
    alpha: 0.99,
};

impl ParamSet {
    /// Tuned defaults for the p-median family; also used for the TSP and
    /// set-cover decoders.
    pub fn pmedian() -> Self {
        ParamSet {
            brkga: BrkgaParams { population: 1597, elite: 0.10, mutant: 0.20, rho: 0.70 },
            ga: GaParams { population: 1000, crossover: 0.85, mutation: 0.03 },
            sa: SaParams { t0: 1e4, iterations: 100, alpha: 0.99, beta_min: 0.10, beta_max: 0.20 },
            grasp: GRASP,
            ils: IlsParams { beta_min: 0.15, beta_max: 0.40 },
            vns: VnsParams { beta_min: 0.05, k_max: 6 },
            pso: PsoParams { population: 100, c1: 2.05, c2: 2.05, inertia: 0.73 },
            lns: LnsParams { t0: 1000.0, alpha: 0.90, beta_min: 0.10, beta_max: 0.30 },
        }
    }

    pub fn ncgpp() -> Self {
        ParamSet {
            brkga: BrkgaParams { population: 1597, elite: 0.10, mutant: 0.20, rho: 0.70 },
            ga: GaParams { population: 1000, crossover: 0.85, mutation: 0.002 },
            sa: SaParams { t0: 1e6, iterations: 1000, alpha: 0.99, beta_min: 0.005, beta_max: 0.05 },
            grasp: GRASP,
            ils: IlsParams { beta_min: 0.005, beta_max: 0.10 },
            vns: VnsParams { beta_min: 0.005, k_max: 10 },
            pso: PsoParams { population: 50, c1: 2.05, c2: 2.05, inertia: 0.73 },
            lns: LnsParams { t0: 1000.0, alpha: 0.90, beta_min: 0.10, beta_max: 0.30 },
        }
    }

    pub fn thlp() -> Self {
        ParamSet {
            brkga: BrkgaParams { population: 1597, elite: 0.15, mutant: 0.20, rho: 0.70 },
            ga: GaParams { population: 600, crossover: 0.99, mutation: 0.005 },
            sa: SaParams { t0: 1e6, iterations: 1500, alpha: 0.99, beta_min: 0.01, beta_max: 0.05 },
            grasp: GRASP,
            ils: IlsParams { beta_min: 0.05, beta_max: 0.20 },
            vns: VnsParams { beta_min: 0.005, k_max: 10 },
            pso: PsoParams { population: 200, c1: 2.05, c2: 2.05, inertia: 0.73 },
            lns: LnsParams { t0: 1e6, alpha: 0.97, beta_min: 0.10, beta_max: 0.30 },
        }
    }

    pub fn for_problem(kind: ProblemKind) -> Self {
        match kind {
            ProblemKind::Ncgpp => Self::ncgpp(),
            ProblemKind::Thlp => Self::thlp(),
            ProblemKind::PMedian | ProblemKind::Tsp | ProblemKind::SetCover => Self::pmedian(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.brkga.validate()?;
        self.ga.validate()?;
        self.sa.validate()?;
        self.grasp.validate()?;
        self.ils.validate()?;
        self.vns.validate()?;
        self.pso.validate()?;
        self.lns.validate()
    }

    /// Overrides one parameter, e.g. `set(SolverKind::Sa, "t0", 100.0)`.
    pub fn set(&mut self, solver: SolverKind, name: &str, v: f64) -> Result<()> {
        let count = |v: f64| -> Result<usize> {
            check(v >= 0.0 && v.fract() == 0.0, || format!("{name} must be a whole number, got {v}"))?;
            Ok(v as usize)
        };
        match (solver, name) {
            (SolverKind::Brkga, "p") => self.brkga.population = count(v)?,
            (SolverKind::Brkga, "pe") => self.brkga.elite = v,
            (SolverKind::Brkga, "pm") => self.brkga.mutant = v,
            (SolverKind::Brkga, "rho") => self.brkga.rho = v,
            (SolverKind::Ga, "p") => self.ga.population = count(v)?,
            (SolverKind::Ga, "pc") => self.ga.crossover = v,
            (SolverKind::Ga, "mu") => self.ga.mutation = v,
            (SolverKind::Sa, "t0") => self.sa.t0 = v,
            (SolverKind::Sa, "samax") => self.sa.iterations = count(v)?,
            (SolverKind::Sa, "alpha") => self.sa.alpha = v,
            (SolverKind::Sa, "beta_min") => self.sa.beta_min = v,
            (SolverKind::Sa, "beta_max") => self.sa.beta_max = v,
            (SolverKind::Grasp, "hs") => self.grasp.h_start = v,
            (SolverKind::Grasp, "he") => self.grasp.h_end = v,
            (SolverKind::Grasp, "t0") => self.grasp.t0 = v,
            (SolverKind::Grasp, "alpha") => self.grasp.alpha = v,
            (SolverKind::Ils, "beta_min") => self.ils.beta_min = v,
            (SolverKind::Ils, "beta_max") => self.ils.beta_max = v,
            (SolverKind::Vns, "beta_min") => self.vns.beta_min = v,
            (SolverKind::Vns, "kmax") => self.vns.k_max = count(v)?,
            (SolverKind::Pso, "p") => self.pso.population = count(v)?,
            (SolverKind::Pso, "c1") => self.pso.c1 = v,
            (SolverKind::Pso, "c2") => self.pso.c2 = v,
            (SolverKind::Pso, "w") => self.pso.inertia = v,
            (SolverKind::Lns, "t0") => self.lns.t0 = v,
            (SolverKind::Lns, "alpha") => self.lns.alpha = v,
            (SolverKind::Lns, "beta_min") => self.lns.beta_min = v,
            (SolverKind::Lns, "beta_max") => self.lns.beta_max = v,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "{solver} has no parameter {name:?}"
                )))
            }
        }
        self.validate()
    }
}
