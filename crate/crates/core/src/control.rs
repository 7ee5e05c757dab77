//! Online parameter control with Q-learning.
//!
//! States are parameter configurations (one value per parameter, drawn from
//! a small list per parameter) and an action replaces the value of exactly
//! one parameter. Exploration follows an epsilon-greedy policy whose epsilon
//! is annealed with a cosine schedule and warm-restarted every tenth of the
//! run.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::keys::RngStream;

pub const EPSILON_MIN: f64 = 0.1;
pub const EPSILON_MAX: [f64; 10] = [1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1];
pub const DISCOUNT: f64 = 0.8;
/// Restart period as a fraction of the run budget.
pub const RESTART_FRACTION: f64 = 0.1;
const REWARD_GUARD: f64 = 1e-12;

/// Cosine-annealed exploration rate inside restart period `i` (1-based).
pub fn epsilon(t_cur: f64, period: f64, i: usize) -> Result<f64> {
    if !(period > 0.0) {
        return Err(Error::InvalidPeriod(period));
    }
    let i = i.clamp(1, EPSILON_MAX.len());
    let eps_max = EPSILON_MAX[i - 1];
    let phase = (t_cur / period).clamp(0.0, 1.0);
    Ok(EPSILON_MIN + 0.5 * (eps_max - EPSILON_MIN) * (1.0 + (PI * phase).cos()))
}

/// 1 on strict improvement, otherwise the (non-positive) relative change.
pub fn reward(prev_best: f64, new_best: f64) -> f64 {
    if new_best < prev_best {
        1.0
    } else {
        let denom = if new_best == 0.0 { REWARD_GUARD } else { new_best };
        (prev_best - new_best) / denom
    }
}

/// `1 - 0.9 * fraction` of the run elapsed.
pub fn learning_factor(elapsed_fraction: f64) -> f64 {
    1.0 - 0.9 * elapsed_fraction.clamp(0.0, 1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamAxis {
    pub name: String,
    pub values: Vec<f64>,
}

/// Finite configuration space: the Cartesian product of per-parameter
/// value lists.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterGrid {
    axes: Vec<ParamAxis>,
}

impl ParameterGrid {
    pub fn new(axes: Vec<ParamAxis>) -> Result<Self> {
        for a in &axes {
            if a.values.is_empty() {
                return Err(Error::InvalidParameter(format!("axis {} has no values", a.name)));
            }
        }
        Ok(ParameterGrid { axes })
    }

    pub fn axes(&self) -> &[ParamAxis] {
        &self.axes
    }

    pub fn state_count(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// `|A(s)|`, the same for every state.
    pub fn action_count(&self) -> usize {
        self.axes.iter().map(|a| a.values.len() - 1).sum()
    }

    /// Mixed-radix index of a configuration given as per-axis value indices.
    pub fn state_index(&self, coords: &[usize]) -> usize {
        self.axes
            .iter()
            .zip(coords)
            .fold(0, |acc, (a, &c)| acc * a.values.len() + c)
    }

    pub fn coords(&self, mut state: usize) -> Vec<usize> {
        let mut c = vec![0; self.axes.len()];
        for (k, a) in self.axes.iter().enumerate().rev() {
            c[k] = state % a.values.len();
            state /= a.values.len();
        }
        c
    }

    pub fn values(&self, state: usize) -> Vec<f64> {
        self.coords(state)
            .iter()
            .zip(&self.axes)
            .map(|(&c, a)| a.values[c])
            .collect()
    }

    /// The state reached from `state` by action `action`.
    pub fn transition(&self, state: usize, action: usize) -> usize {
        let mut coords = self.coords(state);
        let mut rest = action;
        for (k, a) in self.axes.iter().enumerate() {
            let width = a.values.len() - 1;
            if rest < width {
                coords[k] = if rest < coords[k] { rest } else { rest + 1 };
                return self.state_index(&coords);
            }
            rest -= width;
        }
        panic!("action {action} out of range");
    }

    /// Grid centred on `center`: each value `v` becomes `{0.5v, v, 1.5v}`
    /// passed through `clip`, deduplicated, with the centre kept.
    pub fn around(center: &[(&str, f64)], clip: impl Fn(&str, f64) -> f64) -> Result<Self> {
        let axes = center
            .iter()
            .map(|&(name, v)| {
                let mut values: Vec<f64> = Vec::with_capacity(3);
                for x in [0.5 * v, v, 1.5 * v] {
                    let x = clip(name, x);
                    if !values.iter().any(|y| (y - x).abs() <= 1e-12 * x.abs().max(1.0)) {
                        values.push(x);
                    }
                }
                values.sort_by(f64::total_cmp);
                ParamAxis {
                    name: name.to_string(),
                    values,
                }
            })
            .collect();
        Self::new(axes)
    }

    /// The state whose values are closest to `values`, axis by axis.
    pub fn nearest_state(&self, values: &[f64]) -> usize {
        let coords: Vec<usize> = self
            .axes
            .iter()
            .zip(values)
            .map(|(a, &v)| {
                a.values
                    .iter()
                    .enumerate()
                    .min_by(|x, y| (x.1 - v).abs().total_cmp(&(y.1 - v).abs()))
                    .map_or(0, |(i, _)| i)
            })
            .collect();
        self.state_index(&coords)
    }
}

/// Dense `|S| x |A|` table of action values, all starting at zero.
#[derive(Clone, Debug)]
pub struct QTable {
    actions: usize,
    q: Vec<f64>,
}

impl QTable {
    pub fn new(grid: &ParameterGrid) -> Self {
        let actions = grid.action_count();
        QTable {
            actions,
            q: vec![0.0; grid.state_count() * actions],
        }
    }

    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.q[s * self.actions + a]
    }

    pub fn set(&mut self, s: usize, a: usize, v: f64) {
        self.q[s * self.actions + a] = v;
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.q[s * self.actions..(s + 1) * self.actions]
    }

    pub fn max(&self, s: usize) -> f64 {
        self.row(s).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn actions(&self) -> usize {
        self.actions
    }
}

/// Epsilon-greedy choice; ties among maximal actions are broken uniformly.
/// Returns `None` when the state has no actions.
pub fn select_action(q: &QTable, s: usize, eps: f64, rng: &mut RngStream) -> Option<usize> {
    let m = q.actions();
    if m == 0 {
        return None;
    }
    if rng.unit() < eps {
        return Some(rng.index(m));
    }
    let row = q.row(s);
    let best = q.max(s);
    let ties: Vec<usize> = (0..m).filter(|&a| row[a] == best).collect();
    Some(ties[rng.index(ties.len())])
}

/// One Bellman step; returns the new `Q(s, a)`.
pub fn update_q(
    q: &mut QTable,
    s: usize,
    a: usize,
    reward: f64,
    s_next: usize,
    lf: f64,
    df: f64,
) -> f64 {
    let next_max = if q.actions() == 0 { 0.0 } else { q.max(s_next) };
    let old = q.get(s, a);
    let new = old + lf * (reward + df * next_max - old);
    q.set(s, a, new);
    new
}

#[derive(Clone, Copy, Debug)]
struct Pending {
    state: usize,
    action: usize,
    next: usize,
}

/// Q-learning controller owned by one solver.
#[derive(Clone, Debug)]
pub struct QController {
    grid: ParameterGrid,
    q: QTable,
    state: usize,
    pending: Option<Pending>,
    epsilon: f64,
    learning_factor: f64,
    rng: RngStream,
}

impl QController {
    /// Starts in the configuration nearest to `initial`.
    pub fn new(grid: ParameterGrid, initial: &[f64], rng: RngStream) -> Self {
        let q = QTable::new(&grid);
        let state = grid.nearest_state(initial);
        QController {
            grid,
            q,
            state,
            pending: None,
            epsilon: EPSILON_MAX[0],
            learning_factor: 1.0,
            rng,
        }
    }

    pub fn grid(&self) -> &ParameterGrid {
        &self.grid
    }

    pub fn table(&self) -> &QTable {
        &self.q
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn learning_factor(&self) -> f64 {
        self.learning_factor
    }

    /// Current restart period (1-based) and the fraction of it elapsed, for
    /// run progress `progress` in `[0, 1]`.
    pub fn period(progress: f64) -> (usize, f64) {
        let k = (progress / RESTART_FRACTION).floor().max(0.0);
        let t_cur = progress - k * RESTART_FRACTION;
        ((k as usize + 1).min(EPSILON_MAX.len()), t_cur.clamp(0.0, RESTART_FRACTION))
    }

    fn refresh(&mut self, progress: f64) {
        let (i, t_cur) = Self::period(progress);
        self.epsilon = epsilon(t_cur, RESTART_FRACTION, i).expect("positive period");
        self.learning_factor = learning_factor(progress);
    }

    fn advance(&mut self) -> Vec<f64> {
        if let Some(a) = select_action(&self.q, self.state, self.epsilon, &mut self.rng) {
            let next = self.grid.transition(self.state, a);
            self.pending = Some(Pending {
                state: self.state,
                action: a,
                next,
            });
            self.state = next;
        }
        self.grid.values(self.state)
    }

    /// Configuration for the first iteration.
    pub fn start(&mut self, progress: f64) -> Vec<f64> {
        self.refresh(progress);
        self.advance()
    }

    /// Rewards the last transition with the best objectives observed before
    /// and after the iteration it configured, updates the table and returns
    /// the configuration for the next iteration.
    pub fn step(&mut self, prev_best: f64, new_best: f64, progress: f64) -> Vec<f64> {
        self.refresh(progress);
        if let Some(p) = self.pending.take() {
            let r = reward(prev_best, new_best);
            update_q(
                &mut self.q,
                p.state,
                p.action,
                r,
                p.next,
                self.learning_factor,
                DISCOUNT,
            );
        }
        self.advance()
    }

    /// `state,action,q` rows for every table entry.
    pub fn dump(&self, path: &Path) -> Result<()> {
        let mut out = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        writeln!(out, "state,action,q").map_err(|e| Error::io(path, e))?;
        for s in 0..self.grid.state_count() {
            for a in 0..self.q.actions() {
                writeln!(out, "{s},{a},{}", self.q.get(s, a)).map_err(|e| Error::io(path, e))?;
            }
        }
        Ok(())
    }
}
