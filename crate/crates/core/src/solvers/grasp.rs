//! Continuous GRASP: a randomized greedy construction by per-key line
//! searches on a grid of spacing `h`, followed by RVND.

use super::{metropolis_accept, GraspParams, Schedule, REHEAT_THRESHOLD};
use crate::error::Result;
use crate::eval::Evaluator;
use crate::keys::{clamp_key, random_vector, Fitness, RandomKeys, RngStream};
use crate::local_search::rvnd;

/// Best value for key `i` of `x` found with one uniform draw per grid cell
/// of width `h`. Returns `None` when the budget runs out.
fn line_search(
    x: &RandomKeys,
    i: usize,
    h: f64,
    ev: &mut Evaluator<'_>,
    rng: &mut RngStream,
) -> Option<(f64, Fitness)> {
    let cells = (1.0 / h).ceil() as usize;
    let mut y = x.clone();
    let mut best: Option<(f64, Fitness)> = None;
    for c in 0..cells {
        if ev.expired() {
            return None;
        }
        let hi = ((c + 1) as f64 * h).min(1.0);
        let lo = c as f64 * h;
        let v = clamp_key(lo + (hi - lo) * rng.unit());
        y.as_mut_slice()[i] = v;
        let f = ev.eval(&y);
        if best.is_none_or(|(_, b)| f.better_than(&b)) {
            best = Some((v, f));
        }
    }
    best
}

/// Fixes keys one at a time from a restricted candidate list built with
/// threshold `gamma`. Returns `None` when the budget runs out.
fn construct(
    start: &RandomKeys,
    h: f64,
    gamma: f64,
    ev: &mut Evaluator<'_>,
    rng: &mut RngStream,
) -> Option<(RandomKeys, Fitness)> {
    let n = start.len();
    let mut x = start.clone();
    let mut fx = None;
    let mut unfixed: Vec<usize> = (0..n).collect();
    let mut found = vec![(0.0, Fitness::feasible(0.0)); n];
    while !unfixed.is_empty() {
        for &i in &unfixed {
            found[i] = line_search(&x, i, h, ev, rng)?;
        }
        let objs = unfixed.iter().map(|&i| found[i].1.objective);
        let lo = objs.clone().fold(f64::INFINITY, f64::min);
        let hi = objs.fold(f64::NEG_INFINITY, f64::max);
        let threshold = lo + gamma * (hi - lo);
        let rcl: Vec<usize> = (0..unfixed.len())
            .filter(|&k| found[unfixed[k]].1.objective <= threshold)
            .collect();
        let k = rcl[rng.index(rcl.len())];
        let i = unfixed.swap_remove(k);
        x.as_mut_slice()[i] = found[i].0;
        fx = Some(found[i].1);
    }
    Some((x, fx?))
}

pub fn run_grasp(
    mut schedule: Schedule<GraspParams>,
    ev: &mut Evaluator<'_>,
    rng: &mut RngStream,
) -> Result<()> {
    let mut x = random_vector(ev.dimension(), rng)?;
    let mut fx = ev.eval(&x);
    let mut h = schedule.params().h_start;
    let mut t = schedule.params().t0;

    while !ev.expired() {
        let prm = *schedule.next(ev);
        h = h.clamp(prm.h_end, prm.h_start);
        let gamma = rng.unit();
        let before = ev.best_objective();
        let Some((y, fy)) = construct(&x, h, gamma, ev, rng) else {
            break;
        };
        let (y, fy) = rvnd(&y, fy, ev, rng);
        if metropolis_accept(fy.objective - fx.objective, t, rng) {
            x = y;
            fx = fy;
        }
        t *= prm.alpha;
        if t < REHEAT_THRESHOLD {
            t = prm.t0;
        }
        if ev.best_objective() >= before {
            h /= 2.0;
            if h < prm.h_end {
                h = prm.h_start;
            }
        }
    }
    Ok(())
}
