//! Large neighborhood search: destroy a random subset of keys, rebuild each
//! from one draw per Farey interval, accept by the Metropolis rule.

use super::{metropolis_accept, LnsParams, Schedule, REHEAT_THRESHOLD};
use crate::error::Result;
use crate::eval::Evaluator;
use crate::keys::{random_vector, Fitness, RandomKeys, RngStream};
use crate::local_search::{farey_draw, rvnd, FAREY, FAREY_INTERVALS};
use crate::variation::move_count;

/// Rebuilds the keys at `removed`, in the given order: each is set to the
/// best of one draw per Farey interval, the others held fixed. Returns
/// `None` if the budget runs out before every key is rebuilt.
pub fn lns_repair(
    keys: &RandomKeys,
    removed: &[usize],
    ev: &mut Evaluator<'_>,
    rng: &mut RngStream,
) -> Option<(RandomKeys, Fitness)> {
    let mut y = keys.clone();
    let mut fy = None;
    for &i in removed {
        let mut best: Option<(f64, Fitness)> = None;
        for j in 0..FAREY_INTERVALS {
            if ev.expired() {
                return None;
            }
            let v = farey_draw(FAREY[j], FAREY[j + 1], rng);
            y.as_mut_slice()[i] = v;
            let f = ev.eval(&y);
            if best.is_none_or(|(_, b)| f.better_than(&b)) {
                best = Some((v, f));
            }
        }
        let (v, f) = best?;
        y.as_mut_slice()[i] = v;
        fy = Some(f);
    }
    Some((y, fy?))
}

pub fn run_lns(mut schedule: Schedule<LnsParams>, ev: &mut Evaluator<'_>, rng: &mut RngStream) -> Result<()> {
    let n = ev.dimension();
    let mut x = random_vector(n, rng)?;
    let mut fx = ev.eval(&x);
    let mut t = schedule.params().t0;

    while !ev.expired() {
        let prm = *schedule.next(ev);
        let beta = prm.beta_min + (prm.beta_max - prm.beta_min) * rng.unit();
        let m = move_count(beta, n).max(1).min(n);
        let mut idx = rng.permutation(n);
        idx.truncate(m);
        let best_before = ev.best_objective();
        let Some((y, fy)) = lns_repair(&x, &idx, ev, rng) else {
            break;
        };
        if metropolis_accept(fy.objective - fx.objective, t, rng) {
            x = y;
            fx = fy;
            if fx.objective < best_before {
                (x, fx) = rvnd(&x, fx, ev, rng);
            }
        }
        t *= prm.alpha;
        if t < REHEAT_THRESHOLD {
            t = prm.t0;
        }
    }
    Ok(())
}
