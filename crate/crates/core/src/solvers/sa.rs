//! Simulated annealing over shaking moves.

use super::{metropolis_accept, SaParams, Schedule, REHEAT_THRESHOLD};
use crate::error::Result;
use crate::eval::Evaluator;
use crate::keys::{random_vector, RngStream};
use crate::local_search::rvnd;
use crate::variation::{shake, ShakeParams};

pub fn run_sa(mut schedule: Schedule<SaParams>, ev: &mut Evaluator<'_>, rng: &mut RngStream) -> Result<()> {
    let mut x = random_vector(ev.dimension(), rng)?;
    let mut fx = ev.eval(&x);
    let mut t = schedule.params().t0;

    while !ev.expired() {
        let prm = *schedule.next(ev);
        let moves = ShakeParams::new(prm.beta_min, prm.beta_max)?;
        for _ in 0..prm.iterations {
            if ev.expired() {
                return Ok(());
            }
            let y = shake(&x, &moves, rng);
            let fy = ev.eval(&y);
            if metropolis_accept(fy.objective - fx.objective, t, rng) {
                x = y;
                fx = fy;
            }
        }
        (x, fx) = rvnd(&x, fx, ev, rng);
        t *= prm.alpha;
        if t < REHEAT_THRESHOLD {
            t = prm.t0;
        }
    }
    Ok(())
}
