//! Iterated local search.

use super::{IlsParams, Schedule};
use crate::error::Result;
use crate::eval::Evaluator;
use crate::keys::{random_vector, RngStream};
use crate::local_search::rvnd;
use crate::variation::{shake, ShakeParams};

pub fn run_ils(mut schedule: Schedule<IlsParams>, ev: &mut Evaluator<'_>, rng: &mut RngStream) -> Result<()> {
    let x = random_vector(ev.dimension(), rng)?;
    let fx = ev.eval(&x);
    let (mut x, mut fx) = rvnd(&x, fx, ev, rng);

    while !ev.expired() {
        let prm = *schedule.next(ev);
        let y = shake(&x, &ShakeParams::new(prm.beta_min, prm.beta_max)?, rng);
        let fy = ev.eval(&y);
        let (y, fy) = rvnd(&y, fy, ev, rng);
        if fy.better_than(&fx) {
            x = y;
            fx = fy;
        }
    }
    Ok(())
}
