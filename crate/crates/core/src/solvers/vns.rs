//! Variable neighborhood search; neighborhood `k` shakes at rate
//! `k * beta_min`.

use super::{Schedule, VnsParams};
use crate::error::Result;
use crate::eval::Evaluator;
use crate::keys::{random_vector, RngStream};
use crate::local_search::rvnd;
use crate::variation::{shake, ShakeParams};

pub fn run_vns(mut schedule: Schedule<VnsParams>, ev: &mut Evaluator<'_>, rng: &mut RngStream) -> Result<()> {
    let x = random_vector(ev.dimension(), rng)?;
    let fx = ev.eval(&x);
    let (mut x, mut fx) = rvnd(&x, fx, ev, rng);
    let mut k = 1;

    while !ev.expired() {
        let prm = *schedule.next(ev);
        if k > prm.k_max {
            k = 1;
        }
        let beta = (k as f64 * prm.beta_min).min(1.0);
        let y = shake(&x, &ShakeParams::fixed(beta)?, rng);
        let fy = ev.eval(&y);
        let (y, fy) = rvnd(&y, fy, ev, rng);
        if fy.better_than(&fx) {
            x = y;
            fx = fy;
            k = 1;
        } else {
            k += 1;
        }
    }
    Ok(())
}
