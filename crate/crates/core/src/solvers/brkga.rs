//! Biased random-key genetic algorithm.

use super::{round_half_up, BrkgaParams, Schedule};
use crate::error::Result;
use crate::eval::Evaluator;
use crate::keys::{random_vector, Fitness, RandomKeys, RngStream};
use crate::local_search::rvnd;

/// Elite, mutant and offspring counts for a population of `p`. Fractional
/// counts round half up; the offspring absorb the remainder. There is
/// always at least one elite and one offspring.
pub fn partition_sizes(p: usize, elite: f64, mutant: f64) -> (usize, usize, usize) {
    let ne = round_half_up(elite * p as f64).clamp(1, p.saturating_sub(1).max(1));
    let nm = round_half_up(mutant * p as f64).min(p.saturating_sub(ne + 1));
    (ne, nm, p - ne - nm)
}

type Individual = (RandomKeys, Fitness);

fn sort(pop: &mut [Individual]) {
    pop.sort_by(|a, b| a.1.objective.total_cmp(&b.1.objective));
}

pub fn run_brkga(
    mut schedule: Schedule<BrkgaParams>,
    ev: &mut Evaluator<'_>,
    rng: &mut RngStream,
) -> Result<()> {
    let n = ev.dimension();
    let p = schedule.params().population;
    let mut pop: Vec<Individual> = Vec::with_capacity(p);
    for _ in 0..p {
        let x = random_vector(n, rng)?;
        let f = ev.eval(&x);
        pop.push((x, f));
        if ev.expired() {
            return Ok(());
        }
    }
    sort(&mut pop);
    let mut best = pop[0].1.objective;

    while !ev.expired() {
        let prm = *schedule.next(ev);
        let (ne, nm, no) = partition_sizes(p, prm.elite, prm.mutant);
        let mut next: Vec<Individual> = pop[..ne].to_vec();
        for _ in 0..nm {
            let x = random_vector(n, rng)?;
            let f = ev.eval(&x);
            next.push((x, f));
        }
        for _ in 0..no {
            let elite = &pop[rng.index(ne)].0;
            let other = &pop[rng.index(p)].0;
            let child: Vec<f64> = elite
                .iter()
                .zip(other.iter())
                .map(|(&e, &o)| if rng.unit() < prm.rho { e } else { o })
                .collect();
            let child = RandomKeys::new(child)?;
            let f = ev.eval(&child);
            next.push((child, f));
            if ev.expired() {
                return Ok(());
            }
        }
        sort(&mut next);
        if next[0].1.objective < best {
            let (x, f) = rvnd(&next[0].0, next[0].1, ev, rng);
            next[0] = (x, f);
            sort(&mut next);
            best = next[0].1.objective;
        }
        pop = next;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_sums_to_population() {
        for p in [2, 3, 10, 97, 1597] {
            for (e, m) in [(0.1, 0.2), (0.15, 0.2), (0.45, 0.45), (0.01, 0.0)] {
                let (ne, nm, no) = partition_sizes(p, e, m);
                assert_eq!(ne + nm + no, p);
                assert!(ne >= 1 && no >= 1);
            }
        }
        assert_eq!(partition_sizes(1597, 0.10, 0.20), (160, 319, 1118));
        assert_eq!(partition_sizes(10, 0.15, 0.25), (2, 3, 5));
    }
}
