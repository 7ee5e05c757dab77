//! Genetic algorithm with binary tournaments, blending crossover and
//! elitism.

use super::{GaParams, Schedule};
use crate::error::Result;
use crate::eval::Evaluator;
use crate::keys::{random_vector, Fitness, RandomKeys, RngStream};
use crate::local_search::rvnd;
use crate::variation::{blend, BlendFactor, BlendParams};

type Individual = (RandomKeys, Fitness);

fn tournament<'a>(pop: &'a [Individual], rng: &mut RngStream) -> &'a Individual {
    let a = &pop[rng.index(pop.len())];
    let b = &pop[rng.index(pop.len())];
    if b.1.better_than(&a.1) {
        b
    } else {
        a
    }
}

pub fn run_ga(mut schedule: Schedule<GaParams>, ev: &mut Evaluator<'_>, rng: &mut RngStream) -> Result<()> {
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
    pop.sort_by(|a, b| a.1.objective.total_cmp(&b.1.objective));
    let mut searched = f64::INFINITY;

    while !ev.expired() {
        let prm = *schedule.next(ev);
        let cross = BlendParams::new(0.5, prm.mutation, BlendFactor::Direct)?;
        let mut next: Vec<Individual> = Vec::with_capacity(p);
        next.push(pop[0].clone());
        while next.len() < p {
            let a = tournament(&pop, rng);
            let b = tournament(&pop, rng);
            if rng.unit() < prm.crossover {
                for (x, y) in [(a, b), (b, a)] {
                    if next.len() == p {
                        break;
                    }
                    let child = blend(&x.0, &y.0, &cross, rng)?;
                    let f = ev.eval(&child);
                    next.push((child, f));
                }
            } else {
                next.push(a.clone());
                if next.len() < p {
                    next.push(b.clone());
                }
            }
            if ev.expired() {
                return Ok(());
            }
        }
        next.sort_by(|a, b| a.1.objective.total_cmp(&b.1.objective));
        // the local search only runs when the generation best is new
        if next[0].1.objective < searched {
            let (x, f) = rvnd(&next[0].0, next[0].1, ev, rng);
            searched = f.objective;
            next[0] = (x, f);
        }
        pop = next;
    }
    Ok(())
}
