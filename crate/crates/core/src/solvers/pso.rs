//! Particle swarm optimization directly on the key vectors.

use super::{PsoParams, Schedule};
use crate::error::Result;
use crate::eval::Evaluator;
use crate::keys::{clamp_key, random_vector, Fitness, RandomKeys, RngStream};
use crate::local_search::rvnd;

/// One velocity and position update; positions are clamped into the key
/// range.
pub fn pso_step(
    x: &mut RandomKeys,
    v: &mut [f64],
    personal: &RandomKeys,
    global: &RandomKeys,
    params: &PsoParams,
    rng: &mut RngStream,
) {
    let xs = x.as_mut_slice();
    for j in 0..xs.len() {
        let r1 = rng.unit();
        let r2 = rng.unit();
        v[j] = params.inertia * v[j]
            + params.c1 * r1 * (personal[j] - xs[j])
            + params.c2 * r2 * (global[j] - xs[j]);
        xs[j] = clamp_key(xs[j] + v[j]);
    }
}

struct Particle {
    x: RandomKeys,
    v: Vec<f64>,
    fit: Fitness,
    best: RandomKeys,
    best_fit: Fitness,
}

pub fn run_pso(mut schedule: Schedule<PsoParams>, ev: &mut Evaluator<'_>, rng: &mut RngStream) -> Result<()> {
    let n = ev.dimension();
    let p = schedule.params().population;
    let mut swarm: Vec<Particle> = Vec::with_capacity(p);
    let mut global: Option<(RandomKeys, Fitness)> = None;
    for _ in 0..p {
        let x = random_vector(n, rng)?;
        let f = ev.eval(&x);
        if global.as_ref().is_none_or(|g| f.better_than(&g.1)) {
            global = Some((x.clone(), f));
        }
        swarm.push(Particle {
            best: x.clone(),
            x,
            v: vec![0.0; n],
            fit: f,
            best_fit: f,
        });
        if ev.expired() {
            return Ok(());
        }
    }
    let (mut g, mut gf) = global.expect("non-empty swarm");

    while !ev.expired() {
        let prm = *schedule.next(ev);
        for particle in swarm.iter_mut() {
            pso_step(&mut particle.x, &mut particle.v, &particle.best, &g, &prm, rng);
            let f = ev.eval(&particle.x);
            particle.fit = f;
            if f.better_than(&particle.best_fit) {
                particle.best = particle.x.clone();
                particle.best_fit = f;
                if f.better_than(&gf) {
                    g = particle.x.clone();
                    gf = f;
                }
            }
            if ev.expired() {
                return Ok(());
            }
        }
        let particle = &mut swarm[rng.index(p)];
        let (x, f) = rvnd(&particle.x, particle.fit, ev, rng);
        particle.x = x;
        particle.fit = f;
        if f.better_than(&particle.best_fit) {
            particle.best = particle.x.clone();
            particle.best_fit = f;
            if f.better_than(&gf) {
                g = particle.x.clone();
                gf = f;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_velocity_at_optimum_stays() {
        let mut rng = RngStream::new(1, 0);
        let x0 = random_vector(5, &mut rng).unwrap();
        let mut x = x0.clone();
        let mut v = vec![0.0; 5];
        let p = PsoParams { population: 2, c1: 2.05, c2: 2.05, inertia: 0.73 };
        pso_step(&mut x, &mut v, &x0, &x0, &p, &mut rng);
        assert_eq!(x, x0);
        assert!(v.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn positions_clamped() {
        let mut rng = RngStream::new(1, 0);
        let mut x = RandomKeys::new(vec![0.9, 0.1]).unwrap();
        let mut v = vec![5.0, -5.0];
        let p = PsoParams { population: 2, c1: 0.0, c2: 0.0, inertia: 1.0 };
        let b = x.clone();
        pso_step(&mut x, &mut v, &b, &b, &p, &mut rng);
        assert!(x.is_valid());
        assert_eq!(x[1], 0.0);
        assert!(x[0] < 1.0);
    }
}
