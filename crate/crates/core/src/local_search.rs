//! Randomized variable neighborhood descent over four problem-independent
//! neighborhoods: swap, Farey, mirror and a blending-based Nelder-Mead.
//!
//! Every search here is a descent: the returned fitness is never worse than
//! the incumbent passed in. All of them stop early, returning the incumbent
//! found so far, once the evaluator's stop criterion fires.

use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::keys::{complement_key, unif_open, Fitness, RandomKeys, RngStream};
use crate::variation::{blend, BlendFactor, BlendParams};

/// Order-7 Farey sequence: the 19 reduced fractions in `[0, 1]` with
/// denominator at most 7.
pub const FAREY: [f64; 19] = [
    0.0,
    1.0 / 7.0,
    1.0 / 6.0,
    1.0 / 5.0,
    1.0 / 4.0,
    2.0 / 7.0,
    1.0 / 3.0,
    2.0 / 5.0,
    3.0 / 7.0,
    1.0 / 2.0,
    4.0 / 7.0,
    3.0 / 5.0,
    2.0 / 3.0,
    5.0 / 7.0,
    3.0 / 4.0,
    4.0 / 5.0,
    5.0 / 6.0,
    6.0 / 7.0,
    1.0,
];

/// Number of sampling intervals between consecutive Farey terms.
pub const FAREY_INTERVALS: usize = FAREY.len() - 1;

/// Blend settings used by the Nelder-Mead simplex moves.
pub const NELDER_MEAD_BLEND: BlendParams = BlendParams {
    rho: 0.5,
    mu: 0.02,
    factor: BlendFactor::Direct,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Neighborhood {
    Swap,
    Farey,
    Mirror,
    NelderMead,
}

impl Neighborhood {
    pub const ALL: [Neighborhood; 4] = [
        Neighborhood::Swap,
        Neighborhood::Farey,
        Neighborhood::Mirror,
        Neighborhood::NelderMead,
    ];
}

/// First-improvement pairwise swaps over a random index order.
pub fn swap_ls(
    keys: &RandomKeys,
    fit: Fitness,
    ev: &mut Evaluator<'_>,
    rng: &mut RngStream,
) -> (RandomKeys, Fitness) {
    let n = keys.len();
    let order = rng.permutation(n);
    let mut cur = keys.clone();
    let mut best_fit = fit;
    for a in 0..n.saturating_sub(1) {
        for b in a + 1..n {
            if ev.expired() {
                return (cur, best_fit);
            }
            let (i, j) = (order[a], order[b]);
            cur.as_mut_slice().swap(i, j);
            let f = ev.eval(&cur);
            if f.better_than(&best_fit) {
                best_fit = f;
            } else {
                cur.as_mut_slice().swap(i, j);
            }
        }
    }
    (cur, best_fit)
}

/// Resamples each key inside every Farey interval, first improvement.
pub fn farey_ls(
    keys: &RandomKeys,
    fit: Fitness,
    ev: &mut Evaluator<'_>,
    rng: &mut RngStream,
) -> (RandomKeys, Fitness) {
    let order = rng.permutation(keys.len());
    let mut cur = keys.clone();
    let mut best_fit = fit;
    for &i in &order {
        for w in FAREY.windows(2) {
            if ev.expired() {
                return (cur, best_fit);
            }
            let old = cur[i];
            cur.as_mut_slice()[i] = farey_draw(w[0], w[1], rng);
            let f = ev.eval(&cur);
            if f.better_than(&best_fit) {
                best_fit = f;
            } else {
                cur.as_mut_slice()[i] = old;
            }
        }
    }
    (cur, best_fit)
}

/// A draw strictly inside `(lo, hi)`, also strictly below 1.
pub(crate) fn farey_draw(lo: f64, hi: f64, rng: &mut RngStream) -> f64 {
    loop {
        let x = unif_open(rng, lo, hi);
        if x < 1.0 {
            return x;
        }
    }
}

/// Tries the complement of every key, first improvement.
pub fn mirror_ls(
    keys: &RandomKeys,
    fit: Fitness,
    ev: &mut Evaluator<'_>,
    rng: &mut RngStream,
) -> (RandomKeys, Fitness) {
    let order = rng.permutation(keys.len());
    let mut cur = keys.clone();
    let mut best_fit = fit;
    for &i in &order {
        if ev.expired() {
            break;
        }
        let old = cur[i];
        cur.as_mut_slice()[i] = complement_key(old);
        let f = ev.eval(&cur);
        if f.better_than(&best_fit) {
            best_fit = f;
        } else {
            cur.as_mut_slice()[i] = old;
        }
    }
    (cur, best_fit)
}

/// Iteration budget of the simplex search, `max(1, ceil(n * e^-2))`.
pub fn nelder_mead_iterations(n: usize) -> usize {
    ((n as f64 * (-2.0f64).exp()).ceil() as usize).max(1)
}

type Vertex = (RandomKeys, Fitness);

fn sort_simplex(s: &mut [Vertex; 3]) {
    s.sort_by(|a, b| a.1.objective.total_cmp(&b.1.objective));
}

/// Nelder-Mead over a three-vertex simplex, using blending as the geometric
/// operator. Returns the best vertex.
pub fn nelder_mead_ls(
    x1: Vertex,
    x2: Vertex,
    x3: Vertex,
    ev: &mut Evaluator<'_>,
    rng: &mut RngStream,
) -> Result<Vertex> {
    nelder_mead_ls_with(x1, x2, x3, &NELDER_MEAD_BLEND, ev, rng)
}

/// [`nelder_mead_ls`] with explicit blend probabilities.
pub fn nelder_mead_ls_with(
    x1: Vertex,
    x2: Vertex,
    x3: Vertex,
    params: &BlendParams,
    ev: &mut Evaluator<'_>,
    rng: &mut RngStream,
) -> Result<Vertex> {
    let n = x1.0.len();
    for other in [&x2.0, &x3.0] {
        if other.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: other.len(),
            });
        }
    }
    let direct = params.with_factor(BlendFactor::Direct);
    let inverse = params.with_factor(BlendFactor::Complement);

    let mut s = [x1, x2, x3];
    sort_simplex(&mut s);
    let mut centroid = blend(&s[0].0, &s[1].0, &direct, rng)?;
    let iterations = nelder_mead_iterations(n);
    for _ in 0..iterations {
        if ev.expired() {
            break;
        }
        let mut shrink = false;
        let reflected = blend(&centroid, &s[2].0, &inverse, rng)?;
        let fr = ev.eval(&reflected);
        if fr.better_than(&s[0].1) {
            let expanded = blend(&reflected, &centroid, &inverse, rng)?;
            let fe = ev.eval(&expanded);
            s[2] = if fe.better_than(&fr) {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr.better_than(&s[1].1) {
            s[2] = (reflected, fr);
        } else if fr.better_than(&s[2].1) {
            // outside contraction
            let contracted = blend(&reflected, &centroid, &direct, rng)?;
            let fc = ev.eval(&contracted);
            if fc.better_than(&fr) {
                s[2] = (contracted, fc);
            } else {
                shrink = true;
            }
        } else {
            // inside contraction
            let contracted = blend(&centroid, &s[2].0, &direct, rng)?;
            let fc = ev.eval(&contracted);
            if fc.better_than(&s[2].1) {
                s[2] = (contracted, fc);
            } else {
                shrink = true;
            }
        }
        if shrink {
            for i in 1..3 {
                let k = blend(&s[0].0, &s[i].0, &direct, rng)?;
                let f = ev.eval(&k);
                s[i] = (k, f);
            }
        }
        sort_simplex(&mut s);
        centroid = blend(&s[0].0, &s[1].0, &direct, rng)?;
    }
    let [best, _, _] = s;
    Ok(best)
}

/// Randomized variable neighborhood descent.
///
/// Neighborhoods are tried in random order; an improvement restarts the
/// full list, a failure drops the neighborhood. Nelder-Mead is only listed
/// while the evaluator's pool holds at least two entries to act as simplex
/// partners.
pub fn rvnd(
    keys: &RandomKeys,
    fit: Fitness,
    ev: &mut Evaluator<'_>,
    rng: &mut RngStream,
) -> (RandomKeys, Fitness) {
    let mut cur = keys.clone();
    let mut cur_fit = fit;
    let mut list = neighborhood_list(ev);
    while !list.is_empty() && !ev.expired() {
        let pick = rng.index(list.len());
        let (cand, cand_fit) = match list[pick] {
            Neighborhood::Swap => swap_ls(&cur, cur_fit, ev, rng),
            Neighborhood::Farey => farey_ls(&cur, cur_fit, ev, rng),
            Neighborhood::Mirror => mirror_ls(&cur, cur_fit, ev, rng),
            Neighborhood::NelderMead => match nelder_mead_with_pool(&cur, cur_fit, ev, rng) {
                Some(v) => v,
                None => (cur.clone(), cur_fit),
            },
        };
        if cand_fit.better_than(&cur_fit) {
            cur = cand;
            cur_fit = cand_fit;
            list = neighborhood_list(ev);
        } else {
            list.swap_remove(pick);
        }
    }
    (cur, cur_fit)
}

fn neighborhood_list(ev: &Evaluator<'_>) -> Vec<Neighborhood> {
    let with_nm = ev.pool().is_some_and(|p| p.len() >= 2);
    Neighborhood::ALL
        .iter()
        .copied()
        .filter(|n| with_nm || *n != Neighborhood::NelderMead)
        .collect()
}

fn nelder_mead_with_pool(
    keys: &RandomKeys,
    fit: Fitness,
    ev: &mut Evaluator<'_>,
    rng: &mut RngStream,
) -> Option<Vertex> {
    let (a, b) = ev.pool()?.sample_pair(rng).ok()?;
    if a.keys.len() != keys.len() {
        return None;
    }
    nelder_mead_ls(
        (keys.clone(), fit),
        (a.keys, a.fitness),
        (b.keys, b.fitness),
        ev,
        rng,
    )
    .ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::StopCriterion;
    use crate::keys::{random_vector, Decoder};
    use crate::pool::{ElitePool, SharedPool};
    use std::sync::Mutex;
    use std::time::Instant;

    fn budget() -> StopCriterion {
        StopCriterion::evaluations(10_000_000).unwrap()
    }

    struct Constant(usize);

    impl Decoder for Constant {
        fn dimension(&self) -> usize {
            self.0
        }
        fn decode(&self, _: &[f64]) -> Fitness {
            Fitness::feasible(1.0)
        }
    }

    /// Records every vector it sees.
    struct Spy {
        n: usize,
        seen: Mutex<Vec<Vec<f64>>>,
    }

    impl Decoder for Spy {
        fn dimension(&self) -> usize {
            self.n
        }
        fn decode(&self, keys: &[f64]) -> Fitness {
            self.seen.lock().unwrap().push(keys.to_vec());
            Fitness::feasible(1.0)
        }
    }

    /// Symmetric under per-key complement: depends on |k - 0.5| only.
    struct Symmetric(usize);

    impl Decoder for Symmetric {
        fn dimension(&self) -> usize {
            self.0
        }
        fn decode(&self, keys: &[f64]) -> Fitness {
            Fitness::feasible(keys.iter().map(|k| (k - 0.5).abs()).sum())
        }
    }

    /// Weighted position penalty: minimized when keys are sorted ascending.
    struct Inversions(usize);

    impl Decoder for Inversions {
        fn dimension(&self) -> usize {
            self.0
        }
        fn decode(&self, keys: &[f64]) -> Fitness {
            let mut inv = 0.0;
            for i in 0..keys.len() {
                for j in i + 1..keys.len() {
                    if keys[i] > keys[j] {
                        inv += 1.0;
                    }
                }
            }
            Fitness::feasible(inv)
        }
    }

    #[test]
    fn farey_sequence_terms() {
        assert_eq!(FAREY.len(), 19);
        assert_eq!(FAREY_INTERVALS, 18);
        assert_eq!(FAREY[0], 0.0);
        assert_eq!(FAREY[18], 1.0);
        assert!(FAREY.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn nelder_mead_iteration_budget() {
        assert_eq!(nelder_mead_iterations(7), 1);
        assert_eq!(nelder_mead_iterations(1), 1);
        assert_eq!(nelder_mead_iterations(100), 14);
    }

    #[test]
    fn swap_single_key_untouched() {
        let d = Inversions(1);
        let mut ev = Evaluator::new(&d, None, budget(), Instant::now());
        let mut rng = RngStream::new(1, 0);
        let x = RandomKeys::new(vec![0.4]).unwrap();
        let f = ev.eval(&x);
        let (y, _) = swap_ls(&x, f, &mut ev, &mut rng);
        assert_eq!(x, y);
    }

    #[test]
    fn swap_identical_keys_untouched() {
        let d = Inversions(6);
        let mut ev = Evaluator::new(&d, None, budget(), Instant::now());
        let mut rng = RngStream::new(1, 0);
        let x = RandomKeys::new(vec![0.4; 6]).unwrap();
        let f = ev.eval(&x);
        let (y, fy) = swap_ls(&x, f, &mut ev, &mut rng);
        assert_eq!(x, y);
        assert_eq!(f, fy);
    }

    #[test]
    fn swap_improves_inversions() {
        let d = Inversions(8);
        let mut ev = Evaluator::new(&d, None, budget(), Instant::now());
        let mut rng = RngStream::new(3, 0);
        let x = RandomKeys::new(vec![0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2]).unwrap();
        let f = ev.eval(&x);
        let (_, fy) = swap_ls(&x, f, &mut ev, &mut rng);
        assert!(fy.objective < f.objective);
    }

    #[test]
    fn farey_constant_decoder_counts_and_intervals() {
        let n = 5;
        let spy = Spy {
            n,
            seen: Mutex::new(Vec::new()),
        };
        let mut ev = Evaluator::new(&spy, None, budget(), Instant::now());
        let mut rng = RngStream::new(5, 0);
        let x = random_vector(n, &mut rng).unwrap();
        let f = ev.eval(&x);
        let before = ev.evaluations();
        let (y, _) = farey_ls(&x, f, &mut ev, &mut rng);
        assert_eq!(y, x);
        assert_eq!(ev.evaluations() - before, (18 * n) as u64);

        // every candidate differs from the incumbent in exactly one key, and
        // the k-th candidate for a key lies in the k-th Farey interval
        let seen = spy.seen.lock().unwrap();
        let candidates = &seen[1..];
        for (c_idx, cand) in candidates.iter().enumerate() {
            let changed: Vec<usize> = (0..n).filter(|&i| cand[i] != x[i]).collect();
            assert_eq!(changed.len(), 1);
            let j = c_idx % 18;
            let v = cand[changed[0]];
            assert!(v > FAREY[j] && v < FAREY[j + 1], "{v} not in interval {j}");
        }
    }

    #[test]
    fn mirror_symmetric_decoder_unchanged() {
        let d = Symmetric(7);
        let mut ev = Evaluator::new(&d, None, budget(), Instant::now());
        let mut rng = RngStream::new(5, 0);
        let x = RandomKeys::new(vec![0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875]).unwrap();
        let f = ev.eval(&x);
        let before = ev.evaluations();
        let (y, _) = mirror_ls(&x, f, &mut ev, &mut rng);
        assert_eq!(y, x);
        assert_eq!(ev.evaluations() - before, 7);
    }

    #[test]
    fn nelder_mead_degenerate_simplex() {
        let d = Symmetric(6);
        let mut ev = Evaluator::new(&d, None, budget(), Instant::now());
        let mut rng = RngStream::new(5, 0);
        // 0.5 is its own complement, so with mu = 0 every blend reproduces x
        let x = RandomKeys::new(vec![0.5; 6]).unwrap();
        let f = ev.eval(&x);
        let p = BlendParams::new(0.5, 0.0, BlendFactor::Direct).unwrap();
        let (y, fy) = nelder_mead_ls_with(
            (x.clone(), f),
            (x.clone(), f),
            (x.clone(), f),
            &p,
            &mut ev,
            &mut rng,
        )
        .unwrap();
        assert_eq!(y, x);
        assert_eq!(fy, f);
    }

    #[test]
    fn nelder_mead_dimension_mismatch() {
        let d = Symmetric(2);
        let mut ev = Evaluator::new(&d, None, budget(), Instant::now());
        let mut rng = RngStream::new(5, 0);
        let a = RandomKeys::new(vec![0.1, 0.2]).unwrap();
        let b = RandomKeys::new(vec![0.1]).unwrap();
        let f = Fitness::feasible(0.0);
        assert!(nelder_mead_ls((a.clone(), f), (b, f), (a, f), &mut ev, &mut rng).is_err());
    }

    #[test]
    fn rvnd_fixed_point_constant() {
        let d = Constant(4);
        let pool = SharedPool::new(ElitePool::new(5).unwrap());
        let mut ev = Evaluator::new(&d, Some(&pool), budget(), Instant::now());
        let mut rng = RngStream::new(5, 0);
        let x = random_vector(4, &mut rng).unwrap();
        let f = ev.eval(&x);
        let (y, fy) = rvnd(&x, f, &mut ev, &mut rng);
        assert_eq!(x, y);
        assert_eq!(f, fy);
    }

    #[test]
    fn rvnd_respects_budget() {
        let d = Inversions(30);
        let stop = StopCriterion::evaluations(50).unwrap();
        let mut ev = Evaluator::new(&d, None, stop, Instant::now());
        let mut rng = RngStream::new(5, 0);
        let x = random_vector(30, &mut rng).unwrap();
        let f = ev.eval(&x);
        rvnd(&x, f, &mut ev, &mut rng);
        assert!(ev.evaluations() <= 51);
    }
}
