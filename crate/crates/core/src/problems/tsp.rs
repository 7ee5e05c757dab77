//! Traveling salesman with the sort-based permutation decoder.

use std::path::Path;

use super::{guard_states, key_order, one_based, write_file, write_matrix, Optimum, Tokens};
use crate::error::{Error, Result};
use crate::keys::{Decoder, Fitness, RngStream};

#[derive(Clone, Debug, PartialEq)]
pub struct TspInstance {
    n: usize,
    dist: Vec<f64>,
}

impl TspInstance {
    /// Row-major `n x n` distances; must be symmetric with a zero diagonal.
    pub fn new(n: usize, dist: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInstance(format!("TSP needs at least 2 nodes, got {n}")));
        }
        if dist.len() != n * n {
            return Err(Error::InvalidInstance(format!(
                "distance matrix has {} entries, expected {}",
                dist.len(),
                n * n
            )));
        }
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return Err(Error::InvalidInstance(format!("nonzero diagonal at node {}", i + 1)));
            }
            for j in 0..n {
                let d = dist[i * n + j];
                if !(d >= 0.0) || d != dist[j * n + i] {
                    return Err(Error::InvalidInstance(format!(
                        "distance ({}, {}) must be non-negative and symmetric",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(TspInstance { n, dist })
    }

    /// Points on a 100 x 100 grid with rounded Euclidean distances.
    pub fn random(n: usize, rng: &mut RngStream) -> Result<Self> {
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|_| ((rng.unit() * 100.0).floor(), (rng.unit() * 100.0).floor()))
            .collect();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (pts[i], pts[j]);
                dist[i * n + j] = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt().round();
            }
        }
        Self::new(n, dist)
    }

    pub fn parse(path: &Path) -> Result<Self> {
        let mut t = Tokens::read(path)?;
        let n: usize = t.next("node count")?;
        let dist = t.matrix(n, n, "distance")?;
        t.finish()?;
        Self::new(n, dist).map_err(|e| t.error(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut s = format!("{}\n", self.n);
        write_matrix(&mut s, &self.dist, self.n);
        write_file(path, &s)
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    pub fn decoder_dimension(&self) -> usize {
        self.n
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    /// Closed-tour length of a 0-based node sequence.
    pub fn tour_cost(&self, tour: &[usize]) -> f64 {
        let n = tour.len();
        (0..n).map(|k| self.distance(tour[k], tour[(k + 1) % n])).sum()
    }

    /// Tour (0-based) and its length.
    pub fn decode_tour(&self, keys: &[f64]) -> (Vec<usize>, f64) {
        let tour = key_order(keys);
        let cost = self.tour_cost(&tour);
        (tour, cost)
    }

    /// Enumerates all `(n-1)!` tours starting at node 1.
    pub fn brute_force(&self) -> Result<Optimum> {
        let states: f64 = (1..self.n).map(|k| k as f64).product();
        guard_states(states)?;
        let mut best = (f64::INFINITY, Vec::new());
        let mut path = vec![0];
        let mut used = vec![false; self.n];
        used[0] = true;
        self.search(&mut path, &mut used, 0.0, &mut best);
        Ok(Optimum {
            objective: best.0,
            certificate: one_based(&best.1),
        })
    }

    fn search(&self, path: &mut Vec<usize>, used: &mut [bool], len: f64, best: &mut (f64, Vec<usize>)) {
        let last = *path.last().expect("non-empty");
        if path.len() == self.n {
            let total = len + self.distance(last, path[0]);
            if total < best.0 {
                *best = (total, path.clone());
            }
            return;
        }
        for v in 1..self.n {
            if !used[v] {
                used[v] = true;
                path.push(v);
                self.search(path, used, len + self.distance(last, v), best);
                path.pop();
                used[v] = false;
            }
        }
    }
}

impl Decoder for TspInstance {
    fn dimension(&self) -> usize {
        self.n
    }

    fn decode(&self, keys: &[f64]) -> Fitness {
        Fitness::feasible(self.decode_tour(keys).1)
    }

    fn describe(&self, keys: &[f64]) -> String {
        let (tour, cost) = self.decode_tour(keys);
        format!("cost {cost}\ntour {}", one_based(&tour))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keys::random_vector;

    fn line(n: usize) -> TspInstance {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = (i as f64 - j as f64).abs();
            }
        }
        TspInstance::new(n, d).unwrap()
    }

    #[test]
    fn figure_vector_tour() {
        let inst = line(5);
        let (tour, _) = inst.decode_tour(&[0.085, 0.277, 0.149, 0.332, 0.148]);
        assert_eq!(one_based(&tour), "1 5 3 2 4");
    }

    #[test]
    fn sorted_keys_give_identity() {
        let inst = line(6);
        let (tour, cost) = inst.decode_tour(&[0.0, 0.1, 0.2, 0.3, 0.4, 0.5]);
        assert_eq!(tour, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(cost, 10.0);
    }

    #[test]
    fn decode_matches_recomputed_cost() {
        let mut rng = RngStream::new(5, 0);
        let inst = TspInstance::random(4, &mut rng).unwrap();
        for _ in 0..200 {
            let x = random_vector(4, &mut rng).unwrap();
            let (tour, cost) = inst.decode_tour(&x);
            let mut again = 0.0;
            for k in 0..4 {
                again += inst.dist[tour[k] * 4 + tour[(k + 1) % 4]];
            }
            assert_eq!(cost, again);
        }
    }

    #[test]
    fn oracle_dominates_decodes() {
        let mut rng = RngStream::new(9, 0);
        let inst = TspInstance::random(4, &mut rng).unwrap();
        let opt = inst.brute_force().unwrap();
        for _ in 0..1000 {
            let x = random_vector(4, &mut rng).unwrap();
            assert!(inst.decode(&x).objective >= opt.objective);
        }
    }

    #[test]
    fn oracle_guard() {
        let mut rng = RngStream::new(1, 0);
        let inst = TspInstance::random(14, &mut rng).unwrap();
        assert!(matches!(inst.brute_force(), Err(Error::TooLarge(_))));
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.txt");
        let inst = TspInstance::random(7, &mut RngStream::new(2, 0)).unwrap();
        inst.write(&p).unwrap();
        assert_eq!(TspInstance::parse(&p).unwrap(), inst);
    }

    #[test]
    fn rejects_asymmetric() {
        assert!(TspInstance::new(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(TspInstance::new(1, vec![0.0]).is_err());
    }
}
