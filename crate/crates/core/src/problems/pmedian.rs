//! Alpha-neighbor p-median: open `p` facilities and charge every vertex the
//! distances to its `alpha` nearest open facilities.

use std::fmt::Write as _;
use std::path::Path;

use super::{binomial, for_each_combination, guard_states, one_based, write_file, Optimum, Tokens};
use crate::error::{Error, Result};
use crate::keys::{Decoder, Fitness, RngStream};

/// Distance assigned to vertex pairs with no connecting path.
pub const UNREACHABLE: f64 = 1e12;

#[derive(Clone, Debug, PartialEq)]
pub struct PMedianInstance {
    n: usize,
    p: usize,
    alpha: usize,
    dist: Vec<f64>,
    disconnected: bool,
}

impl PMedianInstance {
    /// Row-major all-pairs distances; symmetric with a zero diagonal.
    pub fn new(n: usize, p: usize, alpha: usize, dist: Vec<f64>) -> Result<Self> {
        if n == 0 || dist.len() != n * n {
            return Err(Error::InvalidInstance(format!(
                "distance matrix has {} entries for {n} vertices",
                dist.len()
            )));
        }
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return Err(Error::InvalidInstance(format!("nonzero diagonal at vertex {}", i + 1)));
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
        let disconnected = dist.iter().any(|&d| d >= UNREACHABLE);
        PMedianInstance {
            n,
            p: 1,
            alpha: 1,
            dist,
            disconnected,
        }
        .with_p(p)?
        .with_alpha(alpha)
    }

    /// Builds shortest-path distances from an undirected edge list
    /// (0-based endpoints). A later duplicate edge replaces an earlier one.
    pub fn from_edges(n: usize, p: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInstance("no vertices".into()));
        }
        let mut d = vec![UNREACHABLE; n * n];
        for i in 0..n {
            d[i * n + i] = 0.0;
        }
        for &(i, j, c) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidInstance(format!("edge ({}, {}) out of range", i + 1, j + 1)));
            }
            if i != j {
                d[i * n + j] = c;
                d[j * n + i] = c;
            }
        }
        for k in 0..n {
            for i in 0..n {
                let dik = d[i * n + k];
                if dik >= UNREACHABLE {
                    continue;
                }
                for j in 0..n {
                    let via = dik + d[k * n + j];
                    if via < d[i * n + j] {
                        d[i * n + j] = via;
                    }
                }
            }
        }
        for v in d.iter_mut() {
            if *v >= UNREACHABLE {
                *v = UNREACHABLE;
            }
        }
        Self::new(n, p, 1, d)
    }

    /// Complete graph with integer edge costs in `1..=100`.
    pub fn random(n: usize, p: usize, alpha: usize, rng: &mut RngStream) -> Result<Self> {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j, (1 + rng.index(100)) as f64));
            }
        }
        Self::from_edges(n, p, &edges)?.with_alpha(alpha)
    }

    /// OR-Library `pmed` format: `n m p` then `m` lines `i j cost`.
    pub fn parse_orlib(path: &Path) -> Result<Self> {
        let mut t = Tokens::read(path)?;
        let n: usize = t.next("vertex count")?;
        let m: usize = t.next("edge count")?;
        let p: usize = t.next("median count")?;
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let i: usize = t.next("edge endpoint")?;
            let j: usize = t.next("edge endpoint")?;
            let c = t.non_negative("edge cost")?;
            if i == 0 || j == 0 || i > n || j > n {
                return Err(t.error(format!("edge endpoint out of range 1..={n}")));
            }
            edges.push((i - 1, j - 1, c));
        }
        t.finish()?;
        Self::from_edges(n, p, &edges).map_err(|e| t.error(e.to_string()))
    }

    /// Writes the distance matrix as a complete graph in OR-Library format.
    pub fn write_orlib(&self, path: &Path) -> Result<()> {
        let mut s = String::new();
        let mut edges = 0;
        let mut body = String::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let d = self.distance(i, j);
                if d < UNREACHABLE {
                    let _ = writeln!(body, "{} {} {}", i + 1, j + 1, d);
                    edges += 1;
                }
            }
        }
        let _ = writeln!(s, "{} {} {}", self.n, edges, self.p);
        s.push_str(&body);
        write_file(path, &s)
    }

    pub fn with_p(mut self, p: usize) -> Result<Self> {
        if p == 0 || p > self.n {
            return Err(Error::InvalidInstance(format!("p = {p} must lie in 1..={}", self.n)));
        }
        self.p = p;
        self.alpha = self.alpha.min(p);
        Ok(self)
    }

    pub fn with_alpha(mut self, alpha: usize) -> Result<Self> {
        if alpha == 0 || alpha > self.p {
            return Err(Error::InvalidInstance(format!(
                "alpha = {alpha} must lie in 1..={}",
                self.p
            )));
        }
        self.alpha = alpha;
        Ok(self)
    }

    pub fn vertices(&self) -> usize {
        self.n
    }

    pub fn medians(&self) -> usize {
        self.p
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    /// Whether some vertex pair has no connecting path.
    pub fn is_disconnected(&self) -> bool {
        self.disconnected
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    /// Facilities opened by `keys`, in selection order (0-based).
    pub fn open_facilities(&self, keys: &[f64]) -> Vec<usize> {
        let mut candidates: Vec<usize> = (0..self.n).collect();
        keys.iter()
            .take(self.p)
            .map(|&k| {
                let pos = ((k * candidates.len() as f64) as usize).min(candidates.len() - 1);
                candidates.remove(pos)
            })
            .collect()
    }

    /// Sum over vertices of the distances to their `alpha` nearest open
    /// facilities.
    pub fn assignment_cost(&self, open: &[usize]) -> f64 {
        let mut near = Vec::with_capacity(open.len());
        let mut total = 0.0;
        for j in 0..self.n {
            near.clear();
            near.extend(open.iter().map(|&f| self.distance(j, f)));
            let a = self.alpha.min(near.len());
            if a < near.len() {
                near.select_nth_unstable_by(a - 1, f64::total_cmp);
            }
            total += near[..a].iter().sum::<f64>();
        }
        total
    }

    /// Opened facilities (0-based, selection order) and their cost.
    pub fn decode_facilities(&self, keys: &[f64]) -> (Vec<usize>, f64) {
        let open = self.open_facilities(keys);
        let cost = self.assignment_cost(&open);
        (open, cost)
    }

    /// Evaluates all `C(n, p)` facility sets.
    pub fn brute_force(&self) -> Result<Optimum> {
        guard_states(binomial(self.n, self.p))?;
        let mut best = (f64::INFINITY, Vec::new());
        for_each_combination(self.n, self.p, |open| {
            let mut cost = 0.0;
            for j in 0..self.n {
                let mut ds: Vec<f64> = open.iter().map(|&f| self.distance(j, f)).collect();
                ds.sort_by(f64::total_cmp);
                cost += ds.iter().take(self.alpha).sum::<f64>();
            }
            if cost < best.0 {
                best = (cost, open.to_vec());
            }
        });
        Ok(Optimum {
            objective: best.0,
            certificate: one_based(&best.1),
        })
    }
}

impl Decoder for PMedianInstance {
    fn dimension(&self) -> usize {
        self.p
    }

    fn decode(&self, keys: &[f64]) -> Fitness {
        Fitness::feasible(self.decode_facilities(keys).1)
    }

    fn describe(&self, keys: &[f64]) -> String {
        let (mut open, cost) = self.decode_facilities(keys);
        open.sort_unstable();
        format!("cost {cost}\nfacilities {}", one_based(&open))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keys::random_vector;

    fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn figure_keys_open_facilities() {
        let inst = PMedianInstance::random(10, 3, 2, &mut RngStream::new(1, 0)).unwrap();
        let open = inst.open_facilities(&[0.45, 0.74, 0.12]);
        assert_eq!(one_based(&open), "5 8 1");
    }

    #[test]
    fn zero_keys_open_first_vertices() {
        let inst = PMedianInstance::random(7, 3, 1, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!(inst.open_facilities(&[0.0; 3]), vec![0, 1, 2]);
    }

    #[test]
    fn cost_matches_oracle_recomputation() {
        let mut rng = RngStream::new(4, 0);
        let inst = PMedianInstance::random(9, 3, 2, &mut rng).unwrap();
        for _ in 0..200 {
            let x = random_vector(3, &mut rng).unwrap();
            let (open, cost) = inst.decode_facilities(&x);
            let mut again = 0.0;
            for j in 0..9 {
                let mut ds: Vec<f64> = open.iter().map(|&f| inst.dist[j * 9 + f]).collect();
                ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
                again += ds[0] + ds[1];
            }
            assert_eq!(cost, again);
        }
    }

    #[test]
    fn all_open_alpha_one_is_zero() {
        let inst = PMedianInstance::random(5, 5, 1, &mut RngStream::new(2, 0)).unwrap();
        assert_eq!(inst.brute_force().unwrap().objective, 0.0);
    }

    #[test]
    fn alpha_monotone() {
        let mut rng = RngStream::new(6, 0);
        let one = PMedianInstance::random(10, 4, 1, &mut rng).unwrap();
        let two = one.clone().with_alpha(2).unwrap();
        for _ in 0..100 {
            let x = random_vector(4, &mut rng).unwrap();
            assert!(one.decode(&x).objective <= two.decode(&x).objective);
        }
    }

    #[test]
    fn oracle_dominates() {
        let mut rng = RngStream::new(8, 0);
        let inst = PMedianInstance::random(10, 3, 2, &mut rng).unwrap();
        let opt = inst.brute_force().unwrap();
        for _ in 0..500 {
            let x = random_vector(3, &mut rng).unwrap();
            assert!(inst.decode(&x).objective >= opt.objective);
        }
    }

    #[test]
    fn orlib_triangle_and_path() {
        let dir = tempfile::tempdir().unwrap();
        let tri = write(&dir, "tri", "3 3 1\n1 2 1\n2 3 1\n1 3 1\n");
        let inst = PMedianInstance::parse_orlib(&tri).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(inst.distance(i, j), if i == j { 0.0 } else { 1.0 });
            }
        }
        let path = write(&dir, "path", "3 2 1\n1 2 1\n2 3 2\n");
        let inst = PMedianInstance::parse_orlib(&path).unwrap();
        assert_eq!(inst.distance(0, 2), 3.0);
        assert!(!inst.is_disconnected());
    }

    #[test]
    fn orlib_last_duplicate_wins() {
        let dir = tempfile::tempdir().unwrap();
        let f = write(&dir, "dup", "2 2 1\n1 2 5\n2 1 7\n");
        assert_eq!(PMedianInstance::parse_orlib(&f).unwrap().distance(0, 1), 7.0);
    }

    #[test]
    fn orlib_disconnected_flagged() {
        let dir = tempfile::tempdir().unwrap();
        let f = write(&dir, "disc", "3 1 1\n1 2 4\n");
        let inst = PMedianInstance::parse_orlib(&f).unwrap();
        assert!(inst.is_disconnected());
        assert_eq!(inst.distance(0, 2), UNREACHABLE);
    }

    #[test]
    fn orlib_errors_carry_line() {
        let dir = tempfile::tempdir().unwrap();
        let f = write(&dir, "bad", "3 2 1\n1 2 1\n2 x 1\n");
        match PMedianInstance::parse_orlib(&f) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let f = write(&dir, "range", "3 1 1\n1 4 1\n");
        assert!(PMedianInstance::parse_orlib(&f).is_err());
        let f = write(&dir, "p", "3 1 4\n1 2 1\n");
        assert!(PMedianInstance::parse_orlib(&f).is_err());
    }

    #[test]
    fn parsed_distances_symmetric() {
        let dir = tempfile::tempdir().unwrap();
        for seed in 0..5 {
            let inst = PMedianInstance::random(8, 3, 2, &mut RngStream::new(seed, 0)).unwrap();
            let p = dir.path().join(format!("r{seed}"));
            inst.write_orlib(&p).unwrap();
            let back = PMedianInstance::parse_orlib(&p).unwrap().with_alpha(2).unwrap();
            assert_eq!(back, inst);
            for i in 0..8 {
                assert_eq!(back.distance(i, i), 0.0);
                for j in 0..8 {
                    assert_eq!(back.distance(i, j), back.distance(j, i));
                }
            }
        }
    }

    #[test]
    fn alpha_validation() {
        let inst = PMedianInstance::random(6, 2, 1, &mut RngStream::new(2, 0)).unwrap();
        assert!(inst.clone().with_alpha(3).is_err());
        assert!(inst.with_alpha(0).is_err());
    }
}
