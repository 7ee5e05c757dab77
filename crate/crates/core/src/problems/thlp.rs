//! Tree of hubs location: pick `p` hubs joined by a spanning tree, attach
//! every other node to one hub, and route all demand through the tree.

use std::path::Path;

use super::{binomial, for_each_combination, guard_states, key_order, write_file, write_matrix, Optimum, Tokens};
use crate::error::{Error, Result};
use crate::keys::{Decoder, Fitness, RngStream};

#[derive(Clone, Debug, PartialEq)]
pub struct ThlpInstance {
    n: usize,
    p: usize,
    discount: f64,
    cost: Vec<f64>,
    demand: Vec<f64>,
}

/// Decoded hub network. Node indices are 0-based; `hub_of[i]` is a position
/// in `hubs`, and tree edges join hub positions.
#[derive(Clone, Debug, PartialEq)]
pub struct HubNetwork {
    pub hubs: Vec<usize>,
    pub hub_of: Vec<usize>,
    pub tree: Vec<(usize, usize)>,
    pub cost: f64,
}

struct DisjointSet(Vec<usize>);

impl DisjointSet {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra] = rb;
        true
    }
}

impl ThlpInstance {
    pub fn new(n: usize, p: usize, discount: f64, cost: Vec<f64>, demand: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInstance(format!("need at least 2 nodes, got {n}")));
        }
        if p == 0 || p > n {
            return Err(Error::InvalidInstance(format!("hub count {p} must lie in 1..={n}")));
        }
        if !(0.0..=1.0).contains(&discount) {
            return Err(Error::InvalidInstance(format!("discount {discount} must lie in [0, 1]")));
        }
        if cost.len() != n * n || demand.len() != n * n {
            return Err(Error::InvalidInstance("cost and demand must be n x n".into()));
        }
        if cost.iter().chain(&demand).any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInstance("costs and demands must be non-negative".into()));
        }
        for i in 0..n {
            if cost[i * n + i] != 0.0 {
                return Err(Error::InvalidInstance(format!("nonzero cost diagonal at node {}", i + 1)));
            }
            for j in 0..i {
                if cost[i * n + j] != cost[j * n + i] {
                    return Err(Error::InvalidInstance(format!(
                        "cost ({}, {}) is not symmetric",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(ThlpInstance {
            n,
            p,
            discount,
            cost,
            demand,
        })
    }

    /// Nodes on a 100 x 100 grid with rounded Euclidean costs and integer
    /// demands in `0..=20`.
    pub fn random(n: usize, p: usize, discount: f64, rng: &mut RngStream) -> Result<Self> {
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|_| ((rng.unit() * 100.0).floor(), (rng.unit() * 100.0).floor()))
            .collect();
        let mut cost = vec![0.0; n * n];
        let mut demand = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (pts[i], pts[j]);
                cost[i * n + j] = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt().round();
                if i != j {
                    demand[i * n + j] = rng.index(21) as f64;
                }
            }
        }
        Self::new(n, p, discount, cost, demand)
    }

    /// `|N| p discount`, then `|N|` cost rows and `|N|` demand rows.
    pub fn parse(path: &Path) -> Result<Self> {
        let mut t = Tokens::read(path)?;
        let n: usize = t.next("node count")?;
        let p: usize = t.next("hub count")?;
        let discount: f64 = t.next("discount factor")?;
        if n < 2 || p == 0 || p > n {
            return Err(t.error(format!("need n >= 2 and 1 <= p <= n, got n = {n}, p = {p}")));
        }
        let cost = t.matrix(n, n, "cost")?;
        let demand = t.matrix(n, n, "demand")?;
        t.finish()?;
        Self::new(n, p, discount, cost, demand).map_err(|e| t.error(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut s = format!("{} {} {}\n", self.n, self.p, self.discount);
        write_matrix(&mut s, &self.cost, self.n);
        write_matrix(&mut s, &self.demand, self.n);
        write_file(path, &s)
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    pub fn hubs(&self) -> usize {
        self.p
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn cost(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.n + j]
    }

    pub fn demand(&self, i: usize, j: usize) -> f64 {
        self.demand[i * self.n + j]
    }

    /// Hub-position pairs `(a, b)`, `a < b`, in lexicographic order.
    pub fn hub_pairs(p: usize) -> Vec<(usize, usize)> {
        (0..p).flat_map(|a| (a + 1..p).map(move |b| (a, b))).collect()
    }

    /// Routing cost of a fixed network: access legs plus discounted tree
    /// paths, summed over ordered pairs of distinct nodes.
    pub fn network_cost(&self, hubs: &[usize], hub_of: &[usize], tree: &[(usize, usize)]) -> f64 {
        let p = hubs.len();
        let mut adj = vec![Vec::new(); p];
        for &(a, b) in tree {
            let w = self.cost(hubs[a], hubs[b]);
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        let mut path = vec![0.0; p * p];
        let mut stack = Vec::new();
        for src in 0..p {
            let mut seen = vec![false; p];
            seen[src] = true;
            stack.push(src);
            while let Some(u) = stack.pop() {
                for &(v, w) in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        path[src * p + v] = path[src * p + u] + w;
                        stack.push(v);
                    }
                }
            }
        }
        let access: Vec<f64> = (0..self.n).map(|i| self.cost(i, hubs[hub_of[i]])).collect();
        let mut total = 0.0;
        for i in 0..self.n {
            let hi = hub_of[i];
            for j in 0..self.n {
                let w = self.demand[i * self.n + j];
                if i == j || w == 0.0 {
                    continue;
                }
                let hj = hub_of[j];
                total += w * (access[i] + self.discount * path[hi * p + hj] + access[j]);
            }
        }
        total
    }

    pub fn decode_network(&self, keys: &[f64]) -> HubNetwork {
        let (n, p) = (self.n, self.p);
        let order = key_order(&keys[..n]);
        let hubs = order[..p].to_vec();
        let mut hub_of = vec![0usize; n];
        for (pos, &h) in hubs.iter().enumerate() {
            hub_of[h] = pos;
        }
        for (k, &node) in order[p..].iter().enumerate() {
            hub_of[node] = ((keys[n + k] * p as f64) as usize).min(p - 1);
        }
        let arc_keys = &keys[2 * n - p..];
        let pairs = Self::hub_pairs(p);
        let mut ds = DisjointSet((0..p).collect());
        let mut tree = Vec::with_capacity(p.saturating_sub(1));
        for a in key_order(arc_keys) {
            if tree.len() + 1 >= p {
                break;
            }
            let (u, v) = pairs[a];
            if ds.union(u, v) {
                tree.push((u, v));
            }
        }
        let cost = self.network_cost(&hubs, &hub_of, &tree);
        HubNetwork {
            hubs,
            hub_of,
            tree,
            cost,
        }
    }

    /// Enumerates hub sets, assignments of the remaining nodes and labeled
    /// spanning trees over the hubs (via Pruefer sequences).
    pub fn brute_force(&self) -> Result<Optimum> {
        let (n, p) = (self.n, self.p);
        let trees = if p <= 2 { 1.0 } else { (p as f64).powi(p as i32 - 2) };
        guard_states(binomial(n, p) * (p as f64).powi((n - p) as i32) * trees)?;
        let tree_list = spanning_trees(p);
        let mut best = (f64::INFINITY, String::new());
        for_each_combination(n, p, |hubs| {
            let others: Vec<usize> = (0..n).filter(|i| !hubs.contains(i)).collect();
            let mut choice = vec![0usize; others.len()];
            loop {
                let mut hub_of = vec![0usize; n];
                for (pos, &h) in hubs.iter().enumerate() {
                    hub_of[h] = pos;
                }
                for (k, &o) in others.iter().enumerate() {
                    hub_of[o] = choice[k];
                }
                for tree in &tree_list {
                    let c = self.oracle_cost(hubs, &hub_of, tree);
                    if c < best.0 {
                        best = (c, certificate(hubs, &hub_of, tree));
                    }
                }
                // next assignment in mixed radix p
                let mut k = 0;
                while k < choice.len() && choice[k] == p - 1 {
                    choice[k] = 0;
                    k += 1;
                }
                if k == choice.len() {
                    break;
                }
                choice[k] += 1;
            }
        });
        Ok(Optimum {
            objective: best.0,
            certificate: best.1,
        })
    }

    /// Cost of a network with tree paths from Floyd-Warshall over the tree,
    /// kept separate from the decoder's traversal.
    fn oracle_cost(&self, hubs: &[usize], hub_of: &[usize], tree: &[(usize, usize)]) -> f64 {
        let p = hubs.len();
        let mut d = vec![f64::INFINITY; p * p];
        for a in 0..p {
            d[a * p + a] = 0.0;
        }
        for &(a, b) in tree {
            let w = self.cost(hubs[a], hubs[b]);
            d[a * p + b] = w;
            d[b * p + a] = w;
        }
        for k in 0..p {
            for i in 0..p {
                for j in 0..p {
                    let via = d[i * p + k] + d[k * p + j];
                    if via < d[i * p + j] {
                        d[i * p + j] = via;
                    }
                }
            }
        }
        let mut total = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    let (hi, hj) = (hub_of[i], hub_of[j]);
                    total += self.demand(i, j)
                        * (self.cost(i, hubs[hi]) + self.discount * d[hi * p + hj] + self.cost(hubs[hj], j));
                }
            }
        }
        total
    }
}

fn certificate(hubs: &[usize], hub_of: &[usize], tree: &[(usize, usize)]) -> String {
    let hubs_s: Vec<String> = hubs.iter().map(|h| (h + 1).to_string()).collect();
    let assign: Vec<String> = hub_of.iter().map(|&k| (hubs[k] + 1).to_string()).collect();
    let edges: Vec<String> = tree
        .iter()
        .map(|&(a, b)| format!("{}-{}", hubs[a] + 1, hubs[b] + 1))
        .collect();
    format!(
        "hubs {}; assign {}; tree {}",
        hubs_s.join(" "),
        assign.join(" "),
        edges.join(" ")
    )
}

/// Every labeled spanning tree on `p` vertices.
pub fn spanning_trees(p: usize) -> Vec<Vec<(usize, usize)>> {
    match p {
        0 | 1 => return vec![Vec::new()],
        2 => return vec![vec![(0, 1)]],
        _ => {}
    }
    let len = p - 2;
    let mut seq = vec![0usize; len];
    let mut out = Vec::new();
    loop {
        out.push(pruefer_decode(&seq, p));
        let mut k = 0;
        while k < len && seq[k] == p - 1 {
            seq[k] = 0;
            k += 1;
        }
        if k == len {
            break;
        }
        seq[k] += 1;
    }
    out
}

fn pruefer_decode(seq: &[usize], p: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; p];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(p - 1);
    for &s in seq {
        let leaf = (0..p).find(|&v| degree[v] == 1).expect("a leaf exists");
        edges.push((leaf.min(s), leaf.max(s)));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..p).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

impl Decoder for ThlpInstance {
    /// Node keys, assignment keys for the non-hubs and one key per hub pair.
    fn dimension(&self) -> usize {
        self.n + (self.n - self.p) + self.p * (self.p - 1) / 2
    }

    fn decode(&self, keys: &[f64]) -> Fitness {
        Fitness::feasible(self.decode_network(keys).cost)
    }

    fn describe(&self, keys: &[f64]) -> String {
        let net = self.decode_network(keys);
        format!("cost {}\n{}", net.cost, certificate(&net.hubs, &net.hub_of, &net.tree))
    }
}
