//! Node-capacitated graph partitioning (handover minimization): assign base
//! stations to capacity-limited controllers so that few handovers cross
//! controller boundaries.

use std::path::Path;

use super::{guard_states, key_order, write_file, write_matrix, Optimum, Tokens};
use crate::error::{Error, Result};
use crate::keys::{Decoder, Fitness, RngStream};

#[derive(Clone, Debug, PartialEq)]
pub struct NcgppInstance {
    traffic: Vec<f64>,
    capacity: Vec<f64>,
    /// Row-major `|B| x |B|` handover counts.
    handover: Vec<f64>,
    total_handover: f64,
}

/// Decoded station-to-controller assignment (0-based, `None` when a station
/// fits nowhere).
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub assignment: Vec<Option<usize>>,
    pub cut: f64,
    pub unassigned: usize,
}

impl NcgppInstance {
    pub fn new(traffic: Vec<f64>, capacity: Vec<f64>, handover: Vec<f64>) -> Result<Self> {
        let b = traffic.len();
        if b == 0 || capacity.is_empty() {
            return Err(Error::InvalidInstance("need at least one station and one controller".into()));
        }
        if handover.len() != b * b {
            return Err(Error::InvalidInstance(format!(
                "handover matrix has {} entries, expected {}",
                handover.len(),
                b * b
            )));
        }
        if traffic.iter().chain(&handover).any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInstance("traffic and handovers must be non-negative".into()));
        }
        if capacity.iter().any(|&c| !(c > 0.0) || !c.is_finite()) {
            return Err(Error::InvalidInstance("capacities must be positive".into()));
        }
        if (0..b).any(|i| handover[i * b + i] != 0.0) {
            return Err(Error::InvalidInstance("handover diagonal must be zero".into()));
        }
        let total_handover = handover.iter().sum();
        Ok(NcgppInstance {
            traffic,
            capacity,
            handover,
            total_handover,
        })
    }

    /// Random symmetric handovers (each pair linked with probability 1/2,
    /// counts in `1..=200`) and integer traffic in `1..=10`. Capacities are
    /// equal and sized from a random balanced assignment, inflated by
    /// `slack`, so a feasible partition always exists.
    pub fn random(stations: usize, rncs: usize, slack: f64, rng: &mut RngStream) -> Result<Self> {
        let traffic: Vec<f64> = (0..stations).map(|_| (1 + rng.index(10)) as f64).collect();
        let mut load = vec![0.0; rncs.max(1)];
        for (k, &s) in rng.permutation(stations).iter().enumerate() {
            load[k % rncs.max(1)] += traffic[s];
        }
        let cap = (load.iter().copied().fold(0.0, f64::max) * (1.0 + slack)).ceil();
        let capacity = vec![cap; rncs];
        let mut h = vec![0.0; stations * stations];
        for i in 0..stations {
            for j in i + 1..stations {
                if rng.unit() < 0.5 {
                    let v = (1 + rng.index(200)) as f64;
                    h[i * stations + j] = v;
                    h[j * stations + i] = v;
                }
            }
        }
        Self::new(traffic, capacity, h)
    }

    /// `|B| |N|`, traffics, capacities, then the `|B|` handover rows.
    pub fn parse(path: &Path) -> Result<Self> {
        let mut t = Tokens::read(path)?;
        let b: usize = t.next("station count")?;
        let n: usize = t.next("controller count")?;
        let traffic = t.matrix(1, b, "traffic")?;
        let capacity = t.matrix(1, n, "capacity")?;
        let handover = t.matrix(b, b, "handover count")?;
        t.finish()?;
        Self::new(traffic, capacity, handover).map_err(|e| t.error(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut s = format!("{} {}\n", self.stations(), self.controllers());
        write_matrix(&mut s, &self.traffic, self.stations());
        write_matrix(&mut s, &self.capacity, self.controllers());
        write_matrix(&mut s, &self.handover, self.stations());
        write_file(path, &s)
    }

    pub fn stations(&self) -> usize {
        self.traffic.len()
    }

    pub fn controllers(&self) -> usize {
        self.capacity.len()
    }

    pub fn handover(&self, a: usize, b: usize) -> f64 {
        self.handover[a * self.stations() + b]
    }

    pub fn total_handover(&self) -> f64 {
        self.total_handover
    }

    /// Handovers between stations that do not share a controller.
    pub fn cut(&self, assignment: &[Option<usize>]) -> f64 {
        let b = self.stations();
        let mut cut = 0.0;
        for i in 0..b {
            for j in 0..b {
                let same = matches!((assignment[i], assignment[j]), (Some(x), Some(y)) if x == y);
                if !same {
                    cut += self.handover[i * b + j];
                }
            }
        }
        cut
    }

    pub fn decode_partition(&self, keys: &[f64]) -> Partition {
        let b = self.stations();
        let n = self.controllers();
        let order = key_order(&keys[..b]);
        let seeds = ((keys[b] * n as f64).ceil() as usize).clamp(1, n).min(b);
        let mut load = vec![0.0; n];
        let mut assignment: Vec<Option<usize>> = vec![None; b];
        let mut rest = Vec::with_capacity(b);
        let mut next = 0;
        for &s in &order[..seeds] {
            while next < n && self.capacity[next] < self.traffic[s] {
                next += 1;
            }
            if next < n {
                assignment[s] = Some(next);
                load[next] += self.traffic[s];
                next += 1;
            } else {
                rest.push(s);
            }
        }
        rest.extend_from_slice(&order[seeds..]);
        let mut affinity = vec![0.0; n];
        let mut unassigned = 0;
        for s in rest {
            affinity.iter_mut().for_each(|a| *a = 0.0);
            for (o, r) in assignment.iter().enumerate() {
                if let Some(r) = *r {
                    affinity[r] += self.handover[s * b + o] + self.handover[o * b + s];
                }
            }
            let mut best: Option<usize> = None;
            for r in 0..n {
                if load[r] + self.traffic[s] <= self.capacity[r]
                    && best.is_none_or(|q| affinity[r] > affinity[q])
                {
                    best = Some(r);
                }
            }
            match best {
                Some(r) => {
                    assignment[s] = Some(r);
                    load[r] += self.traffic[s];
                }
                None => unassigned += 1,
            }
        }
        let cut = self.cut(&assignment);
        Partition {
            assignment,
            cut,
            unassigned,
        }
    }

    /// Minimum cut over every capacity-feasible assignment.
    pub fn brute_force(&self) -> Result<Optimum> {
        let b = self.stations();
        let n = self.controllers();
        guard_states((n as f64).powi(b as i32))?;
        let mut assign = vec![0usize; b];
        let mut load = vec![0.0; n];
        let mut best: Option<(f64, Vec<usize>)> = None;
        self.enumerate(0, &mut assign, &mut load, &mut best);
        let (cut, a) = best.ok_or(Error::Infeasible)?;
        let parts: Vec<String> = a.iter().map(|r| (r + 1).to_string()).collect();
        Ok(Optimum {
            objective: cut,
            certificate: parts.join(" "),
        })
    }

    fn enumerate(
        &self,
        k: usize,
        assign: &mut [usize],
        load: &mut [f64],
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        let b = self.stations();
        if k == b {
            let mut cut = 0.0;
            for i in 0..b {
                for j in 0..b {
                    if assign[i] != assign[j] {
                        cut += self.handover(i, j);
                    }
                }
            }
            if best.as_ref().is_none_or(|(c, _)| cut < *c) {
                *best = Some((cut, assign.to_vec()));
            }
            return;
        }
        for r in 0..self.controllers() {
            if load[r] + self.traffic[k] <= self.capacity[r] {
                load[r] += self.traffic[k];
                assign[k] = r;
                self.enumerate(k + 1, assign, load, best);
                load[r] -= self.traffic[k];
            }
        }
    }
}

impl Decoder for NcgppInstance {
    /// One key per station plus one for the number of seed stations.
    fn dimension(&self) -> usize {
        self.stations() + 1
    }

    fn decode(&self, keys: &[f64]) -> Fitness {
        let p = self.decode_partition(keys);
        Fitness::penalized(p.cut, p.unassigned as f64 * self.total_handover)
    }

    fn describe(&self, keys: &[f64]) -> String {
        let p = self.decode_partition(keys);
        let mut s = format!("cut {}\nunassigned {}", p.cut, p.unassigned);
        for r in 0..self.controllers() {
            let members: Vec<String> = (0..self.stations())
                .filter(|&i| p.assignment[i] == Some(r))
                .map(|i| (i + 1).to_string())
                .collect();
            s.push_str(&format!("\nrnc {} {}", r + 1, members.join(" ")));
        }
        s
    }
}
