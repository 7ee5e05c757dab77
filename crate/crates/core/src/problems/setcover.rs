//! Unicost set covering with the three-phase greedy decoder.

use std::path::Path;

use super::{guard_states, one_based, write_file, Optimum, Tokens};
use crate::error::{Error, Result};
use crate::keys::{Decoder, Fitness, RngStream};

#[derive(Clone, Debug, PartialEq)]
pub struct SetCoverInstance {
    rows: usize,
    cols: usize,
    /// Rows covered by each column.
    covers: Vec<Vec<usize>>,
    /// Rows no column covers.
    uncoverable: usize,
}

impl SetCoverInstance {
    /// `matrix[i][j]` is true when column `j` covers row `i`.
    pub fn new(matrix: &[Vec<bool>]) -> Result<Self> {
        let rows = matrix.len();
        let cols = matrix.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInstance("set cover needs rows and columns".into()));
        }
        if matrix.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInstance("ragged coverage matrix".into()));
        }
        let covers: Vec<Vec<usize>> = (0..cols)
            .map(|j| (0..rows).filter(|&i| matrix[i][j]).collect())
            .collect();
        let uncoverable = (0..rows).filter(|&i| !matrix[i].iter().any(|&a| a)).count();
        Ok(SetCoverInstance {
            rows,
            cols,
            covers,
            uncoverable,
        })
    }

    /// Each entry set with probability `density`; every row gets at least one
    /// column.
    pub fn random(rows: usize, cols: usize, density: f64, rng: &mut RngStream) -> Result<Self> {
        let mut m = vec![vec![false; cols]; rows];
        for row in m.iter_mut() {
            for a in row.iter_mut() {
                *a = rng.unit() < density;
            }
            if cols > 0 && !row.iter().any(|&a| a) {
                row[rng.index(cols)] = true;
            }
        }
        Self::new(&m)
    }

    pub fn parse(path: &Path) -> Result<Self> {
        let mut t = Tokens::read(path)?;
        let rows: usize = t.next("row count")?;
        let cols: usize = t.next("column count")?;
        let mut m = vec![vec![false; cols]; rows];
        for row in m.iter_mut() {
            for a in row.iter_mut() {
                let v: u8 = t.next("matrix entry")?;
                if v > 1 {
                    return Err(t.error(format!("matrix entries must be 0 or 1, got {v}")));
                }
                *a = v == 1;
            }
        }
        t.finish()?;
        Self::new(&m).map_err(|e| t.error(e.to_string()))
    }

    pub fn matrix(&self) -> Vec<Vec<bool>> {
        let mut m = vec![vec![false; self.cols]; self.rows];
        for (j, rows) in self.covers.iter().enumerate() {
            for &i in rows {
                m[i][j] = true;
            }
        }
        m
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for row in self.matrix() {
            let parts: Vec<&str> = row.iter().map(|&a| if a { "1" } else { "0" }).collect();
            s.push_str(&parts.join(" "));
            s.push('\n');
        }
        write_file(path, &s)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn columns(&self) -> usize {
        self.cols
    }

    /// Whether every row is covered by some column.
    pub fn is_coverable(&self) -> bool {
        self.uncoverable == 0
    }

    /// Selected columns (0-based, ascending) and the fitness.
    pub fn decode_cover(&self, keys: &[f64]) -> (Vec<usize>, Fitness) {
        let mut chosen: Vec<bool> = keys.iter().map(|&k| k >= 0.5).collect();
        let mut count = vec![0usize; self.rows];
        for j in (0..self.cols).filter(|&j| chosen[j]) {
            for &i in &self.covers[j] {
                count[i] += 1;
            }
        }
        loop {
            let mut best = (0usize, 0usize);
            for j in (0..self.cols).filter(|&j| !chosen[j]) {
                let gain = self.covers[j].iter().filter(|&&i| count[i] == 0).count();
                if gain > best.1 {
                    best = (j, gain);
                }
            }
            if best.1 == 0 {
                break;
            }
            chosen[best.0] = true;
            for &i in &self.covers[best.0] {
                count[i] += 1;
            }
        }
        for (j, on) in chosen.iter_mut().enumerate() {
            if *on && self.covers[j].iter().all(|&i| count[i] >= 2) {
                *on = false;
                for &i in &self.covers[j] {
                    count[i] -= 1;
                }
            }
        }
        let cover: Vec<usize> = (0..self.cols).filter(|&j| chosen[j]).collect();
        let uncovered = count.iter().filter(|&&c| c == 0).count();
        let fit = Fitness::penalized(cover.len() as f64, (uncovered * self.cols) as f64);
        (cover, fit)
    }

    /// Smallest cover over all `2^n` column subsets.
    pub fn brute_force(&self) -> Result<Optimum> {
        guard_states(2f64.powi(self.cols as i32))?;
        if !self.is_coverable() {
            return Err(Error::Infeasible);
        }
        let words = self.rows.div_ceil(64);
        let masks: Vec<Vec<u64>> = self
            .covers
            .iter()
            .map(|rows| {
                let mut m = vec![0u64; words];
                for &i in rows {
                    m[i / 64] |= 1 << (i % 64);
                }
                m
            })
            .collect();
        let full: Vec<u64> = (0..words)
            .map(|w| {
                let bits = (self.rows - w * 64).min(64);
                if bits == 64 {
                    u64::MAX
                } else {
                    (1u64 << bits) - 1
                }
            })
            .collect();
        let mut best: Option<u64> = None;
        let mut acc = vec![0u64; words];
        for subset in 0u64..(1u64 << self.cols) {
            if best.is_some_and(|b| subset.count_ones() >= b.count_ones()) {
                continue;
            }
            acc.iter_mut().for_each(|a| *a = 0);
            for (j, m) in masks.iter().enumerate() {
                if subset >> j & 1 == 1 {
                    for (a, b) in acc.iter_mut().zip(m) {
                        *a |= b;
                    }
                }
            }
            if acc == full {
                best = Some(subset);
            }
        }
        let best = best.ok_or(Error::Infeasible)?;
        let cols: Vec<usize> = (0..self.cols).filter(|&j| best >> j & 1 == 1).collect();
        Ok(Optimum {
            objective: cols.len() as f64,
            certificate: one_based(&cols),
        })
    }
}

impl Decoder for SetCoverInstance {
    fn dimension(&self) -> usize {
        self.cols
    }

    fn decode(&self, keys: &[f64]) -> Fitness {
        self.decode_cover(keys).1
    }

    fn describe(&self, keys: &[f64]) -> String {
        let (cover, fit) = self.decode_cover(keys);
        format!("size {}\ncolumns {}", fit.objective, one_based(&cover))
    }
}
