//! The elite pool: a bounded, sorted, clone-free set of the best solutions
//! found so far, shared by every solver of a run.

use std::io::Write;
use std::path::Path;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::keys::{random_vector, Fitness, RandomKeys, RngStream};
use crate::local_search::farey_ls;
use crate::variation::{shake, ShakeParams};

pub const DEFAULT_CAPACITY: usize = 20;

/// Relative tolerance under which two objectives count as clones.
pub const CLONE_TOLERANCE: f64 = 1e-9;

/// Shake attempts spent de-cloning one entry during initialization.
const DECLONE_ATTEMPTS: usize = 50;

#[inline]
pub fn is_clone(a: f64, b: f64, tolerance: f64) -> bool {
    (a - b).abs() <= tolerance * a.abs().max(b.abs()).max(1.0)
}

#[derive(Clone, Debug)]
pub struct PoolEntry {
    pub keys: RandomKeys,
    pub fitness: Fitness,
}

#[derive(Clone, Debug)]
pub struct ElitePool {
    capacity: usize,
    tolerance: f64,
    entries: Vec<PoolEntry>,
}

impl ElitePool {
    pub fn new(capacity: usize) -> Result<Self> {
        Self::with_tolerance(capacity, CLONE_TOLERANCE)
    }

    pub fn with_tolerance(capacity: usize, tolerance: f64) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidParameter("pool capacity must be positive".into()));
        }
        if !(tolerance >= 0.0) {
            return Err(Error::InvalidParameter("clone tolerance must be >= 0".into()));
        }
        Ok(ElitePool {
            capacity,
            tolerance,
            entries: Vec::with_capacity(capacity + 1),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    pub fn best(&self) -> Option<&PoolEntry> {
        self.entries.first()
    }

    pub fn worst(&self) -> Option<&PoolEntry> {
        self.entries.last()
    }

    pub fn contains_clone(&self, objective: f64) -> bool {
        // entries are sorted, so only the neighbours of the insertion point can clash
        let at = self.insertion_point(objective);
        let lo = at.saturating_sub(1);
        let hi = (at + 1).min(self.entries.len());
        self.entries[lo..hi]
            .iter()
            .any(|e| is_clone(e.fitness.objective, objective, self.tolerance))
    }

    fn insertion_point(&self, objective: f64) -> usize {
        self.entries
            .partition_point(|e| e.fitness.objective <= objective)
    }

    /// Offers a decoded solution. Returns whether it entered the pool.
    pub fn offer(&mut self, keys: &RandomKeys, fitness: Fitness) -> bool {
        if !fitness.objective.is_finite() || self.contains_clone(fitness.objective) {
            return false;
        }
        if self.entries.len() >= self.capacity {
            match self.worst() {
                Some(w) if fitness.objective >= w.fitness.objective => return false,
                _ => {}
            }
        }
        let at = self.insertion_point(fitness.objective);
        self.entries.insert(
            at,
            PoolEntry {
                keys: keys.clone(),
                fitness,
            },
        );
        self.entries.truncate(self.capacity);
        true
    }

    /// A uniformly chosen entry, copied out.
    pub fn sample(&self, rng: &mut RngStream) -> Result<PoolEntry> {
        if self.entries.is_empty() {
            return Err(Error::EmptyPool);
        }
        Ok(self.entries[rng.index(self.entries.len())].clone())
    }

    /// Two distinct entries chosen uniformly. Needs at least two entries.
    pub fn sample_pair(&self, rng: &mut RngStream) -> Result<(PoolEntry, PoolEntry)> {
        let n = self.entries.len();
        if n < 2 {
            return Err(Error::EmptyPool);
        }
        let i = rng.index(n);
        let mut j = rng.index(n - 1);
        if j >= i {
            j += 1;
        }
        Ok((self.entries[i].clone(), self.entries[j].clone()))
    }

    /// One line per entry: objective, then the keys.
    pub fn dump(&self, path: &Path) -> Result<()> {
        let mut out = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        for e in &self.entries {
            let mut line = format!("{}", e.fitness.objective);
            for k in e.keys.iter() {
                line.push(' ');
                line.push_str(&k.to_string());
            }
            writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}

/// Thread-safe wrapper; every operation takes the lock for its duration only.
#[derive(Debug)]
pub struct SharedPool(Mutex<ElitePool>);

impl SharedPool {
    pub fn new(pool: ElitePool) -> Self {
        SharedPool(Mutex::new(pool))
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, ElitePool> {
        // a panicking solver cannot leave the pool half-updated: every
        // mutation is a single Vec insert + truncate
        self.0.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn offer(&self, keys: &RandomKeys, fitness: Fitness) -> bool {
        self.lock().offer(keys, fitness)
    }

    pub fn sample(&self, rng: &mut RngStream) -> Result<PoolEntry> {
        self.lock().sample(rng)
    }

    pub fn sample_pair(&self, rng: &mut RngStream) -> Result<(PoolEntry, PoolEntry)> {
        self.lock().sample_pair(rng)
    }

    pub fn len(&self) -> usize {
        self.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.lock().is_empty()
    }

    pub fn best(&self) -> Option<PoolEntry> {
        self.lock().best().cloned()
    }

    pub fn snapshot(&self) -> ElitePool {
        self.lock().clone()
    }

    pub fn into_inner(self) -> ElitePool {
        self.0.into_inner().unwrap_or_else(|p| p.into_inner())
    }
}

/// Fills a pool with up to `capacity` Farey-refined random vectors.
///
/// A refined vector whose objective clones an existing entry is shaken (up
/// to 50 times, rate in [0.1, 0.3]) until it is distinct; failing that it is
/// replaced by one fresh random vector. If that also clones an entry, the
/// slot is left empty, so degenerate landscapes yield a smaller pool.
pub fn init_pool(capacity: usize, ev: &mut Evaluator<'_>, rng: &mut RngStream) -> Result<ElitePool> {
    let mut pool = ElitePool::new(capacity)?;
    let n = ev.dimension();
    let declone = ShakeParams::new(0.1, 0.3)?;
    for _ in 0..capacity {
        let keys = random_vector(n, rng)?;
        let fit = ev.eval(&keys);
        let (mut keys, mut fit) = farey_ls(&keys, fit, ev, rng);
        let mut attempts = 0;
        while pool.contains_clone(fit.objective) && attempts < DECLONE_ATTEMPTS && !ev.expired() {
            keys = shake(&keys, &declone, rng);
            fit = ev.eval(&keys);
            attempts += 1;
        }
        if pool.contains_clone(fit.objective) {
            keys = random_vector(n, rng)?;
            fit = ev.eval(&keys);
        }
        pool.offer(&keys, fit);
        if ev.expired() && !pool.is_empty() {
            break;
        }
    }
    Ok(pool)
}
