//! Random-key vectors, the decoder contract and the seeded random streams
//! every search component draws from.

use std::fmt;
use std::ops::Deref;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Margin kept below 1.0 whenever operator arithmetic has to be clamped
/// back into the key range.
pub const KEY_EPSILON: f64 = 1e-12;

/// Largest key an operator may produce after clamping.
pub const KEY_MAX: f64 = 1.0 - KEY_EPSILON;

/// Clamps an arbitrary real into `[0, 1 - KEY_EPSILON]`. NaN maps to 0.
#[inline]
pub fn clamp_key(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(0.0, KEY_MAX)
    }
}

/// Complement of a key, `1 - x`, kept inside the half-open unit interval.
#[inline]
pub fn complement_key(x: f64) -> f64 {
    clamp_key(1.0 - x)
}

/// A point of the half-open unit hypercube `[0, 1)^n`.
#[derive(Clone, PartialEq, Default)]
pub struct RandomKeys(Vec<f64>);

impl RandomKeys {
    /// Wraps `keys`, rejecting empty vectors and values outside `[0, 1)`.
    pub fn new(keys: Vec<f64>) -> Result<Self> {
        if keys.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        if let Some(bad) = keys.iter().find(|k| !(0.0..1.0).contains(*k)) {
            return Err(Error::InvalidParameter(format!("key {bad} outside [0, 1)")));
        }
        Ok(RandomKeys(keys))
    }

    /// Wraps keys that are already known to be in range.
    pub(crate) fn from_vec_unchecked(keys: Vec<f64>) -> Self {
        debug_assert!(keys.iter().all(|k| (0.0..1.0).contains(k)));
        RandomKeys(keys)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_valid(&self) -> bool {
        self.0.iter().all(|k| (0.0..1.0).contains(k))
    }
}

impl Deref for RandomKeys {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl fmt::Debug for RandomKeys {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Objective value of a decoded solution. The reported objective already
/// includes the penalty; a solution is feasible exactly when the penalty is 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fitness {
    pub objective: f64,
    pub penalty: f64,
    pub feasible: bool,
}

impl Fitness {
    pub fn feasible(cost: f64) -> Self {
        Fitness {
            objective: cost,
            penalty: 0.0,
            feasible: true,
        }
    }

    /// `cost + penalty`; a zero penalty yields a feasible fitness.
    pub fn penalized(cost: f64, penalty: f64) -> Self {
        debug_assert!(penalty >= 0.0);
        Fitness {
            objective: cost + penalty,
            penalty,
            feasible: penalty == 0.0,
        }
    }

    /// Strict improvement test used by every acceptance rule.
    #[inline]
    pub fn better_than(&self, other: &Fitness) -> bool {
        self.objective < other.objective
    }
}

/// Problem plug-in mapping a key vector to an objective value.
///
/// Implementations are deterministic, never observe anything but the keys,
/// and are shared read-only between solver threads. All problems minimize.
pub trait Decoder: Send + Sync {
    /// Number of keys a solution vector carries.
    fn dimension(&self) -> usize;

    /// Decodes `keys` and scores the resulting solution.
    fn decode(&self, keys: &[f64]) -> Fitness;

    /// Human-readable rendering of the decoded solution.
    fn describe(&self, keys: &[f64]) -> String {
        format!("objective {}", self.decode(keys).objective)
    }
}

impl<D: Decoder + ?Sized> Decoder for &D {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn decode(&self, keys: &[f64]) -> Fitness {
        (**self).decode(keys)
    }
    fn describe(&self, keys: &[f64]) -> String {
        (**self).describe(keys)
    }
}

impl<D: Decoder + ?Sized> Decoder for Box<D> {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn decode(&self, keys: &[f64]) -> Fitness {
        (**self).decode(keys)
    }
    fn describe(&self, keys: &[f64]) -> String {
        (**self).describe(keys)
    }
}

/// Decodes `keys` with `decoder` and bumps the evaluation tally.
pub fn evaluate(decoder: &dyn Decoder, keys: &[f64], tally: &mut u64) -> Result<Fitness> {
    if keys.len() != decoder.dimension() {
        return Err(Error::DimensionMismatch {
            expected: decoder.dimension(),
            got: keys.len(),
        });
    }
    *tally += 1;
    Ok(decoder.decode(keys))
}

/// Deterministic random stream identified by a master seed and a stream id.
///
/// Each solver thread owns one stream; pool initialization uses stream 0.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform draw from `[0, 1)`.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform index in `0..n`. `n` must be positive.
    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// A uniformly random permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        use rand::seq::SliceRandom;
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut self.rng);
        order
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// `n` i.i.d. uniform keys.
pub fn random_vector(n: usize, rng: &mut RngStream) -> Result<RandomKeys> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    Ok(RandomKeys((0..n).map(|_| rng.unit()).collect()))
}

/// Uniform draw from `[lo, hi)`.
pub fn unif_rand(rng: &mut RngStream, lo: f64, hi: f64) -> Result<f64> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInterval { lo, hi });
    }
    Ok(rng.random_range(lo..hi))
}

/// Uniform draw from the open interval `(lo, hi)`.
pub(crate) fn unif_open(rng: &mut RngStream, lo: f64, hi: f64) -> f64 {
    debug_assert!(lo < hi);
    loop {
        let x = rng.random_range(lo..hi);
        if x > lo {
            return x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Zero(usize);

    impl Decoder for Zero {
        fn dimension(&self) -> usize {
            self.0
        }
        fn decode(&self, _: &[f64]) -> Fitness {
            Fitness::feasible(0.0)
        }
    }

    #[test]
    fn random_vector_in_range_and_reproducible() {
        let a = random_vector(5, &mut RngStream::new(7, 0)).unwrap();
        let b = random_vector(5, &mut RngStream::new(7, 0)).unwrap();
        assert_eq!(a.len(), 5);
        assert!(a.is_valid());
        assert_eq!(
            a.iter().map(|k| k.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|k| k.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn random_vector_rejects_zero_dimension() {
        assert!(matches!(
            random_vector(0, &mut RngStream::new(1, 0)),
            Err(Error::InvalidDimension(0))
        ));
    }

    #[test]
    fn random_vector_mean_near_half() {
        for seed in 0..10 {
            let v = random_vector(10_000, &mut RngStream::new(seed, 3)).unwrap();
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            assert!((mean - 0.5).abs() < 0.02, "seed {seed}: mean {mean}");
        }
    }

    #[test]
    fn streams_differ() {
        let a = random_vector(8, &mut RngStream::new(7, 1)).unwrap();
        let b = random_vector(8, &mut RngStream::new(7, 2)).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn unif_rand_interval() {
        let mut rng = RngStream::new(3, 0);
        assert!(unif_rand(&mut rng, 0.5, 0.5).is_err());
        assert!(unif_rand(&mut rng, 0.6, 0.5).is_err());
        let x = unif_rand(&mut rng, 0.0, 1.0).unwrap();
        assert!((0.0..1.0).contains(&x));
        let n = 10_000;
        let mean = (0..n)
            .map(|_| unif_rand(&mut rng, 0.25, 0.5).unwrap())
            .inspect(|x| assert!((0.25..0.5).contains(x)))
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.375).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn unif_open_excludes_endpoints() {
        let mut rng = RngStream::new(11, 0);
        for _ in 0..1000 {
            let x = unif_open(&mut rng, 1.0 / 7.0, 1.0 / 6.0);
            assert!(x > 1.0 / 7.0 && x < 1.0 / 6.0);
        }
    }

    #[test]
    fn evaluate_counts_and_checks_dimension() {
        let d = Zero(3);
        let mut tally = 0;
        for _ in 0..100 {
            let f = evaluate(&d, &[0.1, 0.2, 0.3], &mut tally).unwrap();
            assert_eq!(f, Fitness::feasible(0.0));
        }
        assert_eq!(tally, 100);
        assert!(matches!(
            evaluate(&d, &[0.1], &mut tally),
            Err(Error::DimensionMismatch { expected: 3, got: 1 })
        ));
        assert_eq!(tally, 100);
    }

    #[test]
    fn fitness_penalty_rules() {
        let f = Fitness::penalized(10.0, 5.0);
        assert_eq!(f.objective, 15.0);
        assert!(!f.feasible);
        assert!(Fitness::penalized(10.0, 0.0).feasible);
    }

    #[test]
    fn clamp_and_complement() {
        assert_eq!(complement_key(0.3), 0.7);
        assert_eq!(complement_key(0.0), KEY_MAX);
        assert_eq!(clamp_key(1.7), KEY_MAX);
        assert_eq!(clamp_key(-0.2), 0.0);
        assert_eq!(clamp_key(f64::NAN), 0.0);
    }

    #[test]
    fn new_validates_range() {
        assert!(RandomKeys::new(vec![0.0, 0.5]).is_ok());
        assert!(RandomKeys::new(vec![1.0]).is_err());
        assert!(RandomKeys::new(vec![]).is_err());
    }
}
