//! Problem-independent variation operators: shaking and blending.

use crate::error::{Error, Result};
use crate::keys::{complement_key, RandomKeys, RngStream};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShakeParams {
    pub beta_min: f64,
    pub beta_max: f64,
}

impl ShakeParams {
    pub fn new(beta_min: f64, beta_max: f64) -> Result<Self> {
        if !(0.0 <= beta_min && beta_min <= beta_max && beta_max <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "shaking rates must satisfy 0 <= {beta_min} <= {beta_max} <= 1"
            )));
        }
        Ok(ShakeParams { beta_min, beta_max })
    }

    /// Fixed rate `beta`.
    pub fn fixed(beta: f64) -> Result<Self> {
        Self::new(beta, beta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShakeMove {
    Random,
    Mirror,
    Swap,
    SwapNeighbor,
}

const MOVES: [ShakeMove; 4] = [
    ShakeMove::Random,
    ShakeMove::Mirror,
    ShakeMove::Swap,
    ShakeMove::SwapNeighbor,
];

/// `ceil(beta * n)`, at least one move whenever `beta > 0`.
pub fn move_count(beta: f64, n: usize) -> usize {
    if beta <= 0.0 || n == 0 {
        0
    } else {
        ((beta * n as f64).ceil() as usize).max(1)
    }
}

/// Applies `mv` in place at a random position.
pub fn apply_move(keys: &mut [f64], mv: ShakeMove, rng: &mut RngStream) {
    let n = keys.len();
    let i = rng.index(n);
    match mv {
        ShakeMove::Random => keys[i] = rng.unit(),
        ShakeMove::Mirror => keys[i] = complement_key(keys[i]),
        ShakeMove::Swap => {
            if n > 1 {
                let mut j = rng.index(n - 1);
                if j >= i {
                    j += 1;
                }
                keys.swap(i, j);
            }
        }
        ShakeMove::SwapNeighbor => keys.swap(i, (i + 1) % n),
    }
}

/// Perturbs a copy of `keys` with `ceil(beta * n)` random moves, `beta`
/// drawn uniformly from `[beta_min, beta_max]`. Moves act sequentially on
/// the working copy.
pub fn shake(keys: &RandomKeys, params: &ShakeParams, rng: &mut RngStream) -> RandomKeys {
    shake_counted(keys, params, rng).0
}

/// [`shake`] that also reports how many moves were applied.
pub fn shake_counted(
    keys: &RandomKeys,
    params: &ShakeParams,
    rng: &mut RngStream,
) -> (RandomKeys, usize) {
    let beta = if params.beta_min < params.beta_max {
        params.beta_min + (params.beta_max - params.beta_min) * rng.unit()
    } else {
        params.beta_min
    };
    let mut out = keys.clone();
    let moves = move_count(beta, keys.len());
    for _ in 0..moves {
        let mv = MOVES[rng.index(MOVES.len())];
        apply_move(out.as_mut_slice(), mv, rng);
    }
    (out, moves)
}

/// How the second parent contributes a key.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlendFactor {
    /// Copy `b_i` (factor +1).
    Direct,
    /// Use `1 - b_i` (factor -1).
    Complement,
}

impl BlendFactor {
    pub fn from_sign(sign: i32) -> Result<Self> {
        match sign {
            1 => Ok(BlendFactor::Direct),
            -1 => Ok(BlendFactor::Complement),
            _ => Err(Error::InvalidParameter(format!("blend factor must be +1 or -1, got {sign}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlendParams {
    /// Probability of inheriting the first parent's key.
    pub rho: f64,
    /// Probability of a fresh random key.
    pub mu: f64,
    pub factor: BlendFactor,
}

impl BlendParams {
    pub fn new(rho: f64, mu: f64, factor: BlendFactor) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) || !(0.0..=1.0).contains(&mu) {
            return Err(Error::InvalidParameter(format!(
                "blend probabilities must lie in [0, 1]: rho={rho}, mu={mu}"
            )));
        }
        Ok(BlendParams { rho, mu, factor })
    }

    pub fn with_factor(self, factor: BlendFactor) -> Self {
        BlendParams { factor, ..self }
    }
}

/// Position-wise recombination of two parents.
pub fn blend(
    a: &RandomKeys,
    b: &RandomKeys,
    params: &BlendParams,
    rng: &mut RngStream,
) -> Result<RandomKeys> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let child = a
        .iter()
        .zip(b.iter())
        .map(|(&ka, &kb)| {
            if rng.unit() < params.mu {
                rng.unit()
            } else if rng.unit() < params.rho {
                ka
            } else {
                match params.factor {
                    BlendFactor::Direct => kb,
                    BlendFactor::Complement => complement_key(kb),
                }
            }
        })
        .collect();
    Ok(RandomKeys::from_vec_unchecked(child))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keys::random_vector;
    use proptest::prelude::*;

    fn rk(v: &[f64]) -> RandomKeys {
        RandomKeys::new(v.to_vec()).unwrap()
    }

    #[test]
    fn zero_rate_is_identity() {
        let mut rng = RngStream::new(4, 0);
        let x = random_vector(12, &mut rng).unwrap();
        let p = ShakeParams::fixed(0.0).unwrap();
        let (y, moves) = shake_counted(&x, &p, &mut rng);
        assert_eq!(moves, 0);
        assert_eq!(x, y);
    }

    #[test]
    fn full_rate_applies_n_moves() {
        let mut rng = RngStream::new(4, 0);
        let x = random_vector(10, &mut rng).unwrap();
        let p = ShakeParams::fixed(1.0).unwrap();
        let (_, moves) = shake_counted(&x, &p, &mut rng);
        assert_eq!(moves, 10);
    }

    #[test]
    fn move_count_rounds_up() {
        assert_eq!(move_count(0.0, 10), 0);
        assert_eq!(move_count(0.01, 10), 1);
        assert_eq!(move_count(0.25, 10), 3);
        assert_eq!(move_count(0.3, 10), 3);
    }

    #[test]
    fn mirror_move_complements() {
        let mut rng = RngStream::new(0, 0);
        let mut keys = [0.3];
        apply_move(&mut keys, ShakeMove::Mirror, &mut rng);
        assert_eq!(keys[0], 0.7);
        let mut zero = [0.0];
        apply_move(&mut zero, ShakeMove::Mirror, &mut rng);
        assert!(zero[0] < 1.0);
    }

    #[test]
    fn swap_neighbor_wraps() {
        let mut rng = RngStream::new(0, 0);
        let mut seen_wrap = false;
        for _ in 0..200 {
            let mut keys = [0.1, 0.2, 0.3];
            apply_move(&mut keys, ShakeMove::SwapNeighbor, &mut rng);
            if keys == [0.3, 0.2, 0.1] {
                seen_wrap = true;
            }
        }
        assert!(seen_wrap);
    }

    #[test]
    fn shake_is_deterministic_per_seed() {
        let x = random_vector(20, &mut RngStream::new(1, 0)).unwrap();
        let p = ShakeParams::new(0.1, 0.5).unwrap();
        let a = shake(&x, &p, &mut RngStream::new(8, 1));
        let b = shake(&x, &p, &mut RngStream::new(8, 1));
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_shake_params() {
        assert!(ShakeParams::new(0.5, 0.2).is_err());
        assert!(ShakeParams::new(-0.1, 0.2).is_err());
        assert!(ShakeParams::new(0.1, 1.2).is_err());
    }

    #[test]
    fn blend_full_inheritance() {
        let mut rng = RngStream::new(2, 0);
        let a = random_vector(50, &mut rng).unwrap();
        let b = random_vector(50, &mut rng).unwrap();
        let p = BlendParams::new(1.0, 0.0, BlendFactor::Direct).unwrap();
        assert_eq!(blend(&a, &b, &p, &mut rng).unwrap(), a);
    }

    #[test]
    fn blend_complement_of_b() {
        let mut rng = RngStream::new(2, 0);
        let a = rk(&[0.1, 0.2, 0.9]);
        let b = rk(&[0.25, 0.5, 0.0]);
        let p = BlendParams::new(0.0, 0.0, BlendFactor::Complement).unwrap();
        let c = blend(&a, &b, &p, &mut rng).unwrap();
        assert_eq!(c[0], 0.75);
        assert_eq!(c[1], 0.5);
        assert!(c[2] < 1.0 && c[2] > 0.999);
    }

    #[test]
    fn blend_inheritance_fraction() {
        let mut rng = RngStream::new(13, 0);
        let n = 10_000;
        let a = random_vector(n, &mut rng).unwrap();
        let b = random_vector(n, &mut rng).unwrap();
        let p = BlendParams::new(0.5, 0.02, BlendFactor::Direct).unwrap();
        let c = blend(&a, &b, &p, &mut rng).unwrap();
        let from_a = c.iter().zip(a.iter()).filter(|(x, y)| x == y).count();
        let frac = from_a as f64 / n as f64;
        assert!((frac - 0.49).abs() < 0.03, "fraction {frac}");
    }

    #[test]
    fn blend_length_mismatch() {
        let mut rng = RngStream::new(2, 0);
        let p = BlendParams::new(0.5, 0.0, BlendFactor::Direct).unwrap();
        assert!(matches!(
            blend(&rk(&[0.1]), &rk(&[0.1, 0.2]), &p, &mut rng),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn blend_self_direct_is_identity(seed in 0u64..1000, rho in 0.0f64..=1.0, n in 1usize..40) {
            let mut rng = RngStream::new(seed, 0);
            let x = random_vector(n, &mut rng).unwrap();
            let p = BlendParams::new(rho, 0.0, BlendFactor::Direct).unwrap();
            prop_assert_eq!(blend(&x, &x, &p, &mut rng).unwrap(), x);
        }

        #[test]
        fn operators_preserve_range(seed in 0u64..10_000, n in 1usize..30, lo in 0.0f64..=1.0, span in 0.0f64..=1.0) {
            let mut rng = RngStream::new(seed, 0);
            let mut x = random_vector(n, &mut rng).unwrap();
            if seed % 3 == 0 {
                x.as_mut_slice()[0] = 0.0;
            }
            let hi = (lo + span).min(1.0);
            let s = shake(&x, &ShakeParams::new(lo, hi).unwrap(), &mut rng);
            prop_assert_eq!(s.len(), n);
            prop_assert!(s.is_valid());
            let p = BlendParams::new(0.5, 0.1, BlendFactor::Complement).unwrap();
            let c = blend(&x, &s, &p, &mut rng).unwrap();
            prop_assert!(c.is_valid());
        }
    }
}
