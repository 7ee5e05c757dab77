//! Relative deviation, performance profiles and the one-sided Wilcoxon
//! signed-rank test.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Times below this are raised to it before ratios are formed.
pub const TIME_FLOOR: f64 = 1e-6;

/// Largest effective sample size for which the null distribution is
/// enumerated exactly.
pub const EXACT_LIMIT: usize = 12;

/// `(z - bks) / bks * 100`.
pub fn rpd(z: f64, bks: f64) -> Result<f64> {
    if !(bks > 0.0) {
        return Err(Error::UndefinedBaseline(bks));
    }
    Ok((z - bks) / bks * 100.0)
}

/// Ratio table `r[i][h]` and the resulting cumulative curves.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    ratios: Vec<Vec<f64>>,
    methods: usize,
}

impl Profile {
    pub fn ratios(&self) -> &[Vec<f64>] {
        &self.ratios
    }

    pub fn instances(&self) -> usize {
        self.ratios.len()
    }

    pub fn methods(&self) -> usize {
        self.methods
    }

    /// Fraction of instances on which method `h` is within factor `tau` of
    /// the fastest method.
    pub fn rho(&self, h: usize, tau: f64) -> f64 {
        let hits = self.ratios.iter().filter(|r| r[h] <= tau).count();
        hits as f64 / self.ratios.len() as f64
    }

    /// `(tau, rho)` at `tau = 1` and at every finite ratio of method `h`,
    /// ascending.
    pub fn breakpoints(&self, h: usize) -> Vec<(f64, f64)> {
        let mut taus: Vec<f64> = self
            .ratios
            .iter()
            .map(|r| r[h])
            .filter(|t| t.is_finite())
            .collect();
        taus.push(1.0);
        taus.sort_by(f64::total_cmp);
        taus.dedup();
        taus.into_iter().map(|t| (t, self.rho(h, t))).collect()
    }

    /// Plot-ready `method,tau,log2_tau,rho` lines, one per breakpoint.
    pub fn to_csv(&self, names: &[String]) -> String {
        let mut s = String::from("method,tau,log2_tau,rho\n");
        for (h, name) in names.iter().enumerate().take(self.methods) {
            for (tau, rho) in self.breakpoints(h) {
                s.push_str(&format!("{name},{tau},{},{rho}\n", tau.log2()));
            }
        }
        s
    }
}

/// Performance profile over `times[i][h]` (instance `i`, method `h`).
/// Entries whose `rpd_best[i][h]` exceeds `tolerance` percent count as
/// unsolved (infinite time).
pub fn performance_profile(times: &[Vec<f64>], rpd_best: &[Vec<f64>], tolerance: f64) -> Result<Profile> {
    let methods = times.first().map_or(0, Vec::len);
    if times.is_empty() || methods == 0 {
        return Err(Error::InvalidParameter("profile needs at least one instance and method".into()));
    }
    if rpd_best.len() != times.len()
        || times.iter().chain(rpd_best).any(|r| r.len() != methods)
    {
        return Err(Error::InvalidParameter("time and RPD tables differ in shape".into()));
    }
    let ratios = times
        .iter()
        .zip(rpd_best)
        .map(|(t, g)| {
            let eff: Vec<f64> = t
                .iter()
                .zip(g)
                .map(|(&t, &g)| {
                    if g <= tolerance + 1e-9 && t.is_finite() {
                        t.max(TIME_FLOOR)
                    } else {
                        f64::INFINITY
                    }
                })
                .collect();
            let best = eff.iter().copied().fold(f64::INFINITY, f64::min);
            eff.iter()
                .map(|&t| if best.is_finite() { t / best } else { f64::INFINITY })
                .collect()
        })
        .collect();
    Ok(Profile { ratios, methods })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wilcoxon {
    pub p_value: f64,
    /// Sum of ranks of the positive differences `x - y`.
    pub w_plus: f64,
    /// Number of non-zero differences.
    pub n_eff: usize,
    pub exact: bool,
    /// Every difference was zero.
    pub degenerate: bool,
}

/// Average ranks (1-based) of `values`, ties sharing the mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// One-sided signed-rank test of "x tends to be smaller than y".
pub fn wilcoxon_one_sided(x: &[f64], y: &[f64]) -> Result<Wilcoxon> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 5 {
        return Err(Error::InvalidParameter(format!(
            "signed-rank test needs at least 5 pairs, got {}",
            x.len()
        )));
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|&d| d != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return Ok(Wilcoxon {
            p_value: 1.0,
            w_plus: 0.0,
            n_eff: 0,
            exact: true,
            degenerate: true,
        });
    }
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();

    if n <= EXACT_LIMIT {
        let mut at_most = 0u64;
        for mask in 0u64..(1 << n) {
            let w: f64 = (0..n).filter(|k| mask >> k & 1 == 1).map(|k| ranks[k]).sum();
            if w <= w_plus + 1e-9 {
                at_most += 1;
            }
        }
        return Ok(Wilcoxon {
            p_value: at_most as f64 / (1u64 << n) as f64,
            w_plus,
            n_eff: n,
            exact: true,
            degenerate: false,
        });
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let mut ties = 0.0;
    let mut sorted = abs.clone();
    sorted.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        ties += t * t * t - t;
        i = j + 1;
    }
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - ties / 48.0;
    let z = (w_plus - mean + 0.5) / var.sqrt();
    let p = Normal::new(0.0, 1.0).expect("standard normal").cdf(z);
    Ok(Wilcoxon {
        p_value: p.clamp(f64::MIN_POSITIVE, 1.0),
        w_plus,
        n_eff: n,
        exact: false,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keys::RngStream;
    use proptest::prelude::*;

    #[test]
    fn rpd_values() {
        assert_eq!(rpd(100.0, 100.0).unwrap(), 0.0);
        assert!((rpd(103.0, 100.0).unwrap() - 3.0).abs() < 1e-12);
        assert!(matches!(rpd(1.0, 0.0), Err(Error::UndefinedBaseline(_))));
        assert!(rpd(1.0, -2.0).is_err());
    }

    #[test]
    fn single_method_profile() {
        let p = performance_profile(&[vec![3.0], vec![0.5]], &[vec![0.0], vec![0.0]], 0.0).unwrap();
        assert_eq!(p.rho(0, 1.0), 1.0);
    }

    #[test]
    fn faster_method_wins_at_one() {
        let t = vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![0.1, 0.2]];
        let g = vec![vec![0.0; 2]; 3];
        let p = performance_profile(&t, &g, 0.0).unwrap();
        assert_eq!(p.rho(0, 1.0), 1.0);
        assert_eq!(p.rho(1, 1.0), 0.0);
    }

    #[test]
    fn hand_computed_profile() {
        // instance rows, method columns A, B, C
        let t = vec![
            vec![1.0, 2.0, 4.0],
            vec![10.0, 5.0, 5.0],
            vec![2.0, 1.0, 8.0],
            vec![3.0, 6.0, 1.0],
        ];
        let mut g = vec![vec![0.0; 3]; 4];
        g[3][2] = 5.0; // C misses instance 4
        let p = performance_profile(&t, &g, 1.0).unwrap();
        // instance 4 without C: min(3, 6) = 3
        let expect = [
            [1.0, 2.0, 4.0],
            [2.0, 1.0, 1.0],
            [2.0, 1.0, 8.0],
            [1.0, 2.0, f64::INFINITY],
        ];
        for (row, want) in p.ratios().iter().zip(&expect) {
            assert_eq!(row.as_slice(), want);
        }
        assert_eq!(p.breakpoints(0), vec![(1.0, 0.5), (2.0, 1.0)]);
        assert_eq!(p.breakpoints(1), vec![(1.0, 0.5), (2.0, 1.0)]);
        assert_eq!(p.breakpoints(2), vec![(1.0, 0.25), (4.0, 0.5), (8.0, 0.75)]);
        let sum: f64 = (0..3).map(|h| p.rho(h, 1.0)).sum();
        assert_eq!(sum, 1.25);
    }

    #[test]
    fn unsolved_everywhere_is_zero() {
        let p = performance_profile(&[vec![1.0, 2.0]], &[vec![9.0, 0.0]], 0.0).unwrap();
        assert_eq!(p.rho(0, 1e9), 0.0);
        assert_eq!(p.rho(1, 1.0), 1.0);
        let csv = p.to_csv(&["a".into(), "b".into()]);
        assert!(csv.starts_with("method,tau,log2_tau,rho\na,1,0,0\n"));
    }

    #[test]
    fn all_smaller_gives_minimum_p() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = (0..10).map(|i| i as f64 + 1.0 + i as f64 * 0.1).collect();
        let w = wilcoxon_one_sided(&x, &y).unwrap();
        assert!(w.exact);
        assert_eq!(w.p_value, 1.0 / 1024.0);
    }

    #[test]
    fn equal_samples_degenerate() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let w = wilcoxon_one_sided(&x, &x).unwrap();
        assert!(w.degenerate);
        assert_eq!(w.p_value, 1.0);
        assert!(wilcoxon_one_sided(&x[..4], &x[..4]).is_err());
    }

    /// Signed-rank distribution of n = 8 built by counting subsets of
    /// {1..8} by rank sum.
    fn exact_cdf_n8(w: usize) -> f64 {
        let mut counts = vec![0u64; 37];
        counts[0] = 1;
        for r in 1..=8 {
            for s in (r..=36).rev() {
                counts[s] += counts[s - r];
            }
        }
        counts[..=w].iter().sum::<u64>() as f64 / 256.0
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn textbook_sample_matches_enumeration() {
        let x = [1.83, 0.50, 1.62, 2.48, 1.68, 1.88, 1.55, 3.06];
        let y = [0.878, 0.647, 0.598, 2.05, 1.06, 1.29, 1.06, 3.14];
        let w = wilcoxon_one_sided(&y, &x).unwrap();
        // differences y - x: positive only at ranks 1 and 2 (0.08 and 0.147)
        assert_eq!(w.w_plus, 3.0);
        assert_eq!(w.p_value, exact_cdf_n8(3));
        assert!((w.p_value - 5.0 / 256.0).abs() < 1e-15);
    }

    #[test]
    fn normal_approximation_is_close_to_exact() {
        let mut rng = RngStream::new(12, 0);
        let x: Vec<f64> = (0..30).map(|_| rng.unit()).collect();
        let y: Vec<f64> = x.iter().map(|v| v + rng.unit() - 0.3).collect();
        let w = wilcoxon_one_sided(&x, &y).unwrap();
        assert!(!w.exact);
        assert!(w.p_value > 0.0 && w.p_value < 0.05);
    }

    #[test]
    fn ties_share_average_rank() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    proptest! {
        #[test]
        fn profile_is_monotone(seed in 0u64..5000, inst in 1usize..8, meth in 1usize..5, tol in 0.0f64..5.0) {
            let mut rng = RngStream::new(seed, 0);
            let t: Vec<Vec<f64>> = (0..inst).map(|_| (0..meth).map(|_| rng.unit() * 10.0).collect()).collect();
            let g: Vec<Vec<f64>> = (0..inst).map(|_| (0..meth).map(|_| rng.unit() * 6.0).collect()).collect();
            let p = performance_profile(&t, &g, tol).unwrap();
            let within = g.iter().filter(|row| row.iter().any(|&v| v <= tol + 1e-9)).count();
            let mut sum_at_one = 0.0;
            #[allow(clippy::needless_range_loop)]
            for h in 0..meth {
                let bp = p.breakpoints(h);
                for w in bp.windows(2) {
                    prop_assert!(w[0].0 < w[1].0);
                    prop_assert!(w[0].1 <= w[1].1);
                }
                let last = bp.last().unwrap().1;
                let solved = g.iter().filter(|row| row[h] <= tol + 1e-9).count();
                prop_assert_eq!(last, solved as f64 / inst as f64);
                sum_at_one += p.rho(h, 1.0);
            }
            if within > 0 {
                prop_assert!(sum_at_one >= within as f64 / inst as f64 - 1e-12);
            }
        }

        #[test]
        fn exact_complement_relation(seed in 0u64..5000, n in 5usize..12) {
            let mut rng = RngStream::new(seed, 0);
            // distinct magnitudes so there are no ties
            let x: Vec<f64> = (0..n).map(|_| rng.unit()).collect();
            let y: Vec<f64> = x
                .iter()
                .enumerate()
                .map(|(k, v)| v + if rng.unit() < 0.5 { 1.0 } else { -1.0 } * (k as f64 + 1.0))
                .collect();
            let a = wilcoxon_one_sided(&x, &y).unwrap();
            let b = wilcoxon_one_sided(&y, &x).unwrap();
            // P(W <= w) + P(W <= total - w - 1) = 1 on integer ranks
            let total = (n * (n + 1) / 2) as f64;
            prop_assert!((a.w_plus + b.w_plus - total).abs() < 1e-9);
            let mass_at = |w: f64| -> f64 {
                let mut c = 0u64;
                for m in 0u64..(1 << n) {
                    let s: u64 = (0..n as u64).filter(|k| m >> k & 1 == 1).map(|k| k + 1).sum();
                    if (s as f64 - w).abs() < 1e-9 { c += 1; }
                }
                c as f64 / (1u64 << n) as f64
            };
            prop_assert!((a.p_value + b.p_value - 1.0 - mass_at(a.w_plus)).abs() < 1e-12);
            prop_assert!(a.p_value > 0.0 && a.p_value <= 1.0);
        }
    }
}
