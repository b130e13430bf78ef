//! Linear fitness scaling and roulette-wheel selection.

use rand::Rng;

use crate::error::{contract, Result};

/// Goldberg's linear scaling `f' = a·f + b`.
///
/// The mean is kept and the best individual is stretched to
/// `multiple · mean`; when that would push the worst below zero the line is
/// pinned at `min → 0` instead. A vector whose mean is not positive is first
/// shifted by `-min`. Output is never negative.
pub fn linear_scale(raw: &[f64], multiple: f64) -> Result<Vec<f64>> {
    if raw.is_empty() {
        return contract("cannot scale an empty fitness vector");
    }
    let n = raw.len() as f64;
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let mut values = raw.to_vec();
    if raw.iter().sum::<f64>() / n <= 0.0 {
        values.iter_mut().for_each(|v| *v -= min);
    }

    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / n;
    if max <= mean || max == min {
        return Ok(values);
    }

    let (a, b) = if min > (multiple * mean - max) / (multiple - 1.0) {
        let spread = max - mean;
        (
            (multiple - 1.0) * mean / spread,
            mean * (max - multiple * mean) / spread,
        )
    } else {
        let spread = mean - min;
        (mean / spread, -min * mean / spread)
    };
    Ok(values.into_iter().map(|v| (a * v + b).max(0.0)).collect())
}

/// Cumulative roulette wheel over non-negative weights.
#[derive(Debug, Clone)]
pub struct Roulette {
    cumulative: Vec<f64>,
}

impl Roulette {
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return contract("roulette needs at least one slot");
        }
        let mut total = 0.0;
        let cumulative = weights
            .iter()
            .map(|&w| {
                total += w.max(0.0);
                total
            })
            .collect();
        Ok(Roulette { cumulative })
    }

    pub fn total(&self) -> f64 {
        *self.cumulative.last().expect("non-empty")
    }

    /// Draw a slot in proportion to its weight, or uniformly when all weights are zero.
    pub fn spin<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = self.total();
        if total <= 0.0 {
            return rng.gen_range(0..self.cumulative.len());
        }
        let target = rng.gen::<f64>() * total;
        let slot = self.cumulative.partition_point(|&c| c <= target);
        // guards the target == total rounding case; never lands on a zero-weight tail
        slot.min(self.last_positive())
    }

    fn last_positive(&self) -> usize {
        let total = self.total();
        self.cumulative.partition_point(|&c| c < total)
    }
}

pub fn select_parent<R: Rng + ?Sized>(scaled: &[f64], rng: &mut R) -> Result<usize> {
    Ok(Roulette::new(scaled)?.spin(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn examples() {
        assert!(close(
            &linear_scale(&[10.0, 20.0, 30.0], 2.0).unwrap(),
            &[0.0, 20.0, 40.0]
        ));
        assert_eq!(
            linear_scale(&[5.0, 5.0, 5.0], 3.0).unwrap(),
            vec![5.0, 5.0, 5.0]
        );
        assert!(close(
            &linear_scale(&[-10.0, 0.0, 40.0], 2.0).unwrap(),
            &[10.0 / 3.0, 20.0 / 3.0, 20.0]
        ));
        assert!(linear_scale(&[], 2.0).is_err());
    }

    #[test]
    fn non_positive_mean_is_shifted_first() {
        // mean -10 -> shifted to {0, 10, 50}, mean 20, max 50 > 2*20 allowed? 50 > 40
        let scaled = linear_scale(&[-30.0, -20.0, 20.0], 2.0).unwrap();
        let mean = scaled.iter().sum::<f64>() / 3.0;
        assert!((mean - 20.0).abs() < 1e-12);
        assert!(scaled.iter().all(|&v| v >= 0.0));
        assert_eq!(linear_scale(&[-4.0, -4.0], 2.0).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn roulette_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0usize; 3];
        let n = 60_000;
        for _ in 0..n {
            counts[select_parent(&[0.0, 20.0, 40.0], &mut rng).unwrap()] += 1;
        }
        assert_eq!(counts[0], 0);
        let p1 = counts[1] as f64 / n as f64;
        assert!((p1 - 1.0 / 3.0).abs() < 0.01, "{p1}");

        assert!((0..100).all(|_| select_parent(&[1.0], &mut rng).unwrap() == 0));

        let mut uniform = [0usize; 3];
        for _ in 0..30_000 {
            uniform[select_parent(&[0.0, 0.0, 0.0], &mut rng).unwrap()] += 1;
        }
        assert!(
            uniform.iter().all(|&c| (9_000..11_000).contains(&c)),
            "{uniform:?}"
        );
    }

    #[test]
    fn roulette_never_picks_zero_weight_tail() {
        let wheel = Roulette::new(&[1.0, 2.0, 0.0, 0.0]).unwrap();
        assert_eq!(wheel.last_positive(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert!((0..10_000).all(|_| wheel.spin(&mut rng) < 2));
    }

    proptest! {
        #[test]
        fn scaling_invariants(raw in proptest::collection::vec(-1000.0f64..1000.0, 1..60), multiple in 1.1f64..4.0) {
            let scaled = linear_scale(&raw, multiple).unwrap();
            let n = raw.len() as f64;
            let raw_mean = raw.iter().sum::<f64>() / n;
            let base_mean = if raw_mean <= 0.0 {
                let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
                raw_mean - min
            } else {
                raw_mean
            };
            let mean = scaled.iter().sum::<f64>() / n;
            prop_assert!((mean - base_mean).abs() <= 1e-9 * base_mean.abs().max(1.0));
            prop_assert!(scaled.iter().all(|&v| v >= 0.0));
            for i in 0..raw.len() {
                for j in 0..raw.len() {
                    if raw[i] >= raw[j] {
                        prop_assert!(scaled[i] >= scaled[j]);
                    }
                }
            }
        }
    }
}
