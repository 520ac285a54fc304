//! Multinomial sampling primitives shared by the hardness and synthesis code.

use rand::Rng;

/// Categorical distribution over `0..len` backed by a cumulative table.
/// Draws cost `O(log len)`.
#[derive(Debug, Clone)]
pub struct Categorical {
    cumulative: Vec<f64>,
}

impl Categorical {
    /// Returns `None` when the weights are empty, negative, non-finite or
    /// carry no mass.
    pub fn new(weights: &[f64]) -> Option<Self> {
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for &w in weights {
            if !(w.is_finite() && w >= 0.0) {
                return None;
            }
            acc += w;
            cumulative.push(acc);
        }
        (acc > 0.0).then_some(Self { cumulative })
    }

    pub fn uniform(len: usize) -> Option<Self> {
        Self::new(&vec![1.0; len])
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn probability(&self, i: usize) -> f64 {
        let lo = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
        (self.cumulative[i] - lo) / self.total()
    }

    fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.random::<f64>() * self.total();
        // First index whose cumulative mass exceeds u; zero-weight entries
        // share their predecessor's cumulative value and are never chosen.
        let i = self.cumulative.partition_point(|&c| c <= u);
        i.min(self.len() - 1)
    }
}

/// Draws `min(n, support)` distinct indices sequentially, renormalizing the
/// remaining weights after each draw. Zero-weight entries are never drawn.
pub fn sample_without_replacement<R: Rng + ?Sized>(
    weights: &[f64],
    n: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut remaining: Vec<(usize, f64)> = weights
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, w)| w > 0.0)
        .collect();
    let take = n.min(remaining.len());
    let mut out = Vec::with_capacity(take);
    for _ in 0..take {
        let total: f64 = remaining.iter().map(|&(_, w)| w).sum();
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = remaining.len() - 1;
        for (p, &(_, w)) in remaining.iter().enumerate() {
            acc += w;
            if u < acc {
                pick = p;
                break;
            }
        }
        out.push(remaining.swap_remove(pick).0);
    }
    out
}

/// Numerically stable softmax of `logits / temperature`.
pub fn softmax(logits: &[f64], temperature: f64) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits
        .iter()
        .map(|&z| ((z - max) / temperature).exp())
        .collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_weight_never_drawn() {
        let c = Categorical::new(&[0.0, 0.0, 1.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..1000).all(|_| c.sample(&mut rng) == 2));
        assert_eq!(c.probability(2), 1.0);
    }

    #[test]
    fn rejects_degenerate_weights() {
        assert!(Categorical::new(&[]).is_none());
        assert!(Categorical::new(&[0.0, 0.0]).is_none());
        assert!(Categorical::new(&[1.0, -0.5]).is_none());
        assert!(Categorical::new(&[f64::NAN]).is_none());
    }

    #[test]
    fn without_replacement_truncates_to_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut got = sample_without_replacement(&[0.2, 0.0, 0.8], 10, &mut rng);
        got.sort();
        assert_eq!(got, vec![0, 2]);
        assert_eq!(sample_without_replacement(&[1.0], 3, &mut rng), vec![0]);
        assert!(sample_without_replacement(&[0.5, 0.5], 0, &mut rng).is_empty());
    }

    #[test]
    fn softmax_is_shift_invariant() {
        let a = softmax(&[1.0, 2.0, 3.0], 1.0);
        let b = softmax(&[101.0, 102.0, 103.0], 1.0);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
