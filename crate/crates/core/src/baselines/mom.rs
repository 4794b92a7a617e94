use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::samples::SampleSet;
use crate::scalar::{median_in_place, Scalar};

/// Assignment of sample indices to `k` blocks of near-equal size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    pub k: usize,
    /// `assignment[i]` is the block of sample `i`.
    pub assignment: Vec<usize>,
}

impl BlockPartition {
    /// Contiguous blocks in index order; the first `n mod k` blocks get one extra index.
    pub fn sequential(n: usize, k: usize) -> Result<Self> {
        Self::split(&(0..n).collect::<Vec<_>>(), k)
    }

    /// Seeded permutation followed by a contiguous split.
    pub fn seeded(n: usize, k: usize, seed: u64) -> Result<Self> {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Self::split(&order, k)
    }

    fn split(order: &[usize], k: usize) -> Result<Self> {
        let n = order.len();
        if k == 0 || k > n {
            return Err(invalid(format!("block count must lie in [1, {n}], got {k}")));
        }
        let (base, extra) = (n / k, n % k);
        let mut assignment = vec![0; n];
        let mut pos = 0;
        for b in 0..k {
            let len = base + usize::from(b < extra);
            for &i in &order[pos..pos + len] {
                assignment[i] = b;
            }
            pos += len;
        }
        Ok(Self { k, assignment })
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &b in &self.assignment {
            sizes[b] += 1;
        }
        sizes
    }
}

/// Mean of each block, in block order.
pub fn block_means<T: Scalar>(samples: &SampleSet<T>, part: &BlockPartition) -> Result<Vec<Vec<T>>> {
    if part.n() != samples.n() {
        return Err(invalid(format!(
            "partition covers {} indices but there are {} samples",
            part.n(),
            samples.n()
        )));
    }
    let d = samples.d();
    let mut sums = vec![vec![T::zero(); d]; part.k];
    for (x, &b) in samples.rows().zip(&part.assignment) {
        for (s, &v) in sums[b].iter_mut().zip(x) {
            *s = *s + v;
        }
    }
    Ok(sums
        .into_iter()
        .zip(part.block_sizes())
        .map(|(s, c)| s.into_iter().map(|v| v / T::count(c)).collect())
        .collect())
}

/// Median of block means (midpoint of the two central values for even `k`).
pub fn median_of_means<T: Scalar>(xs: &[T], part: &BlockPartition) -> Result<T> {
    let samples = SampleSet::univariate(xs)?;
    let mut means: Vec<T> = block_means(&samples, part)?.into_iter().map(|m| m[0]).collect();
    Ok(median_in_place(&mut means))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let xs: Vec<f64> = (1..=9).map(f64::from).collect();
        let p = BlockPartition::sequential(9, 3).unwrap();
        assert_eq!(median_of_means(&xs, &p).unwrap(), 5.0);

        let one = BlockPartition::seeded(9, 1, 4).unwrap();
        assert_eq!(median_of_means(&xs, &one).unwrap(), 5.0);

        let c = [1.5f64; 10];
        for k in 1..=10 {
            let p = BlockPartition::seeded(10, k, 99).unwrap();
            assert_eq!(median_of_means(&c, &p).unwrap(), 1.5);
        }
    }

    #[test]
    fn even_block_count_uses_midpoint() {
        let p = BlockPartition::sequential(4, 2).unwrap();
        assert_eq!(median_of_means(&[0.0, 2.0, 4.0, 6.0], &p).unwrap(), 3.0);
    }

    #[test]
    fn bad_block_counts() {
        assert!(BlockPartition::sequential(5, 0).is_err());
        assert!(BlockPartition::sequential(5, 6).is_err());
        let p = BlockPartition::sequential(4, 2).unwrap();
        assert!(median_of_means(&[1.0, 2.0, 3.0], &p).is_err());
    }

    proptest! {
        #[test]
        fn partition_is_balanced(n in 1usize..200, k_frac in 0.0f64..1.0, seed in any::<u64>()) {
            let k = 1 + ((n - 1) as f64 * k_frac) as usize;
            let p = BlockPartition::seeded(n, k, seed).unwrap();
            let sizes = p.block_sizes();
            prop_assert_eq!(sizes.iter().sum::<usize>(), n);
            let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
            prop_assert!(hi - lo <= 1 && *lo >= 1);
            prop_assert_eq!(p, BlockPartition::seeded(n, k, seed).unwrap());
        }
    }
}
