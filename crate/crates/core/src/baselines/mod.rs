//! Reference estimators the ECF estimator is benchmarked against.
//!
//! Univariate estimators take a plain slice; [`coordinatewise`] lifts them to
//! `d > 1` one column at a time.

mod catoni;
mod geomedian;
mod mom;
mod trimmed;

pub use catoni::{catoni, catoni_alpha, catoni_psi, CatoniConfig};
pub use geomedian::{geometric_median, geometric_median_of_means, GeoMedian};
pub use mom::{block_means, median_of_means, BlockPartition};
pub use trimmed::{trimmed_mean, trimmed_quantile};

use crate::error::Result;
use crate::samples::SampleSet;
use crate::scalar::Scalar;

/// Coordinate-wise sample average.
pub fn empirical_mean<T: Scalar>(samples: &SampleSet<T>) -> Vec<T> {
    samples.mean()
}

/// Applies a univariate estimator to every column.
pub fn coordinatewise<T, F>(samples: &SampleSet<T>, mut f: F) -> Result<Vec<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> Result<T>,
{
    (0..samples.d()).map(|j| f(&samples.column(j))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_examples() {
        assert_eq!(empirical_mean(&SampleSet::univariate(&[1.0, 2.0, 3.0]).unwrap()), vec![2.0]);
        assert_eq!(empirical_mean(&SampleSet::univariate(&[4.25; 7]).unwrap()), vec![4.25]);
        let s = SampleSet::from_rows(&[vec![0.0, 0.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(empirical_mean(&s), vec![1.0, 2.0]);
    }

    #[test]
    fn coordinatewise_trimmed() {
        let s = SampleSet::from_rows(&[vec![1.0, -1.0], vec![2.0, -2.0], vec![3.0, -3.0]]).unwrap();
        let out = coordinatewise(&s, |c| Ok(c.iter().sum::<f64>())).unwrap();
        assert_eq!(out, vec![6.0, -6.0]);
    }
}
