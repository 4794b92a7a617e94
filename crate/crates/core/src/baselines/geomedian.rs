use serde::{Deserialize, Serialize};

use super::mom::{block_means, BlockPartition};
use crate::error::{invalid, Result};
use crate::samples::SampleSet;
use crate::scalar::{norm2, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoMedian<T> {
    pub point: Vec<T>,
    /// `Σ_j ‖point − p_j‖₂`.
    pub objective: T,
    pub iterations: usize,
    pub converged: bool,
}

fn sum_dist<T: Scalar>(points: &SampleSet<T>, y: &[T]) -> T {
    points
        .rows()
        .map(|p| norm2(&p.iter().zip(y).map(|(&a, &b)| a - b).collect::<Vec<_>>()))
        .sum()
}

/// Euclidean geometric median by Weiszfeld iteration with the Vardi–Zhang
/// modification at data points. Stops when an iterate moves by at most
/// `tol · (1 + ‖y‖)` or is certified optimal at a data point.
///
/// Iterates in coordinates centered at the sample mean, so a translation of
/// the input only perturbs the result by rounding.
pub fn geometric_median<T: Scalar>(points: &SampleSet<T>, tol: T, max_iter: usize) -> Result<GeoMedian<T>> {
    if !(tol > T::zero()) {
        return Err(invalid("geometric median tol must be positive"));
    }
    let c = points.mean();
    let neg: Vec<T> = c.iter().map(|&v| -v).collect();
    let mut g = weiszfeld(&points.translated(&neg)?, tol, max_iter);
    g.point.iter_mut().zip(&c).for_each(|(y, &ci)| *y = *y + ci);
    Ok(g)
}

fn weiszfeld<T: Scalar>(points: &SampleSet<T>, tol: T, max_iter: usize) -> GeoMedian<T> {
    let d = points.d();
    let mut y = vec![T::zero(); d];
    let mut diff = vec![T::zero(); d];
    for it in 0..max_iter {
        let mut num = vec![T::zero(); d];
        let mut den = T::zero();
        let mut pull = vec![T::zero(); d];
        let mut coincident = 0usize;
        for p in points.rows() {
            diff.iter_mut().zip(p.iter().zip(&y)).for_each(|(o, (&a, &b))| *o = a - b);
            let dist = norm2(&diff);
            if dist <= tol {
                coincident += 1;
                continue;
            }
            let w = dist.recip();
            den = den + w;
            for k in 0..d {
                num[k] = num[k] + w * p[k];
                pull[k] = pull[k] + w * diff[k];
            }
        }
        let done = |y: Vec<T>, converged: bool| GeoMedian {
            objective: sum_dist(points, &y),
            point: y,
            iterations: it + 1,
            converged,
        };
        if den == T::zero() {
            return done(y, true);
        }
        let t: Vec<T> = num.iter().map(|&v| v / den).collect();
        let next = if coincident == 0 {
            t
        } else {
            // At a data point of multiplicity η it is optimal iff ‖Σ (p − y)/‖p − y‖‖ ≤ η.
            let r = norm2(&pull);
            let eta = T::count(coincident);
            if r <= eta {
                return done(y, true);
            }
            let a = (T::one() - eta / r).max(T::zero());
            let b = (eta / r).min(T::one());
            t.iter().zip(&y).map(|(&ti, &yi)| a * ti + b * yi).collect()
        };
        let step: Vec<T> = next.iter().zip(&y).map(|(&a, &b)| a - b).collect();
        let moved = norm2(&step);
        y = next;
        if moved <= tol * (T::one() + norm2(&y)) {
            return done(y, true);
        }
    }
    GeoMedian {
        objective: sum_dist(points, &y),
        point: y,
        iterations: max_iter,
        converged: false,
    }
}

/// Geometric median of the block means.
pub fn geometric_median_of_means<T: Scalar>(
    samples: &SampleSet<T>,
    part: &BlockPartition,
    tol: T,
    max_iter: usize,
) -> Result<GeoMedian<T>> {
    let means = block_means(samples, part)?;
    geometric_median(&SampleSet::from_rows(&means)?, tol, max_iter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_point_and_collinear() {
        let one = SampleSet::from_rows(&[vec![1.0, -2.0]]).unwrap();
        let g = geometric_median(&one, 1e-12, 100).unwrap();
        assert_eq!(g.point, vec![1.0, -2.0]);
        assert!(g.converged);

        let line = SampleSet::univariate(&[-1.0, 0.0, 1.0]).unwrap();
        let g = geometric_median(&line, 1e-12, 100).unwrap();
        assert_eq!(g.point, vec![0.0]);
    }

    #[test]
    fn triangle_matches_grid_oracle() {
        let pts = SampleSet::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=1000 {
            for j in 0..=1000 {
                let y = [i as f64 / 1000.0, j as f64 / 1000.0];
                let v = sum_dist(&pts, &y);
                if v < best.0 {
                    best = (v, y[0], y[1]);
                }
            }
        }
        let g = geometric_median(&pts, 1e-12, 10_000).unwrap();
        assert!(g.converged);
        assert!((g.point[0] - best.1).abs() < 1e-3 && (g.point[1] - best.2).abs() < 1e-3);
        // Closed form: the Fermat point lies at (1/2 − 1/(2√3)) on each axis.
        let fermat = 0.5 - 0.5 / 3f64.sqrt();
        assert!((g.point[0] - fermat).abs() < 1e-8);
        assert!(g.objective <= best.0 + 1e-9);
    }

    #[test]
    fn gmom_edge_cases() {
        let s = SampleSet::from_rows(&[vec![0.0, 1.0], vec![2.0, 5.0], vec![4.0, 0.0], vec![-1.0, 2.0]]).unwrap();
        let all = BlockPartition::sequential(4, 1).unwrap();
        let g = geometric_median_of_means(&s, &all, 1e-12, 100).unwrap();
        assert_eq!(g.point, s.mean());
        let singles = BlockPartition::sequential(4, 4).unwrap();
        let a = geometric_median_of_means(&s, &singles, 1e-12, 10_000).unwrap();
        let b = geometric_median(&s, 1e-12, 10_000).unwrap();
        assert_eq!(a.point, b.point);

        let sym = SampleSet::from_rows(&[
            vec![1.0f64, 2.0],
            vec![3.0, 2.0],
            vec![2.0, 1.0],
            vec![2.0, 3.0],
            vec![4.0, 4.0],
            vec![0.0, 0.0],
        ])
        .unwrap();
        let c = geometric_median(&sym, 1e-12, 10_000).unwrap();
        assert!((c.point[0] - 2.0).abs() < 1e-9 && (c.point[1] - 2.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn weiszfeld_descends(raw in prop::collection::vec(-10.0f64..10.0, 2..40)) {
            let m = raw.len() / 2;
            let pts = SampleSet::from_flat(raw[..2 * m].to_vec(), m, 2).unwrap();
            let mut prev = f64::INFINITY;
            for iters in 1..30 {
                let g = geometric_median(&pts, 1e-300, iters).unwrap();
                prop_assert!(g.objective <= prev + 1e-9 * (1.0 + prev.abs()));
                prev = g.objective;
            }
        }
    }
}
