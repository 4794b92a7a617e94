//! Cut-model ("master") problems: `min_μ max_k |⟨a_k, μ⟩ − b_k|`.

use minilp::{ComparisonOp, OptimizationDirection, Problem};

use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

/// Minimizes `max_k |a_k μ − b_k|` over scalar `μ` for slopes `a_k > 0`.
///
/// `A(μ) = max_k (a_k μ − b_k)` is strictly increasing and `B(μ) = max_k (b_k − a_k μ)`
/// strictly decreasing, so the unique minimizer is where they cross; it is
/// bracketed by the smallest and largest zero `b_k / a_k`.
pub(crate) fn solve_scalar<T: Scalar>(cuts: &[(T, T)], max_steps: usize) -> (T, T) {
    let cuts: Vec<(T, T)> = cuts.iter().copied().filter(|c| c.0 > T::zero()).collect();
    if cuts.is_empty() {
        return (T::zero(), T::zero());
    }
    let eval = |mu: T| {
        cuts.iter().fold((T::neg_infinity(), T::neg_infinity()), |(a, b), &(ak, bk)| {
            let v = ak * mu - bk;
            (a.max(v), b.max(-v))
        })
    };
    let (mut lo, mut hi) = cuts.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &(a, b)| {
        let z = b / a;
        (lo.min(z), hi.max(z))
    });
    for _ in 0..max_steps {
        let mid = lo + (hi - lo) / T::lit(2.0);
        if !(mid > lo && mid < hi) {
            break;
        }
        let (a, b) = eval(mid);
        if a < b {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut best = (lo, T::infinity());
    for mu in [lo, lo + (hi - lo) / T::lit(2.0), hi] {
        let (a, b) = eval(mu);
        let v = a.max(b);
        if v < best.1 {
            best = (mu, v);
        }
    }
    best
}

/// Chebyshev fit `min_μ max_k |⟨a_k, μ⟩ − b_k|` as a linear program.
/// Returns the minimizer and the model value re-evaluated at it.
pub(crate) fn solve_lp<T: Scalar>(cuts: &[(Vec<T>, T)], d: usize) -> Result<(Vec<T>, T)> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let mu: Vec<_> = (0..d)
        .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    for (a, b) in cuts {
        let b = b.to_f64_lossy();
        let terms: Vec<_> = mu
            .iter()
            .zip(a)
            .map(|(&v, c)| (v, c.to_f64_lossy()))
            .filter(|(_, c)| *c != 0.0)
            .collect();
        let mut upper = terms.clone();
        upper.push((t, -1.0));
        lp.add_constraint(upper.as_slice(), ComparisonOp::Le, b);
        let mut lower = terms;
        lower.push((t, 1.0));
        lp.add_constraint(lower.as_slice(), ComparisonOp::Ge, b);
    }
    let sol = lp
        .solve()
        .map_err(|e| Error::Estimation(format!("cut-model LP failed: {e}")))?;
    let x: Vec<T> = mu.iter().map(|&v| T::lit(sol[v])).collect();
    let value = model_value(cuts, &x);
    Ok((x, value))
}

pub(crate) fn model_value<T: Scalar>(cuts: &[(Vec<T>, T)], mu: &[T]) -> T {
    cuts.iter()
        .map(|(a, b)| (dot(a, mu) - *b).abs())
        .fold(T::zero(), T::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_two_lines() {
        // |μ − 1| and |0.5 μ − 2|: crossing where μ − 1 = 2 − 0.5 μ, μ = 2, value 1.
        let (mu, v) = solve_scalar(&[(1.0f64, 1.0), (0.5, 2.0)], 400);
        assert!((mu - 2.0).abs() < 1e-12 && (v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_consistent_cuts_hit_zero() {
        let (mu, v) = solve_scalar(&[(1.0f64, 3.0), (0.25, 0.75)], 400);
        assert!((mu - 3.0).abs() < 1e-12 && v < 1e-12);
    }

    #[test]
    fn lp_matches_scalar_solver() {
        let cuts = [(1.0f64, 1.0), (0.5, 2.0), (0.3, -0.1)];
        let (mu, v) = solve_scalar(&cuts, 400);
        let lp_cuts: Vec<_> = cuts.iter().map(|&(a, b)| (vec![a], b)).collect();
        let (x, w) = solve_lp(&lp_cuts, 1).unwrap();
        assert!((x[0] - mu).abs() < 1e-9 && (w - v).abs() < 1e-9);
    }

    #[test]
    fn lp_recovers_point_from_coordinate_cuts() {
        let cuts = vec![(vec![1.0f64, 0.0], 0.5), (vec![0.0, 1.0], -2.0)];
        let (x, v) = solve_lp(&cuts, 2).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-12 && (x[1] + 2.0).abs() < 1e-12 && v < 1e-12);
    }
}
