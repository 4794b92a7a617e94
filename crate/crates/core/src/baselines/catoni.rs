use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatoniConfig<T> {
    pub alpha: T,
    /// Target `|residual|` at the returned root.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> CatoniConfig<T> {
    pub fn new(alpha: T) -> Self {
        Self {
            alpha,
            tol: T::lit(1e-12),
            max_iter: 200,
        }
    }
}

/// Narrowest influence function: `log(1 + t + t²/2)` for `t ≥ 0`,
/// `−log(1 − t + t²/2)` below.
pub fn catoni_psi<T: Scalar>(t: T) -> T {
    let half = T::lit(0.5);
    if t >= T::zero() {
        (t + half * t * t).ln_1p()
    } else {
        -(-t + half * t * t).ln_1p()
    }
}

/// `α = sqrt(2 log(1/δ) / (n v̂))`, with `v̂` the unbiased sample variance
/// (replaced by 1 when it vanishes).
pub fn catoni_alpha<T: Scalar>(xs: &[T], delta: T) -> Result<T> {
    if xs.is_empty() {
        return Err(invalid("catoni_alpha needs at least one sample"));
    }
    if !(delta > T::zero() && delta < T::one()) {
        return Err(invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    let n = T::count(xs.len());
    let mean = xs.iter().copied().sum::<T>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / (n - T::one())
    } else {
        T::zero()
    };
    let var = if var > T::zero() { var } else { T::one() };
    Ok((T::lit(2.0) * delta.recip().ln() / (n * var)).sqrt())
}

/// Root in `μ` of `(1/n) Σ ψ(α(X_i − μ)) = 0`, found by bisection on `[min X, max X]`.
pub fn catoni<T: Scalar>(xs: &[T], cfg: &CatoniConfig<T>) -> Result<T> {
    if xs.is_empty() {
        return Err(invalid("catoni needs at least one sample"));
    }
    if !(cfg.alpha > T::zero()) || !cfg.alpha.is_finite() {
        return Err(invalid(format!("catoni alpha must be positive, got {}", cfg.alpha)));
    }
    if !(cfg.tol > T::zero()) || cfg.max_iter == 0 {
        return Err(invalid("catoni tol and max_iter must be positive"));
    }
    let n = T::count(xs.len());
    let residual = |mu: T| xs.iter().map(|&x| catoni_psi(cfg.alpha * (x - mu))).sum::<T>() / n;

    let (mut lo, mut hi) = xs
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(l, h), &x| (l.min(x), h.max(x)));
    if lo == hi {
        return Ok(lo);
    }
    let (r_lo, r_hi) = (residual(lo), residual(hi));
    if !(r_lo >= T::zero() && r_hi <= T::zero()) {
        return Err(Error::Estimation(format!(
            "catoni residual does not bracket a root: {r_lo} at {lo}, {r_hi} at {hi}"
        )));
    }
    for _ in 0..cfg.max_iter {
        let mid = lo + (hi - lo) / T::lit(2.0);
        if !(mid > lo && mid < hi) {
            break;
        }
        let r = residual(mid);
        if r.abs() <= cfg.tol {
            return Ok(mid);
        }
        if r > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = lo + (hi - lo) / T::lit(2.0);
    let r = residual(mid);
    // Adjacent floats: the residual cannot be pushed further.
    if r.abs() <= cfg.tol || !(lo + (hi - lo) / T::lit(4.0) > lo) {
        Ok(mid)
    } else {
        Err(Error::Estimation(format!(
            "catoni bisection stopped at residual {r} after {} iterations",
            cfg.max_iter
        )))
    }
}
