use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Trimming level `q = η + log(4/δ)/n`, capped at 1/4.
pub fn trimmed_quantile<T: Scalar>(eta: T, delta: T, n: usize) -> Result<T> {
    if !(eta >= T::zero() && eta < T::lit(0.5)) {
        return Err(invalid(format!("eta must lie in [0, 1/2), got {eta}")));
    }
    if !(delta > T::zero() && delta < T::one()) {
        return Err(invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    if n == 0 {
        return Err(invalid("trimmed mean needs at least one sample"));
    }
    Ok((eta + (T::lit(4.0) / delta).ln() / T::count(n)).min(T::lit(0.25)))
}

/// Average after clamping to the order statistics `X_(m)` and `X_(n−1−m)`,
/// `m = ⌊q n⌋` (zero-based).
pub fn trimmed_mean<T: Scalar>(xs: &[T], eta: T, delta: T) -> Result<T> {
    let n = xs.len();
    let q = trimmed_quantile(eta, delta, n)?;
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let m = (q * T::count(n)).floor().to_usize().unwrap_or(0).min((n - 1) / 2);
    let (lo, hi) = (sorted[m], sorted[n - 1 - m]);
    Ok(xs.iter().map(|&x| x.max(lo).min(hi)).sum::<T>() / T::count(n))
}
