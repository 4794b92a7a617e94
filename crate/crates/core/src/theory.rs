//! Numerical encodings of the inequalities behind the estimator's guarantees:
//! the sine linearization gap, the conjugate-distance bound, ECF concentration,
//! Rademacher complexity, and the accuracy bounds with their constants.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ecf::master::solve_lp;
use crate::error::{check_dim, invalid, Error, Result};
use crate::norm::NormPair;
use crate::samples::SampleSet;
use crate::scalar::{dot, Scalar};
use crate::simulation::{DistributionSpec, Family};

/// Both sides of
/// `|sin α − sin β − (α−β) cos β| ≤ |α−β|^{s+1}/(2^{s−1}(s+1)) + q|α−β|^s|β|/(2^{s−2} s)`,
/// `s = p + q`.
pub fn sin_approx_gap<T: Scalar>(alpha: T, beta: T, p: T, q: T) -> Result<(T, T)> {
    let unit = |x: T| x >= T::zero() && x <= T::one();
    if !(unit(p) && unit(q)) {
        return Err(invalid(format!("p and q must lie in [0, 1], got ({p}, {q})")));
    }
    let s = p + q;
    if !(s > T::zero()) {
        return Err(invalid("p + q must be positive"));
    }
    let two = T::lit(2.0);
    let gap = (alpha - beta).abs();
    let lhs = (alpha.sin() - beta.sin() - (alpha - beta) * beta.cos()).abs();
    let first = gap.powf(s + T::one()) / (two.powf(s - T::one()) * (s + T::one()));
    let second = if q > T::zero() {
        q * gap.powf(s) * beta.abs() / (two.powf(s - two) * s)
    } else {
        T::zero()
    };
    Ok((lhs, first + second))
}

/// Outcome of [`conjugate_bound_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugateCheck<T> {
    pub theta_min: Vec<T>,
    /// Net-restricted `f*` at `theta_min` and at the probe.
    pub f_star_min: T,
    pub f_star_theta: T,
    /// `‖θ_min − θ‖_net / (2 f*(θ))`; zero when both vanish.
    pub ratio: T,
}

/// `max_{w ∈ net} |f(w) − ⟨w, θ⟩|`.
pub fn net_conjugate<T: Scalar>(net: &[Vec<T>], f: &[T], theta: &[T]) -> T {
    net.iter()
        .zip(f)
        .map(|(w, &fw)| (fw - dot(w, theta)).abs())
        .fold(T::zero(), T::max)
}

/// `max_{w ∈ net} ⟨w, x⟩`, the norm seen through the net.
pub fn net_norm<T: Scalar>(net: &[Vec<T>], x: &[T]) -> T {
    net.iter().map(|w| dot(w, x)).fold(T::zero(), T::max)
}

/// Minimizes the net-restricted `f*` exactly (linear program) and reports how
/// far `θ_min` sits from `theta` relative to `2 f*(theta)`.
///
/// The net must be symmetric and lie in the unit dual ball.
pub fn conjugate_bound_check<T: Scalar>(
    net: &[Vec<T>],
    f: &[T],
    theta: &[T],
    norm: NormPair,
) -> Result<ConjugateCheck<T>> {
    if net.is_empty() {
        return Err(invalid("net must be non-empty"));
    }
    check_dim(net.len(), f.len())?;
    let d = theta.len();
    let tiny = T::lit(1e-12);
    for w in net {
        check_dim(d, w.len())?;
        if norm.dual_norm(w) > T::one() + tiny {
            return Err(invalid("net directions must lie in the unit dual ball"));
        }
        let mirrored = net
            .iter()
            .any(|v| v.iter().zip(w).all(|(&a, &b)| (a + b).abs() <= tiny));
        if !mirrored {
            return Err(invalid("net must be symmetric under w ↦ −w"));
        }
    }
    let cuts: Vec<(Vec<T>, T)> = net.iter().cloned().zip(f.iter().copied()).collect();
    let (theta_min, f_star_min) = solve_lp(&cuts, d)?;
    let f_star_theta = net_conjugate(net, f, theta);
    let diff: Vec<T> = theta_min.iter().zip(theta).map(|(&a, &b)| a - b).collect();
    let dist = net_norm(net, &diff);
    let ratio = if f_star_theta > T::zero() {
        dist / (T::lit(2.0) * f_star_theta)
    } else if dist == T::zero() {
        T::zero()
    } else {
        T::infinity()
    };
    Ok(ConjugateCheck {
        theta_min,
        f_star_min,
        f_star_theta,
        ratio,
    })
}

/// Certified supremum of `|φ_n(w) − φ(w)|` over `|w| ≤ r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupDeviation<T> {
    pub value: T,
    pub w_star: T,
    /// The true supremum is at most `value + certified_gap`.
    pub certified_gap: T,
    pub grid_points: usize,
}

/// `sup_{|w| ≤ r} |φ_n(w) − φ(w)|` for one-dimensional samples against the
/// Gaussian law `N(mu, sigma2)`.
///
/// The modulus is evaluated on the centered samples `X_i − mu`, where it takes
/// the same value. The grid is refined until the curvature bound on
/// `|φ_n − φ|²` certifies the supremum to within `tol`.
pub fn sup_deviation<T: Scalar>(samples: &SampleSet<T>, mu: T, sigma2: T, r: T, tol: T) -> Result<SupDeviation<T>> {
    if samples.d() != 1 {
        return Err(Error::Unsupported("sup_deviation needs one-dimensional samples".into()));
    }
    if !(r >= T::zero() && r.is_finite()) || !(sigma2 >= T::zero()) || !(tol > T::zero()) {
        return Err(invalid("need r ≥ 0, sigma2 ≥ 0 and tol > 0"));
    }
    let n = T::count(samples.n());
    let z: Vec<T> = samples.as_flat().iter().map(|&x| x - mu).collect();
    let m1 = z.iter().map(|v| v.abs()).sum::<T>() / n;
    let m2 = z.iter().map(|v| *v * *v).sum::<T>() / n;
    let sigma = sigma2.sqrt();
    // g = φ_n − φ (centered): |g| ≤ 2, |g'| ≤ L, |g''| ≤ m2 + σ², and
    // (|g|²)'' = 2|g'|² + 2 Re(ḡ g'') ≤ 2L² + 4(m2 + σ²).
    let lip = m1 + sigma * T::lit((-0.5f64).exp());
    let curv = T::lit(2.0) * lip * lip + T::lit(4.0) * (m2 + sigma2);

    let eval = |w: T| {
        let (mut re, mut im) = (T::zero(), T::zero());
        for &v in &z {
            let (s, c) = (w * v).sin_cos();
            re = re + c;
            im = im + s;
        }
        let env = (-(w * w * sigma2) / T::lit(2.0)).exp();
        (re / n - env).hypot(im / n)
    };

    let cap = 1usize << 22;
    let mut points = 257usize;
    loop {
        let h = if points > 1 { r / T::count(points - 1) } else { T::zero() };
        let mut best = (T::zero(), T::zero());
        for k in 0..points {
            // |φ_n − φ| is even in w, so [0, r] suffices.
            let w = if k + 1 == points { r } else { h * T::count(k) };
            let v = eval(w);
            if v > best.0 {
                best = (v, w);
            }
        }
        let q = best.0 * best.0;
        let upper = (q + curv * h * h / T::lit(8.0)).sqrt();
        let gap = upper - best.0;
        if gap <= tol || points >= cap || r == T::zero() {
            return Ok(SupDeviation {
                value: best.0,
                w_star: best.1,
                certified_gap: gap,
                grid_points: points,
            });
        }
        // Spacing that would meet `tol` at the current maximum.
        let target = T::lit(8.0) * (T::lit(2.0) * best.0 * tol + tol * tol) / curv;
        let need = (r / target.sqrt()).ceil().to_usize().unwrap_or(cap).saturating_add(1);
        points = need.max(2 * points).min(cap);
    }
}

/// [`sup_deviation`] against a one-dimensional Gaussian [`DistributionSpec`].
pub fn sup_deviation_for<T: Scalar>(
    samples: &SampleSet<T>,
    dist: &DistributionSpec,
    r: T,
    tol: T,
) -> Result<SupDeviation<T>> {
    if dist.family != Family::Gaussian || samples.d() != 1 {
        return Err(Error::Unsupported(
            "sup_deviation is implemented for one-dimensional Gaussian laws only".into(),
        ));
    }
    let truth = dist.ground_truth(1)?;
    sup_deviation(samples, T::lit(truth.mean[0]), T::lit(truth.cov_opnorm), r, tol)
}

/// Rademacher complexity estimate with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RademacherEstimate<T> {
    pub value: T,
    /// Zero for exact enumeration.
    pub std_error: T,
    pub exact: bool,
}

/// Samples up to this size are enumerated exactly.
pub const EXACT_RADEMACHER_MAX_N: usize = 12;

fn centered_rows<T: Scalar>(samples: &SampleSet<T>, mu_star: &[T]) -> Result<Vec<Vec<T>>> {
    check_dim(samples.d(), mu_star.len())?;
    Ok(samples
        .rows()
        .map(|x| x.iter().zip(mu_star).map(|(&a, &b)| a - b).collect())
        .collect())
}

/// `E‖Σ ε_i (X_i − μ*)‖ / √n` averaged over all `2^n` sign patterns.
pub fn rademacher_exact<T: Scalar>(samples: &SampleSet<T>, mu_star: &[T], norm: NormPair) -> Result<T> {
    let n = samples.n();
    if n > 24 {
        return Err(invalid(format!("exact enumeration over 2^{n} patterns refused")));
    }
    let z = centered_rows(samples, mu_star)?;
    let mut acc = T::zero();
    let mut s = vec![T::zero(); samples.d()];
    for mask in 0u64..(1u64 << n) {
        s.iter_mut().for_each(|v| *v = T::zero());
        for (i, row) in z.iter().enumerate() {
            let sign = if mask >> i & 1 == 1 { -T::one() } else { T::one() };
            s.iter_mut().zip(row).for_each(|(a, &b)| *a = *a + sign * b);
        }
        acc = acc + norm.primal_norm(&s);
    }
    Ok(acc / (T::lit((1u64 << n) as f64) * T::count(n).sqrt()))
}

/// Monte Carlo estimate from `num_mc` independent sign vectors.
pub fn rademacher_monte_carlo<T: Scalar>(
    samples: &SampleSet<T>,
    mu_star: &[T],
    norm: NormPair,
    num_mc: usize,
    seed: u64,
) -> Result<RademacherEstimate<T>> {
    if num_mc == 0 {
        return Err(invalid("num_mc must be positive"));
    }
    let z = centered_rows(samples, mu_star)?;
    let root_n = T::count(samples.n()).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = vec![T::zero(); samples.d()];
    let (mut sum, mut sum_sq) = (T::zero(), T::zero());
    for _ in 0..num_mc {
        s.iter_mut().for_each(|v| *v = T::zero());
        for row in &z {
            let sign = if rng.gen::<bool>() { T::one() } else { -T::one() };
            s.iter_mut().zip(row).for_each(|(a, &b)| *a = *a + sign * b);
        }
        let v = norm.primal_norm(&s) / root_n;
        sum = sum + v;
        sum_sq = sum_sq + v * v;
    }
    let m = T::count(num_mc);
    let mean = sum / m;
    let std_error = if num_mc > 1 {
        ((sum_sq - m * mean * mean).max(T::zero()) / (m - T::one()) / m).sqrt()
    } else {
        T::zero()
    };
    Ok(RademacherEstimate {
        value: mean,
        std_error,
        exact: false,
    })
}

/// `C_n`: exact for `n ≤ 12`, Monte Carlo otherwise.
pub fn rademacher_complexity<T: Scalar>(
    samples: &SampleSet<T>,
    mu_star: &[T],
    norm: NormPair,
    num_mc: usize,
    seed: u64,
) -> Result<RademacherEstimate<T>> {
    if samples.n() <= EXACT_RADEMACHER_MAX_N {
        Ok(RademacherEstimate {
            value: rademacher_exact(samples, mu_star, norm)?,
            std_error: T::zero(),
            exact: true,
        })
    } else {
        rademacher_monte_carlo(samples, mu_star, norm, num_mc, seed)
    }
}

/// Quantities entering the accuracy bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs<T> {
    pub cn: T,
    pub sigma_op: T,
    pub delta: T,
    pub n: usize,
    pub r: T,
    pub mu_norm: T,
    pub eta: T,
}

impl<T: Scalar> BoundInputs<T> {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [self.cn, self.sigma_op, self.mu_norm, self.eta]
            .iter()
            .all(|&v| v >= T::zero() && v.is_finite());
        if !nonneg {
            return Err(invalid("bound inputs must be finite and non-negative"));
        }
        if !(self.delta > T::zero() && self.delta < T::one()) {
            return Err(invalid(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.n == 0 || !(self.r > T::zero()) {
            return Err(invalid("n and r must be positive"));
        }
        if self.eta >= T::lit(0.5) {
            return Err(invalid(format!("eta must lie in [0, 1/2), got {}", self.eta)));
        }
        Ok(())
    }
}

fn log_inv<T: Scalar>(delta: T) -> T {
    delta.recip().ln()
}

/// High-probability error bound for an arbitrary radius:
/// `24C/√n + √(8σ L/n) + 16L/(3nr) + r²‖μ‖³/3 + rσ`, `L = log(1/δ)`.
pub fn master_bound<T: Scalar>(b: &BoundInputs<T>) -> Result<T> {
    b.validate()?;
    let n = T::count(b.n);
    let l = log_inv(b.delta);
    Ok(T::lit(24.0) * b.cn / n.sqrt()
        + (T::lit(8.0) * b.sigma_op * l / n).sqrt()
        + T::lit(16.0) * l / (T::lit(3.0) * n * b.r)
        + b.r * b.r * b.mu_norm.powi(3) / T::lit(3.0)
        + b.r * b.sigma_op)
}

/// Smallest accuracy the tuned radius is guaranteed to reach:
/// `max{(96C + 12√(σL))/√n, 9(L/n)^{2/3}‖μ‖}`.
pub fn accuracy_floor<T: Scalar>(cn: T, sigma_op: T, delta: T, n: usize, mu_norm: T) -> Result<T> {
    floor_inputs(cn, sigma_op, delta, n, mu_norm, T::zero())?;
    let (nn, l) = (T::count(n), log_inv(delta));
    let a = (T::lit(96.0) * cn + T::lit(12.0) * (sigma_op * l).sqrt()) / nn.sqrt();
    let b = T::lit(9.0) * (l / nn).powf(T::lit(2.0 / 3.0)) * mu_norm;
    Ok(a.max(b))
}

/// Contaminated counterpart:
/// `max{(96C + 12√(σL))/√n + 8√(ησ), (19η + 26L/n)^{2/3}‖μ‖}`.
pub fn accuracy_floor_contaminated<T: Scalar>(cn: T, sigma_op: T, delta: T, n: usize, mu_norm: T, eta: T) -> Result<T> {
    floor_inputs(cn, sigma_op, delta, n, mu_norm, eta)?;
    let (nn, l) = (T::count(n), log_inv(delta));
    let a = (T::lit(96.0) * cn + T::lit(12.0) * (sigma_op * l).sqrt()) / nn.sqrt()
        + T::lit(8.0) * (eta * sigma_op).sqrt();
    let b = (T::lit(19.0) * eta + T::lit(26.0) * l / nn).powf(T::lit(2.0 / 3.0)) * mu_norm;
    Ok(a.max(b))
}

/// Uniform deviation bound for the ECF over the ball of radius `r`:
/// `r(12C/√n + √(2σL/n)) + 8L/(3n)`.
pub fn cf_deviation_bound<T: Scalar>(cn: T, sigma_op: T, delta: T, n: usize, r: T) -> Result<T> {
    floor_inputs(cn, sigma_op, delta, n, T::zero(), T::zero())?;
    if !(r >= T::zero()) {
        return Err(invalid("r must be non-negative"));
    }
    let (nn, l) = (T::count(n), log_inv(delta));
    Ok(r * (T::lit(12.0) * cn / nn.sqrt() + (T::lit(2.0) * sigma_op * l / nn).sqrt())
        + T::lit(8.0) * l / (T::lit(3.0) * nn))
}

fn floor_inputs<T: Scalar>(cn: T, sigma_op: T, delta: T, n: usize, mu_norm: T, eta: T) -> Result<()> {
    BoundInputs {
        cn,
        sigma_op,
        delta,
        n,
        r: T::one(),
        mu_norm,
        eta,
    }
    .validate()
}
