//! Recursive re-centering and the accuracy-free (sublevel set) variant.
//!
//! The ECF estimator is not shift-equivariant: its accuracy degrades with
//! `‖μ*‖`. Re-running it on samples translated by the previous estimate, with a
//! shrinking accuracy schedule, removes most of that dependence. The sublevel
//! search picks the accuracy level from the data alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ecf::{choose_radius, estimate_mean, InnerSolverConfig, OuterSolverConfig};
use crate::error::{check_dim, invalid, Error, Result};
use crate::norm::NormPair;
use crate::samples::SampleSet;
use crate::scalar::{dot, Scalar};

/// Per-step decay of the accuracy schedule: `(9/10)^{2/3}`.
pub fn schedule_decay<T: Scalar>() -> T {
    T::lit(0.9).powf(T::lit(2.0 / 3.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementSchedule<T> {
    /// Accuracy of the crude starting estimate.
    pub eps0: T,
    /// Target accuracy; the schedule never goes below it.
    pub eps_floor: T,
    pub delta: T,
    pub n: usize,
    pub max_k: usize,
}

impl<T: Scalar> RefinementSchedule<T> {
    /// Number of steps after which the schedule sits at `eps_floor`.
    pub fn steps_to_floor(eps0: T, eps_floor: T) -> usize {
        if eps0 <= eps_floor {
            return 0;
        }
        let k = (eps0 / eps_floor).ln() / (T::lit(2.0 / 3.0) * T::lit(10.0 / 9.0).ln());
        k.ceil().to_usize().unwrap_or(usize::MAX)
    }

    /// The sample-size condition `n ≥ 30 log(1/δ)`.
    pub fn sample_condition_holds(&self) -> bool {
        T::count(self.n) >= T::lit(30.0) * self.delta.recip().ln()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps0 > T::zero() && self.eps_floor > T::zero()) {
            return Err(invalid("eps0 and eps_floor must be positive"));
        }
        if !(self.delta > T::zero() && self.delta < T::one()) {
            return Err(invalid(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !self.sample_condition_holds() {
            return Err(Error::ScheduleInvalid(format!(
                "n = {} is below 30·log(1/δ) = {}",
                self.n,
                T::lit(30.0) * self.delta.recip().ln()
            )));
        }
        Ok(())
    }
}

/// `ε^{(k)} = max{ε_floor, (9/10)^{2/3} ε^{(k−1)}}` for `k = 1..=max_k`.
pub fn epsilon_schedule<T: Scalar>(schedule: &RefinementSchedule<T>) -> Result<Vec<T>> {
    schedule.validate()?;
    let decay = schedule_decay::<T>();
    let mut eps = schedule.eps0;
    Ok((0..schedule.max_k)
        .map(|_| {
            eps = schedule.eps_floor.max(decay * eps);
            eps
        })
        .collect())
}

/// `prev_mu + estimate_mean(samples − prev_mu, r_k)`.
pub fn refine_step<T: Scalar>(
    samples: &SampleSet<T>,
    prev_mu: &[T],
    r_k: T,
    norm: NormPair,
    inner: &InnerSolverConfig<T>,
    outer: &OuterSolverConfig<T>,
) -> Result<Vec<T>> {
    check_dim(samples.d(), prev_mu.len())?;
    let neg: Vec<T> = prev_mu.iter().map(|&m| -m).collect();
    let centered = samples.translated(&neg)?;
    let out = estimate_mean(&centered, r_k, norm, inner, outer)?;
    Ok(prev_mu.iter().zip(&out.mu_hat).map(|(&p, &m)| p + m).collect())
}

/// Full trajectory `(μ^{(0)}, μ^{(1)}, …, μ^{(max_k)})`, with radius
/// `22 log(1/δ) / (n ε^{(k)})` at step `k`.
pub fn refine<T: Scalar>(
    samples: &SampleSet<T>,
    mu0: &[T],
    schedule: &RefinementSchedule<T>,
    norm: NormPair,
    inner: &InnerSolverConfig<T>,
    outer: &OuterSolverConfig<T>,
) -> Result<Vec<Vec<T>>> {
    check_dim(samples.d(), mu0.len())?;
    let eps = epsilon_schedule(schedule)?;
    let mut traj = Vec::with_capacity(eps.len() + 1);
    traj.push(mu0.to_vec());
    for e in eps {
        let r = choose_radius(e, schedule.delta, samples.n())?;
        let next = refine_step(samples, traj.last().expect("non-empty"), r, norm, inner, outer)?;
        traj.push(next);
    }
    Ok(traj)
}

/// Outcome of minimizing `g_t(μ) = n/(11 log(1/δ)) · sup_{‖w‖_* ≤ r_t} (⟨w, μ⟩ − Im φ_n(w))`
/// with `r_t = 22 log(1/δ)/(n t)`. The sublevel set `{g_t ≤ 1}` is non-empty iff
/// `min_value ≤ 1` (up to solver tolerance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SublevelProbe<T> {
    pub t: T,
    pub min_value: T,
    pub witness_mu: Vec<T>,
    pub nonempty: bool,
}

pub fn sublevel_nonempty<T: Scalar>(
    samples: &SampleSet<T>,
    t: T,
    delta: T,
    norm: NormPair,
    inner: &InnerSolverConfig<T>,
    outer: &OuterSolverConfig<T>,
) -> Result<SublevelProbe<T>> {
    if !(t > T::zero()) {
        return Err(invalid(format!("t must be positive, got {t}")));
    }
    let n = samples.n();
    let r = choose_radius(t, delta, n)?;
    let out = estimate_mean(samples, r, norm, inner, outer)?;
    // n·r/(11 log(1/δ)) = 2/t, and the signed and absolute suprema coincide.
    let scale = T::count(n) / (T::lit(11.0) * delta.recip().ln());
    let min_value = scale * r * out.objective_value;
    let slack = T::lit(2.0) * outer.tol_abs / t;
    Ok(SublevelProbe {
        t,
        min_value,
        witness_mu: out.mu_hat,
        nonempty: min_value <= T::one() + slack,
    })
}

/// How the ε-free estimate was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ObliviousScenario<T> {
    /// No direction in the largest probed ball pushed `Im φ_n` above
    /// `11 log(1/δ)/n`, so zero lies in every sublevel set. `approximate` is set
    /// because only a bounded ball was searched.
    ZeroInAllSets { sup_imag: T, approximate: bool },
    /// `eps0` is non-empty and `empty_below` (when present) is empty, with
    /// `eps0 / empty_below` at most 2.
    Bracketed { empty_below: Option<T> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObliviousOutcome<T> {
    pub mu_hat: Vec<T>,
    pub eps0: T,
    pub scenario: ObliviousScenario<T>,
    pub probes: Vec<SublevelProbe<T>>,
}

/// Default search interval: `t_lo = 1e-8 · max ‖X_i‖` and `t_hi = 2 · ‖range‖`.
pub fn default_t_bounds<T: Scalar>(samples: &SampleSet<T>, norm: NormPair) -> (T, T) {
    let d = samples.d();
    let mut lo = vec![T::infinity(); d];
    let mut hi = vec![T::neg_infinity(); d];
    let mut scale = T::zero();
    for x in samples.rows() {
        for k in 0..d {
            lo[k] = lo[k].min(x[k]);
            hi[k] = hi[k].max(x[k]);
        }
        scale = scale.max(norm.primal_norm(x));
    }
    let range: Vec<T> = hi.iter().zip(&lo).map(|(&h, &l)| h - l).collect();
    let spread = norm.primal_norm(&range).max(scale);
    let spread = if spread > T::zero() { spread } else { T::one() };
    (T::lit(1e-8) * spread, T::lit(2.0) * spread)
}

/// Largest `Im φ_n(w)` found over `‖w‖_* ≤ radius` by a deterministic scan
/// (uniform and log-spaced radii along fixed and seeded directions). A lower
/// bound on the true supremum.
pub fn max_imag_ecf<T: Scalar>(samples: &SampleSet<T>, radius: T, norm: NormPair, seed: u64) -> T {
    let d = samples.d();
    let n = T::count(samples.n());
    let imag = |w: &[T]| samples.rows().map(|x| dot(w, x).sin()).sum::<T>() / n;

    let mut dirs: Vec<Vec<T>> = (0..d)
        .map(|j| {
            let mut e = vec![T::zero(); d];
            e[j] = T::one();
            e
        })
        .collect();
    if d > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..32 {
            let v: Vec<T> = (0..d).map(|_| T::lit(rng.sample::<f64, _>(StandardNormal))).collect();
            let nrm = norm.dual_norm(&v);
            if nrm > T::zero() {
                dirs.push(v.into_iter().map(|x| x / nrm).collect());
            }
        }
    }
    let per_dir = if d == 1 { 4096 } else { 256 };
    let mut radii: Vec<T> = (1..=per_dir).map(|k| radius * T::count(k) / T::count(per_dir)).collect();
    let span = T::lit(1e-12).ln();
    radii.extend((0..per_dir).map(|k| radius * (span * T::count(k) / T::count(per_dir)).exp()));

    let mut best = T::zero();
    let mut w = vec![T::zero(); d];
    for dir in &dirs {
        for &rad in &radii {
            w.iter_mut().zip(dir).for_each(|(wi, &di)| *wi = rad * di);
            // Im φ_n is odd, so both signs are covered by the absolute value.
            best = best.max(imag(&w).abs());
        }
    }
    best
}

/// Accuracy-free estimate: either zero (every sublevel set contains it) or the
/// witness of the smallest non-empty sublevel set found by bisection on `log t`.
pub fn oblivious_estimate<T: Scalar>(
    samples: &SampleSet<T>,
    delta: T,
    norm: NormPair,
    inner: &InnerSolverConfig<T>,
    outer: &OuterSolverConfig<T>,
    t_bounds: Option<(T, T)>,
) -> Result<ObliviousOutcome<T>> {
    let (t_lo, t_hi) = t_bounds.unwrap_or_else(|| default_t_bounds(samples, norm));
    if !(t_lo > T::zero() && t_lo < t_hi) {
        return Err(invalid(format!("need 0 < t_lo < t_hi, got ({t_lo}, {t_hi})")));
    }
    if !(delta > T::zero() && delta < T::one()) {
        return Err(invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    let n = samples.n();
    let threshold = T::lit(11.0) * delta.recip().ln() / T::count(n);
    let r_max = choose_radius(t_lo, delta, n)?;
    let sup_imag = max_imag_ecf(samples, r_max, norm, inner.seed);
    if sup_imag <= threshold {
        return Ok(ObliviousOutcome {
            mu_hat: vec![T::zero(); samples.d()],
            eps0: t_lo,
            scenario: ObliviousScenario::ZeroInAllSets {
                sup_imag,
                approximate: true,
            },
            probes: Vec::new(),
        });
    }

    let probe = |t: T| sublevel_nonempty(samples, t, delta, norm, inner, outer);
    let mut probes = Vec::new();
    let top = probe(t_hi)?;
    probes.push(top.clone());
    if !top.nonempty {
        return Err(Error::SearchBounds(format!(
            "sublevel set at t_hi = {t_hi} is empty (min g = {})",
            top.min_value
        )));
    }
    let bottom = probe(t_lo)?;
    probes.push(bottom.clone());
    if bottom.nonempty {
        return Ok(ObliviousOutcome {
            mu_hat: bottom.witness_mu,
            eps0: t_lo,
            scenario: ObliviousScenario::Bracketed { empty_below: None },
            probes,
        });
    }

    let (mut lo, mut hi) = (t_lo, top);
    for _ in 0..40 {
        if hi.t / lo <= T::lit(1.001) {
            break;
        }
        let mid = (lo * hi.t).sqrt();
        let p = probe(mid)?;
        probes.push(p.clone());
        if p.nonempty {
            hi = p;
        } else {
            lo = mid;
        }
    }
    Ok(ObliviousOutcome {
        mu_hat: hi.witness_mu,
        eps0: hi.t,
        scenario: ObliviousScenario::Bracketed {
            empty_below: Some(lo),
        },
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfgs() -> (InnerSolverConfig<f64>, OuterSolverConfig<f64>) {
        (InnerSolverConfig::default(), OuterSolverConfig::default())
    }

    fn schedule(eps0: f64, floor: f64, max_k: usize) -> RefinementSchedule<f64> {
        RefinementSchedule {
            eps0,
            eps_floor: floor,
            delta: 0.1,
            n: 1000,
            max_k,
        }
    }

    #[test]
    fn schedule_first_step_and_saturation() {
        let eps = epsilon_schedule(&schedule(10.0, 1.0, 3)).unwrap();
        // 10 · 0.9^{2/3}
        assert!((eps[0] - 9.321_697_517_861_575).abs() < 1e-12);
        assert!((eps[0] - 9.321698).abs() < 1e-6);
        assert!(eps.windows(2).all(|w| w[1] <= w[0]));

        let flat = epsilon_schedule(&schedule(1.0, 2.0, 5)).unwrap();
        assert!(flat.iter().all(|&e| e == 2.0));

        let k = RefinementSchedule::<f64>::steps_to_floor(10.0, 1.0);
        let eps = epsilon_schedule(&schedule(10.0, 1.0, k + 3)).unwrap();
        assert_eq!(eps[k - 1], 1.0);
        assert!(eps[k - 2] > 1.0);
        assert!(eps[k - 1..].iter().all(|&e| e == 1.0));
    }

    #[test]
    fn schedule_rejects_small_n() {
        let mut s = schedule(10.0, 1.0, 3);
        s.n = 60; // 30·log(10) ≈ 69.1
        assert!(matches!(epsilon_schedule(&s), Err(Error::ScheduleInvalid(_))));
        s.n = 70;
        assert!(epsilon_schedule(&s).is_ok());
    }

    #[test]
    fn refine_with_zero_steps_is_identity() {
        let (i, o) = cfgs();
        let s = SampleSet::univariate(&[1.0; 100]).unwrap();
        let mut sch = schedule(1.0, 1.0, 0);
        sch.n = 100;
        let traj = refine(&s, &[3.0], &sch, NormPair::L2, &i, &o).unwrap();
        assert_eq!(traj, vec![vec![3.0]]);
    }

    #[test]
    fn refine_step_on_constant_samples_is_exact() {
        let (i, o) = cfgs();
        let s = SampleSet::from_flat([2.5, -1.0].repeat(10), 10, 2).unwrap();
        let out = refine_step(&s, &[2.5, -1.0], 0.4, NormPair::L2, &i, &o).unwrap();
        assert_eq!(out, vec![2.5, -1.0]);
        let s1 = SampleSet::univariate(&[7.0; 4]).unwrap();
        assert_eq!(refine_step(&s1, &[7.0], 2.0, NormPair::L2, &i, &o).unwrap(), vec![7.0]);
    }

    #[test]
    fn refine_step_from_zero_matches_estimator() {
        let (i, o) = cfgs();
        let s = SampleSet::univariate(&[0.3, -1.0, 2.2, 0.9]).unwrap();
        let a = refine_step(&s, &[0.0], 0.7, NormPair::L2, &i, &o).unwrap();
        let b = estimate_mean(&s, 0.7, NormPair::L2, &i, &o).unwrap().mu_hat;
        assert_eq!(a, b);
    }

    #[test]
    fn zero_samples_take_the_trivial_branch() {
        let (i, o) = cfgs();
        let s = SampleSet::univariate(&[0.0; 50]).unwrap();
        let out = oblivious_estimate(&s, 0.1, NormPair::L2, &i, &o, Some((1e-6, 1.0))).unwrap();
        assert_eq!(out.mu_hat, vec![0.0]);
        assert_eq!(out.eps0, 1e-6);
        assert!(matches!(out.scenario, ObliviousScenario::ZeroInAllSets { .. }));

        for t in [1e-3, 1.0, 10.0] {
            let p = sublevel_nonempty(&s, t, 0.1, NormPair::L2, &i, &o).unwrap();
            assert_eq!(p.min_value, 0.0);
            assert!(p.nonempty);
        }
    }

    #[test]
    fn bad_bounds_rejected() {
        let (i, o) = cfgs();
        let s = SampleSet::univariate(&[0.0, 1.0]).unwrap();
        assert!(oblivious_estimate(&s, 0.1, NormPair::L2, &i, &o, Some((1.0, 0.5))).is_err());
        assert!(sublevel_nonempty(&s, 0.0, 0.1, NormPair::L2, &i, &o).is_err());
    }
}
