//! Outer convex minimization by cutting planes.
//!
//! Each direction `u` on the unit dual ball gives a valid lower bound
//! `|⟨u, μ⟩ − S(u)| ≤ F(μ)`. The cut model `max_k |⟨u_k, μ⟩ − S(u_k)|` is
//! minimized exactly (envelope bisection in 1-D, a linear program otherwise),
//! the inner supremum at the model minimizer supplies the next cut, and the loop
//! stops once the best objective found is within `tol_abs` of the model minimum.

use super::inner::{check_radius, Landscape};
use super::master::{model_value, solve_lp, solve_scalar};
use super::profile::Profile;
use super::{DualVector, EstimateOutcome, InnerSolverConfig, OuterInit, OuterSolverConfig, SolverDiagnostics};
use crate::error::{check_dim, Result};
use crate::norm::NormPair;
use crate::samples::SampleSet;
use crate::scalar::{dot, median_in_place, Scalar};

/// Minimizes `r⁻¹ sup_{‖w‖_* ≤ r} |⟨w, μ⟩ − Im φ_n(w)|` over `μ`.
///
/// Failing to reach `tol_abs` within `max_cuts` rounds is reported through
/// `converged = false`, not as an error. Deterministic for fixed configs.
pub fn estimate_mean<T: Scalar>(
    samples: &SampleSet<T>,
    r: T,
    norm: NormPair,
    inner: &InnerSolverConfig<T>,
    outer: &OuterSolverConfig<T>,
) -> Result<EstimateOutcome<T>> {
    check_radius(r)?;
    inner.validate()?;
    outer.validate(samples.d())?;
    if samples.d() == 1 {
        Ok(estimate_1d(samples, r, inner, outer))
    } else {
        estimate_nd(samples, r, norm, inner, outer)
    }
}

pub(crate) fn initial_point<T: Scalar>(samples: &SampleSet<T>, init: &OuterInit<T>) -> Vec<T> {
    match init {
        OuterInit::CoordinateMedian => (0..samples.d())
            .map(|j| median_in_place(&mut samples.column(j)))
            .collect(),
        OuterInit::EmpiricalMean => samples.mean(),
        OuterInit::Zero => vec![T::zero(); samples.d()],
        OuterInit::Given(v) => v.clone(),
    }
}

fn estimate_1d<T: Scalar>(
    samples: &SampleSet<T>,
    r: T,
    inner: &InnerSolverConfig<T>,
    outer: &OuterSolverConfig<T>,
) -> EstimateOutcome<T> {
    let profile = Profile::build(samples.as_flat(), r, inner);
    let mut cuts: Vec<(T, T)> = profile
        .u
        .iter()
        .zip(&profile.s)
        .skip(1)
        .map(|(&u, &s)| (u, s))
        .collect();

    // The grid already spans the whole dual interval, so the initial point only
    // seeds the incumbent.
    let mu0 = initial_point(samples, &outer.init)[0];
    let sup0 = profile.sup_at(mu0, inner.top_k_refine, Some(&mut cuts));
    let mut best = (mu0, sup0);
    let mut lower = T::zero();
    let mut converged = false;
    let mut rounds = 0;

    while rounds < outer.max_cuts {
        rounds += 1;
        let (mu, model) = solve_scalar(&cuts, outer.subgrad_max_steps);
        lower = model;
        let before = cuts.len();
        let sup = profile.sup_at(mu, inner.top_k_refine, Some(&mut cuts));
        if sup.value < best.1.value {
            best = (mu, sup);
        }
        if best.1.value - lower <= outer.tol_abs {
            converged = true;
            break;
        }
        if cuts.len() == before {
            break;
        }
    }

    let (mu, sup) = best;
    EstimateOutcome {
        mu_hat: vec![mu],
        objective_value: sup.value,
        attaining_w: DualVector {
            w: vec![r * sup.u],
            radius: r,
        },
        cuts_used: cuts.len(),
        converged: converged && sup.certified_gap <= inner.ascent_tol,
        diagnostics: SolverDiagnostics {
            lower_bound: lower,
            certified_gap: Some(sup.certified_gap),
            rounds,
            unique_minimizer: Some(true),
        },
    }
}

fn estimate_nd<T: Scalar>(
    samples: &SampleSet<T>,
    r: T,
    norm: NormPair,
    inner: &InnerSolverConfig<T>,
    outer: &OuterSolverConfig<T>,
) -> Result<EstimateOutcome<T>> {
    let d = samples.d();
    let land = Landscape::new(samples, r, norm);

    // Coordinate directions have unit dual norm for every supported norm and keep
    // the model bounded from the first round.
    let mut cuts: Vec<(Vec<T>, T)> = (0..d)
        .map(|j| {
            let mut e = vec![T::zero(); d];
            e[j] = T::one();
            let s = land.s(&e);
            (e, s)
        })
        .collect();

    let mut mu = initial_point(samples, &outer.init);
    check_dim(d, mu.len())?;
    let mut best: Option<(Vec<T>, T, Vec<T>)> = None;
    let mut lower = T::zero();
    let mut converged = false;
    let mut rounds = 0;

    while rounds < outer.max_cuts {
        let seed = inner.seed.wrapping_add(rounds as u64);
        rounds += 1;

        let mut ranked: Vec<(T, &Vec<T>)> = cuts
            .iter()
            .map(|(a, b)| ((dot(a, &mu) - *b).abs(), a))
            .collect();
        ranked.sort_by(|x, y| y.0.partial_cmp(&x.0).expect("finite residual"));
        let warm: Vec<Vec<T>> = ranked
            .iter()
            .take(inner.top_k_refine)
            .map(|(_, a)| (*a).clone())
            .collect();
        let (u, mut value) = land.maximize(&mu, &warm, inner, seed);
        let mut arg = u.clone();
        // Existing cuts are lower bounds on F(μ) too.
        if let Some((res, a)) = ranked.first() {
            if *res > value {
                value = *res;
                arg = (*a).clone();
            }
        }
        if best.as_ref().is_none_or(|b| value < b.1) {
            best = Some((mu.clone(), value, arg));
        }

        let s = land.s(&u);
        if !cuts.iter().any(|(a, _)| a == &u) {
            cuts.push((u, s));
        }
        let (next, model) = solve_lp(&cuts, d)?;
        lower = model;
        let incumbent = best.as_ref().expect("set above").1;
        if incumbent - lower <= outer.tol_abs {
            converged = true;
            break;
        }
        mu = next;
    }

    let (mu_hat, value, arg) = best.expect("at least one round");
    let objective_value = value.max(model_value(&cuts, &mu_hat));
    Ok(EstimateOutcome {
        mu_hat,
        objective_value,
        attaining_w: DualVector {
            w: arg.iter().map(|&x| r * x).collect(),
            radius: r,
        },
        cuts_used: cuts.len(),
        converged,
        diagnostics: SolverDiagnostics {
            lower_bound: lower,
            certified_gap: None,
            rounds,
            unique_minimizer: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfgs() -> (InnerSolverConfig<f64>, OuterSolverConfig<f64>) {
        (InnerSolverConfig::default(), OuterSolverConfig::default())
    }

    #[test]
    fn zero_samples_give_zero() {
        let (i, o) = cfgs();
        let s1 = SampleSet::univariate(&[0.0; 5]).unwrap();
        let out = estimate_mean(&s1, 0.8, NormPair::L2, &i, &o).unwrap();
        assert!(out.mu_hat[0].abs() < 1e-12 && out.converged);
        let s3 = SampleSet::from_flat(vec![0.0; 12], 4, 3).unwrap();
        let out = estimate_mean(&s3, 0.8, NormPair::L2, &i, &o).unwrap();
        assert!(out.mu_hat.iter().all(|x| x.abs() < 1e-9), "{:?}", out.mu_hat);
    }

    #[test]
    fn symmetric_pair_gives_zero() {
        let (i, o) = cfgs();
        let s = SampleSet::univariate(&[3.0, -3.0]).unwrap();
        for r in [1e-3, 0.5, 4.0] {
            let out = estimate_mean(&s, r, NormPair::L2, &i, &o).unwrap();
            assert!(out.mu_hat[0].abs() < 1e-9, "r={r}: {:?}", out.mu_hat);
        }
    }

    #[test]
    fn tiny_radius_recovers_sample_mean() {
        let (i, o) = cfgs();
        let s = SampleSet::univariate(&[1.0, 2.0, 3.0]).unwrap();
        let out = estimate_mean(&s, 1e-8, NormPair::L2, &i, &o).unwrap();
        assert!((out.mu_hat[0] - 2.0).abs() <= 1e-5);
    }

    #[test]
    fn outcome_invariants() {
        let (i, o) = cfgs();
        let s = SampleSet::from_rows(&[vec![0.3, 1.0], vec![-1.2, 0.4], vec![2.0, -0.7]]).unwrap();
        for pair in [NormPair::L2, NormPair::L1, NormPair::LINF] {
            let out = estimate_mean(&s, 0.9, pair, &i, &o).unwrap();
            assert!(out.objective_value >= 0.0);
            assert!(out.attaining_w.within_radius(pair));
            assert!(out.diagnostics.lower_bound <= out.objective_value + 1e-12);
        }
    }

    #[test]
    fn deterministic() {
        let (i, o) = cfgs();
        let s = SampleSet::from_rows(&[vec![0.3, 1.0], vec![-1.2, 0.4], vec![5.0, -0.7]]).unwrap();
        let a = estimate_mean(&s, 0.6, NormPair::L2, &i, &o).unwrap();
        let b = estimate_mean(&s, 0.6, NormPair::L2, &i, &o).unwrap();
        assert_eq!(a, b);
    }
}
