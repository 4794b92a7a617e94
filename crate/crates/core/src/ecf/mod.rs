//! Mean estimation from the imaginary part of the empirical characteristic
//! function (ECF).
//!
//! For a radius `r > 0` the estimator minimizes
//!
//! ```text
//! F(μ) = r⁻¹ · sup_{‖w‖_* ≤ r} | ⟨w, μ⟩ − (1/n) Σ sin⟨w, X_i⟩ |
//! ```
//!
//! `F` is convex in `μ`. Internally every direction is stored in normalized
//! coordinates `u = w / r` on the unit dual ball, so solver tolerances are
//! expressed on the scale of `F` itself.

mod inner;
pub(crate) mod master;
mod outer;
mod profile;

pub use inner::{inner_sup, objective, InnerSup};
pub use outer::estimate_mean;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Result};
use crate::norm::NormPair;
use crate::samples::SampleSet;
use crate::scalar::{dot, Scalar};

/// A complex number `re + i·im`, as returned by characteristic functions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Complex<T> {
    pub re: T,
    pub im: T,
}

impl<T: Scalar> Complex<T> {
    pub fn new(re: T, im: T) -> Self {
        Self { re, im }
    }

    pub fn modulus(&self) -> T {
        self.re.hypot(self.im)
    }
}

/// Empirical characteristic function `(1/n) Σ exp(i⟨w, X_i⟩)`.
pub fn ecf<T: Scalar>(samples: &SampleSet<T>, w: &[T]) -> Result<Complex<T>> {
    check_dim(samples.d(), w.len())?;
    let (mut re, mut im) = (T::zero(), T::zero());
    for x in samples.rows() {
        let (s, c) = dot(w, x).sin_cos();
        re = re + c;
        im = im + s;
    }
    let n = T::count(samples.n());
    Ok(Complex::new(re / n, im / n))
}

/// Dual-space direction `w` together with the radius of the ball it lives in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualVector<T> {
    pub w: Vec<T>,
    pub radius: T,
}

impl<T: Scalar> DualVector<T> {
    /// Checks `‖w‖_* ≤ radius·(1 + 1e-12)`.
    pub fn within_radius(&self, norm: NormPair) -> bool {
        norm.dual_norm(&self.w) <= self.radius * (T::one() + T::lit(1e-12))
    }
}

/// Settings for the inner supremum over the dual ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InnerSolverConfig<T> {
    /// Minimum size of the 1-D certified grid on the normalized interval `[0, 1]`.
    pub grid_points: usize,
    /// Hard cap on the 1-D grid size; the certificate is reported as-is when hit.
    pub max_grid_points: usize,
    /// Random starting points for projected gradient ascent (d > 1).
    pub random_starts: usize,
    pub ascent_max_steps: usize,
    /// Target accuracy on the objective scale (value / r).
    pub ascent_tol: T,
    /// Candidates kept for full ascent (d > 1) or local golden-section polishing (d = 1).
    pub top_k_refine: usize,
    pub seed: u64,
}

impl<T: Scalar> Default for InnerSolverConfig<T> {
    fn default() -> Self {
        Self {
            grid_points: 65,
            max_grid_points: 1 << 15,
            random_starts: 8,
            ascent_max_steps: 300,
            ascent_tol: T::default_tol(),
            top_k_refine: 3,
            seed: 0x5eed,
        }
    }
}

impl<T: Scalar> InnerSolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 3 {
            return Err(invalid("inner.grid_points must be at least 3"));
        }
        if self.max_grid_points < self.grid_points {
            return Err(invalid("inner.max_grid_points must be ≥ inner.grid_points"));
        }
        if self.random_starts == 0 || self.ascent_max_steps == 0 || self.top_k_refine == 0 {
            return Err(invalid(
                "inner.random_starts, inner.ascent_max_steps and inner.top_k_refine must be positive",
            ));
        }
        if !(self.ascent_tol > T::zero()) {
            return Err(invalid("inner.ascent_tol must be positive"));
        }
        Ok(())
    }
}

/// Starting point of the outer minimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OuterInit<T> {
    #[default]
    CoordinateMedian,
    EmpiricalMean,
    Zero,
    Given(Vec<T>),
}

/// Settings for the outer cutting-plane minimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OuterSolverConfig<T> {
    pub max_cuts: usize,
    /// Iteration cap for the 1-D master bisection.
    pub subgrad_max_steps: usize,
    /// Target gap between the best objective found and the cut-model lower bound.
    pub tol_abs: T,
    pub init: OuterInit<T>,
}

impl<T: Scalar> Default for OuterSolverConfig<T> {
    fn default() -> Self {
        Self {
            max_cuts: 200,
            subgrad_max_steps: 400,
            tol_abs: T::default_tol(),
            init: OuterInit::CoordinateMedian,
        }
    }
}

impl<T: Scalar> OuterSolverConfig<T> {
    pub fn validate(&self, d: usize) -> Result<()> {
        if self.max_cuts == 0 || self.subgrad_max_steps == 0 {
            return Err(invalid("outer.max_cuts and outer.subgrad_max_steps must be positive"));
        }
        if !(self.tol_abs > T::zero()) {
            return Err(invalid("outer.tol_abs must be positive"));
        }
        if let OuterInit::Given(v) = &self.init {
            check_dim(d, v.len())?;
        }
        Ok(())
    }
}

/// Solver bookkeeping attached to an estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics<T> {
    /// Smallest value of the cut model: a lower bound on the minimum over explored cuts.
    pub lower_bound: T,
    /// For d = 1, a bound on how far the reported objective may sit below the true supremum.
    pub certified_gap: Option<T>,
    pub rounds: usize,
    /// `Some(true)` when the minimizer of the cut model is known to be unique.
    pub unique_minimizer: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateOutcome<T> {
    pub mu_hat: Vec<T>,
    /// `r⁻¹ · sup |⟨w, μ̂⟩ − Im φ_n(w)|` over the explored directions.
    pub objective_value: T,
    pub attaining_w: DualVector<T>,
    pub cuts_used: usize,
    pub converged: bool,
    pub diagnostics: SolverDiagnostics<T>,
}

/// Radius `22 log(1/δ) / (n ε)` that makes the estimator `ε`-accurate with
/// probability `1 − δ` once `ε` clears the accuracy floor.
pub fn choose_radius<T: Scalar>(eps: T, delta: T, n: usize) -> Result<T> {
    validate_eps_delta_n(eps, delta, n)?;
    Ok(T::lit(22.0) * delta.recip().ln() / (T::count(n) * eps))
}

/// Radius `16η/ε + 22 log(1/δ)/(n ε)` for samples with an `η` fraction corrupted.
pub fn choose_radius_contaminated<T: Scalar>(eps: T, delta: T, n: usize, eta: T) -> Result<T> {
    validate_eps_delta_n(eps, delta, n)?;
    if !(eta >= T::zero() && eta < T::lit(0.5)) {
        return Err(invalid(format!("eta must lie in [0, 1/2), got {eta}")));
    }
    Ok(T::lit(16.0) * eta / eps + choose_radius(eps, delta, n)?)
}

fn validate_eps_delta_n<T: Scalar>(eps: T, delta: T, n: usize) -> Result<()> {
    if !(eps > T::zero()) || !eps.is_finite() {
        return Err(invalid(format!("eps must be positive, got {eps}")));
    }
    if !(delta > T::zero() && delta < T::one()) {
        return Err(invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn ecf_of_zero_samples_is_one() {
        let s = SampleSet::from_flat(vec![0.0; 6], 3, 2).unwrap();
        assert_eq!(ecf(&s, &[0.3, -2.0]).unwrap(), Complex::new(1.0, 0.0));
    }

    #[test]
    fn ecf_single_sample() {
        let s = SampleSet::from_rows(&[vec![1.5, -0.5]]).unwrap();
        let w = [0.7, 0.2];
        let ip = 0.7 * 1.5 - 0.2 * 0.5;
        let z = ecf(&s, &w).unwrap();
        assert!((z.re - f64::cos(ip)).abs() < 1e-15);
        assert!((z.im - f64::sin(ip)).abs() < 1e-15);
    }

    #[test]
    fn ecf_symmetric_pair_is_real() {
        let s = SampleSet::univariate(&[2.5, -2.5]).unwrap();
        let z = ecf(&s, &[0.9]).unwrap();
        assert!((z.re - f64::cos(0.9 * 2.5)).abs() < 1e-15);
        assert_eq!(z.im, 0.0);
        assert!(z.modulus() <= 1.0);
    }

    #[test]
    fn ecf_dimension_mismatch() {
        let s = SampleSet::univariate(&[1.0]).unwrap();
        assert!(matches!(
            ecf(&s, &[1.0, 2.0]),
            Err(crate::Error::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn radius_formulas() {
        assert!((choose_radius(1.0, (-1.0f64).exp(), 22).unwrap() - 1.0).abs() < 1e-14);
        let r = choose_radius(0.5, 0.05, 1000).unwrap();
        assert!((r - 22.0 * 20f64.ln() / 500.0).abs() < 1e-15);
        assert!((r - 0.131813).abs() < 1e-6);
        let r2 = choose_radius(1.0, 0.05, 1000).unwrap();
        assert!((r2 - r / 2.0).abs() < 1e-15);

        assert_eq!(
            choose_radius_contaminated(0.5, 0.05, 1000, 0.0).unwrap(),
            choose_radius(0.5, 0.05, 1000).unwrap()
        );
        let rc = choose_radius_contaminated(1.0, 1.0 / E, 22, 1.0 / 16.0).unwrap();
        assert!((rc - 2.0).abs() < 1e-14);
        let rc: f64 = choose_radius_contaminated(0.5, 0.05, 1000, 0.05).unwrap();
        assert!((rc - 1.731813).abs() < 1e-6);
    }

    #[test]
    fn radius_domain_errors() {
        assert!(choose_radius(0.0, 0.1, 10).is_err());
        assert!(choose_radius(1.0, 1.0, 10).is_err());
        assert!(choose_radius(1.0, 0.0, 10).is_err());
        assert!(choose_radius(1.0, 0.5, 0).is_err());
        assert!(choose_radius_contaminated(1.0, 0.5, 10, 0.5).is_err());
        assert!(choose_radius_contaminated(1.0, 0.5, 10, -0.1).is_err());
    }
}
