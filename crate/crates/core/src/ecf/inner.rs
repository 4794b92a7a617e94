//! Inner supremum over the dual ball.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::profile::Profile;
use super::{DualVector, InnerSolverConfig};
use crate::error::{check_dim, invalid, Result};
use crate::norm::NormPair;
use crate::samples::SampleSet;
use crate::scalar::{dot, Scalar};

/// Result of the inner maximization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerSup<T> {
    /// `max |⟨w, μ⟩ − Im φ_n(w)|` over the explored directions.
    pub value: T,
    pub w_star: DualVector<T>,
    /// d = 1 only: the true supremum is at most `value + certified_gap`.
    pub certified_gap: Option<T>,
}

/// `sup_{‖w‖_* ≤ r} |⟨w, μ⟩ − Im φ_n(w)|`.
///
/// One-dimensional inputs are handled on a certified grid; higher dimensions use
/// multi-start projected gradient ascent, which is a heuristic lower bound.
pub fn inner_sup<T: Scalar>(
    mu: &[T],
    samples: &SampleSet<T>,
    r: T,
    norm: NormPair,
    cfg: &InnerSolverConfig<T>,
) -> Result<InnerSup<T>> {
    check_dim(samples.d(), mu.len())?;
    check_radius(r)?;
    cfg.validate()?;
    if samples.d() == 1 {
        let xs = samples.as_flat();
        let profile = Profile::build(xs, r, cfg);
        let sup = profile.sup_at(mu[0], cfg.top_k_refine, None);
        return Ok(InnerSup {
            value: r * sup.value,
            w_star: DualVector {
                w: vec![r * sup.u],
                radius: r,
            },
            certified_gap: Some(r * sup.certified_gap),
        });
    }
    let land = Landscape::new(samples, r, norm);
    let (u, v) = land.maximize(mu, &[], cfg, cfg.seed);
    Ok(InnerSup {
        value: r * v,
        w_star: DualVector {
            w: u.iter().map(|&x| r * x).collect(),
            radius: r,
        },
        certified_gap: None,
    })
}

/// `r⁻¹ · inner_sup(...).value`, the function minimized by the estimator.
pub fn objective<T: Scalar>(
    mu: &[T],
    samples: &SampleSet<T>,
    r: T,
    norm: NormPair,
    cfg: &InnerSolverConfig<T>,
) -> Result<T> {
    Ok(inner_sup(mu, samples, r, norm, cfg)?.value / r)
}

pub(crate) fn check_radius<T: Scalar>(r: T) -> Result<()> {
    if r > T::zero() && r.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("radius must be positive and finite, got {r}")))
    }
}

/// `u ↦ ⟨u, μ⟩ − S(u)` on the unit dual ball, `S(u) = (1/(n r)) Σ sin(r⟨u, X_i⟩)`.
pub(crate) struct Landscape<'a, T> {
    samples: &'a SampleSet<T>,
    r: T,
    norm: NormPair,
    step: T,
    mean: Vec<T>,
}

impl<'a, T: Scalar> Landscape<'a, T> {
    pub(crate) fn new(samples: &'a SampleSet<T>, r: T, norm: NormPair) -> Self {
        let n = T::count(samples.n());
        let mean_sq = samples.rows().map(|x| dot(x, x)).sum::<T>() / n;
        // |∇²S| ≤ r · mean ‖X‖₂², so 1/M is a safe ascent step.
        let curvature = (r * mean_sq).max(T::lit(1e-12));
        Self {
            samples,
            r,
            norm,
            step: curvature.recip(),
            mean: samples.mean(),
        }
    }

    pub(crate) fn s(&self, u: &[T]) -> T {
        let acc: T = self.samples.rows().map(|x| (self.r * dot(u, x)).sin()).sum();
        acc / (T::count(self.samples.n()) * self.r)
    }

    /// `h(u)` and its gradient `μ − (1/n) Σ cos(r⟨u, X_i⟩) X_i`.
    fn value_grad(&self, mu: &[T], u: &[T], grad: &mut [T]) -> T {
        let d = mu.len();
        grad.iter_mut().for_each(|g| *g = T::zero());
        let mut sin_acc = T::zero();
        for x in self.samples.rows() {
            let (s, c) = (self.r * dot(u, x)).sin_cos();
            sin_acc = sin_acc + s;
            for k in 0..d {
                grad[k] = grad[k] + c * x[k];
            }
        }
        let n = T::count(self.samples.n());
        for k in 0..d {
            grad[k] = mu[k] - grad[k] / n;
        }
        dot(u, mu) - sin_acc / (n * self.r)
    }

    fn ascend(&self, mu: &[T], start: Vec<T>, steps: usize, tol: T) -> (Vec<T>, T) {
        let d = mu.len();
        let mut u = start;
        self.norm.project_dual(&mut u, T::one());
        let mut grad = vec![T::zero(); d];
        let mut h = self.value_grad(mu, &u, &mut grad);
        let mut cand = vec![T::zero(); d];
        let mut cand_grad = vec![T::zero(); d];
        for _ in 0..steps {
            for k in 0..d {
                cand[k] = u[k] + self.step * grad[k];
            }
            self.norm.project_dual(&mut cand, T::one());
            let hc = self.value_grad(mu, &cand, &mut cand_grad);
            if !(hc > h) {
                break;
            }
            let gain = hc - h;
            std::mem::swap(&mut u, &mut cand);
            std::mem::swap(&mut grad, &mut cand_grad);
            h = hc;
            if gain <= tol * T::lit(1e-3) {
                break;
            }
        }
        (u, h)
    }

    /// Multi-start maximization of `h` over the unit dual ball. Since `S` is odd
    /// and the ball symmetric, `sup h = sup |h|`.
    pub(crate) fn maximize(
        &self,
        mu: &[T],
        warm: &[Vec<T>],
        cfg: &InnerSolverConfig<T>,
        seed: u64,
    ) -> (Vec<T>, T) {
        let d = mu.len();
        let mut starts: Vec<Vec<T>> = Vec::new();
        let mut push_pair = |v: Vec<T>| {
            if v.iter().any(|x| *x != T::zero()) {
                starts.push(v.iter().map(|&x| -x).collect());
                starts.push(v);
            }
        };
        push_pair(self.norm.attaining_dual(mu));
        let drift: Vec<T> = mu.iter().zip(&self.mean).map(|(&a, &b)| a - b).collect();
        push_pair(self.norm.attaining_dual(&drift));
        for w in warm {
            push_pair(w.clone());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in 0..cfg.random_starts {
            let mut v: Vec<T> = (0..d)
                .map(|_| T::lit(rng.sample::<f64, _>(StandardNormal)))
                .collect();
            let nrm = self.norm.dual_norm(&v);
            if nrm > T::zero() {
                // Alternate between the unit sphere and the interior.
                let radius = if k % 2 == 0 {
                    T::one()
                } else {
                    T::lit(rng.gen::<f64>().powf(1.0 / d as f64))
                };
                v.iter_mut().for_each(|x| *x = *x * radius / nrm);
            }
            starts.push(v);
        }

        let short = cfg.ascent_max_steps.min(20);
        let mut scouted: Vec<(Vec<T>, T)> = starts
            .into_iter()
            .map(|s| self.ascend(mu, s, short, cfg.ascent_tol))
            .collect();
        scouted.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite objective"));
        scouted.truncate(cfg.top_k_refine);

        let mut best = (vec![T::zero(); d], T::zero());
        for (u, _) in scouted {
            let (u, h) = self.ascend(mu, u, cfg.ascent_max_steps, cfg.ascent_tol);
            if h > best.1 {
                best = (u, h);
            }
        }
        best
    }
}
