//! Primal/dual norm pairs on ℝ^d.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Norm tag. `L2` is self-dual; `L1` and `Linf` are dual to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    #[default]
    L2,
    Linf,
}

impl Norm {
    pub fn dual(self) -> Norm {
        match self {
            Norm::L1 => Norm::Linf,
            Norm::L2 => Norm::L2,
            Norm::Linf => Norm::L1,
        }
    }

    pub fn eval<T: Scalar>(self, x: &[T]) -> T {
        match self {
            Norm::L1 => x.iter().map(|v| v.abs()).sum(),
            Norm::L2 => crate::scalar::norm2(x),
            Norm::Linf => x.iter().fold(T::zero(), |m, v| m.max(v.abs())),
        }
    }

    /// Euclidean projection onto the ball `{x : ‖x‖ ≤ radius}` of this norm.
    pub fn project_ball<T: Scalar>(self, x: &mut [T], radius: T) {
        match self {
            Norm::L2 => {
                let nrm = crate::scalar::norm2(x);
                if nrm > radius {
                    let s = radius / nrm;
                    x.iter_mut().for_each(|v| *v = *v * s);
                }
            }
            Norm::Linf => x.iter_mut().for_each(|v| *v = v.max(-radius).min(radius)),
            Norm::L1 => project_l1_ball(x, radius),
        }
    }

    /// A point `u` with `‖u‖ ≤ 1` maximizing `⟨u, x⟩`, so that `⟨u, x⟩` equals the
    /// dual norm of `x`. Returns the zero vector when `x = 0`.
    pub fn unit_maximizer<T: Scalar>(self, x: &[T]) -> Vec<T> {
        let mut u = vec![T::zero(); x.len()];
        match self {
            Norm::L2 => {
                let nrm = crate::scalar::norm2(x);
                if nrm > T::zero() {
                    u.iter_mut().zip(x).for_each(|(ui, &xi)| *ui = xi / nrm);
                }
            }
            Norm::Linf => {
                u.iter_mut().zip(x).for_each(|(ui, &xi)| {
                    *ui = if xi > T::zero() {
                        T::one()
                    } else if xi < T::zero() {
                        -T::one()
                    } else {
                        T::zero()
                    }
                });
            }
            Norm::L1 => {
                if let Some((j, &xj)) = x
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).expect("finite"))
                {
                    if xj != T::zero() {
                        u[j] = xj.signum();
                    }
                }
            }
        }
        u
    }
}

/// Norm paired with its dual; the dual ball is where estimator directions live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct NormPair {
    pub primal: Norm,
}

impl NormPair {
    pub const L2: NormPair = NormPair { primal: Norm::L2 };
    pub const L1: NormPair = NormPair { primal: Norm::L1 };
    pub const LINF: NormPair = NormPair { primal: Norm::Linf };

    pub fn new(primal: Norm) -> Self {
        Self { primal }
    }

    pub fn dual(&self) -> Norm {
        self.primal.dual()
    }

    pub fn primal_norm<T: Scalar>(&self, x: &[T]) -> T {
        self.primal.eval(x)
    }

    pub fn dual_norm<T: Scalar>(&self, w: &[T]) -> T {
        self.dual().eval(w)
    }

    /// Projects `w` onto the dual ball of the given radius.
    pub fn project_dual<T: Scalar>(&self, w: &mut [T], radius: T) {
        self.dual().project_ball(w, radius)
    }

    /// Unit dual vector `u` with `⟨u, x⟩ = ‖x‖` (primal norm).
    pub fn attaining_dual<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        self.dual().unit_maximizer(x)
    }
}

// Sort-based projection onto the ℓ1 ball (Duchi et al. 2008).
fn project_l1_ball<T: Scalar>(x: &mut [T], radius: T) {
    let l1: T = x.iter().map(|v| v.abs()).sum();
    if l1 <= radius {
        return;
    }
    let mut mags: Vec<T> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let mut cumsum = T::zero();
    let mut theta = T::zero();
    for (k, &m) in mags.iter().enumerate() {
        cumsum = cumsum + m;
        let t = (cumsum - radius) / T::count(k + 1);
        if m > t {
            theta = t;
        } else {
            break;
        }
    }
    x.iter_mut()
        .for_each(|v| *v = v.signum() * (v.abs() - theta).max(T::zero()));
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dual_table() {
        assert_eq!(Norm::L2.dual(), Norm::L2);
        assert_eq!(Norm::L1.dual(), Norm::Linf);
        assert_eq!(Norm::Linf.dual(), Norm::L1);
    }

    #[test]
    fn l1_projection_known_case() {
        let mut x = [3.0, -1.0, 0.5];
        project_l1_ball(&mut x, 1.0);
        assert_eq!(x, [1.0, 0.0, 0.0]);
        let mut y = [0.75f64, -0.75];
        project_l1_ball(&mut y, 1.0);
        assert!((y[0] - 0.5).abs() < 1e-15 && (y[1] + 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn attaining_dual_realizes_primal_norm(x in prop::collection::vec(-10.0f64..10.0, 1..6)) {
            for pair in [NormPair::L1, NormPair::L2, NormPair::LINF] {
                let u = pair.attaining_dual(&x);
                prop_assert!(pair.dual_norm(&u) <= 1.0 + 1e-12);
                let ip = crate::scalar::dot(&u, &x);
                prop_assert!((ip - pair.primal_norm(&x)).abs() <= 1e-9 * (1.0 + ip.abs()));
            }
        }

        #[test]
        fn projection_lands_in_ball(x in prop::collection::vec(-10.0f64..10.0, 1..6), r in 0.01f64..5.0) {
            for norm in [Norm::L1, Norm::L2, Norm::Linf] {
                let mut y = x.clone();
                norm.project_ball(&mut y, r);
                prop_assert!(norm.eval(&y) <= r * (1.0 + 1e-12));
            }
        }
    }
}
