//! Certified one-dimensional profile of the imaginary ECF.
//!
//! In one dimension `Im φ_n` is odd, so `sup_{|u| ≤ 1} |uμ − S(u)|` equals the
//! supremum over `u ∈ [0, 1]`, where `S(u) = (1/(n r)) Σ sin(r u X_i)`. `S` is
//! tabulated once on a uniform grid; the table does not depend on `μ`, so every
//! evaluation of the objective afterwards costs one pass over the grid.
//!
//! Between two grid nodes `|g_μ(u)| = |uμ − S(u)|` can exceed the larger node
//! value by at most `min(L h / 2, M h² / 8)` where `h` is the spacing,
//! `L = |μ| + (1/n) Σ |X_i|` bounds `|g'|` and `M = r · (1/n) Σ X_i²` bounds `|g''|`.

use crate::ecf::InnerSolverConfig;
use crate::scalar::Scalar;

pub(crate) struct Profile<'a, T> {
    xs: &'a [T],
    r: T,
    pub(crate) u: Vec<T>,
    pub(crate) s: Vec<T>,
    spacing: T,
    curvature: T,
    mean_abs: T,
}

/// Best direction found at a given `μ`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ProfileSup<T> {
    /// `max |uμ − S(u)|` over grid and polished points (objective scale).
    pub value: T,
    pub u: T,
    pub certified_gap: T,
}

impl<'a, T: Scalar> Profile<'a, T> {
    pub(crate) fn build(xs: &'a [T], r: T, cfg: &InnerSolverConfig<T>) -> Self {
        let n = T::count(xs.len());
        let mean_sq = xs.iter().map(|&x| x * x).sum::<T>() / n;
        let mean_abs = xs.iter().map(|x| x.abs()).sum::<T>() / n;
        let curvature = r * mean_sq;

        let mut points = cfg.grid_points;
        if curvature > T::zero() {
            let h = (T::lit(8.0) * cfg.ascent_tol / curvature).sqrt();
            let needed = (T::one() / h).ceil().to_f64_lossy() + 1.0;
            if needed.is_finite() && needed > points as f64 {
                points = (needed.min(cfg.max_grid_points as f64)) as usize;
            }
        }
        points = points.clamp(cfg.grid_points, cfg.max_grid_points.max(cfg.grid_points));
        let spacing = T::one() / T::count(points - 1);
        let u: Vec<T> = (0..points).map(|j| T::count(j) * spacing).collect();
        let s = tabulate(xs, r, &u, spacing);
        Self {
            xs,
            r,
            u,
            s,
            spacing,
            curvature,
            mean_abs,
        }
    }

    #[cfg(test)]
    pub(crate) fn len(&self) -> usize {
        self.u.len()
    }

    pub(crate) fn exact_s(&self, u: T) -> T {
        s_at(self.xs, self.r, u)
    }

    pub(crate) fn certified_gap(&self, mu: T) -> T {
        let h = self.spacing;
        let lip = (mu.abs() + self.mean_abs) * h / T::lit(2.0);
        let curv = self.curvature * h * h / T::lit(8.0);
        lip.min(curv)
    }

    fn residuals(&self, mu: T) -> impl Iterator<Item = T> + '_ {
        self.u
            .iter()
            .zip(&self.s)
            .map(move |(&u, &s)| (u * mu - s).abs())
    }

    /// Indices of the `k` largest local maxima of `|uμ − S(u)|` on the grid.
    fn top_local_maxima(&self, mu: T, k: usize) -> Vec<usize> {
        let vals: Vec<T> = self.residuals(mu).collect();
        let m = vals.len();
        let mut peaks: Vec<usize> = (0..m)
            .filter(|&j| {
                let left = j == 0 || vals[j] >= vals[j - 1];
                let right = j + 1 == m || vals[j] >= vals[j + 1];
                left && right
            })
            .collect();
        peaks.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).expect("finite"));
        peaks.truncate(k);
        peaks
    }

    /// Golden-section maximization of `|uμ − S(u)|` on the cell around node `j`.
    fn polish(&self, mu: T, j: usize) -> (T, T, T) {
        let lo = if j == 0 { T::zero() } else { self.u[j - 1] };
        let hi = if j + 1 == self.u.len() { T::one() } else { self.u[j + 1] };
        let f = |u: T| (u * mu - self.exact_s(u)).abs();
        let inv_phi = T::lit(0.618_033_988_749_894_8);
        let (mut a, mut b) = (lo, hi);
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..80 {
            if (b - a) <= T::epsilon() * T::lit(4.0) {
                break;
            }
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = f(d);
            }
        }
        let mut best = (self.u[j], self.s[j], (self.u[j] * mu - self.s[j]).abs());
        for cand in [a, b, (a + b) / T::lit(2.0)] {
            let s = self.exact_s(cand);
            let v = (cand * mu - s).abs();
            if v > best.2 {
                best = (cand, s, v);
            }
        }
        best
    }

    /// Supremum at `μ`: grid maximum improved by polishing the `top_k` peaks.
    /// Polished directions are appended to `new_cuts` as `(u, S(u))`.
    pub(crate) fn sup_at(
        &self,
        mu: T,
        top_k: usize,
        mut new_cuts: Option<&mut Vec<(T, T)>>,
    ) -> ProfileSup<T> {
        let mut best = ProfileSup {
            value: T::zero(),
            u: T::zero(),
            certified_gap: self.certified_gap(mu),
        };
        for (j, v) in self.residuals(mu).enumerate() {
            if v > best.value {
                best.value = v;
                best.u = self.u[j];
            }
        }
        for j in self.top_local_maxima(mu, top_k) {
            let (u, s, v) = self.polish(mu, j);
            if let Some(cuts) = new_cuts.as_deref_mut() {
                if u > T::zero() {
                    cuts.push((u, s));
                }
            }
            if v > best.value {
                best.value = v;
                best.u = u;
            }
        }
        best
    }
}

/// `S` on the grid `u_j = j·h`. Each sample advances `sin(r u_j x)` by a fixed
/// rotation, re-anchored with an exact `sin_cos` every 32 nodes to bound drift.
fn tabulate<T: Scalar>(xs: &[T], r: T, u: &[T], spacing: T) -> Vec<T> {
    const ANCHOR: usize = 32;
    let mut acc = vec![T::zero(); u.len()];
    for &x in xs {
        let (ds, dc) = (r * x * spacing).sin_cos();
        let (mut s, mut c) = (T::zero(), T::one());
        for (j, a) in acc.iter_mut().enumerate() {
            if j % ANCHOR == 0 {
                (s, c) = (r * u[j] * x).sin_cos();
            }
            *a = *a + s;
            (s, c) = (s * dc + c * ds, c * dc - s * ds);
        }
    }
    let scale = T::count(xs.len()) * r;
    acc.into_iter().map(|a| a / scale).collect()
}

fn s_at<T: Scalar>(xs: &[T], r: T, u: T) -> T {
    let w = r * u;
    xs.iter().map(|&x| (w * x).sin()).sum::<T>() / (T::count(xs.len()) * r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_grows_with_curvature_and_respects_cap() {
        let xs = [1.0, -2.0, 3.0];
        let mut cfg = InnerSolverConfig::<f64> {
            ascent_tol: 1e-6,
            ..Default::default()
        };
        let small = Profile::build(&xs, 1e-6, &cfg);
        assert_eq!(small.len(), cfg.grid_points);
        let big = Profile::build(&xs, 1.0, &cfg);
        assert!(big.len() > cfg.grid_points);
        assert!(big.certified_gap(0.0) <= 1e-6 * (1.0 + 1e-9));
        cfg.max_grid_points = 100;
        let capped = Profile::build(&xs, 1.0, &cfg);
        assert_eq!(capped.len(), 100);
        assert!(capped.certified_gap(0.0) > 1e-6);
    }

    #[test]
    fn sup_matches_dense_scan() {
        let xs = [0.3, 2.2, -1.7, 4.1];
        let r = 1.3;
        let cfg = InnerSolverConfig::<f64>::default();
        let p = Profile::build(&xs, r, &cfg);
        for mu in [-1.0, 0.0, 0.4, 2.5] {
            let sup = p.sup_at(mu, 3, None);
            let dense = (0..=200_000)
                .map(|k| {
                    let u = k as f64 / 200_000.0;
                    (u * mu - s_at(&xs, r, u)).abs()
                })
                .fold(0.0, f64::max);
            assert!(sup.value <= dense + 1e-9, "{mu}: {} > {dense}", sup.value);
            assert!(sup.value + sup.certified_gap + 1e-9 >= dense);
        }
    }
}
