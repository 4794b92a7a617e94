use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal, Pareto, StudentT};
use serde::{Deserialize, Serialize};

use crate::ecf::Complex;
use crate::error::{check_dim, invalid, Error, Result};
use crate::samples::SampleSet;
use crate::scalar::Scalar;

/// Law of each coordinate of the unit noise `Z`. Every family is centered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    /// Student-t with `df > 2` degrees of freedom.
    StudentT { df: f64 },
    /// Pareto with unit scale and tail index `alpha > 2`, minus its mean.
    Pareto { alpha: f64 },
    /// `exp(σ N) − exp(σ²/2)`.
    Lognormal { sigma: f64 },
    /// `±a` with probability 1/2 each.
    TwoPoint { a: f64 },
}

impl Family {
    /// Variance of one coordinate of `Z`.
    pub fn variance(&self) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            Family::Gaussian => 1.0,
            Family::StudentT { df } => df / (df - 2.0),
            Family::Pareto { alpha } => alpha / ((alpha - 1.0).powi(2) * (alpha - 2.0)),
            Family::Lognormal { sigma } => {
                let s2 = sigma * sigma;
                s2.exp_m1() * s2.exp()
            }
            Family::TwoPoint { a } => a * a,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Family::Gaussian => true,
            Family::StudentT { df } => df > 2.0 && df.is_finite(),
            Family::Pareto { alpha } => alpha > 2.0 && alpha.is_finite(),
            Family::Lognormal { sigma } => sigma >= 0.0 && sigma.is_finite(),
            Family::TwoPoint { a } => a >= 0.0 && a.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("distribution parameters out of range: {self:?}")))
        }
    }
}

/// Linear map applied to the noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Isotropic(f64),
    Diagonal(Vec<f64>),
    /// Row-major `d × d` matrix `S`; `X = shift + S Z`.
    Full(Vec<Vec<f64>>),
}

impl Default for Scale {
    fn default() -> Self {
        Scale::Isotropic(1.0)
    }
}

/// `X = shift + S Z` with i.i.d. centered coordinates `Z_j ~ family`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    #[serde(flatten)]
    pub family: Family,
    /// Empty means the origin.
    #[serde(default)]
    pub shift: Vec<f64>,
    #[serde(default)]
    pub scale: Scale,
}

/// Mean and covariance summaries of a [`DistributionSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub mean: Vec<f64>,
    pub cov_opnorm: f64,
    pub cov_trace: f64,
}

impl DistributionSpec {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            shift: Vec::new(),
            scale: Scale::default(),
        }
    }

    pub fn with_shift(mut self, shift: Vec<f64>) -> Self {
        self.shift = shift;
        self
    }

    pub fn with_scale(mut self, scale: Scale) -> Self {
        self.scale = scale;
        self
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if d == 0 {
            return Err(invalid("dimension must be positive"));
        }
        self.family.validate()?;
        if !self.shift.is_empty() {
            check_dim(d, self.shift.len())?;
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.shift) {
            return Err(invalid("shift must be finite"));
        }
        match &self.scale {
            Scale::Isotropic(s) if !s.is_finite() => Err(invalid("scale must be finite")),
            Scale::Diagonal(v) => {
                check_dim(d, v.len())?;
                if finite(v) {
                    Ok(())
                } else {
                    Err(invalid("scale must be finite"))
                }
            }
            Scale::Full(m) => {
                check_dim(d, m.len())?;
                for row in m {
                    check_dim(d, row.len())?;
                    if !finite(row) {
                        return Err(invalid("scale must be finite"));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn shift_vec(&self, d: usize) -> Vec<f64> {
        if self.shift.is_empty() {
            vec![0.0; d]
        } else {
            self.shift.clone()
        }
    }

    /// `S Sᵀ` as a dense matrix.
    fn gram(&self, d: usize) -> Vec<Vec<f64>> {
        let mut g = vec![vec![0.0; d]; d];
        match &self.scale {
            Scale::Isotropic(s) => (0..d).for_each(|i| g[i][i] = s * s),
            Scale::Diagonal(v) => (0..d).for_each(|i| g[i][i] = v[i] * v[i]),
            Scale::Full(m) => {
                for i in 0..d {
                    for j in 0..d {
                        g[i][j] = (0..d).map(|k| m[i][k] * m[j][k]).sum();
                    }
                }
            }
        }
        g
    }

    pub fn ground_truth(&self, d: usize) -> Result<GroundTruth> {
        self.validate(d)?;
        let v = self.family.variance()?;
        let g = self.gram(d);
        let trace: f64 = (0..d).map(|i| g[i][i]).sum();
        let opnorm = match &self.scale {
            Scale::Full(_) => top_eigenvalue(&g),
            _ => (0..d).map(|i| g[i][i]).fold(0.0, f64::max),
        };
        Ok(GroundTruth {
            mean: self.shift_vec(d),
            cov_opnorm: v * opnorm,
            cov_trace: v * trace,
        })
    }

    /// `n` i.i.d. draws in `ℝ^d`; bitwise reproducible from `seed`.
    pub fn sample<T: Scalar>(&self, n: usize, d: usize, seed: u64) -> Result<SampleSet<T>> {
        self.validate(d)?;
        if n == 0 {
            return Err(invalid("sample size must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = self.shift_vec(d);
        let draw: Box<dyn FnMut(&mut ChaCha8Rng) -> f64> = match self.family {
            Family::Gaussian => {
                let dist = Normal::new(0.0, 1.0).expect("valid normal");
                Box::new(move |r| dist.sample(r))
            }
            Family::StudentT { df } => {
                let dist = StudentT::new(df).map_err(|e| invalid(e.to_string()))?;
                Box::new(move |r| dist.sample(r))
            }
            Family::Pareto { alpha } => {
                let dist = Pareto::new(1.0, alpha).map_err(|e| invalid(e.to_string()))?;
                let mean = alpha / (alpha - 1.0);
                Box::new(move |r| dist.sample(r) - mean)
            }
            Family::Lognormal { sigma } => {
                let dist = LogNormal::new(0.0, sigma).map_err(|e| invalid(e.to_string()))?;
                let mean = (0.5 * sigma * sigma).exp();
                Box::new(move |r| dist.sample(r) - mean)
            }
            Family::TwoPoint { a } => Box::new(move |r| {
                use rand::Rng;
                if r.gen::<bool>() {
                    a
                } else {
                    -a
                }
            }),
        };
        let mut draw = draw;
        let mut data = Vec::with_capacity(n * d);
        let mut z = vec![0.0; d];
        for _ in 0..n {
            z.iter_mut().for_each(|v| *v = draw(&mut rng));
            for i in 0..d {
                let sz = match &self.scale {
                    Scale::Isotropic(s) => s * z[i],
                    Scale::Diagonal(v) => v[i] * z[i],
                    Scale::Full(m) => (0..d).map(|k| m[i][k] * z[k]).sum(),
                };
                data.push(T::lit(shift[i] + sz));
            }
        }
        SampleSet::from_flat(data, n, d)
    }
}

// Power iteration on a symmetric positive semidefinite matrix.
fn top_eigenvalue(g: &[Vec<f64>]) -> f64 {
    let d = g.len();
    let mut v: Vec<f64> = (0..d).map(|i| 1.0 + 0.1 * i as f64).collect();
    let mut lambda = 0.0;
    for _ in 0..1000 {
        let w: Vec<f64> = g.iter().map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
        let nrm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm == 0.0 {
            return 0.0;
        }
        let next = nrm / v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = w.into_iter().map(|x| x / nrm).collect();
        if (next - lambda).abs() <= 1e-14 * next {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// `exp(−w²σ²/2) · (cos wμ, sin wμ)`, the characteristic function of `N(μ, σ²)`.
pub fn true_cf_gaussian<T: Scalar>(mu: T, sigma2: T, w: T) -> Result<Complex<T>> {
    if !(sigma2 >= T::zero()) {
        return Err(Error::Unsupported(format!("variance must be non-negative, got {sigma2}")));
    }
    let env = (-(w * w * sigma2) / T::lit(2.0)).exp();
    let (s, c) = (w * mu).sin_cos();
    Ok(Complex::new(env * c, env * s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(s: &SampleSet<f64>) -> (f64, f64) {
        let x = s.column(0);
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        (m, x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0))
    }

    #[test]
    fn degenerate_gaussian_is_the_shift() {
        let spec = DistributionSpec::new(Family::Gaussian)
            .with_shift(vec![1.5, -2.0])
            .with_scale(Scale::Isotropic(0.0));
        let s: SampleSet<f64> = spec.sample(5, 2, 7).unwrap();
        assert!(s.rows().all(|r| r == [1.5, -2.0]));
    }

    #[test]
    fn same_seed_same_bits() {
        let spec = DistributionSpec::new(Family::StudentT { df: 3.0 });
        let a: SampleSet<f64> = spec.sample(100, 3, 11).unwrap();
        let b: SampleSet<f64> = spec.sample(100, 3, 11).unwrap();
        assert_eq!(a, b);
        let c: SampleSet<f64> = spec.sample(100, 3, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn ground_truth_examples() {
        let g = DistributionSpec::new(Family::Gaussian)
            .with_shift(vec![1.0, 2.0, 3.0])
            .with_scale(Scale::Isotropic(2.0))
            .ground_truth(3)
            .unwrap();
        assert_eq!(g.mean, vec![1.0, 2.0, 3.0]);
        assert_eq!((g.cov_opnorm, g.cov_trace), (4.0, 12.0));

        let t = DistributionSpec::new(Family::StudentT { df: 5.0 })
            .with_scale(Scale::Isotropic(2.0))
            .ground_truth(1)
            .unwrap();
        assert!((t.cov_opnorm - 4.0 * 5.0 / 3.0).abs() < 1e-12);

        let tp = DistributionSpec::new(Family::TwoPoint { a: 3.0 }).ground_truth(1).unwrap();
        assert_eq!((tp.mean[0], tp.cov_opnorm), (0.0, 9.0));

        let full = DistributionSpec::new(Family::Gaussian)
            .with_scale(Scale::Full(vec![vec![1.0, 1.0], vec![0.0, 1.0]]))
            .ground_truth(2)
            .unwrap();
        // S Sᵀ = [[2, 1], [1, 1]], eigenvalues (3 ± √5)/2.
        assert!((full.cov_opnorm - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-10);
        assert!((full.cov_trace - 3.0).abs() < 1e-12);
        assert!(full.cov_opnorm <= full.cov_trace);
    }

    #[test]
    fn invalid_parameters() {
        assert!(DistributionSpec::new(Family::StudentT { df: 2.0 }).ground_truth(1).is_err());
        assert!(DistributionSpec::new(Family::Pareto { alpha: 1.5 }).sample::<f64>(3, 1, 0).is_err());
        assert!(DistributionSpec::new(Family::Gaussian)
            .with_shift(vec![0.0; 2])
            .sample::<f64>(3, 3, 0)
            .is_err());
    }

    #[test]
    fn monte_carlo_moments_match() {
        let n = 200_000;
        for fam in [
            Family::Gaussian,
            Family::StudentT { df: 5.0 },
            Family::Pareto { alpha: 4.5 },
            Family::Lognormal { sigma: 0.5 },
            Family::TwoPoint { a: 2.0 },
        ] {
            let spec = DistributionSpec::new(fam.clone()).with_shift(vec![3.0]);
            let truth = spec.ground_truth(1).unwrap();
            let (m, v) = moments(&spec.sample(n, 1, 5).unwrap());
            let se = (truth.cov_opnorm / n as f64).sqrt();
            assert!((m - 3.0).abs() < 5.0 * se, "{fam:?}: mean {m}");
            assert!((v / truth.cov_opnorm - 1.0).abs() < 0.1, "{fam:?}: var {v}");
        }
    }

    #[test]
    fn gaussian_cf() {
        let z = true_cf_gaussian(0.0f64, 2.0, 0.0).unwrap();
        assert_eq!(z, Complex::new(1.0, 0.0));
        assert_eq!(true_cf_gaussian(0.0f64, 1.0, 1.3).unwrap().im, 0.0);
        let z = true_cf_gaussian(1.0f64, 1.0, 1.0).unwrap();
        let e = (-0.5f64).exp();
        assert!((z.re - e * 1f64.cos()).abs() < 1e-15 && (z.im - e * 1f64.sin()).abs() < 1e-15);
    }
}
