//! Randomized suites for the inequalities behind the estimator.

use std::time::Instant;

use ecf_robust::simulation::{child_seed, DistributionSpec, Family};
use ecf_robust::theory::{
    cf_deviation_bound, conjugate_bound_check, master_bound, net_conjugate, net_norm, rademacher_exact,
    rademacher_monte_carlo, sin_approx_gap, sup_deviation,
};
use ecf_robust::{BoundInputs, NormPair, SampleSet64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Case counts and seed shared by all suites.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub sin_cases: usize,
    pub conjugate_cases: usize,
    pub deviation_trials: usize,
    pub deviation_n: usize,
    pub deviation_delta: f64,
    pub deviation_radius: f64,
    /// Sign vectors for the per-trial `C_n` estimate.
    pub deviation_cn_draws: usize,
    pub rademacher_cases: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            sin_cases: 100_000,
            conjugate_cases: 1000,
            deviation_trials: 500,
            deviation_n: 1000,
            deviation_delta: 0.1,
            deviation_radius: 1.0,
            deviation_cn_draws: 200,
            rademacher_cases: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub violations: usize,
    /// Suite-specific worst statistic (largest ratio or excess).
    pub worst: f64,
    /// Fraction of cases satisfying the statement.
    pub pass_rate: f64,
    pub required_rate: f64,
    pub runtime_ms: f64,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.pass_rate >= self.required_rate
    }

    fn new(name: &str, cases: usize, violations: usize, worst: f64, required_rate: f64, t0: Instant) -> Self {
        Self {
            name: name.to_owned(),
            cases,
            violations,
            worst,
            pass_rate: if cases == 0 { 1.0 } else { 1.0 - violations as f64 / cases as f64 },
            required_rate,
            runtime_ms: t0.elapsed().as_secs_f64() * 1e3,
        }
    }
}

fn rng(cfg: &VerifyConfig, tag: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(child_seed(cfg.seed, tag, 0))
}

/// Sine linearization gap on random `(α, β, p, q)`; `worst` is the largest `lhs − rhs`.
pub fn sin_gap_suite(cfg: &VerifyConfig) -> Result<SuiteResult> {
    let t0 = Instant::now();
    let mut rng = rng(cfg, "sin");
    let (mut bad, mut worst) = (0, f64::NEG_INFINITY);
    for k in 0..cfg.sin_cases {
        let alpha = rng.gen_range(-20.0..=20.0);
        let beta = rng.gen_range(-20.0..=20.0);
        // Alternate grid exponents (step 0.01) with continuous draws.
        let (p, q) = loop {
            let pq: (f64, f64) = if k % 2 == 0 {
                (rng.gen_range(0..=100) as f64 / 100.0, rng.gen_range(0..=100) as f64 / 100.0)
            } else {
                (rng.gen(), rng.gen())
            };
            if pq.0 + pq.1 > 0.0 {
                break pq;
            }
        };
        let (lhs, rhs) = sin_approx_gap(alpha, beta, p, q)?;
        worst = worst.max(lhs - rhs);
        if lhs > rhs + 1e-12 {
            bad += 1;
        }
    }
    Ok(SuiteResult::new("sin_gap", cfg.sin_cases, bad, worst, 1.0, t0))
}

/// Symmetric net: the coordinate axes plus random unit directions, all mirrored.
fn random_net(rng: &mut ChaCha8Rng, d: usize, extra: usize) -> Vec<Vec<f64>> {
    let mut half: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            e
        })
        .collect();
    while half.len() < d + extra {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 1e-3 {
            // Shrink some directions strictly inside the ball.
            let len = if rng.gen_bool(0.5) { 1.0 } else { rng.gen_range(0.3..1.0) };
            half.push(v.iter().map(|x| len * x / nrm).collect());
        }
    }
    let mut net = half.clone();
    net.extend(half.into_iter().map(|w| w.into_iter().map(|x| -x).collect()));
    net
}

/// Exact minimizer of the net-restricted conjugate by vertex enumeration.
///
/// `max_j |f_j − ⟨w_j, θ⟩|` is the epigraph of `2|net|` affine pieces in
/// `(θ, t)`; its minimum sits where `d + 1` of them are tight, so every such
/// subset is solved and the best candidate kept. Independent of the LP path.
pub fn conjugate_vertex_oracle(net: &[Vec<f64>], f: &[f64]) -> Option<(Vec<f64>, f64)> {
    let d = net.first()?.len();
    // Piece k: s·⟨w, θ⟩ − t = s·f.
    let pieces: Vec<(Vec<f64>, f64)> = net
        .iter()
        .zip(f)
        .flat_map(|(w, &fw)| {
            [1.0, -1.0].map(|s: f64| {
                let mut row: Vec<f64> = w.iter().map(|x| s * x).collect();
                row.push(-1.0);
                (row, s * fw)
            })
        })
        .collect();
    let k = d + 1;
    if pieces.len() < k {
        return None;
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if let Some(sol) = solve_square(idx.iter().map(|&i| &pieces[i]), k) {
            let theta = &sol[..d];
            let v = net_conjugate(net, f, theta);
            if best.as_ref().is_none_or(|b| v < b.1) {
                best = Some((theta.to_vec(), v));
            }
        }
        // Next k-subset in lexicographic order.
        let mut i = k;
        while i > 0 && idx[i - 1] == pieces.len() - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return best;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Gaussian elimination with partial pivoting; `None` when (near) singular.
fn solve_square<'a>(rows: impl Iterator<Item = &'a (Vec<f64>, f64)>, k: usize) -> Option<Vec<f64>> {
    let mut a: Vec<Vec<f64>> = rows
        .map(|(r, b)| {
            let mut row = r.clone();
            row.push(*b);
            row
        })
        .collect();
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col {
                let factor = row[col] / pivot_row[col];
                row.iter_mut().zip(&pivot_row).skip(col).for_each(|(x, p)| *x -= factor * p);
            }
        }
    }
    Some((0..k).map(|i| a[i][k] / a[i][i]).collect())
}

/// Conjugate-distance bound `‖θ_min − θ‖ ≤ 2 f*(θ)` on random nets in `d ≤ 3`.
///
/// Each case is checked with both the LP minimizer and the vertex-enumeration
/// oracle, whose optimal values must agree; `worst` is the largest ratio seen.
pub fn conjugate_suite(cfg: &VerifyConfig) -> Result<SuiteResult> {
    let t0 = Instant::now();
    let mut rng = rng(cfg, "conjugate");
    let (mut bad, mut worst) = (0, 0.0f64);
    for k in 0..cfg.conjugate_cases {
        let d = 1 + k % 3;
        let extra = rng.gen_range(0..=3 * d);
        let net = random_net(&mut rng, d, extra);
        let f: Vec<f64> = (0..net.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let theta: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let check = conjugate_bound_check(&net, &f, &theta, NormPair::L2)?;
        let (oracle_min, oracle_val) = conjugate_vertex_oracle(&net, &f).expect("net spans the space");
        let diff: Vec<f64> = oracle_min.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let oracle_ratio = net_norm(&net, &diff) / (2.0 * check.f_star_theta);
        let agree = (oracle_val - check.f_star_min).abs() <= 1e-9 * (1.0 + oracle_val);
        worst = worst.max(check.ratio).max(oracle_ratio);
        if check.ratio > 1.0 + 1e-9 || oracle_ratio > 1.0 + 1e-9 || !agree {
            bad += 1;
        }
    }
    Ok(SuiteResult::new("conjugate_bound", cfg.conjugate_cases, bad, worst, 1.0, t0))
}

/// Coverage of the uniform ECF deviation bound for `N(0, 1)` samples, plus
/// translation invariance of the measured deviation; `worst` is the largest
/// deviation/bound ratio.
pub fn deviation_suite(cfg: &VerifyConfig, required_rate: f64) -> Result<SuiteResult> {
    let t0 = Instant::now();
    let dist = DistributionSpec::new(Family::Gaussian);
    let (n, r, delta) = (cfg.deviation_n, cfg.deviation_radius, cfg.deviation_delta);
    let tol = 1e-4;
    let (mut bad, mut worst) = (0, 0.0f64);
    for t in 0..cfg.deviation_trials {
        let seed = child_seed(cfg.seed, "deviation", t as u64);
        let s: SampleSet64 = dist.sample(n, 1, seed)?;
        let cn = rademacher_monte_carlo(&s, &[0.0], NormPair::L2, cfg.deviation_cn_draws, child_seed(seed, "signs", 0))?
            .value;
        let bound = cf_deviation_bound(cn, 1.0, delta, n, r)?;
        let dev = sup_deviation(&s, 0.0, 1.0, r, tol)?;
        worst = worst.max(dev.value / bound);
        let mut ok = dev.value <= bound;
        if t % 10 == 0 {
            let shifted = s.translated(&[1e6])?;
            let moved = sup_deviation(&shifted, 1e6, 1.0, r, tol)?;
            ok &= (moved.value - dev.value).abs() <= 2.0 * tol;
        }
        if !ok {
            bad += 1;
        }
    }
    Ok(SuiteResult::new(
        "deviation_coverage",
        cfg.deviation_trials,
        bad,
        worst,
        required_rate,
        t0,
    ))
}

/// Exact enumeration versus Monte Carlo `C_n` for `n ≤ 12`; `worst` is the
/// largest gap in standard errors.
pub fn rademacher_suite(cfg: &VerifyConfig) -> Result<SuiteResult> {
    let t0 = Instant::now();
    let mut rng = rng(cfg, "rademacher");
    let (mut bad, mut worst) = (0, 0.0f64);
    for k in 0..cfg.rademacher_cases {
        let n = rng.gen_range(2..=12);
        let d = 1 + k % 3;
        let data: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let s = SampleSet64::from_flat(data, n, d)?;
        let mu = vec![0.0; d];
        let exact = rademacher_exact(&s, &mu, NormPair::L2)?;
        let mc = rademacher_monte_carlo(&s, &mu, NormPair::L2, 4000, rng.gen())?;
        let z = (mc.value - exact).abs() / mc.std_error.max(1e-300);
        worst = worst.max(z);
        if z > 3.0 {
            bad += 1;
        }
    }
    // A 3σ band fails about 0.3% of the time; tolerate one miss in twenty.
    Ok(SuiteResult::new("rademacher_exact_vs_mc", cfg.rademacher_cases, bad, worst, 0.95, t0))
}

/// Term isolation and limits of the closed-form bounds.
pub fn bounds_suite() -> Result<SuiteResult> {
    let t0 = Instant::now();
    let l = 1.0f64;
    let base = BoundInputs {
        cn: 1.0,
        sigma_op: 1.0,
        delta: (-1.0f64).exp(),
        n: 100,
        r: 0.1,
        mu_norm: 1.0,
        eta: 0.0,
    };
    let expected = 2.4 + (0.08f64).sqrt() + 16.0 * l / 30.0 + 0.01 / 3.0 + 0.1;
    let isolated = BoundInputs {
        cn: 0.0,
        sigma_op: 0.0,
        mu_norm: 0.0,
        ..base.clone()
    };
    let tiny_r = BoundInputs { r: 1e-12, ..base.clone() };
    let checks = [
        (master_bound(&base)? - expected).abs() <= 1e-12,
        (master_bound(&isolated)? - 16.0 * l / (3.0 * 100.0 * 0.1)).abs() <= 1e-12,
        master_bound(&tiny_r)? > 1e10,
    ];
    let bad = checks.iter().filter(|ok| !**ok).count();
    Ok(SuiteResult::new("bound_formulas", checks.len(), bad, 0.0, 1.0, t0))
}

/// Every suite, in a fixed order.
pub fn run_all(cfg: &VerifyConfig) -> Result<Vec<SuiteResult>> {
    Ok(vec![
        sin_gap_suite(cfg)?,
        conjugate_suite(cfg)?,
        deviation_suite(cfg, 0.87)?,
        rademacher_suite(cfg)?,
        bounds_suite()?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifyConfig {
        VerifyConfig {
            seed: 3,
            sin_cases: 2000,
            conjugate_cases: 30,
            deviation_trials: 5,
            deviation_n: 200,
            deviation_cn_draws: 20,
            rademacher_cases: 5,
            ..VerifyConfig::default()
        }
    }

    #[test]
    fn small_suites_pass() {
        for s in run_all(&small()).unwrap() {
            assert!(s.passed(), "{s:?}");
        }
    }

    #[test]
    fn vertex_oracle_finds_linear_data() {
        let net = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]];
        let theta0 = [0.3, -1.7];
        let f: Vec<f64> = net.iter().map(|w| w[0] * theta0[0] + w[1] * theta0[1]).collect();
        let (arg, val) = conjugate_vertex_oracle(&net, &f).unwrap();
        assert!(val < 1e-10);
        assert!((arg[0] - 0.3).abs() < 1e-10 && (arg[1] + 1.7).abs() < 1e-10);
    }
}
