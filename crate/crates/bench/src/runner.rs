//! Seeded Monte Carlo trials.

use std::time::Instant;

use ecf_robust::baselines::{
    catoni, catoni_alpha, coordinatewise, empirical_mean, geometric_median_of_means, median_of_means,
    trimmed_mean, BlockPartition, CatoniConfig,
};
use ecf_robust::refinement::{oblivious_estimate, refine, ObliviousScenario, RefinementSchedule};
use ecf_robust::simulation::{child_seed, contaminate, ContaminationContext, GroundTruth};
use ecf_robust::theory::{accuracy_floor, accuracy_floor_contaminated, rademacher_monte_carlo};
use ecf_robust::{choose_radius, choose_radius_contaminated, estimate_mean, NormPair, SampleSet64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{EstimatorId, ExperimentConfig, RadiusMode};
use crate::error::{BenchError, Result};

/// One estimator on one trial: a row of the output table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub seed: u64,
    pub n: usize,
    pub d: usize,
    pub eta: f64,
    pub estimator_id: EstimatorId,
    /// `‖μ̂ − μ*‖` in the configured primal norm.
    pub error: f64,
    pub runtime_ms: f64,
    /// ECF objective at the estimate; empty for estimators without one.
    pub objective_value: Option<f64>,
    pub converged: bool,
}

/// Accuracy level and radii used at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tuning {
    pub n: usize,
    pub cn: f64,
    /// Accuracy the tuned radius targets (contaminated floor when `η > 0`).
    pub eps: f64,
    pub radius: f64,
    /// Final accuracy of the refinement schedule (mean term dropped).
    pub refine_floor: f64,
    /// Starting accuracy of the refinement schedule.
    pub refine_eps0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub records: Vec<TrialRecord>,
    /// Oracle tunings per sample size (empty in plug-in mode).
    pub tunings: Vec<Tuning>,
}

/// Options that affect execution but not results.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Report `runtime_ms = 0` so output is byte-reproducible.
    pub deterministic: bool,
    /// Worker threads; `None` lets rayon decide.
    pub jobs: Option<usize>,
}

struct Inputs {
    cn: f64,
    sigma_op: f64,
    trace: f64,
    mu_norm: f64,
}

fn tune(cfg: &ExperimentConfig, n: usize, x: &Inputs) -> Result<Tuning> {
    let eta = cfg.eta();
    let (eps, radius) = if eta > 0.0 {
        let eps = accuracy_floor_contaminated(x.cn, x.sigma_op, cfg.delta, n, x.mu_norm, eta)?;
        (eps, choose_radius_contaminated(eps, cfg.delta, n, eta)?)
    } else {
        let eps = accuracy_floor(x.cn, x.sigma_op, cfg.delta, n, x.mu_norm)?;
        (eps, choose_radius(eps, cfg.delta, n)?)
    };
    let refine_floor = accuracy_floor(x.cn, x.sigma_op, cfg.delta, n, 0.0)?;
    // Deviation bound of the geometric median-of-means start.
    let crude = 11.0 * (x.trace * (1.4 / cfg.delta).ln() / n as f64).sqrt();
    Ok(Tuning {
        n,
        cn: x.cn,
        eps,
        radius,
        refine_floor,
        refine_eps0: crude.max(refine_floor),
    })
}

/// Monte Carlo `C_n = E‖Σ ε_i (X_i − μ*)‖/√n` over fresh sample sets.
pub fn oracle_cn(cfg: &ExperimentConfig, n: usize, truth: &GroundTruth) -> Result<f64> {
    let norm = NormPair::new(cfg.norm);
    let mut acc = 0.0;
    for k in 0..cfg.cn_draws {
        let seed = child_seed(cfg.base_seed, "cn", ((n as u64) << 32) | k as u64);
        let s: SampleSet64 = cfg.distribution.sample(n, cfg.d, seed)?;
        acc += rademacher_monte_carlo(&s, &truth.mean, norm, 1, child_seed(seed, "signs", 0))?.value;
    }
    Ok(acc / cfg.cn_draws as f64)
}

fn plugin_inputs(s: &SampleSet64, norm: NormPair, seed: u64) -> Result<Inputs> {
    let center = coordinatewise(s, |c| {
        let mut c = c.to_vec();
        c.sort_by(f64::total_cmp);
        let m = c.len();
        Ok(if m % 2 == 1 { c[m / 2] } else { 0.5 * (c[m / 2 - 1] + c[m / 2]) })
    })?;
    let (n, d) = (s.n(), s.d());
    let mean = s.mean();
    let mut cov = vec![vec![0.0; d]; d];
    for x in s.rows() {
        for i in 0..d {
            for j in 0..d {
                cov[i][j] += (x[i] - mean[i]) * (x[j] - mean[j]);
            }
        }
    }
    let denom = (n.max(2) - 1) as f64;
    cov.iter_mut().flatten().for_each(|v| *v /= denom);
    let trace = (0..d).map(|i| cov[i][i]).sum();
    let sigma_op = top_eigenvalue(&cov);
    let cn = rademacher_monte_carlo(s, &center, norm, 50, seed)?.value;
    Ok(Inputs {
        cn,
        sigma_op,
        trace,
        mu_norm: norm.primal_norm(&center),
    })
}

fn top_eigenvalue(g: &[Vec<f64>]) -> f64 {
    let d = g.len();
    let mut v: Vec<f64> = (0..d).map(|i| 1.0 + 0.1 * i as f64).collect();
    let mut lambda = 0.0;
    for _ in 0..500 {
        let w: Vec<f64> = g.iter().map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
        let nrm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm == 0.0 {
            return 0.0;
        }
        lambda = nrm / v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = w.into_iter().map(|x| x / nrm).collect();
    }
    lambda
}

struct Estimate {
    mu: Vec<f64>,
    objective: Option<f64>,
    converged: bool,
}

fn run_estimator(
    id: EstimatorId,
    cfg: &ExperimentConfig,
    s: &SampleSet64,
    tuning: &Tuning,
    seed: u64,
) -> Result<Estimate> {
    let norm = NormPair::new(cfg.norm);
    let (inner, outer) = (&cfg.inner, &cfg.outer);
    let n = s.n();
    let plain = |mu: Vec<f64>| Estimate {
        mu,
        objective: None,
        converged: true,
    };
    let blocks = || BlockPartition::seeded(n, cfg.blocks_for(n), child_seed(seed, "blocks", 0));
    Ok(match id {
        EstimatorId::Ecf => {
            let out = estimate_mean(s, tuning.radius, norm, inner, outer)?;
            Estimate {
                mu: out.mu_hat,
                objective: Some(out.objective_value),
                converged: out.converged,
            }
        }
        EstimatorId::EcfRefined => {
            let start = geometric_median_of_means(s, &blocks()?, 1e-10, 1000)?;
            let max_k = RefinementSchedule::<f64>::steps_to_floor(tuning.refine_eps0, tuning.refine_floor).max(1);
            let schedule = RefinementSchedule {
                eps0: tuning.refine_eps0,
                eps_floor: tuning.refine_floor,
                delta: cfg.delta,
                n,
                max_k,
            };
            let traj = refine(s, &start.point, &schedule, norm, inner, outer)?;
            plain(traj.into_iter().last().expect("trajectory starts with mu0"))
        }
        EstimatorId::EcfOblivious => {
            let out = oblivious_estimate(s, cfg.delta, norm, inner, outer, None)?;
            let objective = match out.scenario {
                ObliviousScenario::ZeroInAllSets { .. } => None,
                ObliviousScenario::Bracketed { .. } => out
                    .probes
                    .iter()
                    .find(|p| p.t == out.eps0)
                    .map(|p| p.min_value * p.t / 2.0),
            };
            Estimate {
                mu: out.mu_hat,
                objective,
                converged: true,
            }
        }
        EstimatorId::Mean => plain(empirical_mean(s)),
        EstimatorId::Catoni => plain(coordinatewise(s, |c| {
            catoni(c, &CatoniConfig::new(catoni_alpha(c, cfg.delta)?))
        })?),
        EstimatorId::Mom => {
            let part = blocks()?;
            plain(coordinatewise(s, |c| median_of_means(c, &part))?)
        }
        EstimatorId::Gmom => {
            let g = geometric_median_of_means(s, &blocks()?, 1e-10, 1000)?;
            Estimate {
                mu: g.point,
                objective: None,
                converged: g.converged,
            }
        }
        EstimatorId::Trimmed => plain(coordinatewise(s, |c| trimmed_mean(c, cfg.eta(), cfg.delta))?),
    })
}

/// Seed of trial `trial` at sample size `n`.
pub fn trial_seed(base: u64, n: usize, trial: usize) -> u64 {
    child_seed(base, "trial", ((n as u64) << 32) ^ trial as u64)
}

fn run_trial(
    cfg: &ExperimentConfig,
    truth: &GroundTruth,
    oracle: Option<&Tuning>,
    n: usize,
    trial: usize,
    opts: RunOptions,
) -> Result<Vec<TrialRecord>> {
    let seed = trial_seed(cfg.base_seed, n, trial);
    let norm = NormPair::new(cfg.norm);
    let clean: SampleSet64 = cfg.distribution.sample(n, cfg.d, child_seed(seed, "samples", 0))?;
    let samples = match &cfg.adversary {
        Some(adv) => {
            let ctx = ContaminationContext {
                center: truth.mean.clone(),
            };
            contaminate(&clean, adv, &ctx, child_seed(seed, "adversary", 0))?.samples
        }
        None => clean,
    };
    let tuning = match oracle {
        Some(t) => t.clone(),
        None => tune(cfg, n, &plugin_inputs(&samples, norm, child_seed(seed, "plugin", 0))?)?,
    };
    let mut ids = cfg.estimators.clone();
    ids.sort_by_key(|e| e.as_str());
    ids.dedup();
    ids.into_iter()
        .map(|id| {
            let t0 = Instant::now();
            let est = run_estimator(id, cfg, &samples, &tuning, seed)?;
            let runtime_ms = if opts.deterministic {
                0.0
            } else {
                t0.elapsed().as_secs_f64() * 1e3
            };
            let diff: Vec<f64> = est.mu.iter().zip(&truth.mean).map(|(a, b)| a - b).collect();
            Ok(TrialRecord {
                trial_index: trial,
                seed,
                n,
                d: cfg.d,
                eta: cfg.eta(),
                estimator_id: id,
                error: norm.primal_norm(&diff),
                runtime_ms,
                objective_value: est.objective,
                converged: est.converged,
            })
        })
        .collect()
}

/// Runs every `(n, trial)` pair and returns records ordered by
/// `(n, trial_index, estimator_id)` regardless of scheduling.
pub fn run_experiment(cfg: &ExperimentConfig, opts: RunOptions) -> Result<ExperimentReport> {
    cfg.validate()?;
    let truth = cfg.distribution.ground_truth(cfg.d)?;
    let norm = NormPair::new(cfg.norm);
    let tunings = match cfg.radius_mode {
        RadiusMode::Oracle => cfg
            .n_grid
            .iter()
            .map(|&n| {
                let inputs = Inputs {
                    cn: oracle_cn(cfg, n, &truth)?,
                    sigma_op: truth.cov_opnorm,
                    trace: truth.cov_trace,
                    mu_norm: norm.primal_norm(&truth.mean),
                };
                tune(cfg, n, &inputs)
            })
            .collect::<Result<Vec<_>>>()?,
        RadiusMode::Plugin => Vec::new(),
    };
    let tasks: Vec<(usize, usize)> = (0..cfg.n_grid.len())
        .flat_map(|i| (0..cfg.trials).map(move |t| (i, t)))
        .collect();
    let work = || {
        tasks
            .par_iter()
            .map(|&(i, t)| run_trial(cfg, &truth, tunings.get(i), cfg.n_grid[i], t, opts))
            .collect::<Result<Vec<_>>>()
    };
    let nested = match opts.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| BenchError::config("jobs", e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    let mut records: Vec<TrialRecord> = nested.into_iter().flatten().collect();
    records.sort_by(|a, b| {
        (a.n, a.trial_index, a.estimator_id.as_str()).cmp(&(b.n, b.trial_index, b.estimator_id.as_str()))
    });
    Ok(ExperimentReport { records, tunings })
}

/// Per `(n, estimator)`: share of trials with `error ≤ ε` (oracle mode).
pub fn coverage(report: &ExperimentReport) -> Vec<(usize, EstimatorId, f64)> {
    let mut out = Vec::new();
    for t in &report.tunings {
        let mut ids: Vec<EstimatorId> = report.records.iter().filter(|r| r.n == t.n).map(|r| r.estimator_id).collect();
        ids.sort_by_key(|e| e.as_str());
        ids.dedup();
        for id in ids {
            let (hit, total) = report
                .records
                .iter()
                .filter(|r| r.n == t.n && r.estimator_id == id)
                .fold((0usize, 0usize), |(h, c), r| (h + usize::from(r.error <= t.eps), c + 1));
            out.push((t.n, id, hit as f64 / total as f64));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(json).unwrap()
    }

    #[test]
    fn degenerate_mean_has_zero_error() {
        let c = cfg(r#"{
            "distribution": {"family": "gaussian", "shift": [2.5], "scale": {"isotropic": 0.0}},
            "n_grid": [10], "delta": 0.1, "trials": 1, "estimators": ["mean"], "cn_draws": 2
        }"#);
        let rep = run_experiment(&c, RunOptions::default()).unwrap();
        assert_eq!(rep.records.len(), 1);
        assert_eq!(rep.records[0].error, 0.0);
        assert!(rep.records[0].objective_value.is_none());
    }

    #[test]
    fn records_are_ordered_and_reproducible() {
        let c = cfg(r#"{
            "distribution": {"family": "student_t", "df": 4.0},
            "n_grid": [40, 80], "delta": 0.1, "trials": 3, "base_seed": 9,
            "estimators": ["trimmed", "ecf", "mean", "mom", "gmom", "catoni"], "cn_draws": 5
        }"#);
        let opts = RunOptions {
            deterministic: true,
            jobs: Some(2),
        };
        let a = run_experiment(&c, opts).unwrap();
        let b = run_experiment(&c, RunOptions { jobs: Some(1), ..opts }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.records.len(), 2 * 3 * 6);
        let keys: Vec<_> = a.records.iter().map(|r| (r.n, r.trial_index, r.estimator_id.as_str())).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(a.records.iter().all(|r| r.error >= 0.0 && r.runtime_ms == 0.0));
    }

    #[test]
    fn plugin_mode_runs_all_ecf_variants() {
        let c = cfg(r#"{
            "distribution": {"family": "gaussian", "shift": [3.0]},
            "n_grid": [120], "delta": 0.1, "trials": 1, "radius_mode": "plugin",
            "estimators": ["ecf", "ecf_refined", "ecf_oblivious"]
        }"#);
        let rep = run_experiment(&c, RunOptions::default()).unwrap();
        assert!(rep.tunings.is_empty());
        assert_eq!(rep.records.len(), 3);
        for r in &rep.records {
            assert!(r.error < 1.5, "{r:?}");
        }
    }
}
