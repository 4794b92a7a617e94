//! Error-versus-n summaries and log-log slope fits.

use serde::{Deserialize, Serialize};

use crate::config::EstimatorId;
use crate::error::{BenchError, Result};
use crate::runner::TrialRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub estimator_id: EstimatorId,
    pub n: usize,
    pub median_error: f64,
    pub q95_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub estimator_id: EstimatorId,
    pub slope: f64,
    pub intercept: f64,
}

/// Linear interpolation between order statistics (type 7).
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = q * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

/// Median and 95% quantile of the error per `(estimator, n)`.
pub fn summarize(records: &[TrialRecord]) -> Vec<RateRow> {
    let mut keys: Vec<(&'static str, EstimatorId, usize)> =
        records.iter().map(|r| (r.estimator_id.as_str(), r.estimator_id, r.n)).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(_, id, n)| {
            let errs: Vec<f64> = records
                .iter()
                .filter(|r| r.estimator_id == id && r.n == n)
                .map(|r| r.error)
                .collect();
            RateRow {
                estimator_id: id,
                n,
                median_error: median(&errs),
                q95_error: quantile(&errs, 0.95),
            }
        })
        .collect()
}

/// Least-squares fit of `log y = a + b log n`; returns `(b, a)`.
pub fn loglog_slope(points: &[(usize, f64)]) -> Result<(f64, f64)> {
    let distinct = {
        let mut ns: Vec<usize> = points.iter().map(|p| p.0).collect();
        ns.sort_unstable();
        ns.dedup();
        ns.len()
    };
    if distinct < 3 {
        return Err(BenchError::config("n_grid", "slope fit needs at least 3 distinct sample sizes"));
    }
    if points.iter().any(|&(n, y)| n == 0 || y <= 0.0 || !y.is_finite()) {
        return Err(BenchError::config("errors", "slope fit needs positive finite median errors"));
    }
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    Ok((b, my - b * mx))
}

/// One slope per estimator, fitted to the median errors of `rows`.
pub fn fit_rates(rows: &[RateRow]) -> Result<Vec<RateFit>> {
    let mut ids: Vec<EstimatorId> = rows.iter().map(|r| r.estimator_id).collect();
    ids.sort_by_key(|e| e.as_str());
    ids.dedup();
    ids.into_iter()
        .map(|id| {
            let pts: Vec<(usize, f64)> =
                rows.iter().filter(|r| r.estimator_id == id).map(|r| (r.n, r.median_error)).collect();
            let (slope, intercept) = loglog_slope(&pts)
                .map_err(|e| BenchError::config(format!("rates.{id}"), e.to_string()))?;
            Ok(RateFit {
                estimator_id: id,
                slope,
                intercept,
            })
        })
        .collect()
}
