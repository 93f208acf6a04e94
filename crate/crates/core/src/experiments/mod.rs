//! Simulation experiments: annealed search for extremal configurations,
//! Weibull slope regressions for the largest lifetime, deathtime correlation,
//! and Poisson-limit diagnostics for the extremal point process.
//!
//! Every experiment is a pure function of (config, seed): reruns reproduce
//! metrics bit-for-bit regardless of worker count.

mod anneal;
mod deathcorr;
mod intensity;
mod poissonness;
mod weibull;

pub use anneal::{anneal_max_lifetime, AnnealResult, AnnealSchedule};
pub use deathcorr::{deathcorr_experiment, DeathCorr};
pub use intensity::{extremal_point_samples, verify_intensity_formula, IntensityCheck};
pub use poissonness::{poissonness_test, PoissonnessReport};
pub use weibull::{
    largest_lifetime_weibull_check, unbounded_exponential_check, weibull_slope_experiment,
    UnboundedCheck, WeibullCheck, WeibullFit,
};

use crate::Result;
use serde::{Deserialize, Serialize};

/// Self-describing experiment artifact: config echo, seed, metrics.
/// `wall_secs` is informational and excluded from reproducibility claims.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub metrics: serde_json::Value,
    pub wall_secs: f64,
}

impl ExperimentReport {
    pub fn new<C: Serialize, M: Serialize>(
        experiment: &str,
        config: &C,
        seed: u64,
        metrics: &M,
        wall_secs: f64,
    ) -> Result<Self> {
        Ok(ExperimentReport {
            experiment: experiment.to_string(),
            config: serde_json::to_value(config)?,
            seed,
            metrics: serde_json::to_value(metrics)?,
            wall_secs,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Fit ln(−ln S) against ln t on the nine interior deciles of `devs`.
/// Returns (slope, intercept, r2, points); degenerate grids are an error.
pub(crate) fn decile_survival_fit(
    devs: &[f64],
) -> Result<(f64, f64, f64, Vec<(f64, f64)>)> {
    use crate::error::Error;
    let n = devs.len();
    if n < 10 {
        return Err(Error::Experiment("survival fit needs at least 10 observations".into()));
    }
    let mut sorted = devs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nf = n as f64;
    let mut points: Vec<(f64, f64)> = Vec::new();
    for j in 1..=9usize {
        let t = sorted[j * (n - 1) / 10];
        if !(t > 0.0) {
            continue;
        }
        // S(t) = P(dev > t), strictly between 0 and 1 for a usable point.
        let above = n - sorted.partition_point(|&d| d <= t);
        let s = above as f64 / nf;
        if s <= 0.0 || s >= 1.0 {
            continue;
        }
        let p = (t.ln(), (-s.ln()).ln());
        if points.last().map(|q| q.0 == p.0) != Some(true) {
            points.push(p);
        }
    }
    if points.len() < 2 {
        return Err(Error::Experiment(
            "survival grid degenerate: fewer than 2 distinct usable deciles".into(),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (slope, intercept, r2) = crate::stats::ols(&xs, &ys)?;
    Ok((slope, intercept, r2, points))
}

/// CSV for Weibull-plot points: `logt,loglogS`.
pub fn weibull_points_to_csv(points: &[(f64, f64)]) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("logt,loglogS\n");
    for (x, y) in points {
        let _ = writeln!(out, "{x:.16e},{y:.16e}");
    }
    out
}

/// CSV for the deathtime-correlation series: `n,avg_corr`.
pub fn deathcorr_to_csv(rows: &[DeathCorr]) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("n,avg_corr\n");
    for r in rows {
        let _ = writeln!(out, "{:.16e},{:.16e}", r.n, r.avg_pearson);
    }
    out
}
