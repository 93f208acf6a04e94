//! Monte Carlo check of the exact intensity identity: the expected number of
//! within-cluster m-subsets whose best scaled lifetime comes within u_{n,α}
//! of the maximum equals α on the homogeneous unit torus.

use crate::error::Error;
use crate::filtration::cech_bruteforce;
use crate::geometry::PointCloud;
use crate::persistence::{features, reduce};
use crate::pointprocess::{clusters, sample_homogeneous, Window};
use crate::regime::{
    estimate_g, par_map_samples, threshold_u, ExtremalPoint, FiltrationKind, LifetimeKind,
    RegimeConfig, CLUSTER_CAP,
};
use crate::rng;
use crate::Result;
use itertools::Itertools;
use serde::{Deserialize, Serialize};

/// Estimate and verdict: pass means |mean − α| ≤ 3·SE.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntensityCheck {
    pub alpha: f64,
    /// g-level inverted to obtain u.
    pub target_g: f64,
    pub u: f64,
    pub mean: f64,
    pub se: f64,
    pub reps: u64,
    pub skipped_oversize: u64,
    pub pass: bool,
}

/// All m points mutually reachable through links shorter than `r`.
fn subset_connected(cloud: &PointCloud, idxs: &[usize], r: f64) -> bool {
    let m = idxs.len();
    let mut seen = vec![false; m];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = stack.pop() {
        for j in 0..m {
            if !seen[j] && cloud.dist(idxs[i], idxs[j]) < r {
                seen[j] = true;
                count += 1;
                stack.push(j);
            }
        }
    }
    count == m
}

/// Marked points of one cloud's subset statistic: every connected m-subset
/// is scored by its own k-point filtration, one point per negative k-simplex
/// whose scaled lifetime comes within `u` of ℓ_max. This is the unbiased
/// object behind the intensity identity; cluster-level extraction differs at
/// finite n whenever clusters exceed m points.
fn subset_extremes(
    cloud: &PointCloud,
    cfg: &RegimeConfig,
    lm: f64,
    u: f64,
    oversize: &mut u64,
) -> Result<Vec<ExtremalPoint>> {
    let part = clusters(cloud, 2.0 * cfg.r_n)?;
    let denom = if u > 0.0 { u } else { 1.0 };
    let mut out = Vec::new();
    for members in &part.members {
        if members.len() < cfg.m {
            continue;
        }
        if members.len() > CLUSTER_CAP {
            *oversize += 1;
            continue;
        }
        for subset in members.iter().copied().combinations(cfg.m) {
            if !subset_connected(cloud, &subset, 2.0 * cfg.r_n) {
                continue;
            }
            let mut sub = PointCloud::new(cloud.dim, cloud.metric.clone());
            for &i in &subset {
                sub.push(cloud.point(i));
            }
            let fc = cech_bruteforce(&sub, cfg.k - 1, cfg.r_n)?;
            let pairing = reduce(&fc)?;
            for f in features(&pairing, &fc, cfg.k - 2)? {
                let lhat = match cfg.lifetime {
                    LifetimeKind::Additive => f.life_add / cfg.r_n,
                    LifetimeKind::Multiplicative => f.life_mult,
                };
                if lhat >= lm - u {
                    out.push(ExtremalPoint {
                        center: f.center.clone(),
                        u: (lm - lhat).max(0.0) / denom,
                        v: (1.0 - f.death / cfg.r_n).max(0.0) / denom,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Per-cloud marked extremal points of the m-subset statistic on homogeneous
/// torus clouds, at a caller-supplied threshold u. Returns one point list per
/// repetition plus the total count of skipped oversize clusters.
pub fn extremal_point_samples(
    cfg: &RegimeConfig,
    reps: u64,
    u: f64,
    seed: u64,
) -> Result<(Vec<Vec<ExtremalPoint>>, u64)> {
    cfg.validate()?;
    if cfg.filtration != FiltrationKind::Cech {
        return Err(Error::InvalidInput("subset statistic supports Čech filtrations only".into()));
    }
    if u < 0.0 {
        return Err(Error::InvalidInput("threshold u must be nonnegative".into()));
    }
    let (lm, _) = cfg.lmax()?;
    let window = Window::Torus { dim: cfg.d };
    let rows = par_map_samples(reps, |rep| {
        let cloud = sample_homogeneous(cfg.n, &window, rng::sub_seed(seed, rep))?;
        let mut oversize = 0u64;
        let pts = subset_extremes(&cloud, cfg, lm, u, &mut oversize)?;
        Ok((pts, oversize))
    })?;
    let mut skipped = 0u64;
    let mut samples = Vec::with_capacity(rows.len());
    for (pts, ov) in rows {
        skipped += ov;
        samples.push(pts);
    }
    Ok((samples, skipped))
}

/// Verify E[# extremal m-subsets] = α over homogeneous torus clouds:
/// estimate g, invert at the α-implied level, then average the subset
/// statistic over `reps` clouds.
pub fn verify_intensity_formula(
    cfg: &RegimeConfig,
    reps: u64,
    mc_samples: u64,
    seed: u64,
) -> Result<IntensityCheck> {
    if reps < 2 {
        return Err(Error::InvalidInput("need reps ≥ 2".into()));
    }
    let curve = estimate_g(cfg, mc_samples, rng::sub_seed(seed, 0))?;
    let uth = threshold_u(&curve, cfg)?;
    let (samples, skipped_oversize) =
        extremal_point_samples(cfg, reps, uth.u, rng::sub_seed(seed, 1))?;
    let mut sum = 0u64;
    let mut sumsq = 0u128;
    for pts in &samples {
        let c = pts.len() as u64;
        sum += c;
        sumsq += (c as u128) * (c as u128);
    }
    let rf = reps as f64;
    let mean = sum as f64 / rf;
    let var = (sumsq as f64 / rf - mean * mean).max(0.0);
    let se = (var / rf).sqrt();
    Ok(IntensityCheck {
        alpha: cfg.alpha,
        target_g: uth.target,
        u: uth.u,
        mean,
        se,
        reps,
        skipped_oversize,
        pass: (mean - cfg.alpha).abs() <= 3.0 * se,
    })
}
