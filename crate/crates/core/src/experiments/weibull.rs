//! Weibull-law diagnostics for the largest lifetime: slope regressions on
//! survival plots, the scaled-deviation limit check, and the unbounded-regime
//! exponential check.

use super::decile_survival_fit;
use crate::error::Error;
use crate::Result;
use crate::filtration::{alpha_filtration, alpha_filtration_capped};
use crate::geometry::torus_tile;
use crate::persistence::reduce;
use crate::geometry::PointCloud;
use crate::pointprocess::{clusters, sample_homogeneous, Window};
use crate::regime::{
    estimate_g, lmax, par_map_samples, regular_polygon_lifetime, threshold_u, FiltrationKind,
    LifetimeKind, RegimeConfig, ThresholdCurve,
};
use crate::rng;
use crate::stats::{ks_test, ols_se};
use serde::{Deserialize, Serialize};

/// One row of the slope experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeibullFit {
    pub n: f64,
    pub r_n: f64,
    pub q_hat: f64,
    pub intercept: f64,
    pub r2: f64,
    /// (ln t, ln(−ln S(t))) regression points.
    pub points: Vec<(f64, f64)>,
    /// Clouds with no deathtime-bounded 1-cycle at all (deviation = ℓ_max).
    pub zero_feature: usize,
}

const SUPPORTED_SLOPES: &[(usize, f64)] = &[(3, 0.74), (4, 0.66), (5, 0.62), (6, 0.60)];

/// A scaled lifetime beating the m-point table only falsifies it when the
/// cycle's own cluster — the 2r_n-connected component carrying every simplex
/// of a deathtime-bounded cycle — has j points and the lifetime also beats
/// the j-point bound. Larger clusters legitimately exceed smaller table
/// entries at finite n; those samples stay in as negative deviations.
fn adjudicate_exceedance(
    cloud: &PointCloud,
    r_n: f64,
    vert: usize,
    lhat: f64,
) -> Result<()> {
    let part = clusters(cloud, 2.0 * r_n)?;
    let j = part.members[part.cluster_of[vert]].len().max(3);
    let bound = regular_polygon_lifetime(j)?;
    if lhat > bound + 1e-9 {
        let msg =
            format!("lifetime {lhat:.12} exceeds the {j}-point maximum {bound:.12}");
        return Err(if j == 3 {
            Error::Experiment(msg)
        } else {
            Error::ConjectureFalsified(msg)
        });
    }
    Ok(())
}

/// Largest scaled additive lifetime among 1-cycles dying by `r_n`, computed
/// through the planar Alpha filtration; 0 when no such cycle exists.
/// Lifetimes above `lm` are adjudicated against their own cluster size.
fn largest_lifetime_box(n: f64, r_n: f64, lm: f64, seed: u64) -> Result<(f64, bool)> {
    let cloud = sample_homogeneous(n, &Window::unit_box(2), seed)?;
    if cloud.len() < 3 {
        return Ok((0.0, false));
    }
    let fc = alpha_filtration_capped(&cloud, Some(r_n))?;
    let pairing = reduce(&fc)?;
    let mut best = f64::NEG_INFINITY;
    for (bi, di) in pairing.pairs_in_dim(&fc, 1) {
        let life = fc.simplices[di].value - fc.simplices[bi].value;
        let lhat = life / r_n;
        if lhat > lm + 1e-9 {
            adjudicate_exceedance(&cloud, r_n, fc.simplices[di].vertices[0] as usize, lhat)?;
        }
        best = best.max(lhat);
    }
    if best.is_finite() {
        Ok((best, true))
    } else {
        Ok((0.0, false))
    }
}

/// Per n: reps homogeneous clouds on [0,1]², deviations ℓ_max − ℓ⁽¹⁾ of the
/// largest scaled lifetime, and the ln(−ln S) decile regression whose slope
/// estimates the Weibull shape. A lifetime beating the tabulated maximum for
/// its own cluster size falsifies the table and aborts; beating the m-point
/// value from a larger cluster is expected at finite n and merely yields a
/// negative deviation.
pub fn weibull_slope_experiment(
    m: usize,
    beta: f64,
    n_list: &[f64],
    reps: u64,
    seed: u64,
) -> Result<Vec<WeibullFit>> {
    if !SUPPORTED_SLOPES.iter().any(|&(mm, bb)| mm == m && (beta - bb).abs() < 1e-12) {
        return Err(Error::InvalidInput(format!(
            "unsupported (m, beta) = ({m}, {beta}); supported: {SUPPORTED_SLOPES:?}"
        )));
    }
    if n_list.is_empty() || n_list.iter().any(|&n| !(n > 0.0)) || reps < 10 {
        return Err(Error::InvalidInput("need positive n values and reps ≥ 10".into()));
    }
    let (lm, _) = lmax(3, m, FiltrationKind::Cech, LifetimeKind::Additive)?;
    let mut fits = Vec::with_capacity(n_list.len());
    for (ni, &n) in n_list.iter().enumerate() {
        let r_n = n.powf(-beta);
        let s_n = rng::sub_seed(seed, ni as u64);
        let rows = par_map_samples(reps, |rep| {
            let (l1, found) = largest_lifetime_box(n, r_n, lm, rng::sub_seed(s_n, rep))?;
            Ok((lm - l1, found))
        })?;
        let devs: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let zero_feature = rows.iter().filter(|r| !r.1).count();
        let (q_hat, intercept, r2, points) = decile_survival_fit(&devs)?;
        fits.push(WeibullFit { n, r_n, q_hat, intercept, r2, points, zero_feature });
    }
    Ok(fits)
}

/// Scaled-deviation fit report for the bounded regime.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeibullCheck {
    pub q_hat: f64,
    pub q_ci: (f64, f64),
    pub scale_hat: f64,
    pub scale_ci: (f64, f64),
    pub r2: f64,
    pub expected_shape: f64,
    /// (γα)^{−1/q} with γ = 1 for the homogeneous torus.
    pub expected_scale: f64,
    pub u: f64,
    pub reps: u64,
    pub points: Vec<(f64, f64)>,
}

/// Largest scaled additive lifetime on the unit torus: Alpha filtration of
/// the 3×3 tiling, 1-cycles deduplicated by death-triangle centroid.
/// Lifetimes above `lm` are adjudicated against their own cluster size.
fn largest_lifetime_torus(n: f64, r_n: f64, lm: f64, seed: u64) -> Result<f64> {
    let cloud = sample_homogeneous(n, &Window::Torus { dim: 2 }, seed)?;
    if cloud.len() < 3 {
        return Ok(0.0);
    }
    let (tiled, _) = torus_tile(&cloud)?;
    let fc = alpha_filtration_capped(&tiled, Some(r_n))?;
    let pairing = reduce(&fc)?;
    let mut best: f64 = 0.0;
    for (bi, di) in pairing.pairs_in_dim(&fc, 1) {
        let verts = &fc.simplices[di].vertices;
        let (mut cx, mut cy) = (0.0, 0.0);
        for &v in verts {
            let p = fc.cloud.point(v as usize);
            cx += p[0];
            cy += p[1];
        }
        cx /= verts.len() as f64;
        cy /= verts.len() as f64;
        if !(0.0..1.0).contains(&cx) || !(0.0..1.0).contains(&cy) {
            continue;
        }
        let life = fc.simplices[di].value - fc.simplices[bi].value;
        let lhat = life / r_n;
        if lhat > lm + 1e-9 {
            adjudicate_exceedance(&tiled, r_n, verts[0] as usize, lhat)?;
        }
        best = best.max(lhat);
    }
    Ok(best)
}

/// Check the limiting law of the scaled deviation (ℓ_max − ℓ⁽¹⁾)/u_{n,α}:
/// Weibull with shape q and scale (γα)^{−1/q}. Homogeneous torus clouds,
/// m = k = 3, Čech additive only. CIs are ±2 SE from the decile regression.
pub fn largest_lifetime_weibull_check(
    cfg: &RegimeConfig,
    reps: u64,
    mc_samples: u64,
    q_expected: f64,
    seed: u64,
) -> Result<WeibullCheck> {
    cfg.validate()?;
    if cfg.d != 2
        || cfg.k != 3
        || cfg.m != 3
        || cfg.filtration != FiltrationKind::Cech
        || cfg.lifetime != LifetimeKind::Additive
    {
        return Err(Error::InvalidInput(
            "scaled-deviation check supports planar m = k = 3 Čech additive only".into(),
        ));
    }
    if !(q_expected > 0.0) || reps < 10 {
        return Err(Error::InvalidInput("need q_expected > 0 and reps ≥ 10".into()));
    }
    let curve = estimate_g(cfg, mc_samples, rng::sub_seed(seed, 0))?;
    let uth = threshold_u(&curve, cfg)?;
    if !(uth.u > 0.0) {
        return Err(Error::Resolution("threshold u is zero; need alpha > 0".into()));
    }
    let (lm, _) = cfg.lmax()?;
    let eval_seed = rng::sub_seed(seed, 1);
    let devs = par_map_samples(reps, |rep| {
        let l1 = largest_lifetime_torus(cfg.n, cfg.r_n, lm, rng::sub_seed(eval_seed, rep))?;
        Ok((lm - l1).max(0.0) / uth.u)
    })?;
    let (q_hat, intercept, r2, points) = decile_survival_fit(&devs)?;
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (_, _, _, se_slope, se_int) = ols_se(&xs, &ys)?;
    let scale_hat = (-intercept / q_hat).exp();
    Ok(WeibullCheck {
        q_hat,
        q_ci: (q_hat - 2.0 * se_slope, q_hat + 2.0 * se_slope),
        scale_hat,
        scale_ci: (
            (-(intercept + 2.0 * se_int) / q_hat).exp(),
            (-(intercept - 2.0 * se_int) / q_hat).exp(),
        ),
        r2,
        expected_shape: q_expected,
        expected_scale: cfg.alpha.powf(-1.0 / q_expected),
        u: uth.u,
        reps,
        points,
    })
}

/// Unbounded-regime check against Exponential(1).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UnboundedCheck {
    pub n: f64,
    /// Inverted threshold ℓ_{n,1} = v⁻¹(1/n³).
    pub l_n1: f64,
    pub l_n1_ci: (f64, f64),
    pub ks_d: f64,
    pub ks_p: f64,
    pub eval_reps: u64,
    pub curve: ThresholdCurve,
}

/// Log-log interpolation of a decreasing positive curve, extrapolating the
/// last segment beyond the grid.
fn loglog_eval(grid: &[f64], vals: &[f64], l: f64) -> f64 {
    let x = l.max(grid[0]).ln();
    let xs: Vec<f64> = grid.iter().map(|g| g.ln()).collect();
    let k = vals.len();
    let i = if x >= xs[k - 1] { k - 2 } else { xs[..k].partition_point(|&g| g <= x).max(1) - 1 };
    let (x0, x1) = (xs[i], xs[i + 1]);
    let (y0, y1) = (vals[i].ln(), vals[i + 1].ln());
    (y0 + (x - x0) / (x1 - x0) * (y1 - y0)).exp()
}

/// Multiplicative-regime largest lifetime ℓ⁽¹⁾ = max deathtime/birthtime on
/// the torus, checked against Exponential(1) through x = n³·v̂(ℓ⁽¹⁾).
/// The curve v̂ comes from an independent estimation stream.
pub fn unbounded_exponential_check(
    n: f64,
    est_samples: u64,
    eval_reps: u64,
    l_grid: &[f64],
    seed: u64,
) -> Result<UnboundedCheck> {
    let curve = crate::regime::estimate_v(n, l_grid, est_samples, rng::sub_seed(seed, 0))?;
    let inv = curve.invert(1.0 / n.powi(3))?;
    // Positive prefix of the smoothed curve feeds the interpolator.
    let mut k = curve.smoothed.partition_point(|&v| v > 0.0);
    k = k.min(curve.smoothed.len());
    if k < 2 {
        return Err(Error::Resolution(
            "estimated curve positive on fewer than 2 grid points".into(),
        ));
    }
    let eval_seed = rng::sub_seed(seed, 1);
    let scale = n.powi(3);
    let xs = par_map_samples(eval_reps, |rep| {
        let cloud =
            sample_homogeneous(n, &Window::Torus { dim: 2 }, rng::sub_seed(eval_seed, rep))?;
        let mut l1: f64 = 1.0;
        if cloud.len() >= 3 {
            let (tiled, _) = torus_tile(&cloud)?;
            let fc = alpha_filtration(&tiled)?;
            let pairing = reduce(&fc)?;
            for (bi, di) in pairing.pairs_in_dim(&fc, 1) {
                let birth = fc.simplices[bi].value;
                if birth <= 0.0 {
                    continue;
                }
                let verts = &fc.simplices[di].vertices;
                let (mut cx, mut cy) = (0.0, 0.0);
                for &v in verts {
                    let p = fc.cloud.point(v as usize);
                    cx += p[0];
                    cy += p[1];
                }
                cx /= verts.len() as f64;
                cy /= verts.len() as f64;
                if !(0.0..1.0).contains(&cx) || !(0.0..1.0).contains(&cy) {
                    continue;
                }
                l1 = l1.max(fc.simplices[di].value / birth);
            }
        }
        Ok(scale * loglog_eval(&curve.grid[..k], &curve.smoothed[..k], l1))
    })?;
    let (ks_d, ks_p) = ks_test(&xs, |x| if x <= 0.0 { 0.0 } else { 1.0 - (-x).exp() })?;
    Ok(UnboundedCheck { n, l_n1: inv.value, l_n1_ci: inv.ci, ks_d, ks_p, eval_reps, curve })
}
