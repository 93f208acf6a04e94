//! Shared Monte Carlo engine behind the g and h threshold curves: uniform
//! configurations of m points (one pinned at the origin) on the ball of
//! radius 2(m-1), filtered persistence at unit deathtime scale, and a
//! 2-D histogram of (lifetime deviation, deathtime deviation).
//!
//! Work is split into fixed-size blocks processed in parallel; each sample
//! index owns an independent RNG stream and histograms merge by addition,
//! so results are bit-identical for any worker count.

use crate::error::Error;
use crate::filtration::{cech_bruteforce, vietoris_rips};
use crate::geometry::{Metric, PointCloud};
use crate::persistence::reduce;
use crate::regime::{FiltrationKind, LifetimeKind, RegimeConfig};
use crate::rng;
use crate::Result;
use rand::Rng;
use rayon::prelude::*;

const BLOCK: u64 = 16_384;

/// Histogram of deviation pairs accumulated over all samples.
pub(crate) struct DevHist {
    /// counts[i][j] = #{samples with dev ≤ u_i and ddev ≤ v_j} after
    /// cumulation; one extra overflow row/column is kept internally.
    pub counts: Vec<Vec<u64>>,
    /// Samples whose best lifetime exceeded ℓ_max by more than 1e-9.
    pub lmax_violations: u64,
}

/// Lifetime/deathtime deviations for one sampled configuration, or None when
/// the configuration has no qualifying feature.
pub(crate) fn sample_deviation(
    cfg: &RegimeConfig,
    lmax: f64,
    rng: &mut impl Rng,
) -> Option<(f64, f64)> {
    let m = cfg.m;
    let radius = 2.0 * (m as f64 - 1.0);
    let mut cloud = PointCloud::new(2, Metric::euclidean(2));
    cloud.push(&[0.0, 0.0]);
    for _ in 1..m {
        loop {
            let x = radius * (2.0 * rng.random::<f64>() - 1.0);
            let y = radius * (2.0 * rng.random::<f64>() - 1.0);
            if x * x + y * y <= radius * radius {
                cloud.push(&[x, y]);
                break;
            }
        }
    }
    deviation_of_cloud(cfg, lmax, &cloud)
}

/// Deviations for a fixed configuration (shared by the uniform and
/// importance samplers).
pub(crate) fn deviation_of_cloud(
    cfg: &RegimeConfig,
    lmax: f64,
    cloud: &PointCloud,
) -> Option<(f64, f64)> {
    let m = cloud.len();
    // 1-connectivity of the cluster graph at unit deathtime scale: edges at
    // distance < 2.
    let mut reach = vec![false; m];
    reach[0] = true;
    let mut frontier = vec![0usize];
    while let Some(i) = frontier.pop() {
        for j in 0..m {
            if !reach[j] && cloud.dist(i, j) < 2.0 {
                reach[j] = true;
                frontier.push(j);
            }
        }
    }
    if !reach.iter().all(|&r| r) {
        return None;
    }
    let fc = match cfg.filtration {
        FiltrationKind::Cech => cech_bruteforce(cloud, cfg.k - 1, 1.0).ok()?,
        FiltrationKind::Vr => vietoris_rips(cloud, cfg.k - 1, 1.0).ok()?,
    };
    let pairing = reduce(&fc).ok()?;
    let mut best: Option<(f64, f64)> = None;
    for (bi, di) in pairing.pairs_in_dim(&fc, cfg.k - 2) {
        let birth = fc.simplices[bi].value;
        let death = fc.simplices[di].value;
        if death <= birth {
            continue;
        }
        let life = match cfg.lifetime {
            LifetimeKind::Additive => death - birth,
            LifetimeKind::Multiplicative => {
                if birth > 0.0 {
                    death / birth
                } else {
                    continue;
                }
            }
        };
        if best.map(|(l, _)| life > l).unwrap_or(true) {
            best = Some((life, death));
        }
    }
    best.map(|(life, death)| (lmax - life, 1.0 - death))
}

/// Run the uniform sampler and build the cumulative 2-D histogram.
pub(crate) fn run_sampler(
    cfg: &RegimeConfig,
    lmax: f64,
    u_grid: &[f64],
    v_grid: &[f64],
    samples: u64,
    seed: u64,
) -> Result<DevHist> {
    if cfg.d != 2 {
        return Err(Error::InvalidInput("threshold sampling supports d=2 only".into()));
    }
    if cfg.m > 8 {
        return Err(Error::InvalidInput("threshold sampling supports m ≤ 8".into()));
    }
    let nu = u_grid.len();
    let nv = v_grid.len().max(1);
    let blocks = samples.div_ceil(BLOCK);
    let zero = || (vec![vec![0u64; nv + 1]; nu + 1], 0u64);
    let (raw, violations) = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(samples);
            let mut local = zero();
            for idx in lo..hi {
                let mut r = rng::stream(seed, idx);
                match sample_deviation(cfg, lmax, &mut r) {
                    Some((dev, ddev)) => {
                        if dev < -1e-9 {
                            local.1 += 1;
                        }
                        let i = u_grid.partition_point(|&u| u < dev).min(nu);
                        let j = if v_grid.is_empty() {
                            0
                        } else {
                            v_grid.partition_point(|&v| v < ddev).min(nv)
                        };
                        local.0[i][j] += 1;
                    }
                    None => {
                        local.0[nu][nv] += 1;
                    }
                }
            }
            local
        })
        .reduce(zero, |mut a, b| {
            for (ra, rb) in a.0.iter_mut().zip(&b.0) {
                for (ca, cb) in ra.iter_mut().zip(rb) {
                    *ca += cb;
                }
            }
            a.1 += b.1;
            (a.0, a.1)
        });
    // Cumulate over both axes: counts[i][j] = Σ_{i'≤i, j'≤j} raw[i'][j'].
    let mut counts = vec![vec![0u64; nv]; nu];
    for i in 0..nu {
        for j in 0..nv {
            let mut c = raw[i][j];
            if i > 0 {
                c += counts[i - 1][j];
            }
            if j > 0 {
                c += counts[i][j - 1];
            }
            if i > 0 && j > 0 {
                c -= counts[i - 1][j - 1];
            }
            counts[i][j] = c;
        }
    }
    Ok(DevHist { counts, lmax_violations: violations })
}

/// Importance-sampling deep-tail estimate of g for the Čech k=m=3 additive
/// regime: proposals perturb the optimal equilateral configuration (random
/// rotation, Gaussian jitter of width `sigma`), weighted back to Lebesgue
/// measure through the explicit mixture density.
pub(crate) fn run_importance_g(
    cfg: &RegimeConfig,
    lmax: f64,
    u_grid: &[f64],
    sigma: f64,
    samples: u64,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if cfg.k != 3
        || cfg.m != 3
        || cfg.filtration != FiltrationKind::Cech
        || cfg.lifetime != LifetimeKind::Additive
        || cfg.d != 2
    {
        return Err(Error::InvalidInput(
            "importance mode supports the planar Čech k=m=3 additive regime".into(),
        ));
    }
    let s3 = 3f64.sqrt();
    // Optimal shape: equilateral triangle of circumradius 1 anchored at 0.
    let a = [1.5, -s3 / 2.0];
    let b = [1.5, s3 / 2.0];
    let nu = u_grid.len();
    let blocks = samples.div_ceil(BLOCK);
    let zero = || (vec![0.0f64; nu], vec![0.0f64; nu]);
    const ROT_NODES: usize = 128;
    // Blocks are summed in index order after the parallel map: float sums
    // must not depend on the worker count.
    let per_block: Vec<_> = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let lo = blk * BLOCK;
            let hi = (lo + BLOCK).min(samples);
            let mut acc = zero();
            for idx in lo..hi {
                let mut r = rng::stream(seed, idx);
                let theta = 2.0 * std::f64::consts::PI * r.random::<f64>();
                let swap = r.random::<f64>() < 0.5;
                let (ca, cb) = if swap { (b, a) } else { (a, b) };
                let rot = |p: [f64; 2], t: f64| {
                    [p[0] * t.cos() - p[1] * t.sin(), p[0] * t.sin() + p[1] * t.cos()]
                };
                let ra = rot(ca, theta);
                let rb = rot(cb, theta);
                let gauss = |r: &mut rand_chacha::ChaCha12Rng| {
                    // Box-Muller keeps the stream layout explicit.
                    let u1: f64 = r.random::<f64>().max(1e-300);
                    let u2: f64 = r.random();
                    let rad = (-2.0 * u1.ln()).sqrt();
                    (rad * (2.0 * std::f64::consts::PI * u2).cos(),
                     rad * (2.0 * std::f64::consts::PI * u2).sin())
                };
                let (g1, g2) = gauss(&mut r);
                let (g3, g4) = gauss(&mut r);
                let y2 = [ra[0] + sigma * g1, ra[1] + sigma * g2];
                let y3 = [rb[0] + sigma * g3, rb[1] + sigma * g4];
                // Mixture density over rotations and the swap.
                let dens_term = |p: [f64; 2], q: [f64; 2], anchor_a: [f64; 2], anchor_b: [f64; 2]| {
                    let mut total = 0.0;
                    for k in 0..ROT_NODES {
                        let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / ROT_NODES as f64;
                        let aa = rot(anchor_a, t);
                        let bb = rot(anchor_b, t);
                        let d2 = (p[0] - aa[0]).powi(2)
                            + (p[1] - aa[1]).powi(2)
                            + (q[0] - bb[0]).powi(2)
                            + (q[1] - bb[1]).powi(2);
                        total += (-d2 / (2.0 * sigma * sigma)).exp();
                    }
                    total / ROT_NODES as f64
                        / (2.0 * std::f64::consts::PI * sigma * sigma).powi(2)
                };
                let dens = 0.5 * (dens_term(y2, y3, a, b) + dens_term(y2, y3, b, a));
                if dens <= 0.0 || !dens.is_finite() {
                    continue;
                }
                let w = 1.0 / dens;
                let mut cloud = PointCloud::new(2, Metric::euclidean(2));
                cloud.push(&[0.0, 0.0]);
                cloud.push(&y2);
                cloud.push(&y3);
                if let Some((dev, _)) = deviation_of_cloud(cfg, lmax, &cloud) {
                    let i0 = u_grid.partition_point(|&u| u < dev);
                    for i in i0..nu {
                        acc.0[i] += w;
                        acc.1[i] += w * w;
                    }
                }
            }
            acc
        })
        .collect();
    let (wsum, wsq) = per_block.into_iter().fold(zero(), |mut x, y| {
        for (aa, bb) in x.0.iter_mut().zip(&y.0) {
            *aa += bb;
        }
        for (aa, bb) in x.1.iter_mut().zip(&y.1) {
            *aa += bb;
        }
        x
    });
    let n = samples as f64;
    let est: Vec<f64> = wsum.iter().map(|s| s / n).collect();
    let se: Vec<f64> = wsum
        .iter()
        .zip(&wsq)
        .map(|(s, s2)| {
            let mean = s / n;
            ((s2 / n - mean * mean).max(0.0) / n).sqrt()
        })
        .collect();
    Ok((est, se))
}
