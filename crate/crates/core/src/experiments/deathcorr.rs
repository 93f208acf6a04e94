//! Correlation between the deathtimes of the two largest-lifetime 1-cycles.

use crate::error::Error;
use crate::Result;
use crate::filtration::alpha_filtration_capped;
use crate::persistence::reduce;
use crate::pointprocess::{sample_homogeneous, Window};
use crate::regime::par_map_samples;
use crate::rng;
use crate::stats::{pearson, spearman};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Averages over the outer repetitions for one n.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeathCorr {
    pub n: f64,
    pub r_n: f64,
    pub avg_pearson: f64,
    pub avg_spearman: f64,
    /// Control: correlation after a deterministic shuffle of the second
    /// deathtimes; independence by construction, so this should hover at 0.
    pub avg_permuted: f64,
    pub resampled_clouds: usize,
    /// Outer repetitions dropped for zero variance in either deathtime list.
    pub degenerate_outers: usize,
}

const RESAMPLE_CAP: u64 = 64;

/// Deathtimes of the two largest-lifetime 1-cycles (lifetime descending,
/// birth-index ascending on ties); None when fewer than two positive
/// lifetimes exist.
fn two_largest_deaths(n10: f64, r_n: f64, seed: u64) -> Result<Option<(f64, f64)>> {
    let cloud = sample_homogeneous(n10, &Window::unit_box(2), seed)?;
    if cloud.len() < 3 {
        return Ok(None);
    }
    let fc = alpha_filtration_capped(&cloud, Some(r_n))?;
    let pairing = reduce(&fc)?;
    let mut feats: Vec<(f64, f64, usize)> = pairing
        .pairs_in_dim(&fc, 1)
        .filter_map(|(bi, di)| {
            let life = fc.simplices[di].value - fc.simplices[bi].value;
            (life > 0.0).then(|| (life, fc.simplices[di].value, bi))
        })
        .collect();
    if feats.len() < 2 {
        return Ok(None);
    }
    feats.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.2.cmp(&b.2)));
    Ok(Some((feats[0].1, feats[1].1)))
}

/// Deathtime correlation (m = k = 3, Čech additive, r_n = n^{−0.67}): per
/// outer repetition, `reps` clouds of intensity 10n on [0,1]²; Pearson
/// correlation of (largest, second-largest) deathtimes, Spearman and a
/// permuted control alongside; averaged over `outer` repetitions.
pub fn deathcorr_experiment(
    n_list: &[f64],
    reps: usize,
    outer: usize,
    seed: u64,
) -> Result<Vec<DeathCorr>> {
    if n_list.is_empty() || n_list.iter().any(|&n| !(n > 0.0)) || reps < 3 || outer == 0 {
        return Err(Error::InvalidInput("need positive n values, reps ≥ 3, outer ≥ 1".into()));
    }
    let mut out = Vec::with_capacity(n_list.len());
    for (ni, &n) in n_list.iter().enumerate() {
        let r_n = n.powf(-0.67);
        let s_n = rng::sub_seed(seed, ni as u64);
        let rows = par_map_samples(outer as u64, |o| {
            let s_o = rng::sub_seed(s_n, o);
            let mut d1 = Vec::with_capacity(reps);
            let mut d2 = Vec::with_capacity(reps);
            let mut resampled = 0usize;
            for rep in 0..reps {
                let s_rep = rng::sub_seed(s_o, rep as u64);
                let mut found = false;
                for attempt in 0..RESAMPLE_CAP {
                    if let Some((a, b)) =
                        two_largest_deaths(10.0 * n, r_n, rng::sub_seed(s_rep, attempt))?
                    {
                        d1.push(a);
                        d2.push(b);
                        found = true;
                        if attempt > 0 {
                            resampled += attempt as usize;
                        }
                        break;
                    }
                }
                if !found {
                    return Err(Error::Experiment(format!(
                        "no cloud with two 1-cycles after {RESAMPLE_CAP} attempts (n={n})"
                    )));
                }
            }
            let mut d2_perm = d2.clone();
            let mut r = rng::stream(s_o, 1);
            for j in (1..d2_perm.len()).rev() {
                d2_perm.swap(j, r.random_range(0..=j));
            }
            Ok((pearson(&d1, &d2), spearman(&d1, &d2), pearson(&d1, &d2_perm), resampled))
        })?;
        let mut sums = (0.0, 0.0, 0.0);
        let mut kept = 0usize;
        let mut degenerate = 0usize;
        let mut resampled = 0usize;
        for (p, s, c, rs) in &rows {
            resampled += rs;
            match (p, s, c) {
                (Some(p), Some(s), Some(c)) => {
                    sums.0 += p;
                    sums.1 += s;
                    sums.2 += c;
                    kept += 1;
                }
                _ => degenerate += 1,
            }
        }
        if kept == 0 {
            return Err(Error::Experiment(format!(
                "all outer repetitions degenerate (constant deathtimes) at n={n}"
            )));
        }
        let kf = kept as f64;
        out.push(DeathCorr {
            n,
            r_n,
            avg_pearson: sums.0 / kf,
            avg_spearman: sums.1 / kf,
            avg_permuted: sums.2 / kf,
            resampled_clouds: resampled,
            degenerate_outers: degenerate,
        });
    }
    Ok(out)
}
