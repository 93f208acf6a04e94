//! Simulated-annealing search for m-point configurations maximizing the
//! additive lifetime of a 1-cycle subject to deathtime ≤ 1.

use crate::error::Error;
use crate::Result;
use crate::filtration::{cech_bruteforce, vietoris_rips};
use crate::geometry::{Metric, PointCloud};
use crate::persistence::reduce;
use crate::regime::{lmax, par_map_samples, FiltrationKind, LifetimeKind, Provenance};
use crate::rng;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Annealing schedule. Defaults: T₀ = 0.1, geometric cooling 0.995 per step,
/// 10⁵ step budget, proposal σ = 0.5·T, 20 restarts. Steps stop early once
/// σ underflows useful coordinate resolution (σ < 1e−18), where proposals
/// can no longer move the state.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub t0: f64,
    pub cooling: f64,
    pub steps: u64,
    pub sigma_factor: f64,
    pub restarts: usize,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule { t0: 0.1, cooling: 0.995, steps: 100_000, sigma_factor: 0.5, restarts: 20 }
    }
}

impl AnnealSchedule {
    fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0)
            || !(self.cooling > 0.0 && self.cooling < 1.0)
            || self.steps == 0
            || !(self.sigma_factor > 0.0)
            || self.restarts == 0
        {
            return Err(Error::InvalidInput(
                "anneal schedule needs t0 > 0, cooling in (0,1), steps ≥ 1, sigma > 0, restarts ≥ 1"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of the annealed search.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnnealResult {
    /// Best configuration, normalized so its optimal 1-cycle dies at radius 1.
    pub config: Vec<Vec<f64>>,
    /// Additive lifetime of that cycle (deathtime exactly 1 by normalization).
    pub best_lifetime: f64,
    pub per_restart: Vec<f64>,
    /// Known maximal lifetime for (k=3, m), when tabulated.
    pub bound: Option<f64>,
    pub provenance: Option<Provenance>,
}

/// The chain state scores a configuration by max (death − birth)/death over
/// finite H1 pairs: the supremum of the additive lifetime over rescalings
/// that keep the deathtime at most 1. Scale invariance keeps the landscape
/// independent of the initial ball radius.
fn score(coords: &[f64], filtration: FiltrationKind) -> Result<(f64, f64)> {
    let m = coords.len() / 2;
    let mut cloud = PointCloud::new(2, Metric::euclidean(2));
    for i in 0..m {
        cloud.push(&coords[2 * i..2 * i + 2]);
    }
    let fc = match filtration {
        FiltrationKind::Cech => cech_bruteforce(&cloud, 2, f64::INFINITY)?,
        FiltrationKind::Vr => vietoris_rips(&cloud, 2, f64::INFINITY)?,
    };
    let pairing = reduce(&fc)?;
    let mut best = f64::NEG_INFINITY;
    let mut best_death = f64::NAN;
    for (bi, di) in pairing.pairs_in_dim(&fc, 1) {
        let b = fc.simplices[bi].value;
        let d = fc.simplices[di].value;
        if d > 0.0 && (d - b) / d > best {
            best = (d - b) / d;
            best_death = d;
        }
    }
    Ok((best, best_death))
}

fn run_chain(
    m: usize,
    filtration: FiltrationKind,
    schedule: &AnnealSchedule,
    seed: u64,
    restart: u64,
) -> Result<(f64, Vec<f64>)> {
    let mut r = rng::stream(seed, restart);
    // m points uniform in the unit disk, via the polar map.
    let mut coords = Vec::with_capacity(2 * m);
    for _ in 0..m {
        let rad = r.random::<f64>().sqrt();
        let ang = 2.0 * std::f64::consts::PI * r.random::<f64>();
        coords.push(rad * ang.cos());
        coords.push(rad * ang.sin());
    }
    let (mut cur, _) = score(&coords, filtration)?;
    let mut best = cur;
    let mut best_coords = coords.clone();
    let mut temp = schedule.t0;
    for _ in 0..schedule.steps {
        let sigma = schedule.sigma_factor * temp;
        if sigma < 1e-18 {
            break;
        }
        let i = r.random_range(0..m);
        let dx: f64 = r.sample(StandardNormal);
        let dy: f64 = r.sample(StandardNormal);
        let mut prop = coords.clone();
        prop[2 * i] += sigma * dx;
        prop[2 * i + 1] += sigma * dy;
        let (new, _) = score(&prop, filtration)?;
        let accept = new >= cur || r.random::<f64>() < ((new - cur) / temp).exp();
        if accept {
            coords = prop;
            cur = new;
            if cur > best {
                best = cur;
                best_coords = coords.clone();
            }
        }
        temp *= schedule.cooling;
    }
    Ok((best, best_coords))
}

/// Anneal for the largest-lifetime m-point configuration (k = 3 fixed:
/// 1-cycles killed by triangles). Restarts run in parallel; the best chain
/// wins with ties broken by restart index. Exceeding a proven bound is an
/// experiment error; exceeding a conjectured one reports falsification.
pub fn anneal_max_lifetime(
    m: usize,
    filtration: FiltrationKind,
    schedule: &AnnealSchedule,
    seed: u64,
) -> Result<AnnealResult> {
    if !(3..=8).contains(&m) {
        return Err(Error::InvalidInput(format!("anneal supports m in [3, 8], got {m}")));
    }
    schedule.validate()?;
    let outcomes = par_map_samples(schedule.restarts as u64, |rs| {
        run_chain(m, filtration, schedule, seed, rs)
    })?;
    let per_restart: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
    let (mut best, mut best_coords) = (f64::NEG_INFINITY, Vec::new());
    for (obj, coords) in &outcomes {
        if *obj > best {
            best = *obj;
            best_coords = coords.clone();
        }
    }
    if !best.is_finite() {
        return Err(Error::Experiment("annealing found no finite H1 pair".into()));
    }
    // Normalize so the optimal pair dies at radius 1 and rescore.
    let (_, death) = score(&best_coords, filtration)?;
    for c in &mut best_coords {
        *c /= death;
    }
    let (lifetime, _) = score(&best_coords, filtration)?;
    let known = lmax(3, m, filtration, LifetimeKind::Additive).ok();
    if let Some((bound, prov)) = known {
        if lifetime > bound + 1e-9 {
            let msg = format!(
                "annealed lifetime {lifetime:.12} exceeds the tabulated bound {bound:.12} for m={m}"
            );
            return Err(match prov {
                Provenance::Proven => Error::Experiment(msg),
                Provenance::Conjectured => Error::ConjectureFalsified(msg),
            });
        }
    }
    Ok(AnnealResult {
        config: best_coords.chunks(2).map(|c| c.to_vec()).collect(),
        best_lifetime: lifetime,
        per_restart,
        bound: known.map(|k| k.0),
        provenance: known.map(|k| k.1),
    })
}
