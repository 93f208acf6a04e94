//! Extreme-lifetime calculus: maximal lifetimes per regime, the threshold
//! functions g, h (cluster scale) and v (unbounded scale) as Monte Carlo
//! curves with an analytic oracle, threshold inversion, and extraction of
//! extremal marked points from sampled clouds.

pub mod analytic;
pub(crate) mod sampler;

pub use analytic::{analytic_h_cech33, lmax_cech33_add};

use crate::error::Error;
use crate::filtration::{alpha_filtration, cech_bruteforce, vietoris_rips};
use crate::geometry::{torus_tile, PointCloud};
use crate::persistence::{features, reduce};
use crate::pointprocess::{clusters, sample_homogeneous, Window};
use crate::rng;
use crate::stats::{isotonic, ols};
use crate::Result;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Largest cluster handled by within-cluster persistence; bigger clusters
/// are skipped and reported.
pub const CLUSTER_CAP: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FiltrationKind {
    Cech,
    Vr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LifetimeKind {
    Additive,
    Multiplicative,
}

/// Whether a maximal-lifetime value is proven or conjectured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Proven,
    Conjectured,
}

/// Full description of a sparse-regime run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegimeConfig {
    pub d: usize,
    pub k: usize,
    pub m: usize,
    pub filtration: FiltrationKind,
    pub lifetime: LifetimeKind,
    /// Intensity.
    pub n: f64,
    /// Deathtime bound.
    pub r_n: f64,
    /// Target level of the limiting extremal process.
    pub alpha: f64,
}

impl RegimeConfig {
    /// ρ_{n,j} = n (n r_nᵈ)^{j-1}, the j-cluster intensity scale.
    pub fn rho(&self, j: usize) -> f64 {
        self.n * (self.n * self.r_n.powi(self.d as i32)).powi(j as i32 - 1)
    }

    /// Exponent β when the deathtime bound is written r_n = n^{-β}.
    pub fn beta(&self) -> f64 {
        -self.r_n.ln() / self.n.ln()
    }

    /// Admissible β interval for d=2 ensuring the m-sparse regime.
    pub fn admissible_beta(&self) -> (f64, f64) {
        let m = self.m as f64;
        ((m + 1.0) / (2.0 * m), m / (2.0 * (m - 1.0)))
    }

    /// Hard validation plus soft regime warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.d == 0 || self.k < 3 || self.k > self.m {
            return Err(Error::InvalidInput(format!(
                "regime needs 3 ≤ k ≤ m, got k={}, m={}",
                self.k, self.m
            )));
        }
        if !(self.n > 0.0) || !(self.r_n > 0.0) || self.alpha < 0.0 {
            return Err(Error::InvalidInput("n, r_n must be positive; alpha nonnegative".into()));
        }
        let mut warnings = Vec::new();
        let rho_m = self.rho(self.m);
        let rho_m1 = self.rho(self.m + 1);
        if rho_m < 10.0 {
            warnings.push(format!("m-cluster scale rho_m = {rho_m:.3} below 10; sparse-regime asymptotics weak"));
        }
        if rho_m1 > 0.5 {
            warnings.push(format!("(m+1)-cluster scale rho_m+1 = {rho_m1:.3} above 0.5; oversize clusters likely"));
        }
        if self.d == 2 {
            let (lo, hi) = self.admissible_beta();
            let beta = self.beta();
            if beta <= lo || beta >= hi {
                warnings.push(format!(
                    "deathtime exponent beta = {beta:.4} outside admissible ({lo:.4}, {hi:.4})"
                ));
            }
        }
        Ok(warnings)
    }

    /// Maximal lifetime for this configuration.
    pub fn lmax(&self) -> Result<(f64, Provenance)> {
        lmax(self.k, self.m, self.filtration, self.lifetime)
    }

    /// g-level targeted by the α threshold: α m! / (ρ_{n,m} C(m,k)).
    pub fn target_g_level(&self) -> f64 {
        let m = self.m as u64;
        let k = self.k as u64;
        let fact = |x: u64| (1..=x).product::<u64>() as f64;
        let choose = fact(m) / (fact(k) * fact(m - k));
        self.alpha * fact(m) / (self.rho(self.m) * choose)
    }
}

/// Deterministic maximal lifetime with provenance. Supported: the proven
/// planar cases and the conjectured regular-polygon family for Čech.
pub fn lmax(
    k: usize,
    m: usize,
    filtration: FiltrationKind,
    lifetime: LifetimeKind,
) -> Result<(f64, Provenance)> {
    match (filtration, lifetime, k, m) {
        (FiltrationKind::Cech, LifetimeKind::Additive, 3, 3) => {
            Ok((lmax_cech33_add(), Provenance::Proven))
        }
        (FiltrationKind::Cech, LifetimeKind::Multiplicative, 3, 3) => {
            Ok((2.0 / 3f64.sqrt(), Provenance::Proven))
        }
        (FiltrationKind::Vr, LifetimeKind::Additive, 3, 4) => {
            Ok((1.0 - std::f64::consts::FRAC_1_SQRT_2, Provenance::Proven))
        }
        (FiltrationKind::Cech, LifetimeKind::Additive, 3, m) if m >= 4 => {
            Ok((regular_polygon_lifetime(m)?, Provenance::Conjectured))
        }
        _ => Err(Error::InvalidInput(format!(
            "maximal lifetime unsupported for k={k}, m={m}, {filtration:?}, {lifetime:?}"
        ))),
    }
}

/// Additive lifetime of m points equally spaced on the unit circle:
/// 1 - sin(π/m).
pub fn regular_polygon_lifetime(m: usize) -> Result<f64> {
    if m < 3 {
        return Err(Error::InvalidInput("polygon needs m >= 3".into()));
    }
    Ok(1.0 - (std::f64::consts::PI / m as f64).sin())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveDirection {
    Increasing,
    Decreasing,
}

/// Fitted log-log power law: est ≈ exp(ln_c) · argᵠ.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PowerFit {
    pub q: f64,
    pub ln_c: f64,
    pub r2: f64,
}

/// Monte Carlo estimate of a monotone threshold function on a grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThresholdCurve {
    pub grid: Vec<f64>,
    pub est: Vec<f64>,
    pub se: Vec<f64>,
    pub smoothed: Vec<f64>,
    pub direction: CurveDirection,
    pub fit: Option<PowerFit>,
    pub samples: u64,
    pub warnings: Vec<String>,
}

/// Result of inverting a threshold curve at a target level.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Inversion {
    pub value: f64,
    pub ci: (f64, f64),
    pub extrapolated: bool,
}

impl ThresholdCurve {
    /// Assemble a curve: isotonic smoothing in the stated direction and a
    /// power-law fit on the smallest resolvable decade (increasing curves).
    pub fn assemble(
        grid: Vec<f64>,
        est: Vec<f64>,
        se: Vec<f64>,
        direction: CurveDirection,
        samples: u64,
        mut warnings: Vec<String>,
    ) -> Result<Self> {
        if grid.len() != est.len() || grid.len() != se.len() || grid.is_empty() {
            return Err(Error::InvalidInput("curve arrays must be nonempty and aligned".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("curve grid must be strictly increasing".into()));
        }
        let smoothed: Vec<f64> = isotonic(&est, None, direction == CurveDirection::Increasing)
            .into_iter()
            .map(|v| v.max(0.0))
            .collect();
        let fit = if direction == CurveDirection::Increasing {
            power_fit(&grid, &est, &se)
        } else {
            None
        };
        if samples < 10_000 {
            warnings.push(format!("only {samples} Monte Carlo samples; estimates are coarse"));
        }
        Ok(ThresholdCurve { grid, est, se, smoothed, direction, fit, samples, warnings })
    }

    /// CSV export: `u,g,se,smoothed`, one grid point per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,g,se,smoothed\n");
        for i in 0..self.grid.len() {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.grid[i], self.est[i], self.se[i], self.smoothed[i]
            );
        }
        out
    }

    /// Invert the smoothed curve at `target`; a confidence interval comes
    /// from re-inverting the ±1 SE bands. Below-grid targets use the power
    /// fit and are flagged as extrapolated.
    pub fn invert(&self, target: f64) -> Result<Inversion> {
        match self.direction {
            CurveDirection::Increasing => self.invert_increasing(target),
            CurveDirection::Decreasing => self.invert_decreasing(target),
        }
    }

    fn invert_increasing(&self, target: f64) -> Result<Inversion> {
        if target <= 0.0 {
            return Ok(Inversion { value: 0.0, ci: (0.0, 0.0), extrapolated: false });
        }
        let s = &self.smoothed;
        let last = *s.last().unwrap();
        if target > last {
            return Err(Error::Resolution(format!(
                "target level {target:.3e} above curve maximum {last:.3e}"
            )));
        }
        let value;
        let mut extrapolated = false;
        if target < s[0] || s[0] <= 0.0 {
            // Below the resolvable grid: fall back to the power law.
            match self.fit {
                Some(f) if f.q > 0.0 => {
                    let v = ((target.ln() - f.ln_c) / f.q).exp();
                    if v <= self.grid[0] {
                        value = v;
                        extrapolated = true;
                    } else {
                        value = first_crossing_up(&self.grid, s, target)
                            .unwrap_or(self.grid[0]);
                    }
                }
                _ => {
                    return Err(Error::Resolution(
                        "target below the resolvable grid and no power fit available".into(),
                    ))
                }
            }
        } else {
            value = first_crossing_up(&self.grid, s, target).ok_or_else(|| {
                Error::Resolution("monotone curve failed to cross target".into())
            })?;
        }
        let hi_band: Vec<f64> = s.iter().zip(&self.se).map(|(a, b)| a + b).collect();
        let lo_band: Vec<f64> = s.iter().zip(&self.se).map(|(a, b)| (a - b).max(0.0)).collect();
        let ci_lo = first_crossing_up(&self.grid, &hi_band, target).unwrap_or(0.0).min(value);
        let ci_hi = first_crossing_up(&self.grid, &lo_band, target)
            .unwrap_or(*self.grid.last().unwrap())
            .max(value);
        Ok(Inversion { value, ci: (ci_lo, ci_hi), extrapolated })
    }

    fn invert_decreasing(&self, target: f64) -> Result<Inversion> {
        let s = &self.smoothed;
        if target <= 0.0 || target < *s.last().unwrap() {
            return Err(Error::Resolution(format!(
                "target level {target:.3e} below curve floor {:.3e}; more samples or a wider grid needed",
                s.last().unwrap()
            )));
        }
        if target >= s[0] {
            return Ok(Inversion {
                value: self.grid[0],
                ci: (self.grid[0], self.grid[0]),
                extrapolated: true,
            });
        }
        let value = first_crossing_down(&self.grid, s, target)
            .ok_or_else(|| Error::Resolution("curve failed to cross target".into()))?;
        let hi_band: Vec<f64> = s.iter().zip(&self.se).map(|(a, b)| a + b).collect();
        let lo_band: Vec<f64> = s.iter().zip(&self.se).map(|(a, b)| (a - b).max(0.0)).collect();
        let ci_lo = first_crossing_down(&self.grid, &lo_band, target)
            .unwrap_or(self.grid[0])
            .min(value);
        let ci_hi = first_crossing_down(&self.grid, &hi_band, target)
            .unwrap_or(*self.grid.last().unwrap())
            .max(value);
        Ok(Inversion { value, ci: (ci_lo, ci_hi), extrapolated: false })
    }
}

/// Interpolate a crossing inside segment [i-1, i]. Log-log interpolation
/// when the segment is strictly positive (threshold curves are near power
/// laws on log grids, so this kills most interpolation bias); linear
/// otherwise.
fn interp_crossing(grid: &[f64], vals: &[f64], i: usize, target: f64) -> f64 {
    let (x0, x1, y0, y1) = (grid[i - 1], grid[i], vals[i - 1], vals[i]);
    if y0 == y1 {
        return if y0 == target { x0 } else { x1 };
    }
    if y0 > 0.0 && y1 > 0.0 && x0 > 0.0 && target > 0.0 {
        let t = (target.ln() - y0.ln()) / (y1.ln() - y0.ln());
        (x0.ln() + t * (x1.ln() - x0.ln())).exp()
    } else {
        x0 + (target - y0) * (x1 - x0) / (y1 - y0)
    }
}

/// Smallest grid point where `vals` reaches `target` from below.
fn first_crossing_up(grid: &[f64], vals: &[f64], target: f64) -> Option<f64> {
    let i = vals.iter().position(|&v| v >= target)?;
    if i == 0 {
        return Some(grid[0]);
    }
    Some(interp_crossing(grid, vals, i, target))
}

/// Decreasing counterpart of [`first_crossing_up`].
fn first_crossing_down(grid: &[f64], vals: &[f64], target: f64) -> Option<f64> {
    let i = vals.iter().position(|&v| v <= target)?;
    if i == 0 {
        return Some(grid[0]);
    }
    Some(interp_crossing(grid, vals, i, target))
}

/// Power-law fit on the smallest resolvable decade. A point is resolvable
/// when its estimate clears its own standard error by a comfortable margin
/// (about five Monte Carlo hits); bare positive counts are too noisy on a
/// log scale.
fn power_fit(grid: &[f64], est: &[f64], se: &[f64]) -> Option<PowerFit> {
    let mut pos: Vec<usize> =
        (0..est.len()).filter(|&i| est[i] > 0.0 && est[i] >= 2.2 * se[i]).collect();
    if pos.len() < 3 {
        pos = (0..est.len()).filter(|&i| est[i] > 0.0).collect();
    }
    if pos.len() < 3 {
        return None;
    }
    let u0 = grid[pos[0]];
    let mut sel: Vec<usize> = pos.iter().copied().filter(|&i| grid[i] <= 10.0 * u0).collect();
    if sel.len() < 3 {
        sel = pos.iter().copied().take(6).collect();
    }
    let xs: Vec<f64> = sel.iter().map(|&i| grid[i].ln()).collect();
    let ys: Vec<f64> = sel.iter().map(|&i| est[i].ln()).collect();
    let (q, ln_c, r2) = ols(&xs, &ys).ok()?;
    Some(PowerFit { q, ln_c, r2 })
}

/// Default log grid for g/h estimation: three decades up to ℓ_max.
fn default_u_grid(lmax: f64) -> Vec<f64> {
    let pts = 48;
    (0..pts)
        .map(|i| lmax * 10f64.powf(-3.0 + 3.0 * i as f64 / (pts - 1) as f64))
        .collect()
}

/// Volume of the sampling ball domain B(0, 2(m-1))^{m-1} in the plane.
fn sampling_volume(m: usize) -> f64 {
    let r = 2.0 * (m as f64 - 1.0);
    (std::f64::consts::PI * r * r).powi(m as i32 - 1)
}

/// Monte Carlo estimate of g on the default grid.
pub fn estimate_g(cfg: &RegimeConfig, samples: u64, seed: u64) -> Result<ThresholdCurve> {
    let (lm, _) = cfg.lmax()?;
    estimate_g_on_grid(cfg, &default_u_grid(lm), samples, seed)
}

/// Monte Carlo estimate of g on an explicit ascending grid of u-values.
pub fn estimate_g_on_grid(
    cfg: &RegimeConfig,
    u_grid: &[f64],
    samples: u64,
    seed: u64,
) -> Result<ThresholdCurve> {
    cfg.validate()?;
    let (lm, prov) = cfg.lmax()?;
    let hist = sampler::run_sampler(cfg, lm, u_grid, &[], samples, seed)?;
    let vol = sampling_volume(cfg.m);
    let n = samples as f64;
    let mut est = Vec::with_capacity(u_grid.len());
    let mut se = Vec::with_capacity(u_grid.len());
    for i in 0..u_grid.len() {
        let c = hist.counts[i][0] as f64;
        let p = c / n;
        est.push(vol * p);
        se.push(vol * (p * (1.0 - p) / n).sqrt());
    }
    let mut warnings = Vec::new();
    if hist.lmax_violations > 0 {
        warnings.push(format!(
            "{} samples exceeded the {} maximal lifetime by more than 1e-9",
            hist.lmax_violations,
            if prov == Provenance::Proven { "proven" } else { "conjectured" }
        ));
    }
    ThresholdCurve::assemble(
        u_grid.to_vec(),
        est,
        se,
        CurveDirection::Increasing,
        samples,
        warnings,
    )
}

/// Importance-sampled deep-tail g estimate (planar Čech k=m=3 additive).
pub fn estimate_g_importance(
    cfg: &RegimeConfig,
    u_grid: &[f64],
    sigma: f64,
    samples: u64,
    seed: u64,
) -> Result<ThresholdCurve> {
    let (lm, _) = cfg.lmax()?;
    if !(sigma > 0.0) {
        return Err(Error::InvalidInput("importance sigma must be positive".into()));
    }
    let (est, se) = sampler::run_importance_g(cfg, lm, u_grid, sigma, samples, seed)?;
    ThresholdCurve::assemble(
        u_grid.to_vec(),
        est,
        se,
        CurveDirection::Increasing,
        samples,
        vec!["importance-sampled estimate; weights unbounded in the far tail".into()],
    )
}

/// Two-argument threshold table h(u, v) sharing its sample stream with g.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HTable {
    pub u_grid: Vec<f64>,
    pub v_grid: Vec<f64>,
    /// est[i][j] ≈ h(u_i, v_j).
    pub est: Vec<Vec<f64>>,
    pub se: Vec<Vec<f64>>,
    pub samples: u64,
    /// Marginal at v = 1; bit-identical to estimate_g on the same stream.
    pub g_marginal: ThresholdCurve,
}

/// Estimate h on default grids (the v grid ends at exactly 1).
pub fn estimate_h(cfg: &RegimeConfig, samples: u64, seed: u64) -> Result<HTable> {
    let (lm, _) = cfg.lmax()?;
    let v_grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    estimate_h_on_grid(cfg, &default_u_grid(lm), &v_grid, samples, seed)
}

/// Estimate h on explicit grids; the last v must be 1 so the g marginal is
/// recoverable exactly.
pub fn estimate_h_on_grid(
    cfg: &RegimeConfig,
    u_grid: &[f64],
    v_grid: &[f64],
    samples: u64,
    seed: u64,
) -> Result<HTable> {
    cfg.validate()?;
    if v_grid.last() != Some(&1.0) {
        return Err(Error::InvalidInput("v grid must end at 1.0".into()));
    }
    let (lm, _) = cfg.lmax()?;
    let hist = sampler::run_sampler(cfg, lm, u_grid, v_grid, samples, seed)?;
    let vol = sampling_volume(cfg.m);
    let n = samples as f64;
    let mut est = vec![vec![0.0; v_grid.len()]; u_grid.len()];
    let mut se = vec![vec![0.0; v_grid.len()]; u_grid.len()];
    for i in 0..u_grid.len() {
        for j in 0..v_grid.len() {
            let p = hist.counts[i][j] as f64 / n;
            est[i][j] = vol * p;
            se[i][j] = vol * (p * (1.0 - p) / n).sqrt();
        }
    }
    let g_est: Vec<f64> = est.iter().map(|row| *row.last().unwrap()).collect();
    let g_se: Vec<f64> = se.iter().map(|row| *row.last().unwrap()).collect();
    let g_marginal = ThresholdCurve::assemble(
        u_grid.to_vec(),
        g_est,
        g_se,
        CurveDirection::Increasing,
        samples,
        Vec::new(),
    )?;
    Ok(HTable { u_grid: u_grid.to_vec(), v_grid: v_grid.to_vec(), est, se, samples, g_marginal })
}

/// Estimate the unbounded-regime curve v(ℓ) = E[#negative triangles with
/// multiplicative lifetime ≥ ℓ] / n³ on the unit torus, via the Alpha
/// filtration of the 3×3 tiling (features deduplicated by death-triangle
/// centroid in the central copy).
pub fn estimate_v(n: f64, l_grid: &[f64], samples: u64, seed: u64) -> Result<ThresholdCurve> {
    if l_grid.is_empty() || l_grid.windows(2).any(|w| w[0] >= w[1]) || l_grid[0] < 1.0 {
        return Err(Error::InvalidInput("lifetime grid must be ascending and start at ≥ 1".into()));
    }
    let counts = par_map_samples(samples, |idx| -> Result<Vec<u64>> {
        let cloud = sample_homogeneous(n, &Window::Torus { dim: 2 }, rng::sub_seed(seed, idx))?;
        let mut c = vec![0u64; l_grid.len()];
        if cloud.len() >= 3 {
            let (tiled, _) = torus_tile(&cloud)?;
            let fc = alpha_filtration(&tiled)?;
            let pairing = reduce(&fc)?;
            for (bi, di) in pairing.pairs_in_dim(&fc, 1) {
                let birth = fc.simplices[bi].value;
                let death = fc.simplices[di].value;
                if birth <= 0.0 {
                    continue;
                }
                let verts = &fc.simplices[di].vertices;
                let mut cx = 0.0;
                let mut cy = 0.0;
                for &vtx in verts {
                    let p = fc.cloud.point(vtx as usize);
                    cx += p[0];
                    cy += p[1];
                }
                cx /= verts.len() as f64;
                cy /= verts.len() as f64;
                if !(0.0..1.0).contains(&cx) || !(0.0..1.0).contains(&cy) {
                    continue;
                }
                let lstar = death / birth;
                let pos = l_grid.partition_point(|&l| l <= lstar);
                if pos > 0 {
                    c[pos - 1] += 1;
                }
            }
        }
        Ok(c)
    })?;
    // Suffix-cumulate each sample's histogram, then aggregate moments.
    let gl = l_grid.len();
    let mut sum = vec![0u64; gl];
    let mut sumsq = vec![0u128; gl];
    for hist in &counts {
        let mut acc = 0u64;
        let mut cum = vec![0u64; gl];
        for j in (0..gl).rev() {
            acc += hist[j];
            cum[j] = acc;
        }
        for j in 0..gl {
            sum[j] += cum[j];
            sumsq[j] += (cum[j] as u128) * (cum[j] as u128);
        }
    }
    let s = samples as f64;
    let scale = n.powi(3);
    let mut est = Vec::with_capacity(gl);
    let mut se = Vec::with_capacity(gl);
    for j in 0..gl {
        let mean = sum[j] as f64 / s;
        let var = (sumsq[j] as f64 / s - mean * mean).max(0.0);
        est.push(mean / scale);
        se.push((var / s).sqrt() / scale);
    }
    ThresholdCurve::assemble(
        l_grid.to_vec(),
        est,
        se,
        CurveDirection::Decreasing,
        samples,
        Vec::new(),
    )
}

/// Parallel map over sample indices with deterministic index-ordered output.
pub(crate) fn par_map_samples<T: Send, F>(samples: u64, f: F) -> Result<Vec<T>>
where
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..samples).into_par_iter().map(f).collect()
}

/// Threshold u_{n,α} from a g curve.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct UThreshold {
    pub u: f64,
    pub ci: (f64, f64),
    pub extrapolated: bool,
    /// g-level that was inverted.
    pub target: f64,
}

/// Invert a g curve at the level implied by the configuration's α.
pub fn threshold_u(curve: &ThresholdCurve, cfg: &RegimeConfig) -> Result<UThreshold> {
    if curve.direction != CurveDirection::Increasing {
        return Err(Error::InvalidInput("threshold_u expects an increasing g curve".into()));
    }
    let target = cfg.target_g_level();
    if target == 0.0 {
        return Ok(UThreshold { u: 0.0, ci: (0.0, 0.0), extrapolated: false, target });
    }
    let inv = curve.invert(target)?;
    Ok(UThreshold { u: inv.value, ci: inv.ci, extrapolated: inv.extrapolated, target })
}

/// One extremal feature: center plus scaled deviation marks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtremalPoint {
    pub center: Vec<f64>,
    /// (ℓ_max - ℓ̂)/u_{n,α} ∈ [0, 1].
    pub u: f64,
    /// (1 - deathtime/r_n)/u_{n,α} ≥ 0.
    pub v: f64,
}

/// Extraction result with the oversize/multi-exceedance diagnostics.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ExtractionOutcome {
    pub points: Vec<ExtremalPoint>,
    pub skipped_oversize: usize,
    pub multi_exceedance_clusters: usize,
    pub clusters_scanned: usize,
}

/// Extract all within-cluster features whose scaled lifetime comes within
/// `u_threshold` of the maximal lifetime. Clusters are taken at level 2r_n
/// (ball-connectivity at deathtime r_n) and capped at 16 points.
pub fn extract_extremes(
    cloud: &PointCloud,
    cfg: &RegimeConfig,
    u_threshold: f64,
) -> Result<ExtractionOutcome> {
    cfg.validate()?;
    if u_threshold < 0.0 {
        return Err(Error::InvalidInput("u threshold must be nonnegative".into()));
    }
    let (lm, _) = cfg.lmax()?;
    let part = clusters(cloud, 2.0 * cfg.r_n)?;
    let mut out = ExtractionOutcome::default();
    for members in &part.members {
        if members.len() < cfg.k {
            continue;
        }
        out.clusters_scanned += 1;
        if members.len() > CLUSTER_CAP {
            out.skipped_oversize += 1;
            continue;
        }
        let mut sub = PointCloud::new(cloud.dim, cloud.metric.clone());
        for &i in members {
            sub.push(cloud.point(i));
        }
        let fc = match cfg.filtration {
            FiltrationKind::Cech => cech_bruteforce(&sub, cfg.k - 1, cfg.r_n)?,
            FiltrationKind::Vr => vietoris_rips(&sub, cfg.k - 1, cfg.r_n)?,
        };
        let pairing = reduce(&fc)?;
        let feats = features(&pairing, &fc, cfg.k - 2)?;
        let mut exceedances = 0usize;
        for f in feats {
            let lhat = match cfg.lifetime {
                LifetimeKind::Additive => f.life_add / cfg.r_n,
                LifetimeKind::Multiplicative => f.life_mult,
            };
            if lhat >= lm - u_threshold {
                exceedances += 1;
                let denom = if u_threshold > 0.0 { u_threshold } else { 1.0 };
                out.points.push(ExtremalPoint {
                    center: f.center.clone(),
                    u: (lm - lhat).max(0.0) / denom,
                    v: (1.0 - f.death / cfg.r_n).max(0.0) / denom,
                });
            }
        }
        if exceedances >= 2 {
            out.multi_exceedance_clusters += 1;
        }
    }
    Ok(out)
}

/// CSV export for extremal points: `cx,cy,...,u,v`.
pub fn extremal_points_to_csv(points: &[ExtremalPoint], dim: usize) -> String {
    let mut out = String::new();
    if dim == 2 {
        out.push_str("cx,cy,u,v\n");
    } else {
        for i in 0..dim {
            let _ = write!(out, "c{i},");
        }
        out.push_str("u,v\n");
    }
    for p in points {
        for c in &p.center {
            let _ = write!(out, "{c:.16e},");
        }
        let _ = writeln!(out, "{:.16e},{:.16e}", p.u, p.v);
    }
    out
}
