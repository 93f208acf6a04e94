//! Poisson point-process samplers (homogeneous and thinned inhomogeneous)
//! and r-level cluster detection via a spatial grid + union-find.
//!
//! Sampling is reproducible: each (master seed, sample index) pair maps to an
//! independent RNG stream, so results are identical under any parallelism.

use crate::error::Error;
use crate::geometry::{Metric, PointCloud};
use crate::rng;
use crate::Result;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Sampling window: an axis-aligned box or the unit torus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Window {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Torus { dim: usize },
}

impl Window {
    pub fn unit_box(dim: usize) -> Self {
        Window::Box { lo: vec![0.0; dim], hi: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        match self {
            Window::Box { lo, .. } => lo.len(),
            Window::Torus { dim } => *dim,
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Window::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| b - a).product(),
            Window::Torus { .. } => 1.0,
        }
    }

    pub fn metric(&self) -> Metric {
        match self {
            Window::Box { lo, .. } => Metric::euclidean(lo.len()),
            Window::Torus { dim } => Metric::torus(*dim),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Window::Box { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() || lo.iter().zip(hi).any(|(a, b)| a >= b)
                {
                    return Err(Error::InvalidInput("degenerate box window".into()));
                }
            }
            Window::Torus { dim } => {
                if *dim == 0 {
                    return Err(Error::InvalidInput("torus window needs dim >= 1".into()));
                }
            }
        }
        Ok(())
    }
}

/// Intensity shape on a window.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum DensityKind {
    /// κ ≡ 1.
    Constant,
    /// Normalized Gaussian bump: κ(y) = (2πs²)^{-d/2} exp(-|y-c|²/(2s²)).
    Gaussian { center: Vec<f64>, scale: f64 },
    /// Piecewise-constant values on a regular lattice over the window box.
    Grid { shape: Vec<usize>, values: Vec<f64> },
}

/// A bounded density κ on a window together with its upper bound κ*.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensitySpec {
    pub kind: DensityKind,
    pub window: Window,
    pub kappa_star: f64,
}

impl DensitySpec {
    pub fn constant(window: Window) -> Self {
        DensitySpec { kind: DensityKind::Constant, window, kappa_star: 1.0 }
    }

    pub fn gaussian(window: Window, center: Vec<f64>, scale: f64) -> Result<Self> {
        let d = window.dim();
        if center.len() != d || scale <= 0.0 {
            return Err(Error::DensitySpec("gaussian center/scale malformed".into()));
        }
        let peak = (2.0 * std::f64::consts::PI * scale * scale).powf(-(d as f64) / 2.0);
        Ok(DensitySpec { kind: DensityKind::Gaussian { center, scale }, window, kappa_star: peak })
    }

    pub fn grid(window: Window, shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if shape.len() != window.dim()
            || shape.iter().any(|&s| s == 0)
            || values.len() != shape.iter().product::<usize>()
            || values.iter().any(|&v| !(v >= 0.0) || !v.is_finite())
        {
            return Err(Error::DensitySpec("grid density malformed".into()));
        }
        let kappa_star = values.iter().cloned().fold(0.0, f64::max);
        if kappa_star <= 0.0 {
            return Err(Error::DensitySpec("grid density identically zero".into()));
        }
        Ok(DensitySpec { kind: DensityKind::Grid { shape, values }, window, kappa_star })
    }

    /// Pointwise density; positions are window coordinates.
    pub fn kappa(&self, y: &[f64]) -> f64 {
        match &self.kind {
            DensityKind::Constant => 1.0,
            DensityKind::Gaussian { center, scale } => {
                let d = center.len() as f64;
                let q: f64 = y.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum();
                (2.0 * std::f64::consts::PI * scale * scale).powf(-d / 2.0)
                    * (-q / (2.0 * scale * scale)).exp()
            }
            DensityKind::Grid { shape, values } => {
                let (lo, hi) = match &self.window {
                    Window::Box { lo, hi } => (lo.clone(), hi.clone()),
                    Window::Torus { dim } => (vec![0.0; *dim], vec![1.0; *dim]),
                };
                let mut idx = 0usize;
                for k in 0..shape.len() {
                    let t = ((y[k] - lo[k]) / (hi[k] - lo[k])).clamp(0.0, 1.0);
                    let cell = ((t * shape[k] as f64) as usize).min(shape[k] - 1);
                    idx = idx * shape[k] + cell;
                }
                values[idx]
            }
        }
    }

    /// Largest |κ(x) - κ(y)| over grid pairs within distance `delta`, plus the
    /// κ-mass of the `delta`-shell near the window boundary (box windows);
    /// both should shrink linearly with `delta` for smooth densities.
    pub fn regularity_moduli(&self, delta: f64, grid_per_dim: usize) -> Result<(f64, f64)> {
        let (lo, hi) = match &self.window {
            Window::Box { lo, hi } => (lo.clone(), hi.clone()),
            Window::Torus { dim } => (vec![0.0; *dim], vec![1.0; *dim]),
        };
        let d = lo.len();
        let g = grid_per_dim.max(2);
        let mut sup_mod: f64 = 0.0;
        let mut boundary_mass = 0.0;
        let mut cell_vol = 1.0;
        for k in 0..d {
            cell_vol *= (hi[k] - lo[k]) / g as f64;
        }
        let mut idx = vec![0usize; d];
        loop {
            let y: Vec<f64> = (0..d)
                .map(|k| lo[k] + (idx[k] as f64 + 0.5) * (hi[k] - lo[k]) / g as f64)
                .collect();
            let base = self.kappa(&y);
            // Axis-aligned probes at distance delta (clamped inside).
            for k in 0..d {
                for s in [-1.0, 1.0] {
                    let mut z = y.clone();
                    z[k] = (z[k] + s * delta).clamp(lo[k], hi[k]);
                    sup_mod = sup_mod.max((self.kappa(&z) - base).abs());
                }
            }
            if matches!(self.window, Window::Box { .. }) {
                let edge = (0..d)
                    .map(|k| (y[k] - lo[k]).min(hi[k] - y[k]))
                    .fold(f64::INFINITY, f64::min);
                if edge <= delta {
                    boundary_mass += base * cell_vol;
                }
            }
            // Odometer increment over the d-dimensional grid.
            let mut k = 0;
            loop {
                if k == d {
                    return Ok((sup_mod, boundary_mass));
                }
                idx[k] += 1;
                if idx[k] < g {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
}

/// Homogeneous Poisson sample: count ~ Poisson(intensity × volume),
/// locations i.i.d. uniform over the window.
pub fn sample_homogeneous(intensity: f64, window: &Window, seed: u64) -> Result<PointCloud> {
    if !(intensity > 0.0) {
        return Err(Error::InvalidInput("intensity must be positive".into()));
    }
    window.validate()?;
    let mut r = rng::stream(seed, 0);
    let lambda = intensity * window.volume();
    let count = Poisson::new(lambda)
        .map_err(|e| Error::InvalidInput(format!("poisson: {e}")))?
        .sample(&mut r) as usize;
    let d = window.dim();
    let mut cloud = PointCloud::new(d, window.metric());
    let (lo, hi) = match window {
        Window::Box { lo, hi } => (lo.clone(), hi.clone()),
        Window::Torus { dim } => (vec![0.0; *dim], vec![1.0; *dim]),
    };
    let mut buf = vec![0.0; d];
    for _ in 0..count {
        for k in 0..d {
            buf[k] = lo[k] + (hi[k] - lo[k]) * r.random::<f64>();
        }
        cloud.push(&buf);
    }
    Ok(cloud)
}

/// Inhomogeneous Poisson sample by thinning a homogeneous one at rate
/// intensity × κ*.
pub fn sample_inhomogeneous(intensity: f64, spec: &DensitySpec, seed: u64) -> Result<PointCloud> {
    if spec.kappa_star <= 0.0 || !spec.kappa_star.is_finite() {
        return Err(Error::DensitySpec("upper bound must be finite and positive".into()));
    }
    let dense = sample_homogeneous(intensity * spec.kappa_star, &spec.window, seed)?;
    let mut r = rng::stream(seed, 1);
    let mut cloud = PointCloud::new(dense.dim, dense.metric.clone());
    for i in 0..dense.len() {
        let y = dense.point(i);
        let k = spec.kappa(y);
        if k > spec.kappa_star * (1.0 + 1e-12) {
            return Err(Error::DensitySpec(format!(
                "density {k} exceeds stated bound {} at {y:?}",
                spec.kappa_star
            )));
        }
        if r.random::<f64>() < k / spec.kappa_star {
            cloud.push(y);
        }
    }
    Ok(cloud)
}

/// Connected components of the geometric graph with edges {distance < r}.
#[derive(Clone, Debug)]
pub struct ClusterPartition {
    pub cluster_of: Vec<usize>,
    pub members: Vec<Vec<usize>>,
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

/// Grid-accelerated clustering at level r (strict inequality on distances).
pub fn clusters(cloud: &PointCloud, r: f64) -> Result<ClusterPartition> {
    if !(r > 0.0) {
        return Err(Error::InvalidInput("cluster level must be positive".into()));
    }
    let n = cloud.len();
    let d = cloud.dim;
    let mut uf = UnionFind::new(n);
    if n > 0 {
        // Cell widths are at least r so neighbors live in adjacent cells.
        let torus = matches!(cloud.metric.kind, crate::geometry::MetricKind::Torus);
        let (lo, extent): (Vec<f64>, Vec<f64>) = if torus {
            (vec![0.0; d], vec![cloud.metric.period; d])
        } else {
            let mut lo = vec![f64::INFINITY; d];
            let mut hi = vec![f64::NEG_INFINITY; d];
            for i in 0..n {
                for (k, &c) in cloud.point(i).iter().enumerate() {
                    lo[k] = lo[k].min(c);
                    hi[k] = hi[k].max(c);
                }
            }
            (lo.clone(), lo.iter().zip(&hi).map(|(a, b)| (b - a).max(1e-300)).collect())
        };
        let ncells: Vec<usize> =
            extent.iter().map(|&e| ((e / r).floor() as usize).clamp(1, 1 << 20)).collect();
        let cell_of = |p: &[f64]| -> Vec<usize> {
            (0..d)
                .map(|k| {
                    let w = extent[k] / ncells[k] as f64;
                    (((p[k] - lo[k]) / w) as usize).min(ncells[k] - 1)
                })
                .collect()
        };
        let mut buckets: std::collections::HashMap<Vec<usize>, Vec<usize>> =
            std::collections::HashMap::new();
        for i in 0..n {
            buckets.entry(cell_of(cloud.point(i))).or_default().push(i);
        }
        let r2 = r * r;
        let mut offsets = vec![vec![0isize; d]];
        for k in 0..d {
            let mut next = Vec::new();
            for o in &offsets {
                for s in [-1isize, 0, 1] {
                    let mut v = o.clone();
                    v[k] = s;
                    next.push(v);
                }
            }
            offsets = next;
        }
        offsets.dedup();
        for (cell, pts) in &buckets {
            for off in &offsets {
                let mut nb = Vec::with_capacity(d);
                let mut ok = true;
                for k in 0..d {
                    let c = cell[k] as isize + off[k];
                    let c = if torus {
                        c.rem_euclid(ncells[k] as isize) as usize
                    } else if c < 0 || c >= ncells[k] as isize {
                        ok = false;
                        break;
                    } else {
                        c as usize
                    };
                    nb.push(c);
                }
                if !ok {
                    continue;
                }
                if let Some(others) = buckets.get(&nb) {
                    for &i in pts {
                        for &j in others {
                            if j <= i {
                                continue;
                            }
                            let mut d2 = 0.0;
                            for k in 0..d {
                                let diff = if torus {
                                    crate::geometry::wrap_delta(
                                        cloud.point(i)[k] - cloud.point(j)[k],
                                        cloud.metric.period,
                                    )
                                } else {
                                    cloud.point(i)[k] - cloud.point(j)[k]
                                };
                                d2 += diff * diff;
                            }
                            if d2 < r2 {
                                uf.union(i, j);
                            }
                        }
                    }
                }
            }
        }
    }
    let mut root_to_id: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    let mut cluster_of = vec![0usize; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let root = uf.find(i);
        let id = *root_to_id.entry(root).or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        cluster_of[i] = id;
        members[id].push(i);
    }
    Ok(ClusterPartition { cluster_of, members })
}

/// Histogram of cluster sizes: size -> number of clusters.
pub fn cluster_census(cloud: &PointCloud, r: f64) -> Result<BTreeMap<usize, usize>> {
    let part = clusters(cloud, r)?;
    let mut census = BTreeMap::new();
    for m in &part.members {
        *census.entry(m.len()).or_insert(0) += 1;
    }
    Ok(census)
}

/// Cloud CSV: header `x0,x1,...`, one point per row, 17 significant digits.
pub fn cloud_to_csv(cloud: &PointCloud) -> String {
    let mut out = String::new();
    let header: Vec<String> = (0..cloud.dim).map(|k| format!("x{k}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for i in 0..cloud.len() {
        let row: Vec<String> = cloud.point(i).iter().map(|c| format!("{c:.16e}")).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// Parse a cloud CSV produced by [`cloud_to_csv`].
pub fn cloud_from_csv(text: &str, metric: Metric) -> Result<PointCloud> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::InvalidInput("empty cloud CSV".into()))?;
    let d = header.split(',').count();
    if d != metric.dim {
        return Err(Error::InvalidInput(format!(
            "cloud CSV has {d} columns, metric expects {}",
            metric.dim
        )));
    }
    let mut cloud = PointCloud::new(d, metric);
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|t| t.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| Error::InvalidInput(format!("cloud CSV line {}: {e}", ln + 2)))?;
        if row.len() != d {
            return Err(Error::InvalidInput(format!("cloud CSV line {} has wrong arity", ln + 2)));
        }
        cloud.push(&row);
    }
    Ok(cloud)
}

/// Sidecar metadata describing how a cloud file was produced.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CloudManifest {
    pub seed: u64,
    pub intensity: f64,
    pub window: Window,
    pub density: DensityKind,
    pub count: usize,
}
