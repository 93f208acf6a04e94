//! Metric primitives: Euclidean and flat-torus distances, smallest enclosing
//! balls (Welzl move-to-front), circumspheres, and the 3^d torus tiling.
//!
//! Filtration values, deathtime radii and feature centers all come from here,
//! so tolerances are pinned once: `MEB_TOL2` (absolute, on squared radii) for
//! ball membership and `DEGENERATE_DET_TOL` (relative to inter-point scale)
//! for affine degeneracy.

use crate::error::Error;
use crate::Result;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

/// Absolute tolerance on squared radii for ball-membership tests.
pub const MEB_TOL2: f64 = 1e-12;
/// Scale-normalized determinant threshold below which a circumsphere input
/// counts as affinely dependent.
pub const DEGENERATE_DET_TOL: f64 = 1e-12;
/// Equidistance tolerance for circumsphere verification.
pub const CIRCUM_EQ_TOL: f64 = 1e-10;

/// Which metric a point cloud lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricKind {
    Euclidean,
    Torus,
}

/// A metric space: ℝ^d or the flat torus ([0, period)^d with wrap-around).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub kind: MetricKind,
    pub dim: usize,
    /// Wrap period; 1 for the unit torus, ignored for Euclidean space.
    pub period: f64,
}

impl Metric {
    pub fn euclidean(dim: usize) -> Self {
        Metric { kind: MetricKind::Euclidean, dim, period: 1.0 }
    }

    /// The unit flat torus [0,1)^d.
    pub fn torus(dim: usize) -> Self {
        Metric { kind: MetricKind::Torus, dim, period: 1.0 }
    }
}

/// A closed ball: center plus nonnegative radius.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    /// Membership with the squared-radius tolerance used everywhere.
    pub fn contains(&self, p: &[f64]) -> bool {
        sq_dist(&self.center, p) <= self.radius * self.radius + MEB_TOL2
    }
}

/// A finite point set with an attached metric; the universe of every
/// computation. Coordinates are stored flat, `dim` per point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    pub dim: usize,
    pub coords: Vec<f64>,
    pub metric: Metric,
}

impl PointCloud {
    pub fn new(dim: usize, metric: Metric) -> Self {
        PointCloud { dim, coords: Vec::new(), metric }
    }

    /// Build from explicit rows; every row must have length `dim`.
    pub fn from_rows(rows: &[Vec<f64>], metric: Metric) -> Result<Self> {
        let dim = metric.dim;
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "point of dimension {} in a {}-dimensional cloud",
                    r.len(),
                    dim
                )));
            }
            coords.extend_from_slice(r);
        }
        Ok(PointCloud { dim, coords, metric })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn push(&mut self, p: &[f64]) {
        debug_assert_eq!(p.len(), self.dim);
        self.coords.extend_from_slice(p);
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Distance between points `i` and `j` under the cloud's metric.
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        distance(self.point(i), self.point(j), &self.metric)
            .expect("stored points always match the cloud dimension")
    }
}

fn sq_dist(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Euclidean or toroidal distance.
///
/// On the torus the minimum over the 3^d nearest lattice translates decomposes
/// coordinate-wise (each coordinate independently takes the shorter way
/// around), which is what is computed here.
pub fn distance(p: &[f64], q: &[f64], m: &Metric) -> Result<f64> {
    if p.len() != m.dim || q.len() != m.dim {
        return Err(Error::InvalidInput(format!(
            "distance: points of dimension {}/{} in metric of dimension {}",
            p.len(),
            q.len(),
            m.dim
        )));
    }
    match m.kind {
        MetricKind::Euclidean => Ok(sq_dist(p, q).sqrt()),
        MetricKind::Torus => {
            let mut s = 0.0;
            for (a, b) in p.iter().zip(q) {
                let d = (a - b).abs() % m.period;
                let d = d.min(m.period - d);
                s += d * d;
            }
            Ok(s.sqrt())
        }
    }
}

/// Wrap a coordinate into [0, period).
pub fn wrap_coord(x: f64, period: f64) -> f64 {
    let y = x % period;
    if y < 0.0 {
        y + period
    } else {
        y
    }
}

/// Signed per-coordinate difference wrapped into (−period/2, period/2].
pub(crate) fn wrap_delta(d: f64, period: f64) -> f64 {
    let mut y = d % period;
    if y > period / 2.0 {
        y -= period;
    } else if y <= -period / 2.0 {
        y += period;
    }
    y
}

/// Smallest enclosing ball of at most d+2 points.
///
/// Exact Welzl move-to-front recursion over at most d+1 support points; the
/// input order is first shuffled with a fixed seed so the recursion path (and
/// hence any last-bit jitter) is reproducible for a given input order.
/// On the torus the points are isometrically embedded in a local chart first
/// (requires pairwise spread < period/4) and the center wrapped back.
pub fn min_enclosing_ball(points: &[&[f64]], m: &Metric) -> Result<Ball> {
    if points.is_empty() {
        return Err(Error::InvalidInput("min_enclosing_ball: empty input".into()));
    }
    if points.len() > m.dim + 2 {
        return Err(Error::InvalidInput(format!(
            "min_enclosing_ball: {} points exceed d+2 = {}",
            points.len(),
            m.dim + 2
        )));
    }
    for p in points {
        if p.len() != m.dim {
            return Err(Error::InvalidInput("min_enclosing_ball: dimension mismatch".into()));
        }
    }
    match m.kind {
        MetricKind::Euclidean => Ok(meb_euclidean(points)),
        MetricKind::Torus => {
            let chart = embed_torus_points(points, m)?;
            let refs: Vec<&[f64]> = chart.iter().map(|p| p.as_slice()).collect();
            let mut ball = meb_euclidean(&refs);
            for c in ball.center.iter_mut() {
                *c = wrap_coord(*c, m.period);
            }
            Ok(ball)
        }
    }
}

/// Embed torus points into a common Euclidean chart anchored at the first
/// point. Exact isometry on the set as long as all pairwise distances are
/// below period/4; larger spreads are rejected.
pub fn embed_torus_points(points: &[&[f64]], m: &Metric) -> Result<Vec<Vec<f64>>> {
    let anchor = points[0];
    let chart: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            p.iter()
                .zip(anchor)
                .map(|(x, a)| a + wrap_delta(x - a, m.period))
                .collect()
        })
        .collect();
    for i in 0..chart.len() {
        for j in (i + 1)..chart.len() {
            let chart_d = sq_dist(&chart[i], &chart[j]).sqrt();
            if chart_d >= m.period / 4.0 {
                return Err(Error::NotEmbeddable(format!(
                    "torus spread {chart_d:.6} ≥ period/4"
                )));
            }
        }
    }
    Ok(chart)
}

fn meb_euclidean(points: &[&[f64]]) -> Ball {
    // Fixed shuffle seed: reproducible recursion for a given input order.
    use rand::SeedableRng;
    let mut order: Vec<usize> = (0..points.len()).collect();
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(0x57e1_21_b0a11);
    order.shuffle(&mut rng);

    let dim = points[0].len();
    let mut boundary: Vec<&[f64]> = Vec::with_capacity(dim + 1);
    welzl(points, &mut order, points.len(), &mut boundary, dim)
}

/// Welzl recursion with move-to-front: ball of `order[..n]` with `boundary`
/// forced onto the sphere.
fn welzl<'a>(
    points: &[&'a [f64]],
    order: &mut Vec<usize>,
    n: usize,
    boundary: &mut Vec<&'a [f64]>,
    dim: usize,
) -> Ball {
    if n == 0 || boundary.len() == dim + 1 {
        return ball_of_boundary(boundary, dim);
    }
    let idx = order[n - 1];
    let ball = welzl(points, order, n - 1, boundary, dim);
    if ball.radius >= 0.0 && ball.contains(points[idx]) {
        return ball;
    }
    boundary.push(points[idx]);
    let ball = welzl(points, order, n - 1, boundary, dim);
    boundary.pop();
    // Move to front: support points get re-tested first higher up.
    order[..n].rotate_right(1);
    ball
}

/// Smallest ball with all of `boundary` on its sphere (the circumball of the
/// affine simplex they span). Empty boundary yields an empty sentinel ball.
fn ball_of_boundary(boundary: &[&[f64]], dim: usize) -> Ball {
    match boundary.len() {
        0 => Ball { center: vec![0.0; dim], radius: -1.0 },
        1 => Ball { center: boundary[0].to_vec(), radius: 0.0 },
        _ => {
            let p0 = boundary[0];
            let k = boundary.len() - 1;
            // Gram system: (p_i−p_0)·(c−p_0) = |p_i−p_0|²/2.
            let mut a = vec![vec![0.0; k]; k];
            let mut b = vec![0.0; k];
            for i in 0..k {
                let vi: Vec<f64> = boundary[i + 1].iter().zip(p0).map(|(x, y)| x - y).collect();
                for j in 0..k {
                    let vj: Vec<f64> =
                        boundary[j + 1].iter().zip(p0).map(|(x, y)| x - y).collect();
                    a[i][j] = vi.iter().zip(&vj).map(|(x, y)| x * y).sum();
                }
                b[i] = a[i][i] / 2.0;
            }
            match solve_small(&mut a, &mut b) {
                Some(lambda) => {
                    let mut center = p0.to_vec();
                    for (i, l) in lambda.iter().enumerate() {
                        for (c, (x, y)) in
                            center.iter_mut().zip(boundary[i + 1].iter().zip(p0))
                        {
                            *c += l * (x - y);
                        }
                    }
                    let radius = sq_dist(&center, p0).sqrt();
                    Ball { center, radius }
                }
                // Affinely dependent boundary: fall back to the diametral pair
                // span — callers only reach this on degenerate inputs.
                None => {
                    let mut best = Ball { center: boundary[0].to_vec(), radius: 0.0 };
                    for i in 0..boundary.len() {
                        for j in (i + 1)..boundary.len() {
                            let c: Vec<f64> = boundary[i]
                                .iter()
                                .zip(boundary[j])
                                .map(|(x, y)| (x + y) / 2.0)
                                .collect();
                            let r = sq_dist(boundary[i], boundary[j]).sqrt() / 2.0;
                            if r > best.radius {
                                best = Ball { center: c, radius: r };
                            }
                        }
                    }
                    best
                }
            }
        }
    }
}

/// Gaussian elimination with partial pivoting for the tiny SPD systems above.
/// Returns None when the matrix is numerically singular.
fn solve_small(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let scale: f64 = a
        .iter()
        .flat_map(|r| r.iter().map(|x| x.abs()))
        .fold(0.0, f64::max)
        .max(1e-300);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[piv][col].abs() < 1e-14 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in (col + 1)..n {
            s -= a[col][k] * x[k];
        }
        x[col] = s / a[col][col];
    }
    Some(x)
}

/// Circumsphere of exactly d+1 points, or `None` when they are affinely
/// dependent (scale-normalized determinant below `DEGENERATE_DET_TOL`).
pub fn circumsphere(points: &[&[f64]]) -> Result<Option<Ball>> {
    if points.is_empty() {
        return Err(Error::InvalidInput("circumsphere: empty input".into()));
    }
    let dim = points[0].len();
    if points.len() != dim + 1 {
        return Err(Error::InvalidInput(format!(
            "circumsphere: need exactly d+1 = {} points, got {}",
            dim + 1,
            points.len()
        )));
    }
    let p0 = points[0];
    let mut a = vec![vec![0.0; dim]; dim];
    let mut b = vec![0.0; dim];
    let mut scale2: f64 = 0.0;
    for i in 0..dim {
        for c in 0..dim {
            a[i][c] = points[i + 1][c] - p0[c];
        }
        let norm2: f64 = a[i].iter().map(|x| x * x).sum();
        scale2 = scale2.max(norm2);
        b[i] = norm2 / 2.0;
    }
    // Degeneracy on the scale-normalized edge matrix.
    let det = det_small(&a);
    let norm = scale2.powf(dim as f64 / 2.0).max(1e-300);
    if (det / norm).abs() < DEGENERATE_DET_TOL {
        return Ok(None);
    }
    let mut aa = a.clone();
    let mut bb = b.clone();
    let x = match solve_small(&mut aa, &mut bb) {
        Some(x) => x,
        None => return Ok(None),
    };
    let center: Vec<f64> = p0.iter().enumerate().map(|(c, v)| v + x[c]).collect();
    let radius = sq_dist(&center, p0).sqrt();
    debug_assert!(
        points
            .iter()
            .all(|p| (sq_dist(&center, p).sqrt() - radius).abs() < CIRCUM_EQ_TOL * radius.max(1.0)),
        "circumcenter equidistance violated"
    );
    Ok(Some(Ball { center, radius }))
}

fn det_small(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        if m[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            m.swap(col, piv);
            det = -det;
        }
        det *= m[col][col];
        for row in (col + 1)..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    det
}

/// 3^d tiling of a torus cloud into Euclidean space, with a map from lifted
/// index back to the original index. Offsets run over {−1, 0, 1}^d so the
/// fundamental domain sits centered in the lift.
pub fn torus_tile(cloud: &PointCloud) -> Result<(PointCloud, Vec<usize>)> {
    if cloud.metric.kind != MetricKind::Torus {
        return Err(Error::InvalidInput("torus_tile: cloud is not toroidal".into()));
    }
    let d = cloud.dim;
    let period = cloud.metric.period;
    let copies = 3usize.pow(d as u32);
    let mut lifted = PointCloud::new(d, Metric::euclidean(d));
    let mut provenance = Vec::with_capacity(cloud.len() * copies);
    let mut offset = vec![0i32; d];
    for tile in 0..copies {
        let mut t = tile;
        for o in offset.iter_mut() {
            *o = (t % 3) as i32 - 1;
            t /= 3;
        }
        for (i, p) in cloud.iter().enumerate() {
            let shifted: Vec<f64> =
                p.iter().zip(&offset).map(|(x, &o)| x + o as f64 * period).collect();
            lifted.push(&shifted);
            provenance.push(i);
        }
    }
    Ok((lifted, provenance))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welzl_matches_brute_force_on_random_triples() {
        use rand::Rng;
        let mut rng = crate::rng::stream(11, 0);
        let m = Metric::euclidean(2);
        for _ in 0..200 {
            let pts: Vec<Vec<f64>> =
                (0..3).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
            let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
            let ball = min_enclosing_ball(&refs, &m).unwrap();
            for p in &refs {
                assert!(ball.contains(p));
            }
            // Minimality: strictly smaller radius must exclude some point.
            let r_half_longest = (0..3)
                .flat_map(|i| (0..3).map(move |j| (i, j)))
                .filter(|(i, j)| i < j)
                .map(|(i, j)| sq_dist(&pts[i], &pts[j]).sqrt() / 2.0)
                .fold(0.0, f64::max);
            assert!(ball.radius >= r_half_longest - 1e-9);
        }
    }
}
