//! Incremental 2-D Delaunay triangulation (Bowyer-Watson with a walking
//! point locator) and the Alpha filtration built on top of it.
//!
//! Hull handling uses a single symbolic ghost vertex: every directed hull
//! edge owns one ghost triangle, and conflict tests against ghost triangles
//! are half-plane (plus on-edge) tests, so no artificial far-away coordinate
//! ever enters a determinant. Cocircular ties (|det| below tolerance) leave
//! the existing diagonal in place; together with the fixed insertion order
//! this makes the output a deterministic function of the input point order.

use crate::error::Error;
use crate::geometry::{circumsphere, min_enclosing_ball, MetricKind, PointCloud};
use crate::Result;
use std::collections::HashMap;

use super::{FilteredComplex, Simplex};

/// Relative tolerance on the (scale-normalized) incircle determinant.
const INCIRCLE_TOL: f64 = 1e-10;
/// Relative tolerance deciding when a point sits on a hull edge's line.
const LINE_TOL: f64 = 1e-12;
/// Absolute tolerance on distances in the Gabriel (empty diametral disk) test.
const GABRIEL_TOL: f64 = 1e-10;

/// A finished triangulation: input points plus triangles as ascending vertex
/// triples, lexicographically sorted.
#[derive(Clone, Debug)]
pub struct Delaunay {
    pub points: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
}

impl Delaunay {
    /// Check the empty-circumdisk property directly against every point.
    /// Quadratic; intended for validation, not production paths.
    pub fn verify_empty_circle(&self, tol: f64) -> bool {
        for tri in &self.triangles {
            let pts: Vec<&[f64]> = tri.iter().map(|&v| &self.points[v][..]).collect();
            let ball = match circumsphere(&pts) {
                Ok(Some(b)) => b,
                _ => continue,
            };
            for (i, p) in self.points.iter().enumerate() {
                if tri.contains(&i) {
                    continue;
                }
                let d2 = (p[0] - ball.center[0]).powi(2) + (p[1] - ball.center[1]).powi(2);
                if d2 < (ball.radius - tol).max(0.0).powi(2) {
                    return false;
                }
            }
        }
        true
    }
}

fn orient2d(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Working mesh during incremental construction. Vertex index `ghost` is the
/// symbolic point "at infinity"; triangles containing it guard hull edges.
/// Real triangles are counterclockwise; in every triangle the cyclic directed
/// edge (tri[i+1] -> tri[i+2]) keeps the triangle's region on its left, which
/// for a ghost triangle is the open half-plane outside its hull edge.
struct Mesh {
    pts: Vec<[f64; 2]>,
    ghost: usize,
    tris: Vec<[usize; 3]>,
    adj: Vec<[Option<usize>; 3]>,
    alive: Vec<bool>,
    last: usize,
}

impl Mesh {
    fn ghost_slot(&self, t: usize) -> Option<usize> {
        (0..3).find(|&i| self.tris[t][i] == self.ghost)
    }

    /// Conflict test: strict circumdisk membership for real triangles, and
    /// for ghost triangles strict exteriority to the guarded hull edge (or
    /// landing on the open edge itself, which forces an edge split).
    fn in_disk(&self, t: usize, p: [f64; 2]) -> bool {
        let tri = self.tris[t];
        if let Some(k) = self.ghost_slot(t) {
            let u = self.pts[tri[(k + 1) % 3]];
            let v = self.pts[tri[(k + 2) % 3]];
            let o = orient2d(u, v, p);
            let m = (u[0] - p[0])
                .abs()
                .max((u[1] - p[1]).abs())
                .max((v[0] - p[0]).abs())
                .max((v[1] - p[1]).abs());
            let tol = LINE_TOL * m * m;
            if o > tol {
                return true;
            }
            if o < -tol {
                return false;
            }
            let dot = (p[0] - u[0]) * (v[0] - u[0]) + (p[1] - u[1]) * (v[1] - u[1]);
            let len2 = (v[0] - u[0]).powi(2) + (v[1] - u[1]).powi(2);
            return dot > 0.0 && dot < len2;
        }
        let a = self.pts[tri[0]];
        let b = self.pts[tri[1]];
        let c = self.pts[tri[2]];
        let rows = [
            [a[0] - p[0], a[1] - p[1]],
            [b[0] - p[0], b[1] - p[1]],
            [c[0] - p[0], c[1] - p[1]],
        ];
        let mut m: f64 = 0.0;
        for r in &rows {
            m = m.max(r[0].abs()).max(r[1].abs());
        }
        let det = rows[0][0] * (rows[1][1] * (rows[2][0].powi(2) + rows[2][1].powi(2)) - rows[2][1] * (rows[1][0].powi(2) + rows[1][1].powi(2)))
            - rows[0][1] * (rows[1][0] * (rows[2][0].powi(2) + rows[2][1].powi(2)) - rows[2][0] * (rows[1][0].powi(2) + rows[1][1].powi(2)))
            + (rows[0][0].powi(2) + rows[0][1].powi(2)) * (rows[1][0] * rows[2][1] - rows[1][1] * rows[2][0]);
        det > INCIRCLE_TOL * m.powi(4)
    }

    /// Walk from the last created triangle toward one in conflict with `p`
    /// (for an interior point, the triangle containing it).
    fn locate(&self, p: [f64; 2]) -> Result<usize> {
        let mut cur = self.last;
        let mut steps = 0usize;
        let cap = 3 * self.tris.len() + 64;
        'walk: while steps <= cap {
            steps += 1;
            let tri = self.tris[cur];
            if let Some(k) = self.ghost_slot(cur) {
                if self.in_disk(cur, p) {
                    return Ok(cur);
                }
                let u = self.pts[tri[(k + 1) % 3]];
                let v = self.pts[tri[(k + 2) % 3]];
                let next = if orient2d(u, v, p) < 0.0 {
                    // Interior side: drop back into the real mesh.
                    self.adj[cur][k]
                } else {
                    // Grazing the hull: ring-walk toward the nearer end.
                    let dot =
                        (p[0] - u[0]) * (v[0] - u[0]) + (p[1] - u[1]) * (v[1] - u[1]);
                    let len2 = (v[0] - u[0]).powi(2) + (v[1] - u[1]).powi(2);
                    if dot > len2 / 2.0 {
                        self.adj[cur][(k + 1) % 3]
                    } else {
                        self.adj[cur][(k + 2) % 3]
                    }
                };
                match next {
                    Some(nb) => cur = nb,
                    None => break 'walk,
                }
                continue;
            }
            for i in 0..3 {
                let a = tri[(i + 1) % 3];
                let b = tri[(i + 2) % 3];
                if orient2d(self.pts[a], self.pts[b], p) < 0.0 {
                    match self.adj[cur][i] {
                        Some(nb) => {
                            cur = nb;
                            continue 'walk;
                        }
                        None => break 'walk,
                    }
                }
            }
            return Ok(cur);
        }
        // Fallback: exhaustive scan (tolerance-induced walk cycles are
        // possible on symmetric inputs).
        for t in 0..self.tris.len() {
            if !self.alive[t] {
                continue;
            }
            if self.ghost_slot(t).is_some() {
                if self.in_disk(t, p) {
                    return Ok(t);
                }
                continue;
            }
            let tri = self.tris[t];
            let inside = (0..3).all(|i| {
                orient2d(self.pts[tri[(i + 1) % 3]], self.pts[tri[(i + 2) % 3]], p) >= 0.0
            });
            if inside {
                return Ok(t);
            }
        }
        Err(Error::Degenerate("triangulation point location failed".into()))
    }

    fn insert(&mut self, idx: usize) -> Result<()> {
        let p = self.pts[idx];
        let t0 = self.locate(p)?;
        for &v in &self.tris[t0] {
            if v != self.ghost {
                let d2 = (self.pts[v][0] - p[0]).powi(2) + (self.pts[v][1] - p[1]).powi(2);
                if d2 < 1e-24 {
                    return Err(Error::InvalidInput(format!(
                        "duplicate points at indices {v} and {idx}"
                    )));
                }
            }
        }
        // Grow the cavity of conflicting triangles around t0.
        let mut in_cavity: HashMap<usize, bool> = HashMap::new();
        in_cavity.insert(t0, true);
        let mut stack = vec![t0];
        let mut cavity = vec![t0];
        while let Some(t) = stack.pop() {
            for i in 0..3 {
                if let Some(nb) = self.adj[t][i] {
                    if let std::collections::hash_map::Entry::Vacant(e) = in_cavity.entry(nb) {
                        if self.in_disk(nb, p) {
                            e.insert(true);
                            stack.push(nb);
                            cavity.push(nb);
                        } else {
                            e.insert(false);
                        }
                    }
                }
            }
        }
        // Boundary half-edges keep the cavity on their left.
        let mut boundary: Vec<(usize, usize, Option<usize>)> = Vec::new();
        for &t in &cavity {
            for i in 0..3 {
                let nb = self.adj[t][i];
                let nb_in = nb.map(|x| in_cavity.get(&x) == Some(&true)).unwrap_or(false);
                if !nb_in {
                    boundary.push((self.tris[t][(i + 1) % 3], self.tris[t][(i + 2) % 3], nb));
                }
            }
        }
        for &t in &cavity {
            self.alive[t] = false;
        }
        // Fan the new point to every boundary edge and stitch adjacency.
        let mut half: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        let mut created = Vec::with_capacity(boundary.len());
        for &(a, b, outer) in &boundary {
            let t_new = self.tris.len();
            self.tris.push([a, b, idx]);
            self.adj.push([None, None, Some(t_new)]);
            self.alive.push(true);
            self.adj[t_new][2] = outer;
            if let Some(o) = outer {
                for j in 0..3 {
                    let oa = self.tris[o][(j + 1) % 3];
                    let ob = self.tris[o][(j + 2) % 3];
                    if (oa, ob) == (b, a) {
                        self.adj[o][j] = Some(t_new);
                    }
                }
            }
            // Internal fan edges: opposite vertex a is edge (b, idx); opposite
            // vertex b is edge (idx, a).
            for (key, slot) in [((b, idx), 0usize), ((idx, a), 1usize)] {
                let rev = (key.1, key.0);
                if let Some(&(ot, oslot)) = half.get(&rev) {
                    self.adj[t_new][slot] = Some(ot);
                    self.adj[ot][oslot] = Some(t_new);
                } else {
                    half.insert(key, (t_new, slot));
                }
            }
            created.push(t_new);
        }
        if created.is_empty() {
            return Err(Error::Degenerate("empty insertion cavity".into()));
        }
        // Prefer a real triangle as the next walk start.
        self.last = *created
            .iter()
            .find(|&&t| self.ghost_slot(t).is_none())
            .unwrap_or(&created[0]);
        Ok(())
    }
}

/// Delaunay triangulation of a planar Euclidean cloud (at least 3 points,
/// duplicates rejected, fully collinear input rejected).
pub fn delaunay(cloud: &PointCloud) -> Result<Delaunay> {
    if cloud.dim != 2 || cloud.metric.kind != MetricKind::Euclidean {
        return Err(Error::InvalidInput("triangulation requires a 2-D Euclidean cloud".into()));
    }
    let n = cloud.len();
    if n < 3 {
        return Err(Error::InvalidInput("triangulation requires at least 3 points".into()));
    }
    let pts: Vec<[f64; 2]> = (0..n).map(|i| [cloud.point(i)[0], cloud.point(i)[1]]).collect();
    {
        let mut seen = HashMap::new();
        for (i, p) in pts.iter().enumerate() {
            if let Some(j) = seen.insert((p[0].to_bits(), p[1].to_bits()), i) {
                return Err(Error::InvalidInput(format!("duplicate points at indices {j} and {i}")));
            }
        }
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &pts {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    // Insertion order: a spatial grid snake for walk locality; a pure
    // function of the coordinates, so output stays deterministic.
    let mut order: Vec<usize> = (0..n).collect();
    let g = ((n as f64 / 4.0).sqrt().ceil() as usize).max(1);
    let wx = (hi[0] - lo[0]).max(1e-300);
    let wy = (hi[1] - lo[1]).max(1e-300);
    order.sort_by_key(|&i| {
        let p = pts[i];
        let gx = (((p[0] - lo[0]) / wx * g as f64) as usize).min(g - 1);
        let gy = (((p[1] - lo[1]) / wy * g as f64) as usize).min(g - 1);
        let col = if gy % 2 == 0 { gx } else { g - 1 - gx };
        (gy, col, i)
    });
    // Seed with the first non-collinear triple in insertion order.
    let pa = order[0];
    let pb = order[1];
    let mut seed = None;
    for pos in 2..n {
        let cand = order[pos];
        let o = orient2d(pts[pa], pts[pb], pts[cand]);
        let m = (pts[pb][0] - pts[pa][0])
            .abs()
            .max((pts[pb][1] - pts[pa][1]).abs())
            .max((pts[cand][0] - pts[pa][0]).abs())
            .max((pts[cand][1] - pts[pa][1]).abs());
        if o.abs() > LINE_TOL * m * m {
            seed = Some((pos, o));
            break;
        }
    }
    let (pos, o) = match seed {
        Some(s) => s,
        None => return Err(Error::Degenerate("all points collinear".into())),
    };
    let pc = order.remove(pos);
    let (a, b, c) = if o > 0.0 { (pa, pb, pc) } else { (pb, pa, pc) };
    let ghost = n;
    let mut mesh = Mesh {
        pts,
        ghost,
        // Real seed triangle plus its three hull-edge ghosts.
        tris: vec![[a, b, c], [b, a, ghost], [c, b, ghost], [a, c, ghost]],
        adj: vec![
            [Some(2), Some(3), Some(1)],
            [Some(3), Some(2), Some(0)],
            [Some(1), Some(3), Some(0)],
            [Some(2), Some(1), Some(0)],
        ],
        alive: vec![true; 4],
        last: 0,
    };
    for &i in &order[2..] {
        mesh.insert(i)?;
    }
    let mut triangles: Vec<[usize; 3]> = mesh
        .tris
        .iter()
        .zip(&mesh.alive)
        .filter(|&(tri, &alive)| alive && tri.iter().all(|&v| v < n))
        .map(|(tri, _)| {
            let mut t = *tri;
            t.sort_unstable();
            t
        })
        .collect();
    triangles.sort_unstable();
    if triangles.is_empty() {
        return Err(Error::Degenerate("all points collinear".into()));
    }
    Ok(Delaunay { points: mesh.pts, triangles })
}

/// Alpha filtration of a planar cloud: triangles at their circumradius,
/// edges at half their length when the diametral disk is empty (Gabriel)
/// and at the smallest incident triangle value otherwise, vertices at 0.
pub fn alpha_filtration(cloud: &PointCloud) -> Result<FilteredComplex> {
    alpha_filtration_capped(cloud, None)
}

/// Alpha filtration truncated at `r_max`: simplices with larger values are
/// dropped (vertices always stay). Persistence pairs with death within the
/// cap are identical to the full filtration's.
pub fn alpha_filtration_capped(cloud: &PointCloud, r_max: Option<f64>) -> Result<FilteredComplex> {
    let dt = delaunay(cloud)?;
    let cap = r_max.unwrap_or(f64::INFINITY);
    let mut simplices: Vec<Simplex> = (0..cloud.len() as u32)
        .map(|i| Simplex { vertices: vec![i], value: 0.0 })
        .collect();
    // Triangle values plus, per edge, the incident triangle values and
    // opposite vertices needed for the Gabriel test.
    let mut edge_info: HashMap<(u32, u32), (Vec<f64>, Vec<usize>)> = HashMap::new();
    let mut tri_vals = Vec::with_capacity(dt.triangles.len());
    for tri in &dt.triangles {
        let pts: Vec<&[f64]> = tri.iter().map(|&v| &dt.points[v][..]).collect();
        let val = match circumsphere(&pts)? {
            Some(ball) => ball.radius,
            None => min_enclosing_ball(&pts, &cloud.metric)?.radius,
        };
        tri_vals.push(val);
        for k in 0..3 {
            let (u, v) = (tri[k], tri[(k + 1) % 3]);
            let (a, b) = (u.min(v) as u32, u.max(v) as u32);
            let opp = tri[(k + 2) % 3];
            let entry = edge_info.entry((a, b)).or_default();
            entry.0.push(val);
            entry.1.push(opp);
        }
    }
    for ((a, b), (vals, opps)) in &edge_info {
        let pa = &dt.points[*a as usize];
        let pb = &dt.points[*b as usize];
        let half = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt() / 2.0;
        let mid = [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0];
        let thr = (half - GABRIEL_TOL).max(0.0).powi(2);
        let gabriel = opps.iter().all(|&w| {
            let pw = &dt.points[w];
            (pw[0] - mid[0]).powi(2) + (pw[1] - mid[1]).powi(2) >= thr
        });
        let value = if gabriel {
            half
        } else {
            vals.iter().cloned().fold(f64::INFINITY, f64::min)
        };
        if value <= cap {
            simplices.push(Simplex { vertices: vec![*a, *b], value });
        }
    }
    for (tri, val) in dt.triangles.iter().zip(&tri_vals) {
        if *val <= cap {
            simplices.push(Simplex {
                vertices: vec![tri[0] as u32, tri[1] as u32, tri[2] as u32],
                value: *val,
            });
        }
    }
    FilteredComplex::assemble(cloud.clone(), simplices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Metric;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn cloud_from(rows: &[[f64; 2]]) -> PointCloud {
        PointCloud::from_rows(
            rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>().as_slice(),
            Metric::euclidean(2),
        )
        .unwrap()
    }

    #[test]
    fn square_gives_two_triangles_sharing_a_diagonal() {
        let cloud = cloud_from(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        let dt = delaunay(&cloud).unwrap();
        assert_eq!(dt.triangles.len(), 2);
        let mut counts = HashMap::new();
        for tri in &dt.triangles {
            for k in 0..3 {
                let e = (tri[k].min(tri[(k + 1) % 3]), tri[k].max(tri[(k + 1) % 3]));
                *counts.entry(e).or_insert(0) += 1;
            }
        }
        let shared: Vec<_> = counts.iter().filter(|(_, &c)| c == 2).collect();
        assert_eq!(shared.len(), 1);
        let diag = *shared[0].0;
        assert!(diag == (0, 2) || diag == (1, 3));
    }

    #[test]
    fn random_clouds_satisfy_empty_circle() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..5 {
            let rows: Vec<[f64; 2]> = (0..300).map(|_| [rng.random(), rng.random()]).collect();
            let cloud = cloud_from(&rows);
            let dt = delaunay(&cloud).unwrap();
            assert!(dt.verify_empty_circle(1e-10));
            // Euler: for n points with h hull vertices, t = 2n - 2 - h.
            assert!(dt.triangles.len() >= 2 * rows.len() - 2 - rows.len() / 2);
        }
    }

    #[test]
    fn duplicates_and_collinear_are_rejected() {
        let cloud = cloud_from(&[[0.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, 1.0]]);
        assert!(matches!(delaunay(&cloud), Err(Error::InvalidInput(_))));
        let cloud = cloud_from(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]);
        assert!(matches!(delaunay(&cloud), Err(Error::Degenerate(_))));
    }

    #[test]
    fn alpha_square_matches_hand_computation() {
        let cloud = cloud_from(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        let fc = alpha_filtration(&cloud).unwrap();
        // 4 vertices, 5 edges, 2 triangles.
        assert_eq!(fc.simplices.len(), 11);
        let tri_vals: Vec<f64> =
            fc.simplices.iter().filter(|s| s.dim() == 2).map(|s| s.value).collect();
        for v in tri_vals {
            assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        }
        // Side edges are Gabriel at 1/2; the diagonal enters at sqrt(2)/2.
        let mut edge_vals: Vec<f64> =
            fc.simplices.iter().filter(|s| s.dim() == 1).map(|s| s.value).collect();
        edge_vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for v in &edge_vals[..4] {
            assert!((v - 0.5).abs() < 1e-12);
        }
        assert!((edge_vals[4] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn regular_grid_with_cocircular_ties_is_valid() {
        let rows: Vec<[f64; 2]> =
            (0..10).flat_map(|i| (0..10).map(move |j| [i as f64, j as f64])).collect();
        let cloud = cloud_from(&rows);
        let dt = delaunay(&cloud).unwrap();
        // Every unit square splits into two triangles: 2 * 81.
        assert_eq!(dt.triangles.len(), 162);
        assert!(dt.verify_empty_circle(1e-9));
    }

    #[test]
    fn collinear_points_on_hull_edges_are_handled() {
        // Points on the boundary lines of earlier triangles exercise the
        // on-edge ghost rule.
        let cloud = cloud_from(&[
            [0.0, 0.0],
            [4.0, 0.0],
            [2.0, 3.0],
            [2.0, 0.0],
            [1.0, 0.0],
            [3.0, 0.0],
            [5.0, 0.0],
        ]);
        let dt = delaunay(&cloud).unwrap();
        assert!(dt.verify_empty_circle(1e-10));
        // All bottom points are hull vertices; Euler: t = 2n - 2 - h.
        assert_eq!(dt.triangles.len(), 2 * 7 - 2 - 7);
    }
}
