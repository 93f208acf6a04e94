//! Representative loops for planar 1-dimensional features.
//!
//! At the feature's birth time the 1-skeleton of the filtration is a planar
//! graph; the feature's class is represented by the outer boundary of the
//! face containing the feature center (the death triangle's circumcenter).
//! Faces are traversed with the usual rotation-system orbit walk; among the
//! counter-clockwise orbits strictly winding around the center we take the
//! one of smallest area, then strip spurs (edges walked twice back-to-back).

use crate::error::Error;
use crate::filtration::FilteredComplex;
use crate::geometry::MetricKind;
use crate::persistence::FeatureRecord;
use crate::Result;
use std::collections::HashMap;

/// Ordered vertex cycle representing a 1-dimensional feature at birth.
pub fn associated_loop(feature: &FeatureRecord, fc: &FilteredComplex) -> Result<Vec<u32>> {
    if feature.dim != 1 {
        return Err(Error::InvalidInput("loops are defined for 1-dimensional features".into()));
    }
    if fc.cloud.dim != 2 || fc.cloud.metric.kind != MetricKind::Euclidean {
        return Err(Error::InvalidInput("loop extraction requires a planar Euclidean cloud".into()));
    }
    let cutoff = feature.birth + 1e-12;
    let mut adj: HashMap<u32, Vec<u32>> = HashMap::new();
    for s in &fc.simplices {
        if s.dim() == 1 && s.value <= cutoff {
            adj.entry(s.vertices[0]).or_default().push(s.vertices[1]);
            adj.entry(s.vertices[1]).or_default().push(s.vertices[0]);
        }
    }
    if adj.is_empty() {
        return Err(Error::LoopExtraction("no edges at the birth time".into()));
    }
    let coord = |v: u32| {
        let p = fc.cloud.point(v as usize);
        [p[0], p[1]]
    };
    // Rotation system: neighbors in counter-clockwise angular order.
    for (&v, nbrs) in adj.iter_mut() {
        let c = coord(v);
        nbrs.sort_unstable();
        nbrs.dedup();
        nbrs.sort_by(|&a, &b| {
            let pa = coord(a);
            let pb = coord(b);
            let ta = (pa[1] - c[1]).atan2(pa[0] - c[0]);
            let tb = (pb[1] - c[1]).atan2(pb[0] - c[0]);
            ta.partial_cmp(&tb).unwrap().then(a.cmp(&b))
        });
    }
    // Face orbits with the face on the left: next(u->v) = (v->w) where w is
    // the CCW-predecessor of u around v.
    let next_dir = |u: u32, v: u32| -> (u32, u32) {
        let ring = &adj[&v];
        let pos = ring.iter().position(|&x| x == u).unwrap();
        let w = ring[(pos + ring.len() - 1) % ring.len()];
        (v, w)
    };
    let mut visited: HashMap<(u32, u32), bool> = HashMap::new();
    let z = [feature.center[0], feature.center[1]];
    let mut best: Option<(f64, Vec<u32>)> = None;
    let mut starts: Vec<(u32, u32)> = adj
        .iter()
        .flat_map(|(&u, nbrs)| nbrs.iter().map(move |&v| (u, v)))
        .collect();
    starts.sort_unstable();
    for start in starts {
        if visited.contains_key(&start) {
            continue;
        }
        let mut walk = Vec::new();
        let mut area = 0.0;
        let mut angle = 0.0;
        let mut cur = start;
        loop {
            visited.insert(cur, true);
            walk.push(cur.0);
            let a = coord(cur.0);
            let b = coord(cur.1);
            area += a[0] * b[1] - b[0] * a[1];
            let (ax, ay) = (a[0] - z[0], a[1] - z[1]);
            let (bx, by) = (b[0] - z[0], b[1] - z[1]);
            angle += (ax * by - ay * bx).atan2(ax * bx + ay * by);
            cur = next_dir(cur.0, cur.1);
            if cur == start {
                break;
            }
        }
        area /= 2.0;
        let winding = (angle / (2.0 * std::f64::consts::PI)).round() as i64;
        if area > 1e-18 && winding != 0 {
            if best.as_ref().map(|(ba, _)| area < *ba).unwrap_or(true) {
                best = Some((area, walk));
            }
        }
    }
    let (_, walk) = best.ok_or_else(|| {
        Error::LoopExtraction("no bounded face encloses the feature center".into())
    })?;
    let cycle = strip_spurs(walk);
    if cycle.len() < 3 {
        return Err(Error::LoopExtraction("face boundary degenerates to a spur".into()));
    }
    Ok(canonical_rotation(cycle))
}

/// Remove back-and-forth excursions (…, a, b, a, …) from a closed walk.
fn strip_spurs(mut walk: Vec<u32>) -> Vec<u32> {
    loop {
        let n = walk.len();
        if n < 3 {
            return walk;
        }
        let mut removed = false;
        for i in 0..n {
            let prev = walk[(i + n - 1) % n];
            let next = walk[(i + 1) % n];
            if prev == next {
                // Drop the spur tip and one copy of its base.
                let j = (i + 1) % n;
                if j > i {
                    walk.remove(j);
                    walk.remove(i);
                } else {
                    walk.remove(i);
                    walk.remove(j);
                }
                removed = true;
                break;
            }
        }
        if !removed {
            return walk;
        }
    }
}

/// Rotate the cycle so it starts at its smallest vertex (direction is kept).
fn canonical_rotation(cycle: Vec<u32>) -> Vec<u32> {
    let pos = cycle
        .iter()
        .enumerate()
        .min_by_key(|(_, &v)| v)
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut out = Vec::with_capacity(cycle.len());
    out.extend_from_slice(&cycle[pos..]);
    out.extend_from_slice(&cycle[..pos]);
    out
}
