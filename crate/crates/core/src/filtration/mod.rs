//! Filtered simplicial complexes: brute-force Čech for small point sets,
//! Vietoris-Rips, and (in [`delaunay`]) Delaunay triangulations and the 2-D
//! Alpha complex.
//!
//! A [`FilteredComplex`] is always closed under faces, monotone (faces enter
//! no later than cofaces), and sorted in the canonical reduction order
//! (value, dimension, lexicographic vertices); ties are broken the same way
//! everywhere so pairings are reproducible across platforms.

pub mod delaunay;

pub use delaunay::{alpha_filtration, alpha_filtration_capped, delaunay, Delaunay};

use crate::error::Error;
use crate::geometry::{min_enclosing_ball, PointCloud};
use crate::Result;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;

/// Vertex-index limit for brute-force Čech construction.
pub const CECH_BRUTEFORCE_MAX: usize = 16;
/// Vertex-index limit for Vietoris-Rips with simplices above dimension 1.
pub const VR_MAX: usize = 32;

/// One simplex: strictly increasing vertex indices plus its filtration value.
#[derive(Clone, Debug, PartialEq)]
pub struct Simplex {
    pub vertices: Vec<u32>,
    pub value: f64,
}

impl Simplex {
    pub fn new(mut vertices: Vec<u32>, value: f64) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        Simplex { vertices, value }
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// Canonical reduction order: (value, dimension, lexicographic vertices).
pub fn canonical_cmp(a: &Simplex, b: &Simplex) -> Ordering {
    a.value
        .partial_cmp(&b.value)
        .unwrap()
        .then_with(|| a.vertices.len().cmp(&b.vertices.len()))
        .then_with(|| a.vertices.cmp(&b.vertices))
}

/// A face-closed, monotone, canonically sorted filtered complex over a cloud.
#[derive(Clone, Debug)]
pub struct FilteredComplex {
    pub cloud: PointCloud,
    pub simplices: Vec<Simplex>,
}

impl FilteredComplex {
    /// Sort canonically and verify closure + monotonicity.
    pub fn assemble(cloud: PointCloud, mut simplices: Vec<Simplex>) -> Result<Self> {
        simplices.sort_by(canonical_cmp);
        let fc = FilteredComplex { cloud, simplices };
        fc.validate()?;
        Ok(fc)
    }

    /// Closure under faces and monotone values; used at assembly and by
    /// consumers that require sorted input.
    pub fn validate(&self) -> Result<()> {
        let index = self.index_map();
        for s in &self.simplices {
            if s.vertices.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidInput("simplex vertices not strictly increasing".into()));
            }
            if s.dim() == 0 {
                continue;
            }
            for skip in 0..s.vertices.len() {
                let face: Vec<u32> = s
                    .vertices
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != skip)
                    .map(|(_, &v)| v)
                    .collect();
                match index.get(face.as_slice()) {
                    Some(&fi) => {
                        if self.simplices[fi].value > s.value + 1e-12 {
                            return Err(Error::InvalidInput(format!(
                                "filtration not monotone at {:?}",
                                s.vertices
                            )));
                        }
                    }
                    None => {
                        return Err(Error::InvalidInput(format!(
                            "complex not closed under faces: {face:?} missing"
                        )))
                    }
                }
            }
        }
        for w in self.simplices.windows(2) {
            if canonical_cmp(&w[0], &w[1]) == Ordering::Greater {
                return Err(Error::InvalidInput("complex not canonically sorted".into()));
            }
        }
        Ok(())
    }

    /// Map from vertex tuple to position in the sorted simplex list.
    pub fn index_map(&self) -> HashMap<&[u32], usize> {
        self.simplices.iter().enumerate().map(|(i, s)| (s.vertices.as_slice(), i)).collect()
    }

    /// Text serialization: one line per simplex, `v0,v1,...:value`, in
    /// reduction order. 17 significant digits, locale-free.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.simplices {
            let verts: Vec<String> = s.vertices.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}:{:.16e}", verts.join(","), s.value);
        }
        out
    }
}

/// Brute-force Čech complex: the value of a simplex is the radius of the
/// smallest ball enclosing its vertices; simplices with value > `r_max` are
/// omitted (faces of included simplices always have smaller-or-equal value,
/// so closure is automatic).
pub fn cech_bruteforce(cloud: &PointCloud, max_dim: usize, r_max: f64) -> Result<FilteredComplex> {
    let n = cloud.len();
    if n > CECH_BRUTEFORCE_MAX {
        return Err(Error::SizeLimit(format!(
            "cech_bruteforce: {n} points exceed the {CECH_BRUTEFORCE_MAX}-point cap"
        )));
    }
    if max_dim > cloud.dim + 1 {
        return Err(Error::InvalidInput(format!(
            "cech_bruteforce: max_dim {} above d+1 = {}",
            max_dim,
            cloud.dim + 1
        )));
    }
    let mut simplices = Vec::new();
    for i in 0..n {
        simplices.push(Simplex { vertices: vec![i as u32], value: 0.0 });
    }
    // Grow subsets dimension by dimension; a subset is only extended if it was
    // within r_max (MEB radius is monotone under inclusion).
    let mut frontier: Vec<Vec<u32>> = (0..n as u32).map(|i| vec![i]).collect();
    for _dim in 1..=max_dim {
        let mut next = Vec::new();
        for base in &frontier {
            let last = *base.last().unwrap();
            for v in (last + 1)..n as u32 {
                let mut verts = base.clone();
                verts.push(v);
                let pts: Vec<&[f64]> =
                    verts.iter().map(|&i| cloud.point(i as usize)).collect();
                let ball = min_enclosing_ball(&pts, &cloud.metric)?;
                if ball.radius <= r_max {
                    simplices.push(Simplex { vertices: verts.clone(), value: ball.radius });
                    next.push(verts);
                }
            }
        }
        frontier = next;
    }
    prune_to_closure(&mut simplices);
    FilteredComplex::assemble(cloud.clone(), simplices)
}

/// Vietoris-Rips complex: the value of a simplex is half its vertex diameter.
pub fn vietoris_rips(cloud: &PointCloud, max_dim: usize, r_max: f64) -> Result<FilteredComplex> {
    let n = cloud.len();
    if max_dim >= 2 && n > VR_MAX {
        return Err(Error::SizeLimit(format!(
            "vietoris_rips: {n} points exceed the {VR_MAX}-point cap for max_dim ≥ 2"
        )));
    }
    let mut simplices = Vec::new();
    for i in 0..n {
        simplices.push(Simplex { vertices: vec![i as u32], value: 0.0 });
    }
    let mut frontier: Vec<(Vec<u32>, f64)> = (0..n as u32).map(|i| (vec![i], 0.0)).collect();
    for _dim in 1..=max_dim {
        let mut next = Vec::new();
        for (base, base_val) in &frontier {
            let last = *base.last().unwrap();
            for v in (last + 1)..n as u32 {
                // New value = max of previous diameter and distances to v.
                let mut val = *base_val;
                let mut ok = true;
                for &u in base {
                    let d = cloud.dist(u as usize, v as usize) / 2.0;
                    if d > r_max {
                        ok = false;
                        break;
                    }
                    val = val.max(d);
                }
                if ok {
                    let mut verts = base.clone();
                    verts.push(v);
                    simplices.push(Simplex { vertices: verts.clone(), value: val });
                    next.push((verts, val));
                }
            }
        }
        frontier = next;
    }
    prune_to_closure(&mut simplices);
    FilteredComplex::assemble(cloud.clone(), simplices)
}

/// Drop simplices whose faces were filtered out (possible only through the
/// subset-growth order, not through values; kept as a safety net).
fn prune_to_closure(simplices: &mut Vec<Simplex>) {
    use std::collections::HashSet;
    let present: HashSet<Vec<u32>> = simplices.iter().map(|s| s.vertices.clone()).collect();
    simplices.retain(|s| {
        s.dim() == 0
            || (0..s.vertices.len()).all(|skip| {
                let face: Vec<u32> = s
                    .vertices
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != skip)
                    .map(|(_, &v)| v)
                    .collect();
                present.contains(&face)
            })
    });
}
