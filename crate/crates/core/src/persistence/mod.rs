//! Persistent homology over Z/2: column reduction of the boundary matrix in
//! the canonical filtration order, finite/essential pair bookkeeping, and
//! feature records (lifetimes + representative centers) ready for export.

pub mod loops;

pub use loops::associated_loop;

use crate::error::Error;
use crate::filtration::{canonical_cmp, FilteredComplex};
use crate::geometry::{circumsphere, min_enclosing_ball, PointCloud};
use crate::Result;
use std::cmp::Ordering;
use std::fmt::Write as _;

/// Raw output of the reduction: simplex-index pairs (birth, death) plus the
/// positive simplices that never get killed (essential classes).
#[derive(Clone, Debug)]
pub struct PersistencePairing {
    pub pairs: Vec<(usize, usize)>,
    pub essential: Vec<usize>,
}

impl PersistencePairing {
    /// Finite pairs whose birth simplex has dimension `p`.
    pub fn pairs_in_dim<'a>(
        &'a self,
        fc: &'a FilteredComplex,
        p: usize,
    ) -> impl Iterator<Item = (usize, usize)> + 'a {
        self.pairs.iter().copied().filter(move |&(b, _)| fc.simplices[b].dim() == p)
    }

    /// Essential classes born in dimension `p`.
    pub fn essential_in_dim<'a>(
        &'a self,
        fc: &'a FilteredComplex,
        p: usize,
    ) -> impl Iterator<Item = usize> + 'a {
        self.essential.iter().copied().filter(move |&b| fc.simplices[b].dim() == p)
    }
}

/// Standard persistence reduction. Requires the canonical order; every pair
/// is kept, including zero-persistence ones.
pub fn reduce(fc: &FilteredComplex) -> Result<PersistencePairing> {
    let n = fc.simplices.len();
    for w in fc.simplices.windows(2) {
        if canonical_cmp(&w[0], &w[1]) == Ordering::Greater {
            return Err(Error::InvalidInput("reduce: complex not canonically sorted".into()));
        }
    }
    let index = fc.index_map();
    let mut reduced: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut pivot_owner: Vec<Option<usize>> = vec![None; n];
    let mut pairs = Vec::new();
    let mut face_buf: Vec<u32> = Vec::new();
    for j in 0..n {
        let s = &fc.simplices[j];
        let mut col: Vec<usize> = Vec::new();
        if s.dim() > 0 {
            col.reserve(s.vertices.len());
            for skip in 0..s.vertices.len() {
                face_buf.clear();
                face_buf.extend(
                    s.vertices.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, &v)| v),
                );
                let &fi = index.get(face_buf.as_slice()).ok_or_else(|| {
                    Error::InvalidInput(format!("reduce: face {face_buf:?} missing"))
                })?;
                col.push(fi);
            }
            col.sort_unstable();
        }
        while let Some(&low) = col.last() {
            match pivot_owner[low] {
                Some(k) => col = xor_sorted(&col, &reduced[k]),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            pivot_owner[low] = Some(j);
            pairs.push((low, j));
        }
        reduced.push(col);
    }
    let mut paired = vec![false; n];
    for &(b, d) in &pairs {
        paired[b] = true;
        paired[d] = true;
    }
    let essential = (0..n).filter(|&j| !paired[j]).collect();
    Ok(PersistencePairing { pairs, essential })
}

/// Symmetric difference of two ascending index lists.
fn xor_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// One finite positive-persistence homology class.
#[derive(Clone, Debug)]
pub struct FeatureRecord {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
    /// death - birth.
    pub life_add: f64,
    /// death / birth; +inf when born at 0.
    pub life_mult: f64,
    /// Center of the smallest ball enclosing the death simplex vertices.
    pub center: Vec<f64>,
    pub birth_vertices: Vec<u32>,
    pub death_vertices: Vec<u32>,
}

/// Finite pairs of dimension `p` with strictly positive persistence, in
/// death order (ties resolved by the reduction order, so deterministic).
pub fn features(
    pairing: &PersistencePairing,
    fc: &FilteredComplex,
    p: usize,
) -> Result<Vec<FeatureRecord>> {
    let mut out = Vec::new();
    for (bi, di) in pairing.pairs_in_dim(fc, p) {
        let birth = fc.simplices[bi].value;
        let death = fc.simplices[di].value;
        if death <= birth {
            continue;
        }
        let verts = &fc.simplices[di].vertices;
        let pts: Vec<&[f64]> = verts.iter().map(|&v| fc.cloud.point(v as usize)).collect();
        let ball = min_enclosing_ball(&pts, &fc.cloud.metric)?;
        out.push(FeatureRecord {
            dim: p,
            birth,
            death,
            life_add: death - birth,
            life_mult: if birth > 0.0 { death / birth } else { f64::INFINITY },
            center: ball.center,
            birth_vertices: fc.simplices[bi].vertices.clone(),
            death_vertices: verts.clone(),
        });
    }
    Ok(out)
}

/// Geometric criterion for a triangle being negative in a planar filtration:
/// its open circumdisk contains no cloud point (tolerance 1e-10) and the
/// circumcenter lies strictly inside the triangle. Agrees with the reduction
/// on alpha and (generic) Čech filtrations in the plane.
pub fn negative_check_2d(tri: &[u32], cloud: &PointCloud) -> Result<bool> {
    if tri.len() != 3 || cloud.dim != 2 {
        return Err(Error::InvalidInput("negative_check_2d needs a triangle in the plane".into()));
    }
    let pts: Vec<&[f64]> = tri.iter().map(|&v| cloud.point(v as usize)).collect();
    let ball = match circumsphere(&pts)? {
        Some(b) => b,
        None => return Ok(false),
    };
    let thr = (ball.radius - 1e-10).max(0.0).powi(2);
    for i in 0..cloud.len() {
        if tri.contains(&(i as u32)) {
            continue;
        }
        let p = cloud.point(i);
        let d2 = (p[0] - ball.center[0]).powi(2) + (p[1] - ball.center[1]).powi(2);
        if d2 < thr {
            return Ok(false);
        }
    }
    let c = &ball.center;
    let or = |a: &[f64], b: &[f64]| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let s0 = or(pts[0], pts[1]);
    let s1 = or(pts[1], pts[2]);
    let s2 = or(pts[2], pts[0]);
    Ok((s0 > 0.0 && s1 > 0.0 && s2 > 0.0) || (s0 < 0.0 && s1 < 0.0 && s2 < 0.0))
}

/// Diagram CSV: `dim,birth,death,life_add,life_mult,center_*` rows with 17
/// significant digits.
pub fn diagram_to_csv(features: &[FeatureRecord], ambient_dim: usize) -> String {
    let mut out = String::from("dim,birth,death,life_add,life_mult");
    let names: Vec<String> = match ambient_dim {
        2 => vec!["center_x".into(), "center_y".into()],
        3 => vec!["center_x".into(), "center_y".into(), "center_z".into()],
        d => (0..d).map(|i| format!("center_{i}")).collect(),
    };
    for n in &names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for f in features {
        let _ = write!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e}",
            f.dim, f.birth, f.death, f.life_add, f.life_mult
        );
        for c in &f.center {
            let _ = write!(out, ",{c:.16e}");
        }
        out.push('\n');
    }
    out
}
