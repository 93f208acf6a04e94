//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use pe_core::filtration::FilteredComplex;
use pe_core::geometry::{Metric, PointCloud};
use pe_core::persistence::reduce;
use pe_core::rng;
use rand::Rng;

pub const SQRT3: f64 = 1.732_050_807_568_877_3;

/// Six-point planar cloud with two 1-cycles: an equilateral-ish triangle on
/// the left and a diamond on the right, joined at the origin.
pub fn fish() -> PointCloud {
    let mut c = PointCloud::new(2, Metric::euclidean(2));
    c.push(&[-1.5, SQRT3 / 2.0]);
    c.push(&[-1.5, -SQRT3 / 2.0]);
    c.push(&[0.0, 0.0]);
    c.push(&[1.0, 1.0]);
    c.push(&[1.0, -1.0]);
    c.push(&[2.0, 0.0]);
    c
}

/// n i.i.d. uniform points in [lo, hi]^dim.
pub fn uniform_cloud(n: usize, dim: usize, lo: f64, hi: f64, seed: u64) -> PointCloud {
    let mut rng = rng::stream(seed, 0);
    let mut c = PointCloud::new(dim, Metric::euclidean(dim));
    for _ in 0..n {
        let p: Vec<f64> = (0..dim).map(|_| rng.random_range(lo..hi)).collect();
        c.push(&p);
    }
    c
}

/// Finite (birth, death) pairs of dimension p, sorted.
pub fn finite_pairs(fc: &FilteredComplex, p: usize) -> Vec<(f64, f64)> {
    let pairing = reduce(fc).unwrap();
    let mut out: Vec<(f64, f64)> = pairing
        .pairs_in_dim(fc, p)
        .map(|(b, d)| (fc.simplices[b].value, fc.simplices[d].value))
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Same as `finite_pairs` but dropping zero-persistence pairs.
pub fn positive_pairs(fc: &FilteredComplex, p: usize) -> Vec<(f64, f64)> {
    finite_pairs(fc, p).into_iter().filter(|(b, d)| d > b).collect()
}

/// Look up a simplex value by vertex set (1-based labels for readability).
pub fn value_of(fc: &FilteredComplex, verts_1based: &[u32]) -> Option<f64> {
    let mut v: Vec<u32> = verts_1based.iter().map(|&x| x - 1).collect();
    v.sort_unstable();
    fc.simplices.iter().find(|s| s.vertices == v).map(|s| s.value)
}
