//! Reduction, feature records, negative-triangle checks, and loop extraction.

mod common;

use common::{fish, uniform_cloud, SQRT3};
use pe_core::filtration::{alpha_filtration, cech_bruteforce, vietoris_rips, FilteredComplex};
use pe_core::geometry::{Metric, PointCloud};
use pe_core::persistence::{
    associated_loop, diagram_to_csv, features, negative_check_2d, reduce, FeatureRecord,
};
use pe_core::rng;
use rand::Rng;
use std::collections::HashSet;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

const TOL: f64 = 1e-12;

fn h1_features(fc: &FilteredComplex) -> Vec<FeatureRecord> {
    let pairing = reduce(fc).unwrap();
    let mut fs = features(&pairing, fc, 1).unwrap();
    fs.sort_by(|a, b| a.birth.partial_cmp(&b.birth).unwrap());
    fs
}

#[test]
fn fish_cech_h1_features_match_hand_values() {
    let fc = cech_bruteforce(&fish(), 2, f64::INFINITY).unwrap();
    let fs = h1_features(&fc);
    assert_eq!(fs.len(), 2);
    // Diamond cycle: born at half its side, dies when the center is covered.
    let d = &fs[0];
    assert!((d.birth - FRAC_1_SQRT_2).abs() < TOL);
    assert!((d.death - 1.0).abs() < TOL);
    assert!((d.life_add - (1.0 - FRAC_1_SQRT_2)).abs() < TOL);
    assert!((d.life_mult - 2.0_f64.sqrt()).abs() < TOL);
    assert!((d.center[0] - 1.0).abs() < TOL && d.center[1].abs() < TOL);
    // Equilateral triangle: born at half its side, dies at its circumradius.
    let t = &fs[1];
    assert!((t.birth - SQRT3 / 2.0).abs() < TOL);
    assert!((t.death - 1.0).abs() < TOL);
    assert!((t.life_add - (1.0 - SQRT3 / 2.0)).abs() < TOL);
    assert!((t.life_mult - 2.0 / SQRT3).abs() < TOL);
    assert!((t.center[0] + 1.0).abs() < TOL && t.center[1].abs() < TOL);
}

#[test]
fn fish_vr_h1_has_single_feature() {
    let fc = vietoris_rips(&fish(), 2, f64::INFINITY).unwrap();
    let fs = h1_features(&fc);
    assert_eq!(fs.len(), 1);
    assert!((fs[0].birth - FRAC_1_SQRT_2).abs() < TOL);
    assert!((fs[0].death - 1.0).abs() < TOL);
}

#[test]
fn scaled_cloud_scales_additive_lifetimes_only() {
    let s = 2.0;
    let mut scaled = PointCloud::new(2, Metric::euclidean(2));
    for p in fish().iter() {
        scaled.push(&[p[0] * s, p[1] * s]);
    }
    let fa = h1_features(&cech_bruteforce(&fish(), 2, f64::INFINITY).unwrap());
    let fb = h1_features(&cech_bruteforce(&scaled, 2, f64::INFINITY).unwrap());
    assert_eq!(fa.len(), fb.len());
    for (a, b) in fa.iter().zip(&fb) {
        assert!((a.life_mult - b.life_mult).abs() < TOL);
        assert!((a.life_add * s - b.life_add).abs() < TOL);
        for k in 0..2 {
            assert!((a.center[k] * s - b.center[k]).abs() < TOL);
        }
    }
}

#[test]
fn empty_complex_gives_empty_pairing() {
    let fc =
        FilteredComplex::assemble(PointCloud::new(2, Metric::euclidean(2)), Vec::new()).unwrap();
    let pairing = reduce(&fc).unwrap();
    assert!(pairing.pairs.is_empty());
    assert!(pairing.essential.is_empty());
}

#[test]
fn fish_h0_merge_values() {
    let fc = cech_bruteforce(&fish(), 2, f64::INFINITY).unwrap();
    let pairing = reduce(&fc).unwrap();
    let mut deaths: Vec<f64> =
        pairing.pairs_in_dim(&fc, 0).map(|(_, d)| fc.simplices[d].value).collect();
    deaths.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(deaths.len(), 5);
    for d in &deaths[..3] {
        assert!((d - FRAC_1_SQRT_2).abs() < TOL);
    }
    for d in &deaths[3..] {
        assert!((d - SQRT3 / 2.0).abs() < TOL);
    }
    assert_eq!(pairing.essential_in_dim(&fc, 0).count(), 1);
}

#[test]
fn pairing_partitions_simplices_with_monotone_values() {
    for seed in 0..50 {
        let c = uniform_cloud(8, 2, 0.0, 1.0, 3000 + seed);
        let fc = cech_bruteforce(&c, 2, f64::INFINITY).unwrap();
        let pairing = reduce(&fc).unwrap();
        let n = fc.simplices.len();
        let mut seen = vec![0u32; n];
        for &(b, d) in &pairing.pairs {
            seen[b] += 1;
            seen[d] += 1;
            assert!(fc.simplices[b].value <= fc.simplices[d].value);
            assert_eq!(fc.simplices[b].dim() + 1, fc.simplices[d].dim());
            assert!(b < d);
        }
        for &e in &pairing.essential {
            seen[e] += 1;
        }
        assert!(seen.iter().all(|&k| k == 1), "pairing is not a partition (seed {seed})");
    }
}

#[test]
fn negative_check_on_fish_triangles() {
    let c = fish();
    // Equilateral triangle: empty circumdisk, circumcenter strictly inside.
    assert!(negative_check_2d(&[0, 1, 2], &c).unwrap());
    // Right triangle at the diamond: circumcenter sits on the hypotenuse.
    assert!(!negative_check_2d(&[2, 3, 4], &c).unwrap());
    // Obtuse triangle: circumcenter outside.
    let mut o = PointCloud::new(2, Metric::euclidean(2));
    o.push(&[0.0, 0.0]);
    o.push(&[4.0, 0.0]);
    o.push(&[2.0, 0.5]);
    assert!(!negative_check_2d(&[0, 1, 2], &o).unwrap());
}

#[test]
fn negative_check_agrees_with_reduction_on_random_clouds() {
    for seed in 0..500u64 {
        let c = uniform_cloud(10, 2, 0.0, 1.0, 40_000 + seed);
        let fc = alpha_filtration(&c).unwrap();
        let pairing = reduce(&fc).unwrap();
        let deaths: HashSet<Vec<u32>> = features(&pairing, &fc, 1)
            .unwrap()
            .into_iter()
            .map(|f| f.death_vertices)
            .collect();
        for s in fc.simplices.iter().filter(|s| s.dim() == 2) {
            let geometric = negative_check_2d(&s.vertices, &c).unwrap();
            let algebraic = deaths.contains(&s.vertices);
            assert_eq!(
                geometric, algebraic,
                "disagreement on triangle {:?} (seed {seed})",
                s.vertices
            );
        }
    }
}

/// Betti number in dimension p at value t, from the pairing.
fn betti(pairing: &pe_core::persistence::PersistencePairing, fc: &FilteredComplex, p: usize, t: f64) -> i64 {
    let finite = pairing
        .pairs_in_dim(fc, p)
        .filter(|&(b, d)| fc.simplices[b].value <= t && fc.simplices[d].value > t)
        .count() as i64;
    let essential = pairing
        .essential_in_dim(fc, p)
        .filter(|&b| fc.simplices[b].value <= t)
        .count() as i64;
    finite + essential
}

#[test]
fn euler_characteristic_matches_betti_alternating_sum() {
    let mut rng = rng::stream(5150, 0);
    for seed in 0..20 {
        let c = uniform_cloud(9, 2, 0.0, 1.0, 7000 + seed);
        let fc = cech_bruteforce(&c, 2, f64::INFINITY).unwrap();
        let pairing = reduce(&fc).unwrap();
        let vmax = fc.simplices.last().unwrap().value;
        for _ in 0..5 {
            let t = rng.random_range(0.0..vmax);
            let euler: i64 = fc
                .simplices
                .iter()
                .filter(|s| s.value <= t)
                .map(|s| if s.dim() % 2 == 0 { 1 } else { -1 })
                .sum();
            let betti_sum =
                betti(&pairing, &fc, 0, t) - betti(&pairing, &fc, 1, t) + betti(&pairing, &fc, 2, t);
            assert_eq!(euler, betti_sum, "Euler mismatch at t={t} (seed {seed})");
        }
    }
}

#[test]
fn associated_loops_on_fish() {
    let fc = alpha_filtration(&fish()).unwrap();
    let fs = h1_features(&fc);
    assert_eq!(fs.len(), 2);
    // Diamond feature (center near (1,0)) walks the four diamond vertices.
    let diamond = associated_loop(&fs[0], &fc).unwrap();
    let mut sorted = diamond.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, vec![2, 3, 4, 5]);
    // Triangle feature (center near (-1,0)) walks the triangle.
    let tri = associated_loop(&fs[1], &fc).unwrap();
    let mut sorted = tri.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, vec![0, 1, 2]);
}

#[test]
fn associated_loop_on_regular_polygons() {
    for m in [5usize, 8, 12] {
        let mut c = PointCloud::new(2, Metric::euclidean(2));
        for i in 0..m {
            let a = 2.0 * PI * i as f64 / m as f64 + 0.1;
            c.push(&[a.cos(), a.sin()]);
        }
        let fc = alpha_filtration(&c).unwrap();
        // The exactly-cocircular input can shed last-bit persistence pairs,
        // so keep only the macroscopic feature.
        let fs: Vec<FeatureRecord> =
            h1_features(&fc).into_iter().filter(|f| f.life_add > 1e-6).collect();
        assert_eq!(fs.len(), 1, "m={m}");
        assert!((fs[0].birth - (PI / m as f64).sin()).abs() < 1e-9);
        assert!((fs[0].death - 1.0).abs() < 1e-9);
        let lp = associated_loop(&fs[0], &fc).unwrap();
        let mut sorted = lp.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..m as u32).collect::<Vec<_>>(), "m={m}");
    }
}

#[test]
fn loop_length_dominates_multiplicative_lifetime() {
    let mut checked = 0usize;
    for seed in 0..60u64 {
        let c = uniform_cloud(40, 2, 0.0, 1.0, 90_000 + seed);
        let fc = alpha_filtration(&c).unwrap();
        for f in h1_features(&fc) {
            let lp = associated_loop(&f, &fc).unwrap();
            assert!(
                lp.len() as f64 >= f.life_mult,
                "loop of {} vertices for multiplicative lifetime {} (seed {seed})",
                lp.len(),
                f.life_mult
            );
            checked += 1;
        }
        if checked >= 200 {
            return;
        }
    }
    panic!("only {checked} features collected");
}

/// Greedy bottleneck-style matching: every feature living longer than 2δ
/// must have a partner within δ in both coordinates.
fn assert_matched(a: &[FeatureRecord], b: &[FeatureRecord], delta: f64) {
    let mut used = vec![false; b.len()];
    for f in a.iter().filter(|f| f.life_add > 2.0 * delta) {
        let best = b
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, g)| (i, (f.birth - g.birth).abs().max((f.death - g.death).abs())))
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap());
        let (i, dist) = best.expect("no candidate features left");
        assert!(dist <= delta, "nearest match at distance {dist} > {delta}");
        used[i] = true;
    }
}

#[test]
fn diagrams_are_stable_under_small_perturbations() {
    let delta = 1e-3;
    for seed in 0..20u64 {
        let c = uniform_cloud(10, 2, 0.0, 1.0, 60_000 + seed);
        let mut rng = rng::stream(61_000 + seed, 0);
        let mut moved = PointCloud::new(2, Metric::euclidean(2));
        for p in c.iter() {
            // Per-coordinate shifts of ±δ/2 move each point by at most δ.
            moved.push(&[
                p[0] + rng.random_range(-delta / 2.0..delta / 2.0),
                p[1] + rng.random_range(-delta / 2.0..delta / 2.0),
            ]);
        }
        let fa = cech_bruteforce(&c, 2, f64::INFINITY).unwrap();
        let fb = cech_bruteforce(&moved, 2, f64::INFINITY).unwrap();
        let a = h1_features(&fa);
        let b = h1_features(&fb);
        assert_matched(&a, &b, delta);
        assert_matched(&b, &a, delta);
    }
}

#[test]
fn diagram_csv_format() {
    let fc = cech_bruteforce(&fish(), 2, f64::INFINITY).unwrap();
    let fs = h1_features(&fc);
    let csv = diagram_to_csv(&fs, 2);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "dim,birth,death,life_add,life_mult,center_x,center_y");
    assert_eq!(lines.len(), 1 + fs.len());
    for (line, f) in lines[1..].iter().zip(&fs) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 7);
        assert_eq!(fields[0], "1");
        assert_eq!(fields[2], "1.0000000000000000e0");
        assert_eq!(fields[1].parse::<f64>().unwrap(), f.birth);
        assert_eq!(fields[3].parse::<f64>().unwrap(), f.life_add);
        assert_eq!(fields[4].parse::<f64>().unwrap(), f.life_mult);
        assert_eq!(fields[5].parse::<f64>().unwrap(), f.center[0]);
    }
}
