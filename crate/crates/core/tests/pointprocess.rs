//! Poisson samplers, clustering, census bounds, and cloud serialization.

mod common;

use common::uniform_cloud;
use pe_core::geometry::Metric;
use pe_core::pointprocess::{
    cloud_from_csv, cloud_to_csv, cluster_census, clusters, sample_homogeneous,
    sample_inhomogeneous, CloudManifest, DensityKind, DensitySpec, Window,
};
use pe_core::stats::{ks_test, mean_se, ols, pearson};
use pe_core::Error;
use std::f64::consts::PI;

#[test]
fn homogeneous_mean_count() {
    let w = Window::unit_box(2);
    let counts: Vec<f64> =
        (0..1000).map(|s| sample_homogeneous(100.0, &w, s).unwrap().len() as f64).collect();
    let (mean, _) = mean_se(&counts);
    assert!((mean - 100.0).abs() < 1.0, "mean count {mean}");
}

#[test]
fn homogeneous_torus_count_variance() {
    let w = Window::Torus { dim: 2 };
    let counts: Vec<f64> =
        (0..2000).map(|s| sample_homogeneous(50.0, &w, 10_000 + s).unwrap().len() as f64).collect();
    let (mean, _) = mean_se(&counts);
    let var =
        counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (counts.len() as f64 - 1.0);
    assert!((var - 50.0).abs() < 5.0, "count variance {var}");
}

#[test]
fn disjoint_halves_have_uncorrelated_counts() {
    let w = Window::unit_box(2);
    let mut left = Vec::new();
    let mut right = Vec::new();
    for s in 0..2000 {
        let c = sample_homogeneous(100.0, &w, 20_000 + s).unwrap();
        let nl = c.iter().filter(|p| p[0] < 0.5).count();
        left.push(nl as f64);
        right.push((c.len() - nl) as f64);
    }
    let rho = pearson(&left, &right).unwrap();
    assert!(rho.abs() < 0.05, "correlation {rho}");
}

#[test]
fn sampler_input_validation() {
    let w = Window::unit_box(2);
    assert!(matches!(sample_homogeneous(0.0, &w, 1), Err(Error::InvalidInput(_))));
    assert!(matches!(sample_homogeneous(-3.0, &w, 1), Err(Error::InvalidInput(_))));
    let bad = Window::Box { lo: vec![0.0, 1.0], hi: vec![1.0, 0.5] };
    assert!(matches!(sample_homogeneous(10.0, &bad, 1), Err(Error::InvalidInput(_))));
    let c = uniform_cloud(5, 2, 0.0, 1.0, 3);
    assert!(clusters(&c, 0.0).is_err());
}

#[test]
fn sampling_is_reproducible_by_seed() {
    let w = Window::unit_box(2);
    let a = sample_homogeneous(80.0, &w, 77).unwrap();
    let b = sample_homogeneous(80.0, &w, 77).unwrap();
    assert_eq!(a.len(), b.len());
    for i in 0..a.len() {
        assert_eq!(a.point(i), b.point(i));
    }
    let c = sample_homogeneous(80.0, &w, 78).unwrap();
    assert!(a.len() != c.len() || (0..a.len()).any(|i| a.point(i) != c.point(i)));
}

#[test]
fn constant_thinning_matches_homogeneous() {
    let w = Window::unit_box(2);
    let spec = DensitySpec::constant(w.clone());
    let mut xs = Vec::new();
    for s in 0..30 {
        let a = sample_inhomogeneous(100.0, &spec, 500 + s).unwrap();
        let b = sample_homogeneous(100.0, &w, 500 + s).unwrap();
        // Acceptance probability is identically 1, so the clouds coincide.
        assert_eq!(a.len(), b.len());
        for i in 0..a.len() {
            assert_eq!(a.point(i), b.point(i));
            xs.push(a.point(i)[0]);
        }
    }
    let (_, p) = ks_test(&xs, |t| t.clamp(0.0, 1.0)).unwrap();
    assert!(p > 0.01, "KS p-value {p}");
}

#[test]
fn gaussian_density_mass_in_unit_disk() {
    let w = Window::Box { lo: vec![-4.0, -4.0], hi: vec![4.0, 4.0] };
    let spec = DensitySpec::gaussian(w, vec![0.0, 0.0], 1.0).unwrap();
    let n = 2000.0;
    let reps = 40;
    let counts: Vec<f64> = (0..reps)
        .map(|s| {
            let c = sample_inhomogeneous(n, &spec, 900 + s).unwrap();
            c.iter().filter(|p| p[0] * p[0] + p[1] * p[1] <= 1.0).count() as f64
        })
        .collect();
    let (mean, _) = mean_se(&counts);
    // Mass of the standard Gaussian inside the unit disk: 1 - e^{-1/2}.
    let target = n * (1.0 - (-0.5f64).exp());
    let sigma = (target / reps as f64).sqrt();
    assert!((mean - target).abs() < 3.0 * sigma, "mean {mean} vs {target} (sigma {sigma})");
}

#[test]
fn zero_density_region_stays_empty() {
    let w = Window::unit_box(2);
    let spec = DensitySpec::grid(w, vec![2, 1], vec![0.0, 2.0]).unwrap();
    let mut total = 0usize;
    for s in 0..100 {
        let c = sample_inhomogeneous(50.0, &spec, 1300 + s).unwrap();
        assert!(c.iter().all(|p| p[0] >= 0.5), "point in the zero-density half");
        total += c.len();
    }
    assert!(total > 0);
}

#[test]
fn density_exceeding_stated_bound_is_detected() {
    let w = Window::Box { lo: vec![-2.0, -2.0], hi: vec![2.0, 2.0] };
    let spec = DensitySpec {
        kind: DensityKind::Gaussian { center: vec![0.0, 0.0], scale: 1.0 },
        window: w,
        kappa_star: 0.01,
    };
    let mut saw_error = false;
    for s in 0..20 {
        if matches!(sample_inhomogeneous(200.0, &spec, s), Err(Error::DensitySpec(_))) {
            saw_error = true;
            break;
        }
    }
    assert!(saw_error, "understated bound never detected");
}

#[test]
fn cluster_edge_rule_is_strict() {
    let mut c = pe_core::geometry::PointCloud::new(2, Metric::euclidean(2));
    c.push(&[0.0, 0.0]);
    c.push(&[0.25, 0.0]);
    let part = clusters(&c, 0.25).unwrap();
    assert_eq!(part.members.len(), 2, "distance exactly r must not connect");
    let part = clusters(&c, 0.2500001).unwrap();
    assert_eq!(part.members.len(), 1);
    // Three pairwise-close points form one cluster.
    let mut t = pe_core::geometry::PointCloud::new(2, Metric::euclidean(2));
    t.push(&[0.0, 0.0]);
    t.push(&[0.1, 0.0]);
    t.push(&[0.05, 0.08]);
    let part = clusters(&t, 0.2).unwrap();
    assert_eq!(part.members.len(), 1);
    assert_eq!(part.members[0].len(), 3);
}

/// Canonical form of a partition: member lists sorted inside and out.
fn canonical(members: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = members
        .iter()
        .map(|m| {
            let mut v = m.clone();
            v.sort_unstable();
            v
        })
        .collect();
    out.sort();
    out
}

#[test]
fn clusters_agree_with_quadratic_scan() {
    for trial in 0..100u64 {
        let torus = trial % 2 == 1;
        let c = if torus {
            let mut t =
                pe_core::geometry::PointCloud::new(2, Metric::torus(2));
            let box_cloud = uniform_cloud(200, 2, 0.0, 1.0, 80_000 + trial);
            for p in box_cloud.iter() {
                t.push(p);
            }
            t
        } else {
            uniform_cloud(200, 2, 0.0, 1.0, 80_000 + trial)
        };
        let r = 0.08;
        let part = clusters(&c, r).unwrap();
        let mut naive: Vec<Vec<usize>> = (0..c.len()).map(|i| vec![i]).collect();
        let mut owner: Vec<usize> = (0..c.len()).collect();
        for i in 0..c.len() {
            for j in (i + 1)..c.len() {
                if c.dist(i, j) < r && owner[i] != owner[j] {
                    let (keep, drop) = (owner[i].min(owner[j]), owner[i].max(owner[j]));
                    let moved = std::mem::take(&mut naive[drop]);
                    for &k in &moved {
                        owner[k] = keep;
                    }
                    naive[keep].extend(moved);
                }
            }
        }
        naive.retain(|m| !m.is_empty());
        assert_eq!(
            canonical(&part.members),
            canonical(&naive),
            "partition mismatch (trial {trial}, torus {torus})"
        );
    }
}

#[test]
fn sparse_regime_starves_oversized_clusters() {
    // With r = n^{-0.7} the size-4 cluster rate n(nr²)³ = n^{-1/5} decays
    // slowly, and below n ≈ 1300 it is masked by the growing probability
    // that a cluster stays maximal, so the comparison needs well-separated
    // sizes in the asymptotic range.
    let w = Window::unit_box(2);
    let mut stats = Vec::new();
    for &n in &[1000.0f64, 8000.0, 32000.0] {
        let r = n.powf(-0.7);
        let mut counts = Vec::new();
        for s in 0..400 {
            let c = sample_homogeneous(n, &w, 31_000 + s).unwrap();
            let census = cluster_census(&c, r).unwrap();
            counts.push(*census.get(&4).unwrap_or(&0) as f64);
        }
        stats.push(mean_se(&counts));
    }
    println!("four-cluster means: {stats:?}");
    let (lo, se_lo) = stats[0];
    let (hi, se_hi) = stats[2];
    assert!(stats[0].0 > stats[1].0 && stats[1].0 > stats[2].0, "not decreasing: {stats:?}");
    assert!(
        lo - hi > 3.0 * (se_lo * se_lo + se_hi * se_hi).sqrt(),
        "decay not resolved: {stats:?}"
    );
}

#[test]
fn census_respects_tree_counting_bound() {
    let w = Window::unit_box(2);
    let n = 300.0;
    let r = 0.02;
    let reps = 200;
    let mut per_size: Vec<Vec<f64>> = vec![Vec::new(); 3];
    for s in 0..reps {
        let c = sample_homogeneous(n, &w, 52_000 + s).unwrap();
        let census = cluster_census(&c, r).unwrap();
        for (slot, j) in (2usize..=4).enumerate() {
            per_size[slot].push(*census.get(&j).unwrap_or(&0) as f64);
        }
    }
    for (slot, j) in (2usize..=4).enumerate() {
        let (mean, se) = mean_se(&per_size[slot]);
        let rho = n * (n * r * r).powi(j as i32 - 1);
        let bound = (j as f64).powi(j as i32 - 2) * PI.powi(j as i32 - 1) * rho;
        assert!(mean <= bound + 3.0 * se, "size {j}: mean {mean} vs bound {bound} (se {se})");
    }
}

#[test]
fn tiny_radius_isolates_every_point() {
    let c = uniform_cloud(150, 2, 0.0, 1.0, 999);
    let census = cluster_census(&c, 1e-9).unwrap();
    assert_eq!(census.get(&1), Some(&150));
    assert_eq!(census.len(), 1);
}

#[test]
fn pair_count_identity_on_unit_square() {
    let w = Window::unit_box(2);
    let r = 0.1;
    let mut counts = Vec::new();
    for s in 0..300 {
        let c = sample_homogeneous(200.0, &w, 64_000 + s).unwrap();
        let mut pairs = 0.0;
        for i in 0..c.len() {
            for j in (i + 1)..c.len() {
                if c.dist(i, j) < r {
                    pairs += 2.0;
                }
            }
        }
        counts.push(pairs);
    }
    let (mean, se) = mean_se(&counts);
    // Volume of {(x,y) in ([0,1]^2)^2 : |x-y| < r} in closed form.
    let target = 200.0f64.powi(2) * (PI * r * r - 8.0 * r.powi(3) / 3.0 + r.powi(4) / 2.0);
    assert!((mean - target).abs() < 3.0 * se, "mean {mean} vs {target} (se {se})");
}

#[test]
fn density_regularity_moduli_decay_linearly() {
    let w = Window::Box { lo: vec![-2.0, -2.0], hi: vec![2.0, 2.0] };
    let spec = DensitySpec::gaussian(w, vec![0.0, 0.0], 1.0).unwrap();
    let deltas = [0.5, 0.25, 0.125, 0.0625, 0.03125];
    let mut log_d = Vec::new();
    let mut log_sup = Vec::new();
    let mut log_bnd = Vec::new();
    for &d in &deltas {
        let (sup_mod, boundary) = spec.regularity_moduli(d, 600).unwrap();
        log_d.push(d.ln());
        log_sup.push(sup_mod.ln());
        log_bnd.push(boundary.ln());
    }
    let (slope_sup, _, _) = ols(&log_d, &log_sup).unwrap();
    let (slope_bnd, _, _) = ols(&log_d, &log_bnd).unwrap();
    assert!((0.8..=1.2).contains(&slope_sup), "sup-modulus slope {slope_sup}");
    assert!((0.8..=1.2).contains(&slope_bnd), "boundary-mass slope {slope_bnd}");
}

#[test]
fn cloud_csv_roundtrip_is_exact() {
    let c = uniform_cloud(60, 2, -1.0, 2.0, 4242);
    let text = cloud_to_csv(&c);
    assert!(text.starts_with("x0,x1\n"));
    let back = cloud_from_csv(&text, Metric::euclidean(2)).unwrap();
    assert_eq!(c.len(), back.len());
    for i in 0..c.len() {
        assert_eq!(c.point(i), back.point(i), "row {i} not bit-exact");
    }
    assert!(cloud_from_csv(&text, Metric::euclidean(3)).is_err());
}

#[test]
fn manifest_json_roundtrip() {
    let m = CloudManifest {
        seed: 9,
        intensity: 123.5,
        window: Window::Torus { dim: 2 },
        density: DensityKind::Constant,
        count: 117,
    };
    let text = serde_json::to_string_pretty(&m).unwrap();
    let back: CloudManifest = serde_json::from_str(&text).unwrap();
    assert_eq!(back.seed, 9);
    assert_eq!(back.count, 117);
    assert_eq!(back.window, Window::Torus { dim: 2 });
}
