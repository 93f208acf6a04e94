use pe_core::filtration::alpha_filtration;
use pe_core::geometry::torus_tile;
use pe_core::persistence::reduce;
use pe_core::pointprocess::{sample_homogeneous, Window};

fn ratios_of_cloud(n: f64, seed: u64) -> Vec<f64> {
    let cloud = sample_homogeneous(n, &Window::Torus { dim: 2 }, seed).unwrap();
    if cloud.len() < 3 {
        return vec![];
    }
    let (tiled, _) = torus_tile(&cloud).unwrap();
    let fc = alpha_filtration(&tiled).unwrap();
    let pairing = reduce(&fc).unwrap();
    let mut out = Vec::new();
    for (bi, di) in pairing.pairs_in_dim(&fc, 1) {
        let birth = fc.simplices[bi].value;
        if birth <= 0.0 {
            continue;
        }
        let verts = &fc.simplices[di].vertices;
        let (mut cx, mut cy) = (0.0, 0.0);
        for &v in verts {
            let p = fc.cloud.point(v as usize);
            cx += p[0];
            cy += p[1];
        }
        cx /= verts.len() as f64;
        cy /= verts.len() as f64;
        if !(0.0..1.0).contains(&cx) || !(0.0..1.0).contains(&cy) {
            continue;
        }
        out.push(fc.simplices[di].value / birth);
    }
    out
}

fn main() {
    let n = 150.0f64;
    let reps = 600u64;
    let seed = pe_core::rng::sub_seed(9, 1);
    let mut all: Vec<Vec<f64>> = Vec::new();
    for rep in 0..reps {
        all.push(ratios_of_cloud(n, pe_core::rng::sub_seed(seed, rep)));
    }
    for lstar in [2.0, 2.2, 2.4, 2.9] {
        let counts: Vec<usize> = all.iter().map(|r| r.iter().filter(|&&x| x >= lstar).count()).collect();
        let mean = counts.iter().sum::<usize>() as f64 / reps as f64;
        let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
        let p0 = counts.iter().filter(|&&c| c == 0).count() as f64 / reps as f64;
        eprintln!(
            "l*={lstar:4.2} mean={mean:7.4} var={var:7.4} var/mean={:6.3} P(N=0)={p0:.4} exp(-mean)={:.4}",
            var / mean,
            (-mean) .exp()
        );
    }
    // empirical survival of the max vs exp(-mu_hat(l)) using the same ensemble's mean counts
    let mut l1s: Vec<f64> = all.iter().map(|r| r.iter().cloned().fold(1.0f64, f64::max)).collect();
    l1s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for q in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let idx = ((reps as f64 * q) as usize).min(reps as usize - 1);
        eprintln!("q{q}: l1 = {}", l1s[idx]);
    }
}
