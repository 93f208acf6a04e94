//! Small statistical toolbox: Kolmogorov-Smirnov and chi-square tests,
//! correlations, least squares, and isotonic regression.
//!
//! Distribution CDFs come from `statrs`; the Kolmogorov null distribution is
//! the alternating exponential series (it is not in `statrs`), evaluated to
//! machine precision for the arguments that matter (λ ≳ 0.3).

use crate::error::Error;
use crate::Result;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Survival function of the Kolmogorov distribution:
/// Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} exp(−2 j² λ²).
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j as f64) * (j as f64) * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-18 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sided KS statistic of `samples` against a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((((i + 1) as f64) / n - f).abs());
        d = d.max((f - (i as f64) / n).abs());
    }
    d
}

/// KS test with Stephens' finite-sample correction on the asymptotic null.
/// Returns (D, p).
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<(f64, f64)> {
    if samples.len() < 5 {
        return Err(Error::InvalidInput("ks_test: need at least 5 samples".into()));
    }
    let d = ks_statistic(samples, cdf);
    let sn = (samples.len() as f64).sqrt();
    let p = kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
    Ok((d, p))
}

/// Chi-square goodness of fit. Cells with expected count below `min_expected`
/// are pooled into their right neighbor (last cell pools left). `extra_ddof`
/// is subtracted from the degrees of freedom on top of the usual n−1.
/// Returns (statistic, df, p).
pub fn chi_square_gof(
    observed: &[f64],
    expected: &[f64],
    min_expected: f64,
    extra_ddof: usize,
) -> Result<(f64, f64, f64)> {
    if observed.len() != expected.len() || observed.is_empty() {
        return Err(Error::InvalidInput("chi_square_gof: mismatched cells".into()));
    }
    let mut obs = Vec::new();
    let mut exp = Vec::new();
    let mut acc_o = 0.0;
    let mut acc_e = 0.0;
    for (&o, &e) in observed.iter().zip(expected) {
        acc_o += o;
        acc_e += e;
        if acc_e >= min_expected {
            obs.push(acc_o);
            exp.push(acc_e);
            acc_o = 0.0;
            acc_e = 0.0;
        }
    }
    if acc_e > 0.0 || acc_o > 0.0 {
        match exp.last_mut() {
            Some(last_e) => {
                *last_e += acc_e;
                *obs.last_mut().unwrap() += acc_o;
            }
            None => {
                exp.push(acc_e);
                obs.push(acc_o);
            }
        }
    }
    if exp.len() < 2 {
        return Err(Error::Resolution("chi_square_gof: fewer than 2 usable cells".into()));
    }
    let stat: f64 = obs
        .iter()
        .zip(&exp)
        .map(|(o, e)| {
            let d = o - e;
            d * d / e
        })
        .sum();
    let df = exp.len().saturating_sub(1 + extra_ddof).max(1) as f64;
    let chi = ChiSquared::new(df).expect("df ≥ 1");
    Ok((stat, df, 1.0 - chi.cdf(stat)))
}

/// Pearson correlation; `None` when either sample has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len();
    if n != b.len() || n < 2 {
        return None;
    }
    let ma = a.iter().sum::<f64>() / n as f64;
    let mb = b.iter().sum::<f64>() / n as f64;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return None;
    }
    Some(sab / (saa * sbb).sqrt())
}

/// Spearman rank correlation (average ranks on ties).
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    let ra = ranks(a);
    let rb = ranks(b);
    pearson(&ra, &rb)
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&i, &j| xs[i].partial_cmp(&xs[j]).unwrap());
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Ordinary least squares y = slope·x + intercept. Returns (slope, intercept, r²).
pub fn ols(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(Error::InvalidInput("ols: need ≥ 2 paired points".into()));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 {
        return Err(Error::Experiment("ols: degenerate x values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    Ok((slope, intercept, r2))
}

/// OLS with residual-based standard errors.
/// Returns (slope, intercept, r², se_slope, se_intercept).
pub fn ols_se(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64, f64, f64)> {
    let (slope, intercept, r2) = ols(x, y)?;
    let n = x.len() as f64;
    if x.len() < 3 {
        return Ok((slope, intercept, r2, f64::INFINITY, f64::INFINITY));
    }
    let mx = x.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (slope * a + intercept);
            r * r
        })
        .sum();
    let s2 = ssr / (n - 2.0);
    let se_slope = (s2 / sxx).sqrt();
    let se_intercept = (s2 * (1.0 / n + mx * mx / sxx)).sqrt();
    Ok((slope, intercept, r2, se_slope, se_intercept))
}

/// Isotonic regression by pool-adjacent-violators, optionally weighted.
/// `increasing = false` fits a nonincreasing sequence.
pub fn isotonic(values: &[f64], weights: Option<&[f64]>, increasing: bool) -> Vec<f64> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let sign = if increasing { 1.0 } else { -1.0 };
    // Blocks of (weighted mean, weight, length), merged while out of order.
    let mut mean = Vec::with_capacity(n);
    let mut weight = Vec::with_capacity(n);
    let mut len = Vec::with_capacity(n);
    for i in 0..n {
        let w = weights.map_or(1.0, |ws| ws[i]);
        mean.push(sign * values[i]);
        weight.push(w);
        len.push(1usize);
        while mean.len() > 1 && mean[mean.len() - 2] > mean[mean.len() - 1] {
            let (m2, w2, l2) = (mean.pop().unwrap(), weight.pop().unwrap(), len.pop().unwrap());
            let k = mean.len() - 1;
            let w_new = weight[k] + w2;
            mean[k] = (mean[k] * weight[k] + m2 * w2) / w_new;
            weight[k] = w_new;
            len[k] += l2;
        }
    }
    let mut out = Vec::with_capacity(n);
    for (m, l) in mean.iter().zip(&len) {
        for _ in 0..*l {
            out.push(sign * m);
        }
    }
    out
}

/// Mean and standard error of a sample.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Poisson pmf, stable for the small means used in the count diagnostics.
pub fn poisson_pmf(k: u64, lambda: f64) -> f64 {
    let mut ln = -lambda + (k as f64) * lambda.ln();
    for i in 1..=k {
        ln -= (i as f64).ln();
    }
    ln.exp()
}
