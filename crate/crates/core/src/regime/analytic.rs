//! Closed-form threshold oracle for the planar Čech triangle regime
//! (k = m = 3, additive lifetimes): a double integral over the lifetime ℓ
//! and the apex half-angle θ of the near-extremal isoceles configurations.
//!
//! The integrand has two delicate spots handled by substitution rather than
//! brute subdivision: the θ-integrand grows like (1-sinθ)^{-4} toward its
//! upper limit (finite but steep for small ℓ), and the ℓ-integrand behaves
//! like ℓ^{-1/2} at ℓ = 0, removed by integrating in t = √ℓ.
//!
//! Normalisation: the value equals the plain Lebesgue integral over ordered
//! anchored pairs (y₂, y₃) ∈ (R²)², counting both orientations of every
//! geometric configuration. The inscribed-angle parametrisation behind the
//! double integral covers one orientation, so its prefactor is doubled here;
//! the Monte Carlo estimators and the α-threshold composition
//! α·m!/(ρ_{n,m}·C(m,k)) both assume this ordered convention.

use crate::error::Error;
use crate::Result;
use std::f64::consts::PI;

/// Additive maximal lifetime for Čech triangles in the plane: 1 - √3/2.
pub fn lmax_cech33_add() -> f64 {
    1.0 - 3f64.sqrt() / 2.0
}

/// Angular density f(θ) = sinθ·((3θ-π)cosθ - sin3θ) / (2(1-sinθ)⁴);
/// vanishes at θ = π/3 and is positive on (π/3, π/2).
pub fn angular_density(theta: f64) -> f64 {
    let s = theta.sin();
    s * ((3.0 * theta - PI) * theta.cos() - (3.0 * theta).sin()) / (2.0 * (1.0 - s).powi(4))
}

/// Adaptive Simpson with absolute-error budget split across halves.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
        }
    }
    if a >= b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    rec(f, a, b, fa, fm, fb, whole, eps, 48)
}

/// Inner θ-integral of the angular density from `theta0` to `theta1`,
/// refined geometrically toward the steep upper endpoint.
fn inner_theta_integral(theta0: f64, theta1: f64, ell: f64, rel: f64) -> f64 {
    if theta1 <= theta0 {
        return 0.0;
    }
    // Magnitude scale for the absolute budget: the integrand peaks at the
    // upper endpoint where 1 - sinθ = ℓ.
    let peak = angular_density(theta1).abs().max(angular_density(theta0).abs()).max(1e-300);
    let span = theta1 - theta0;
    // Split at dyadic distances from the upper endpoint down to the ℓ-scale
    // where the integrand flattens; adaptive Simpson finishes each panel.
    let mut cuts = vec![theta0];
    let mut d = span / 2.0;
    let floor = (ell * 0.5).min(span / 2.0);
    while d > floor && cuts.len() < 60 {
        cuts.push(theta1 - d);
        d /= 2.0;
    }
    cuts.push(theta1);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let local_scale = angular_density(w[1]).abs().max(peak * 1e-6);
        let eps = rel * local_scale * (w[1] - w[0]) / 8.0 + 1e-300;
        total += adaptive_simpson(&angular_density, w[0], w[1], eps);
    }
    total
}

/// Prefactor of the (ℓ, θ) double integral: 2 orientations × 3 largest-angle
/// roles × 2π rotations × 16 from the inscribed-angle Jacobian.
const PREFACTOR: f64 = 192.0 * PI;

/// Oracle value h(u, v) for Čech k=m=3 additive lifetimes in the plane,
/// computed by adaptive quadrature to ~1e-8 relative accuracy.
pub fn analytic_h_cech33(u: f64, v: f64) -> Result<f64> {
    let lmax = lmax_cech33_add();
    if !(0.0..=lmax + 1e-12).contains(&u) || !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidInput(format!(
            "analytic_h_cech33 arguments out of range: u={u}, v={v}"
        )));
    }
    if u == 0.0 || v == 0.0 {
        return Ok(0.0);
    }
    let u = u.min(lmax);
    // Lifetime integral in t = √ℓ to absorb the ℓ^{-1/2} endpoint.
    let t_lo = (lmax - u).max(0.0).sqrt();
    let t_hi = lmax.sqrt();
    let integrand_t = |t: f64| -> f64 {
        let ell = t * t;
        if ell <= 0.0 || ell >= lmax {
            return 0.0;
        }
        let theta1 = (1.0 - ell).asin();
        let theta0 = if v >= 1.0 {
            PI / 3.0
        } else {
            let arg = (1.0 - ell / (1.0 - v)).clamp(-1.0, 1.0);
            (PI / 3.0).max(arg.asin())
        };
        let inner = inner_theta_integral(theta0, theta1, ell, 1e-10);
        ell.powi(3) * inner * 2.0 * t
    };
    // Composite 31-point Gauss-Legendre with panel doubling until stable.
    let mut prev = f64::NAN;
    let mut panels = 8;
    loop {
        let val = gauss_composite(&integrand_t, t_lo, t_hi, panels);
        if !prev.is_nan() && (val - prev).abs() <= 1e-9 * val.abs().max(1e-300) {
            return Ok(PREFACTOR * val);
        }
        prev = val;
        panels *= 2;
        if panels > 4096 {
            return Ok(PREFACTOR * val);
        }
    }
}

/// Composite Gauss-Legendre (15-point per panel) on [a, b].
fn gauss_composite(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    // 15-point Gauss-Legendre nodes/weights on [-1, 1].
    const X: [f64; 8] = [
        0.0,
        0.2011940939974345,
        0.3941513470775634,
        0.5709721726085388,
        0.7244177313601701,
        0.8482065834104272,
        0.9372733924007060,
        0.9879925180204854,
    ];
    const W: [f64; 8] = [
        0.2025782419255613,
        0.1984314853271116,
        0.1861610000155622,
        0.1662692058169939,
        0.1395706779261543,
        0.1071592204671719,
        0.0703660474881081,
        0.0307532419961173,
    ];
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + h / 2.0;
        let half = h / 2.0;
        let mut acc = W[0] * f(mid);
        for i in 1..8 {
            acc += W[i] * (f(mid + half * X[i]) + f(mid - half * X[i]));
        }
        total += acc * half;
    }
    total
}
