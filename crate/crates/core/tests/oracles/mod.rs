//! Reference computations shared by the integration tests. Nothing here calls
//! the library's quadrature, eigen-solvers, samplers or closed forms.
#![allow(dead_code)]

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use siasim_core::C64;

struct Rule {
    x: Vec<f64>,
    w: Vec<f64>,
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut prev, mut p) = (1.0, z);
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * z * p - (kf - 1.0) * prev) / kf;
        prev = p;
        p = next;
    }
    (p, n as f64 * (z * p - prev) / (z * z - 1.0))
}

fn gauss_legendre(n: usize) -> Rule {
    let mut x = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        x.push(z);
        w.push(2.0 / ((1.0 - z * z) * dp * dp));
    }
    Rule { x, w }
}

fn rules() -> &'static (Rule, Rule) {
    static RULES: OnceLock<(Rule, Rule)> = OnceLock::new();
    RULES.get_or_init(|| (gauss_legendre(10), gauss_legendre(21)))
}

fn apply(rule: &Rule, f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    h * rule.x.iter().zip(&rule.w).map(|(x, w)| w * f(c + h * x)).sum::<f64>()
}

/// Adaptive bisection comparing 10- and 21-point Gauss–Legendre rules.
pub fn integrate(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, rel: f64, abs: f64) -> f64 {
    let (coarse, fine) = rules();
    let mut total = 0.0;
    let mut stack = vec![(a, b, 0u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let g1 = apply(coarse, f, lo, hi);
        let g2 = apply(fine, f, lo, hi);
        if (g2 - g1).abs() <= abs.max(rel * g2.abs()) || depth >= 48 {
            total += g2;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    total
}

/// `∫_a^∞ f` through `x = a + t / (1 - t)`.
pub fn integrate_to_infinity(f: &mut dyn FnMut(f64) -> f64, a: f64, rel: f64, abs: f64) -> f64 {
    let mut g = |t: f64| {
        let d = 1.0 - t;
        f(a + t / d) / (d * d)
    };
    integrate(&mut g, 0.0, 1.0, rel, abs)
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(mut a: DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let scale: f64 = a.iter().map(|v| v * v).sum();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|p| (p + 1..n).map(move |q| (p, q))).map(|(p, q)| a[(p, q)].powi(2)).sum();
        if off <= 1e-32 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (kp, kq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * kp - s * kq;
                    a[(k, q)] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * pk - s * qk;
                    a[(q, k)] = s * pk + c * qk;
                }
            }
        }
    }
    (0..n).map(|i| a[(i, i)]).collect()
}

/// Smallest eigenvalue of a Hermitian matrix via its real embedding
/// `[[Re, -Im], [Im, Re]]`, whose spectrum is the Hermitian one doubled.
pub fn hermitian_lambda_min(a: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let emb = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = a[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    jacobi_eigenvalues(emb).into_iter().fold(f64::INFINITY, f64::min)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Minimum eigenvalue of `i0 V V^H` with `V` an `m × n` matrix of unit-variance
/// circular complex Gaussians.
pub fn sample_complex_mev(m: usize, n: usize, i0: f64, rng: &mut ChaCha8Rng) -> f64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = DMatrix::from_fn(m, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    });
    i0 * hermitian_lambda_min(&(&v * v.adjoint())).max(0.0)
}

/// Minimum eigenvalue of `i0 V Vᵀ` with `V` an `m × n` matrix of `N(0, 1/2)` entries.
pub fn sample_real_mev(m: usize, n: usize, i0: f64, rng: &mut ChaCha8Rng) -> f64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = DMatrix::from_fn(m, n, |_, _| {
        let z: f64 = rng.sample(StandardNormal);
        z * s
    });
    i0 * jacobi_eigenvalues(&v * v.transpose()).into_iter().fold(f64::INFINITY, f64::min).max(0.0)
}

fn upper_gamma_int(a: usize, x: f64) -> f64 {
    // Γ(a, x) = (a - 1)! e^{-x} Σ_{k<a} x^k / k!
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..a {
        term *= x / k as f64;
        sum += term;
    }
    (1..a).map(|k| k as f64).product::<f64>() * (-x).exp() * sum
}

/// `P(λ_min > x)` for a unit-scale complex Wishart `W_m(n)`, `n >= m`, from
/// the ratio of incomplete and complete gamma Hankel determinants.
pub fn khatri_survival(m: usize, n: usize, x: f64) -> f64 {
    let d = n - m;
    let num = DMatrix::from_fn(m, m, |i, j| upper_gamma_int(d + i + j + 1, x));
    let den = DMatrix::from_fn(m, m, |i, j| upper_gamma_int(d + i + j + 1, 0.0));
    num.determinant() / den.determinant()
}

/// `S h^H (I0 Σ g g^H + N0 I)^{-1} h` through a pivoted LU solve.
pub fn mmse_sinr_complex(h: &DVector<C64>, g: &[DVector<C64>], s: f64, i0: f64, n0: f64) -> f64 {
    let nr = h.len();
    let mut r = DMatrix::<C64>::identity(nr, nr) * C64::new(n0, 0.0);
    for gi in g {
        r += gi * gi.adjoint() * C64::new(i0, 0.0);
    }
    let x = r.lu().solve(h).expect("covariance is invertible");
    s * h.dotc(&x).re
}

/// Real/imaginary stacking `[Re x; Im x]`.
pub fn stack(x: &DVector<C64>) -> DVector<f64> {
    let n = x.len();
    DVector::from_fn(2 * n, |i, _| if i < n { x[i].re } else { x[i - n].im })
}

/// Widely linear SINR of a real symbol: `S h̃ᵀ (I0 Σ g̃ g̃ᵀ + N0/2 I)^{-1} h̃`.
pub fn wl_sinr_real(h: &DVector<C64>, g: &[DVector<C64>], s: f64, i0: f64, n0: f64) -> f64 {
    let h = stack(h);
    let n = h.len();
    let mut r = DMatrix::<f64>::identity(n, n) * (n0 / 2.0);
    for gi in g {
        let gs = stack(gi);
        r += &gs * gs.transpose() * i0;
    }
    let x = r.lu().solve(&h).expect("covariance is invertible");
    s * h.dot(&x)
}

/// Law of the squared projection of the desired channel on a fixed unit vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projection {
    /// `|ω|²` with `ω ~ CN(0, 1)`: unit exponential.
    Complex,
    /// `ω²` with `ω ~ N(0, 1/2)`.
    Real,
}

/// `P(w >= c)`, by numerical integration of the density.
pub fn projection_survival(p: Projection, c: f64) -> f64 {
    match p {
        Projection::Complex => integrate_to_infinity(&mut |w| (-w).exp(), c, 1e-12, 1e-300),
        Projection::Real => {
            let k = 2.0 / std::f64::consts::PI.sqrt();
            integrate_to_infinity(&mut |v| k * (-v * v).exp(), c.sqrt(), 1e-12, 1e-300)
        }
    }
}

/// `P(s w / (λ + noise) >= β)` as a 2-D integral over `u = √λ` (with density
/// `sqrt_density`) and the projection `w`. `u_max` truncates the outer range.
pub fn lb_survival(
    beta: f64,
    s: f64,
    noise: f64,
    projection: Projection,
    sqrt_density: &dyn Fn(f64) -> f64,
    u_max: f64,
) -> f64 {
    let mut outer = |u: f64| {
        let g = sqrt_density(u);
        if g == 0.0 {
            return 0.0;
        }
        g * projection_survival(projection, beta * (u * u + noise) / s)
    };
    integrate(&mut outer, 0.0, u_max, 1e-11, 1e-300)
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
