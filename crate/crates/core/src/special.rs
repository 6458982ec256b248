//! Special functions needed by the outage closed forms and the real-Wishart
//! minimum-eigenvalue densities.
//!
//! Gamma-family functions come from `statrs` and the error function from
//! `libm`; the Tricomi confluent hypergeometric function and the Laguerre
//! sums are evaluated here.

use statrs::function::gamma as sg;

use crate::quadrature::Quadrature;
use crate::{Error, Result};

/// Weights of the two-exponential Q-function approximation.
pub const Q_APPROX_WEIGHTS: [f64; 2] = [1.0 / 12.0, 1.0 / 4.0];
/// Exponent rates of the two-exponential Q-function approximation.
pub const Q_APPROX_RATES: [f64; 2] = [0.5, 2.0 / 3.0];

/// Gaussian tail probability `Q(x) = P(Z > x)`.
pub fn q_exact(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// `Q(x) ≈ (1/12) e^{-x²/2} + (1/4) e^{-2x²/3}`.
pub fn q_approx(x: f64) -> f64 {
    Q_APPROX_WEIGHTS
        .iter()
        .zip(Q_APPROX_RATES)
        .map(|(w, c)| w * (-c * x * x).exp())
        .sum()
}

pub fn gamma(x: f64) -> f64 {
    sg::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    sg::ln_gamma(x)
}

/// Non-regularised upper incomplete gamma `Γ(s, z) = ∫_z^∞ t^{s-1} e^{-t} dt`.
pub fn upper_incomplete_gamma(s: f64, z: f64) -> f64 {
    if z <= 0.0 {
        return sg::gamma(s);
    }
    sg::gamma(s) * sg::gamma_ur(s, z)
}

/// `k!` as a float.
pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// Binomial coefficient with a real upper argument, `n (n-1) ... (n-k+1) / k!`.
pub fn binomial(n: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i as f64) / (i + 1) as f64)
}

/// Generalised Laguerre polynomial at a negated argument,
/// `L_p^{(α)}(-x) = Σ_{q=0}^{p} C(p+α, p-q) x^q / q!`.
pub fn laguerre_poly_neg(alpha: f64, p: usize, x: f64) -> f64 {
    let mut term_pow = 1.0;
    let mut sum = 0.0;
    for q in 0..=p {
        if q > 0 {
            term_pow *= x / q as f64;
        }
        sum += binomial(p as f64 + alpha, p - q) * term_pow;
    }
    sum
}

/// Tricomi confluent hypergeometric function
/// `U(a, b, z) = (1/Γ(a)) ∫_0^∞ e^{-zt} t^{a-1} (1+t)^{b-a-1} dt`.
///
/// The integral is evaluated after `t = s²` and a rational map of `s` onto
/// `[0, 1)`. At `z = 0` the closed form `Γ(1-b)/Γ(a-b+1)` is returned; it
/// requires `b < 1`.
pub fn tricomi_u(a: f64, b: f64, z: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::domain(format!("tricomi_u requires a > 0, got a={a}")));
    }
    if !(z >= 0.0) || !b.is_finite() {
        return Err(Error::domain(format!(
            "tricomi_u requires z >= 0 and finite b, got b={b}, z={z}"
        )));
    }
    if z == 0.0 {
        if b >= 1.0 {
            return Err(Error::domain(format!("U(a, b, 0) diverges for b={b} >= 1")));
        }
        return Ok(gamma(1.0 - b) / gamma(a - b + 1.0));
    }
    let lg_a = ln_gamma(a);
    let integrand = |u: f64| -> f64 {
        let w = 1.0 - u;
        let s = u / w;
        if s == 0.0 {
            return 0.0;
        }
        let s2 = s * s;
        let log_f = std::f64::consts::LN_2 + (2.0 * a - 1.0) * s.ln() + (b - a - 1.0) * s2.ln_1p()
            - z * s2
            - 2.0 * w.ln()
            - lg_a;
        log_f.exp()
    };
    let q = Quadrature::with_rel_tol(1e-10).max_intervals(4000).integrate(integrand, 0.0, 1.0);
    if !q.converged && q.error > 1e-7 * q.value.abs() {
        return Err(Error::Quadrature {
            estimate: q.value,
            error: q.error,
        });
    }
    Ok(q.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn q_function_values() {
        assert_relative_eq!(q_exact(0.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(1.0 - 2.0 * q_exact(1.0), 0.682_689_492_137_085_9, epsilon = 1e-12);
        assert_relative_eq!(q_approx(0.0), 1.0 / 3.0, epsilon = 1e-15);
        assert!(q_approx(40.0) < 1e-300);
    }

    #[test]
    fn incomplete_gamma_limits() {
        assert_relative_eq!(upper_incomplete_gamma(2.5, 0.0), gamma(2.5), max_relative = 1e-14);
        // Γ(1, z) = e^{-z}
        assert_relative_eq!(upper_incomplete_gamma(1.0, 3.0), (-3.0f64).exp(), max_relative = 1e-12);
        // Γ(1/2, z) = √π erfc(√z)
        let z: f64 = 0.7;
        assert_relative_eq!(
            upper_incomplete_gamma(0.5, z),
            std::f64::consts::PI.sqrt() * libm::erfc(z.sqrt()),
            max_relative = 1e-12
        );
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5.0, 2), 10.0);
        assert_eq!(binomial(5.0, 0), 1.0);
        assert_eq!(factorial(5), 120.0);
        assert_relative_eq!(binomial(0.5, 2), -0.125, epsilon = 1e-15);
    }

    #[test]
    fn laguerre_at_zero_and_degree_zero() {
        for m in 2..8 {
            assert_relative_eq!(
                laguerre_poly_neg(2.0, m - 1, 0.0),
                binomial((m + 1) as f64, m - 1),
                epsilon = 1e-12
            );
        }
        assert_eq!(laguerre_poly_neg(3.0, 0, 7.5), 1.0);
    }

    #[test]
    fn tricomi_closed_form_at_zero() {
        let u = tricomi_u(1.5, -0.5, 0.0).unwrap();
        assert_relative_eq!(u, gamma(1.5) / gamma(3.0), max_relative = 1e-14);
    }

    #[test]
    fn tricomi_elementary_case() {
        // U(a, a+1, z) = z^{-a}
        for &(a, z) in &[(0.5, 0.3), (1.5, 2.0), (2.0, 10.0)] {
            let u = tricomi_u(a, a + 1.0, z).unwrap();
            assert_relative_eq!(u, z.powf(-a), max_relative = 1e-9);
        }
    }

    #[test]
    fn tricomi_continuous_at_zero() {
        let u0 = tricomi_u(1.5, -0.5, 0.0).unwrap();
        let u = tricomi_u(1.5, -0.5, 1e-9).unwrap();
        assert_relative_eq!(u, u0, max_relative = 1e-6);
    }

    #[test]
    fn tricomi_rejects_bad_args() {
        assert!(tricomi_u(0.0, 0.5, 1.0).is_err());
        assert!(tricomi_u(1.0, 0.5, -1.0).is_err());
        assert!(tricomi_u(1.0, 1.5, 0.0).is_err());
    }
}
