//! Minimum-eigenvalue (MEV) densities of complex and real Wishart matrices.
//!
//! A Wishart matrix here is `W = Σ_{j=1}^{n} I0 v_j v_j†` with `v_j` of
//! dimension `m <= n`, drawn `CN(0, I)` (complex) or `N(0, I/2)` (real). The
//! densities are written in `x = λ / I0`.
//!
//! * Polynomial-exponential form `e^{-mx} Σ a(k) x^k` for the complex pairs
//!   with tabulated coefficients and for real pairs with odd `n - m`.
//! * Tricomi form for real `n = m`.
//! * Laguerre–Tricomi form for real `n = m + 2`.

use std::fmt;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::complex_gaussian_matrix;
use crate::quadrature::Quadrature;
use crate::special::{factorial, gamma, laguerre_poly_neg, tricomi_u};
use crate::{Error, Result};

const DATA: &str = include_str!("../data/mev_coefficients.txt");

/// Tolerance of the closed-form normalisation check on coefficient sets.
pub const NORMALISATION_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WishartKind {
    Complex,
    Real,
}

impl fmt::Display for WishartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WishartKind::Complex => "complex",
            WishartKind::Real => "real",
        })
    }
}

/// Coefficients `a(k)`, `k = 0..=K0`, of a polynomial-exponential MEV density.
#[derive(Clone, Debug, PartialEq)]
pub struct MevCoefficients {
    pub kind: WishartKind,
    pub m: usize,
    pub n: usize,
    /// Lowest power with a non-zero coefficient.
    pub k0: usize,
    pub a: Vec<f64>,
}

impl MevCoefficients {
    fn new(kind: WishartKind, m: usize, n: usize, a: Vec<f64>) -> Result<Self> {
        let k0 = a.iter().position(|&c| c != 0.0).unwrap_or(0);
        let c = Self { kind, m, n, k0, a };
        let z = c.normalisation();
        if (z - 1.0).abs() > NORMALISATION_TOL {
            return Err(Error::Parse {
                path: "mev_coefficients.txt".into(),
                message: format!("{kind} ({m},{n}) integrates to {z}"),
            });
        }
        Ok(c)
    }

    /// Highest power `K0`.
    pub fn k_max(&self) -> usize {
        self.a.len() - 1
    }

    /// `Σ a(k) k! / m^{k+1}`, the integral of the density.
    pub fn normalisation(&self) -> f64 {
        let m = self.m as f64;
        self.a
            .iter()
            .enumerate()
            .map(|(k, a)| a * factorial(k) / m.powi(k as i32 + 1))
            .sum()
    }

    /// `Σ a(k) k! / (m + s)^{k+1}` = `E[e^{-s x}]`.
    pub fn laplace(&self, s: f64) -> f64 {
        let d = self.m as f64 + s;
        self.a
            .iter()
            .enumerate()
            .map(|(k, a)| a * factorial(k) / d.powi(k as i32 + 1))
            .sum()
    }

    fn density_x(&self, x: f64) -> f64 {
        let poly = self.a.iter().rev().fold(0.0, |acc, &c| acc * x + c);
        (-(self.m as f64) * x).exp() * poly
    }

    /// `P(X > x)` in closed form.
    fn survival_x(&self, x: f64) -> f64 {
        let mf = self.m as f64;
        let mx = mf * x;
        let e = (-mx).exp();
        let mut total = 0.0;
        // ∫_x^∞ t^k e^{-mt} dt = k!/m^{k+1} e^{-mx} Σ_{j<=k} (mx)^j / j!
        let mut partial = 0.0;
        let mut term = 1.0;
        for (k, &a) in self.a.iter().enumerate() {
            if k > 0 {
                term *= mx / k as f64;
            }
            partial += term;
            total += a * factorial(k) / mf.powi(k as i32 + 1) * partial;
        }
        e * total
    }
}

/// A row of the originally printed coefficient table.
#[derive(Clone, Debug, PartialEq)]
pub struct PrintedRow {
    pub m: usize,
    pub n: usize,
    pub a: Vec<f64>,
}

struct Tables {
    complex: Vec<MevCoefficients>,
    real: Vec<MevCoefficients>,
    printed: Vec<PrintedRow>,
}

fn parse_rational(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((p, q)) => Some(p.parse::<f64>().ok()? / q.parse::<f64>().ok()?),
        None => s.parse().ok(),
    }
}

fn parse_tables(text: &str) -> Result<Tables> {
    let bad = |line: usize, msg: &str| Error::Parse {
        path: "mev_coefficients.txt".into(),
        message: format!("line {}: {msg}", line + 1),
    };
    let mut t = Tables {
        complex: Vec::new(),
        real: Vec::new(),
        printed: Vec::new(),
    };
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (head, body) = line.split_once(':').ok_or_else(|| bad(i, "missing ':'"))?;
        let head: Vec<&str> = head.split_whitespace().collect();
        let [kind, m, n] = head[..] else {
            return Err(bad(i, "expected '<kind> <m> <n>'"));
        };
        let m: usize = m.parse().map_err(|_| bad(i, "bad m"))?;
        let n: usize = n.parse().map_err(|_| bad(i, "bad n"))?;
        let a = body
            .split_whitespace()
            .map(parse_rational)
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| bad(i, "bad coefficient"))?;
        if a.is_empty() {
            return Err(bad(i, "no coefficients"));
        }
        match kind {
            "complex" => t.complex.push(MevCoefficients::new(WishartKind::Complex, m, n, a)?),
            "real" => t.real.push(MevCoefficients::new(WishartKind::Real, m, n, a)?),
            "printed" => t.printed.push(PrintedRow { m, n, a }),
            other => return Err(bad(i, &format!("unknown kind '{other}'"))),
        }
    }
    Ok(t)
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| parse_tables(DATA).expect("shipped coefficient table is valid"))
}

/// The coefficient table rows exactly as originally printed.
pub fn table_one() -> &'static [PrintedRow] {
    &tables().printed
}

/// All tabulated (non rule-based) coefficient sets.
pub fn tabulated() -> impl Iterator<Item = &'static MevCoefficients> {
    tables().complex.iter().chain(tables().real.iter())
}

/// Coefficients of the MEV density of a `kind` Wishart matrix of dimension
/// `m` with `n` degrees of freedom.
///
/// Besides the tabulated pairs, `m = n` (complex) and `n = m + 1` (real) give
/// the exponential density `m e^{-mx}`, and complex `m = 1` gives the Gamma
/// density `x^{n-1} e^{-x} / (n-1)!`.
pub fn coeff_lookup(kind: WishartKind, m: usize, n: usize) -> Result<MevCoefficients> {
    let unavailable = Error::CoefficientsUnavailable { kind, m, n };
    if m == 0 || n < m {
        return Err(unavailable);
    }
    let exponential = match kind {
        WishartKind::Complex => n == m,
        WishartKind::Real => n == m + 1,
    };
    if exponential {
        return MevCoefficients::new(kind, m, n, vec![m as f64]);
    }
    if kind == WishartKind::Complex && m == 1 {
        let mut a = vec![0.0; n];
        a[n - 1] = 1.0 / factorial(n - 1);
        return MevCoefficients::new(kind, m, n, a);
    }
    let list = match kind {
        WishartKind::Complex => &tables().complex,
        WishartKind::Real => &tables().real,
    };
    list.iter().find(|c| c.m == m && c.n == n).cloned().ok_or(unavailable)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("eigenvalue must be non-negative, got {lambda}")))
    }
}

/// `(1/I0) e^{-mλ/I0} Σ a(k) (λ/I0)^k`.
pub fn pdf_mev_complex(lambda: f64, coeffs: &MevCoefficients, i0: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(coeffs.density_x(lambda / i0) / i0)
}

/// Real-Wishart MEV density for an even transmitter count `K` with `Nr`
/// receive antennas: stacked dimension `m = 2 Nr`, `n = K - 1` interferers.
pub fn pdf_mev_real_even(lambda: f64, coeffs: &MevCoefficients, i0: f64, k: usize, nr: usize) -> Result<f64> {
    check_lambda(lambda)?;
    if k % 2 != 0 {
        return Err(Error::domain(format!("K={k} is odd")));
    }
    if coeffs.kind != WishartKind::Real || coeffs.m != 2 * nr || coeffs.n + 1 != k {
        return Err(Error::domain(format!(
            "coefficients ({} {},{}) do not match K={k}, Nr={nr}",
            coeffs.kind, coeffs.m, coeffs.n
        )));
    }
    Ok(coeffs.density_x(lambda / i0) / i0)
}

fn k2nr1_sqrt_density(u: f64, i0: f64, m: usize) -> f64 {
    // 2u f(u²): finite at u = 0.
    let mf = m as f64;
    let x = u * u / i0;
    let c = gamma((mf + 1.0) / 2.0) * mf / (std::f64::consts::PI * i0).sqrt();
    let tri = tricomi_u((mf - 1.0) / 2.0, -0.5, x).unwrap_or(f64::NAN);
    2.0 * c * (-mf * x).exp() * tri
}

/// MEV density of a real Wishart matrix with `n = m` (transmitter count
/// `K = 2 Nr + 1`):
/// `Γ((m+1)/2) m / √(π I0 λ) e^{-mλ/I0} U((m-1)/2, -1/2, λ/I0)`.
pub fn pdf_mev_real_k2nr1(lambda: f64, i0: f64, m: usize) -> f64 {
    if lambda < 0.0 {
        return 0.0;
    }
    if lambda == 0.0 {
        return f64::INFINITY;
    }
    let u = lambda.sqrt();
    k2nr1_sqrt_density(u, i0, m) / (2.0 * u)
}

fn k2nr3_bracket(x: f64, m: usize) -> f64 {
    let mf = m as f64;
    let t1 = laguerre_poly_neg(2.0, m - 1, 2.0 * x) * tricomi_u((mf - 1.0) / 2.0, -0.5, x).unwrap_or(f64::NAN);
    let t2 = if m >= 2 {
        x * laguerre_poly_neg(3.0, m - 2, 2.0 * x) * tricomi_u((mf + 1.0) / 2.0, 0.5, x).unwrap_or(f64::NAN)
    } else {
        0.0
    };
    t1 + t2
}

/// MEV density of a real Wishart matrix with `n = m + 2` (transmitter count
/// `K = 2 Nr + 3`):
/// `Γ((m+1)/2) 2/(√π I0^{3/2}) √λ e^{-mλ/I0} [L_{m-1}^{(2)}(-2x) U((m-1)/2, -1/2, x)
///  + x L_{m-2}^{(3)}(-2x) U((m+1)/2, 1/2, x)]`, `x = λ/I0`.
pub fn pdf_mev_real_k2nr3(lambda: f64, i0: f64, m: usize) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    let mf = m as f64;
    let x = lambda / i0;
    let c = gamma((mf + 1.0) / 2.0) * 2.0 / (std::f64::consts::PI.sqrt() * i0.powf(1.5));
    c * lambda.sqrt() * (-mf * x).exp() * k2nr3_bracket(x, m)
}

/// Any supported MEV density with its scale `I0`.
#[derive(Clone, Debug, PartialEq)]
pub enum MevDensity {
    Polynomial { coeffs: MevCoefficients, i0: f64 },
    RealK2nr1 { m: usize, i0: f64 },
    RealK2nr3 { m: usize, i0: f64 },
}

impl MevDensity {
    pub fn new(kind: WishartKind, m: usize, n: usize, i0: f64) -> Result<Self> {
        if kind == WishartKind::Real && m >= 2 && m % 2 == 0 {
            if n == m {
                return Ok(MevDensity::RealK2nr1 { m, i0 });
            }
            if n == m + 2 {
                return Ok(MevDensity::RealK2nr3 { m, i0 });
            }
        }
        Ok(MevDensity::Polynomial {
            coeffs: coeff_lookup(kind, m, n)?,
            i0,
        })
    }

    /// Density of the interference MEV seen by a user with `nr` antennas
    /// facing `k - 1` interferers.
    pub fn for_interference(kind: WishartKind, k: usize, nr: usize, i0: f64) -> Result<Self> {
        let m = match kind {
            WishartKind::Complex => nr,
            WishartKind::Real => 2 * nr,
        };
        Self::new(kind, m, k.saturating_sub(1), i0)
    }

    pub fn i0(&self) -> f64 {
        match self {
            MevDensity::Polynomial { i0, .. } | MevDensity::RealK2nr1 { i0, .. } | MevDensity::RealK2nr3 { i0, .. } => *i0,
        }
    }

    pub fn pdf(&self, lambda: f64) -> f64 {
        match self {
            MevDensity::Polynomial { coeffs, i0 } => {
                if lambda < 0.0 {
                    0.0
                } else {
                    coeffs.density_x(lambda / i0) / i0
                }
            }
            MevDensity::RealK2nr1 { m, i0 } => pdf_mev_real_k2nr1(lambda, *i0, *m),
            MevDensity::RealK2nr3 { m, i0 } => pdf_mev_real_k2nr3(lambda, *i0, *m),
        }
    }

    /// `2u f(u²)`, the density of `√λ`. Bounded for every supported form.
    pub fn sqrt_density(&self, u: f64) -> f64 {
        if u < 0.0 {
            return 0.0;
        }
        match self {
            MevDensity::RealK2nr1 { m, i0 } => k2nr1_sqrt_density(u, *i0, *m),
            _ => 2.0 * u * self.pdf(u * u),
        }
    }

    /// `P(λ_min <= λ)`; closed form for polynomial densities, adaptive
    /// quadrature in `√λ` otherwise.
    pub fn cdf(&self, lambda: f64) -> f64 {
        if lambda <= 0.0 {
            return 0.0;
        }
        match self {
            MevDensity::Polynomial { coeffs, i0 } => 1.0 - coeffs.survival_x(lambda / i0),
            _ => Quadrature::with_rel_tol(1e-10)
                .abs_tol(1e-14)
                .integrate(|u| self.sqrt_density(u), 0.0, lambda.sqrt())
                .value
                .min(1.0),
        }
    }

    /// A point beyond which the remaining mass is below about 1e-13.
    pub fn upper_support(&self) -> f64 {
        let (m, degree, i0) = match self {
            MevDensity::Polynomial { coeffs, i0 } => (coeffs.m, coeffs.k_max(), *i0),
            MevDensity::RealK2nr1 { m, i0 } => (*m, 1, *i0),
            MevDensity::RealK2nr3 { m, i0 } => (*m, 2 * m, *i0),
        };
        i0 * (32.0 + 3.0 * degree as f64) / m as f64
    }

    /// Tabulated CDF for fast repeated evaluation.
    pub fn cdf_table(&self, panels: usize) -> CdfTable {
        let u_max = self.upper_support().sqrt();
        let h = u_max / panels as f64;
        let quad = Quadrature::with_rel_tol(1e-11).abs_tol(1e-15);
        let mut u = Vec::with_capacity(panels + 1);
        let mut f = Vec::with_capacity(panels + 1);
        let mut d = Vec::with_capacity(panels + 1);
        let mut acc = 0.0;
        for j in 0..=panels {
            let uj = j as f64 * h;
            if j > 0 {
                acc += quad.integrate(|s| self.sqrt_density(s), uj - h, uj).value;
            }
            u.push(uj);
            f.push(acc);
            d.push(self.sqrt_density(uj));
        }
        CdfTable { u, f, d }
    }
}

/// Piecewise cubic Hermite CDF in `u = √λ`.
#[derive(Clone, Debug)]
pub struct CdfTable {
    u: Vec<f64>,
    f: Vec<f64>,
    d: Vec<f64>,
}

impl CdfTable {
    pub fn total(&self) -> f64 {
        *self.f.last().expect("non-empty table")
    }

    pub fn cdf(&self, lambda: f64) -> f64 {
        if lambda <= 0.0 {
            return 0.0;
        }
        let u = lambda.sqrt();
        let n = self.u.len() - 1;
        let h = self.u[1] - self.u[0];
        if u >= self.u[n] {
            return self.f[n];
        }
        let j = ((u / h) as usize).min(n - 1);
        let t = (u - self.u[j]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.f[j] + h10 * h * self.d[j] + h01 * self.f[j + 1] + h11 * h * self.d[j + 1]
    }
}

/// Draws `count` minimum eigenvalues of `kind` Wishart matrices of dimension
/// `m` with `n` degrees of freedom and scale `i0`.
pub fn sample_mev<R: Rng + ?Sized>(kind: WishartKind, m: usize, n: usize, i0: f64, count: usize, rng: &mut R) -> Vec<f64> {
    (0..count)
        .map(|_| {
            let ev = match kind {
                WishartKind::Complex => {
                    let v = complex_gaussian_matrix(m, n, rng);
                    (&v * v.adjoint()).symmetric_eigenvalues()
                }
                WishartKind::Real => {
                    let v = DMatrix::<f64>::from_fn(m, n, |_, _| {
                        let z: f64 = rng.sample(StandardNormal);
                        z * std::f64::consts::FRAC_1_SQRT_2
                    });
                    (&v * v.transpose()).symmetric_eigenvalues()
                }
            };
            i0 * ev.min().max(0.0)
        })
        .collect()
}
