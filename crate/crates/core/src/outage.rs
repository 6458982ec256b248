//! Closed-form transmitter outage probabilities (TOP), users-required laws
//! and sum outage capacities.
//!
//! Every form evaluates `F(β)`, the probability that one user's lower-bound
//! SINR falls below the target `β`; the TOP bound for `L` users is `F^L`.

use std::fmt;
use std::str::FromStr;

use crate::scheduler::build_streams;
use crate::special::{binomial, factorial, gamma, q_exact, upper_incomplete_gamma, Q_APPROX_RATES, Q_APPROX_WEIGHTS};
use crate::wishart::{coeff_lookup, MevCoefficients, WishartKind};
use crate::{Encoding, Error, Result, SystemConfig};

/// Which closed form to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TopForm {
    /// Complex single-stream, exact in the lower-bound SINR.
    ComplexExact,
    /// Complex single-stream, dominant-term approximation.
    ComplexApprox,
    /// Complex multi-user spatial multiplexing, per-stream bound.
    MuExact,
    /// Real single-stream, even `K`: `A1 + A2`.
    RealEvenExact,
    /// Real single-stream, even `K`: two-exponential Q approximation.
    RealEvenApprox,
    /// Real single-stream, `K = 2 Nr + 1`.
    RealK2nr1Approx,
    /// Real single-stream, `K = 2 Nr + 3`.
    RealK2nr3Approx,
}

impl TopForm {
    pub const ALL: [TopForm; 7] = [
        TopForm::ComplexExact,
        TopForm::ComplexApprox,
        TopForm::MuExact,
        TopForm::RealEvenExact,
        TopForm::RealEvenApprox,
        TopForm::RealK2nr1Approx,
        TopForm::RealK2nr3Approx,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TopForm::ComplexExact => "complex_exact",
            TopForm::ComplexApprox => "complex_approx",
            TopForm::MuExact => "mu_exact",
            TopForm::RealEvenExact => "real_even_exact",
            TopForm::RealEvenApprox => "real_even_qapprox",
            TopForm::RealK2nr1Approx => "real_k2nr1_approx",
            TopForm::RealK2nr3Approx => "real_k2nr3_approx",
        }
    }

    /// Whether the form is a high-SNR approximation.
    pub fn is_approximation(self) -> bool {
        matches!(
            self,
            TopForm::ComplexApprox | TopForm::RealEvenApprox | TopForm::RealK2nr1Approx | TopForm::RealK2nr3Approx
        )
    }

    /// The exact form when one exists for `cfg`, otherwise its approximation.
    pub fn default_for(cfg: &SystemConfig) -> Result<TopForm> {
        match (cfg.encoding, cfg.nt) {
            (Encoding::Complex, 1) => Ok(TopForm::ComplexExact),
            (Encoding::Complex, _) => Ok(TopForm::MuExact),
            (Encoding::Real, 1) if cfg.k % 2 == 0 => Ok(TopForm::RealEvenExact),
            (Encoding::Real, 1) if cfg.k == 2 * cfg.nr + 1 => Ok(TopForm::RealK2nr1Approx),
            (Encoding::Real, 1) if cfg.k == 2 * cfg.nr + 3 => Ok(TopForm::RealK2nr3Approx),
            _ => Err(Error::NotApplicable(format!(
                "no closed form for {} encoding with K={}, Nt={}, Nr={}",
                cfg.encoding, cfg.k, cfg.nt, cfg.nr
            ))),
        }
    }
}

impl fmt::Display for TopForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TopForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TopForm::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::config(format!("unknown closed form '{s}'")))
    }
}

/// Users-required estimate for a TOP target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UsersRequired {
    /// `ln P / ln F(β)`, at least 1.
    pub exact: f64,
    /// Large-argument approximation.
    pub approx: f64,
    /// Whether `β I0 / S >= m`, the regime the approximation targets.
    pub high_snr_regime: bool,
}

/// Closed-form summary at one target SNR.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TopResult {
    pub top_ub: f64,
    pub f_beta: f64,
    pub users_required: f64,
    pub sum_outage_capacity: f64,
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("target SNR must be positive and finite, got {beta}")))
    }
}

fn check_target(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("TOP target must lie in (0, 1), got {p}")))
    }
}

fn users_from_f(target_top: f64, f: f64) -> f64 {
    if f <= 0.0 {
        1.0
    } else if f >= 1.0 {
        f64::INFINITY
    } else {
        (target_top.ln() / f.ln()).max(1.0)
    }
}

fn complex_coeffs(cfg: &SystemConfig) -> Result<MevCoefficients> {
    if cfg.k < 2 || cfg.k - 1 < cfg.nr {
        return Err(Error::NotApplicable(format!(
            "K-1={} interferers do not fill Nr={} dimensions",
            cfg.k.saturating_sub(1),
            cfg.nr
        )));
    }
    coeff_lookup(WishartKind::Complex, cfg.nr, cfg.k - 1)
}

fn real_even_coeffs(cfg: &SystemConfig) -> Result<MevCoefficients> {
    if cfg.k % 2 != 0 {
        return Err(Error::NotApplicable(format!("K={} is odd", cfg.k)));
    }
    if cfg.k < 2 * cfg.nr + 2 {
        return Err(Error::NotApplicable(format!(
            "even-K form needs K >= 2Nr+2, got K={}, Nr={}",
            cfg.k, cfg.nr
        )));
    }
    coeff_lookup(WishartKind::Real, 2 * cfg.nr, cfg.k - 1)
}

/// `F(β) = 1 - e^{-βN0/S} Σ a(k) k! / (βI0/S + m)^{k+1}` for complex
/// single-stream encoding.
pub fn cdf_f_complex(beta: f64, cfg: &SystemConfig) -> Result<f64> {
    check_beta(beta)?;
    let c = complex_coeffs(cfg)?;
    Ok((1.0 - (-beta * cfg.n0 / cfg.s).exp() * c.laplace(beta * cfg.i0 / cfg.s)).clamp(0.0, 1.0))
}

/// Dominant-term approximation of [`cdf_f_complex`], keeping only `k = k0`.
pub fn cdf_f_complex_approx(beta: f64, cfg: &SystemConfig) -> Result<f64> {
    check_beta(beta)?;
    let c = complex_coeffs(cfg)?;
    let d = beta * cfg.i0 / cfg.s + c.m as f64;
    let lead = c.a[c.k0] * factorial(c.k0) / d.powi(c.k0 as i32 + 1);
    Ok((1.0 - (-beta * cfg.n0 / cfg.s).exp() * lead).clamp(0.0, 1.0))
}

/// `F^L`.
pub fn top_ub(f_beta: f64, l_effective: f64) -> f64 {
    f_beta.powf(l_effective)
}

/// Users needed so the complex single-stream TOP bound meets `target_top`.
pub fn users_required_complex(target_top: f64, beta: f64, cfg: &SystemConfig) -> Result<UsersRequired> {
    check_target(target_top)?;
    let f = cdf_f_complex(beta, cfg)?;
    let c = complex_coeffs(cfg)?;
    let m = c.m as f64;
    let approx = (beta * cfg.n0 / cfg.s).exp() * (1.0 / target_top).ln() * (beta * cfg.i0 / cfg.s + m).powi(c.k0 as i32 + 1)
        / (c.a[c.k0] * factorial(c.k0));
    Ok(UsersRequired {
        exact: users_from_f(target_top, f),
        approx,
        high_snr_regime: beta * cfg.i0 / cfg.s >= m,
    })
}

/// Sum over transmitters of the outage capacity, `K R log2(1 + β)`.
pub fn sum_outage_capacity(beta: f64, cfg: &SystemConfig) -> Result<f64> {
    let plan = build_streams(cfg)?;
    Ok(cfg.k as f64 * plan.sm_rate() * beta.ln_1p() / std::f64::consts::LN_2)
}

fn mu_coeffs(cfg: &SystemConfig) -> Result<MevCoefficients> {
    if cfg.encoding != Encoding::Complex {
        return Err(Error::NotApplicable("multi-user bound is derived for complex encoding".into()));
    }
    if (cfg.s - cfg.i0).abs() > 1e-12 * cfg.s {
        return Err(Error::NotApplicable(format!(
            "multi-user bound requires S = I0 (got S={}, I0={}); use Monte Carlo",
            cfg.s, cfg.i0
        )));
    }
    let n = cfg.k * cfg.nt - 1;
    if n < cfg.nr {
        return Err(Error::NotApplicable(format!("K Nt - 1 = {n} < Nr = {}", cfg.nr)));
    }
    coeff_lookup(WishartKind::Complex, cfg.nr, n)
}

/// Per-user CDF of a multi-user stream's lower-bound SINR,
/// `1 - e^{-β Nt N0/S} Σ a(k) k! / (β + m)^{k+1}` with coefficients for
/// `(Nr, K Nt - 1)`.
pub fn mu_stream_cdf(beta: f64, cfg: &SystemConfig) -> Result<f64> {
    check_beta(beta)?;
    let c = mu_coeffs(cfg)?;
    let nt = cfg.nt as f64;
    Ok((1.0 - (-beta * nt * cfg.n0 / cfg.s).exp() * c.laplace(beta)).clamp(0.0, 1.0))
}

/// Outage bound of stream `i` (zero-based) under sequential max-SINR
/// scheduling: `F^{L - i}`.
pub fn top_ub_mu(beta: f64, cfg: &SystemConfig, stream: usize) -> Result<f64> {
    if stream >= cfg.nt {
        return Err(Error::InvalidStreamIndex {
            index: stream,
            streams: cfg.nt,
        });
    }
    let f = mu_stream_cdf(beta, cfg)?;
    Ok(top_ub(f, (cfg.l - stream) as f64))
}

/// `L >> Nt` simplification of [`top_ub_mu`], `F^L` for every stream.
pub fn top_ub_mu_large_l(beta: f64, cfg: &SystemConfig) -> Result<f64> {
    Ok(top_ub(mu_stream_cdf(beta, cfg)?, cfg.l as f64))
}

/// Outage mass from the noise-only region, `1 - 2 Q(√(β N0 / S))`.
pub fn area_a1(beta: f64, s: f64, n0: f64) -> f64 {
    1.0 - 2.0 * q_exact((beta * n0 / s).sqrt())
}

/// Outage mass contributed by the interference eigenvalue for real encoding
/// with even `K` (`m = 2 Nr`, `n = K - 1`):
///
/// `A2 = e^δ/√π Σ_k a(k) k!/m^{k+1} Σ_{j<=k} 1/j! Σ_{r<=j} C(j,r) (-δ)^r α^{j-r}
///       Γ(j-r+1/2, (α+1) x0) / (α+1)^{j-r+1/2}`
///
/// with `α = mS/(I0 β)`, `δ = m N0/(2 I0)`, `x0 = β N0/(2S)`.
pub fn area_a2(beta: f64, cfg: &SystemConfig) -> Result<f64> {
    check_beta(beta)?;
    let c = real_even_coeffs(cfg)?;
    if !(cfg.i0 > 0.0) {
        return Err(Error::NotApplicable("A2 requires I0 > 0".into()));
    }
    let m = c.m as f64;
    let alpha = m * cfg.s / (cfg.i0 * beta);
    let delta = m * cfg.n0 / (2.0 * cfg.i0);
    let x0 = beta * cfg.n0 / (2.0 * cfg.s);
    let z = (alpha + 1.0) * x0;
    let mut total = 0.0;
    for (k, &a) in c.a.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for j in 0..=k {
            let mut sum_r = 0.0;
            for r in 0..=j {
                let s = (j - r) as f64 + 0.5;
                sum_r += binomial(j as f64, r) * (-delta).powi(r as i32) * alpha.powi((j - r) as i32) * upper_incomplete_gamma(s, z)
                    / (alpha + 1.0).powf(s);
            }
            inner += sum_r / factorial(j);
        }
        total += a * factorial(k) / m.powi(k as i32 + 1) * inner;
    }
    Ok(delta.exp() / std::f64::consts::PI.sqrt() * total)
}

/// Exact per-user CDF for real encoding with even `K`: `A1 + A2`.
pub fn cdf_f_real_even(beta: f64, cfg: &SystemConfig) -> Result<f64> {
    let a2 = area_a2(beta, cfg)?;
    Ok((area_a1(beta, cfg.s, cfg.n0) + a2).clamp(0.0, 1.0))
}

/// Two-exponential Q approximation for real encoding with even `K`:
/// `1 - 2 Σ_i K_i e^{-c_i β N0/S} Σ a(k) k! / (2 c_i I0 β/S + m)^{k+1}`.
pub fn cdf_f_real_even_approx(beta: f64, cfg: &SystemConfig) -> Result<f64> {
    check_beta(beta)?;
    let c = real_even_coeffs(cfg)?;
    let sum: f64 = Q_APPROX_WEIGHTS
        .iter()
        .zip(Q_APPROX_RATES)
        .map(|(w, ci)| w * (-ci * beta * cfg.n0 / cfg.s).exp() * c.laplace(2.0 * ci * cfg.i0 * beta / cfg.s))
        .sum();
    Ok((1.0 - 2.0 * sum).clamp(0.0, 1.0))
}

/// Users required for real encoding with even `K`. The exact value uses
/// `A1 + A2`; the approximation keeps the `k0` term of the Q approximation.
pub fn users_required_real_even(target_top: f64, beta: f64, cfg: &SystemConfig) -> Result<UsersRequired> {
    check_target(target_top)?;
    let f = cdf_f_real_even(beta, cfg)?;
    let c = real_even_coeffs(cfg)?;
    let m = c.m as f64;
    let lead: f64 = Q_APPROX_WEIGHTS
        .iter()
        .zip(Q_APPROX_RATES)
        .map(|(w, ci)| {
            w * (-ci * beta * cfg.n0 / cfg.s).exp() * c.a[c.k0] * factorial(c.k0)
                / (2.0 * ci * cfg.i0 * beta / cfg.s + m).powi(c.k0 as i32 + 1)
        })
        .sum();
    Ok(UsersRequired {
        exact: users_from_f(target_top, f),
        approx: (1.0 / target_top).ln() / (2.0 * lead),
        high_snr_regime: beta * cfg.i0 / cfg.s >= m,
    })
}

fn require_real_sst(cfg: &SystemConfig, k: usize, label: &str) -> Result<()> {
    if cfg.k != k {
        return Err(Error::NotApplicable(format!(
            "{label} form needs K={k} for Nr={}, got K={}",
            cfg.nr, cfg.k
        )));
    }
    Ok(())
}

fn k2nr1_constant(m: f64) -> f64 {
    2.0 * m * gamma((m + 1.0) / 2.0) * gamma(1.5) / gamma(m / 2.0 + 1.0)
}

fn k2nr3_constant(m: f64) -> f64 {
    binomial(m + 1.0, m as usize - 1) * std::f64::consts::PI.sqrt() * gamma((m + 1.0) / 2.0) / gamma(m / 2.0 + 1.0)
}

/// High-SNR approximation for real encoding with `K = 2 Nr + 1`:
/// `1 - 2m Γ((m+1)/2) Γ(3/2)/Γ(m/2+1) Σ_i K_i e^{-c_i β N0/S} / √(2 c_i I0 β/S + m)`.
pub fn cdf_f_real_k2nr1(beta: f64, cfg: &SystemConfig) -> Result<f64> {
    check_beta(beta)?;
    require_real_sst(cfg, 2 * cfg.nr + 1, "K=2Nr+1")?;
    let m = 2.0 * cfg.nr as f64;
    let sum: f64 = Q_APPROX_WEIGHTS
        .iter()
        .zip(Q_APPROX_RATES)
        .map(|(w, ci)| w * (-ci * beta * cfg.n0 / cfg.s).exp() / (2.0 * ci * cfg.i0 * beta / cfg.s + m).sqrt())
        .sum();
    Ok((1.0 - k2nr1_constant(m) * sum).clamp(0.0, 1.0))
}

/// Users required for `K = 2 Nr + 1`; the approximation is the
/// `√(I0 β / S)` law.
pub fn users_required_real_k2nr1(target_top: f64, beta: f64, cfg: &SystemConfig) -> Result<UsersRequired> {
    check_target(target_top)?;
    let f = cdf_f_real_k2nr1(beta, cfg)?;
    let m = 2.0 * cfg.nr as f64;
    let sum: f64 = Q_APPROX_WEIGHTS
        .iter()
        .zip(Q_APPROX_RATES)
        .map(|(w, ci)| w * (-ci * beta * cfg.n0 / cfg.s).exp() / (2.0 * ci).sqrt())
        .sum();
    Ok(UsersRequired {
        exact: users_from_f(target_top, f),
        approx: (1.0 / target_top).ln() * (cfg.i0 * beta / cfg.s).sqrt() / (k2nr1_constant(m) * sum),
        high_snr_regime: beta * cfg.i0 / cfg.s >= m,
    })
}

/// High-SNR approximation for real encoding with `K = 2 Nr + 3`:
/// `1 - C(m+1, m-1) √π Γ((m+1)/2)/Γ(m/2+1) Σ_i K_i e^{-c_i β N0/S} / (2 c_i I0 β/S + m)^{3/2}`.
pub fn cdf_f_real_k2nr3(beta: f64, cfg: &SystemConfig) -> Result<f64> {
    check_beta(beta)?;
    require_real_sst(cfg, 2 * cfg.nr + 3, "K=2Nr+3")?;
    let m = 2.0 * cfg.nr as f64;
    let sum: f64 = Q_APPROX_WEIGHTS
        .iter()
        .zip(Q_APPROX_RATES)
        .map(|(w, ci)| w * (-ci * beta * cfg.n0 / cfg.s).exp() / (2.0 * ci * cfg.i0 * beta / cfg.s + m).powf(1.5))
        .sum();
    Ok((1.0 - k2nr3_constant(m) * sum).clamp(0.0, 1.0))
}

/// Users required for `K = 2 Nr + 3`; the approximation is the
/// `(I0 β / S)^{3/2}` law.
pub fn users_required_real_k2nr3(target_top: f64, beta: f64, cfg: &SystemConfig) -> Result<UsersRequired> {
    check_target(target_top)?;
    let f = cdf_f_real_k2nr3(beta, cfg)?;
    let m = 2.0 * cfg.nr as f64;
    let sum: f64 = Q_APPROX_WEIGHTS
        .iter()
        .zip(Q_APPROX_RATES)
        .map(|(w, ci)| w * (-ci * beta * cfg.n0 / cfg.s).exp() / (2.0 * ci).powf(1.5))
        .sum();
    Ok(UsersRequired {
        exact: users_from_f(target_top, f),
        approx: (1.0 / target_top).ln() * (cfg.i0 * beta / cfg.s).powf(1.5) / (k2nr3_constant(m) * sum),
        high_snr_regime: beta * cfg.i0 / cfg.s >= m,
    })
}

/// Per-user CDF `F(β)` under the chosen closed form.
pub fn cdf_for_form(beta: f64, cfg: &SystemConfig, form: TopForm) -> Result<f64> {
    match form {
        TopForm::ComplexExact => cdf_f_complex(beta, cfg),
        TopForm::ComplexApprox => cdf_f_complex_approx(beta, cfg),
        TopForm::MuExact => mu_stream_cdf(beta, cfg),
        TopForm::RealEvenExact => cdf_f_real_even(beta, cfg),
        TopForm::RealEvenApprox => cdf_f_real_even_approx(beta, cfg),
        TopForm::RealK2nr1Approx => cdf_f_real_k2nr1(beta, cfg),
        TopForm::RealK2nr3Approx => cdf_f_real_k2nr3(beta, cfg),
    }
}

/// TOP bound `F(β)^L` under the chosen closed form.
pub fn top_closed_form(beta: f64, cfg: &SystemConfig, form: TopForm) -> Result<f64> {
    Ok(top_ub(cdf_for_form(beta, cfg, form)?, cfg.l as f64))
}

/// Users required under the chosen closed form.
pub fn users_required(target_top: f64, beta: f64, cfg: &SystemConfig, form: TopForm) -> Result<UsersRequired> {
    match form {
        TopForm::ComplexExact | TopForm::ComplexApprox => users_required_complex(target_top, beta, cfg),
        TopForm::RealEvenExact | TopForm::RealEvenApprox => users_required_real_even(target_top, beta, cfg),
        TopForm::RealK2nr1Approx => users_required_real_k2nr1(target_top, beta, cfg),
        TopForm::RealK2nr3Approx => users_required_real_k2nr3(target_top, beta, cfg),
        TopForm::MuExact => {
            check_target(target_top)?;
            let f = mu_stream_cdf(beta, cfg)?;
            let u = users_from_f(target_top, f);
            Ok(UsersRequired {
                exact: u,
                approx: u,
                high_snr_regime: beta >= cfg.nr as f64,
            })
        }
    }
}

/// Closed-form summary at one target SNR.
pub fn evaluate(beta: f64, target_top: f64, cfg: &SystemConfig, form: TopForm) -> Result<TopResult> {
    let f_beta = cdf_for_form(beta, cfg, form)?;
    Ok(TopResult {
        top_ub: top_ub(f_beta, cfg.l as f64),
        f_beta,
        users_required: users_required(target_top, beta, cfg, form)?.exact,
        sum_outage_capacity: sum_outage_capacity(beta, cfg)?,
    })
}

/// Target SNR at which the closed-form TOP for `l` users equals
/// `target_top`, found by bisection in `ln β`.
pub fn solve_target_beta(target_top: f64, l: usize, cfg: &SystemConfig, form: TopForm) -> Result<f64> {
    check_target(target_top)?;
    let cfg = SystemConfig { l, ..cfg.clone() };
    let g = |ln_b: f64| -> Result<f64> { Ok(top_closed_form(ln_b.exp(), &cfg, form)? - target_top) };
    let (mut lo, mut hi) = (1e-8f64.ln(), 1e10f64.ln());
    let (f_lo, f_hi) = (g(lo)?, g(hi)?);
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::NotBracketed {
            lo: lo.exp(),
            hi: hi.exp(),
            f_lo: f_lo + target_top,
            f_hi: f_hi + target_top,
        });
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        let v = g(mid)?;
        if v == 0.0 {
            return Ok(mid.exp());
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}
