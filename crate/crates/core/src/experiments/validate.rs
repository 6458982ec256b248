//! Invariant suite run by `siasim validate`.

use nalgebra::DMatrix;
use rand::Rng;

use super::montecarlo::{estimate_mean_sum_capacity, estimate_stream_outage, estimate_top_curve, SinrMode};
use super::scaling::fit_scaling_exponent;
use crate::channel::{complex_gaussian_matrix, draw_channel};
use crate::config::db_to_linear;
use crate::outage::{self, TopForm};
use crate::quadrature::Quadrature;
use crate::receivers::{post_sinr_eigenform, post_sinr_mmse, sinr_lower_bound, stream_sinr_mu, weighted_gram, Eigensystem};
use crate::rng::substream;
use crate::scheduler::{sequential_indices, SchedulerMode};
use crate::wishart::{sample_mev, tabulated, MevDensity, WishartKind};
use crate::{Encoding, Result, SystemConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed,
            detail: detail.into(),
        }
    }
}

/// Problem sizes of the suite. [`ValidationBudget::default`] is the full run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidationBudget {
    pub receiver_instances: usize,
    pub scheduler_tables: usize,
    pub ks_samples: usize,
    pub top_trials: usize,
    pub capacity_trials: usize,
}

impl Default for ValidationBudget {
    fn default() -> Self {
        Self {
            receiver_instances: 10_000,
            scheduler_tables: 10_000,
            ks_samples: 100_000,
            top_trials: 100_000,
            capacity_trials: 1000,
        }
    }
}

impl ValidationBudget {
    /// A reduced budget for smoke runs.
    pub fn quick() -> Self {
        Self {
            receiver_instances: 500,
            scheduler_tables: 500,
            ks_samples: 5000,
            top_trials: 5000,
            capacity_trials: 100,
        }
    }
}

fn receiver_identities(b: &ValidationBudget, seed: u64) -> Result<Check> {
    let mut rng = substream(seed, 0);
    let mut worst = 0.0f64;
    let mut lb_violations = 0usize;
    for _ in 0..b.receiver_instances {
        let nr = rng.random_range(1..=4);
        let interferers = rng.random_range(nr..=nr + 3);
        let h = complex_gaussian_matrix(nr, 1, &mut rng).column(0).into_owned();
        let g = complex_gaussian_matrix(nr, interferers, &mut rng);
        let icm = weighted_gram(&g, &vec![rng.random_range(0.1..3.0); interferers]);
        let s = rng.random_range(0.1..10.0);
        let noise = db_to_linear(rng.random_range(-40.0..0.0));
        let r = &icm + DMatrix::<crate::C64>::identity(nr, nr).scale(noise);
        let direct = post_sinr_mmse(&h, &r, s)?;
        let eig = Eigensystem::new(&icm)?;
        let eigen = post_sinr_eigenform(&h, &eig, s, noise)?;
        worst = worst.max((direct - eigen).abs() / eigen);
        if sinr_lower_bound(&h, &eig, s, noise) > eigen * (1.0 + 1e-12) {
            lb_violations += 1;
        }
    }
    let cfg = SystemConfig::new(3, 2, 1);
    let mut mu_mismatch = 0usize;
    for _ in 0..100 {
        let sample = draw_channel(&cfg, &mut rng);
        let mu = stream_sinr_mu(&sample, 0, &cfg)?;
        let r = crate::receivers::nicm(&sample, &cfg);
        let sst = post_sinr_mmse(&sample.h.column(0).into_owned(), &r, cfg.s)?;
        if mu != sst {
            mu_mismatch += 1;
        }
    }
    Ok(Check::new(
        "receiver_identities",
        worst < 1e-10 && lb_violations == 0 && mu_mismatch == 0,
        format!("max rel |mmse - eigen| = {worst:.2e}, gamma_lb > gamma on {lb_violations}, Nt=1 MU != SST on {mu_mismatch}"),
    ))
}

fn scheduler_properties(b: &ValidationBudget, seed: u64) -> Result<Check> {
    let mut rng = substream(seed, 1);
    let mut bad = 0usize;
    for _ in 0..b.scheduler_tables {
        let t = rng.random_range(1..=4);
        let l = rng.random_range(t..=t + 6);
        let cqi = DMatrix::from_fn(l, t, |_, _| rng.random::<f64>());
        let chosen = sequential_indices(&cqi, SchedulerMode::Distinct)?;
        let mut taken = vec![false; l];
        for (i, &u) in chosen.iter().enumerate() {
            let eligible_best = (0..l)
                .filter(|&v| !taken[v])
                .map(|v| cqi[(v, i)])
                .fold(f64::NEG_INFINITY, f64::max);
            if taken[u] || cqi[(u, i)] != eligible_best {
                bad += 1;
            }
            taken[u] = true;
        }
    }
    Ok(Check::new(
        "scheduler_distinct_argmax",
        bad == 0,
        format!("{bad} violating streams over {} tables", b.scheduler_tables),
    ))
}

fn densities() -> Result<Vec<(String, WishartKind, usize, usize, MevDensity)>> {
    let mut out = Vec::new();
    for c in tabulated() {
        out.push((format!("{} ({},{})", c.kind, c.m, c.n), c.kind, c.m, c.n, MevDensity::new(c.kind, c.m, c.n, 1.0)?));
    }
    for (k, nr) in [(5usize, 2usize), (7, 2), (9, 4)] {
        let d = MevDensity::for_interference(WishartKind::Real, k, nr, 1.0)?;
        out.push((format!("real K={k} Nr={nr}"), WishartKind::Real, 2 * nr, k - 1, d));
    }
    Ok(out)
}

fn pdf_normalisation() -> Result<Check> {
    let mut worst = 0.0f64;
    let mut name = String::new();
    for (label, _, _, _, d) in densities()? {
        let z = Quadrature::with_rel_tol(1e-12).integrate_to_infinity(|x| d.pdf(x), 0.0).value;
        if (z - 1.0).abs() > worst {
            worst = (z - 1.0).abs();
            name = label;
        }
    }
    Ok(Check::new("mev_pdf_normalisation", worst < 1e-6, format!("max |Z - 1| = {worst:.2e} ({name})")))
}

fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

fn pdf_ks(b: &ValidationBudget, seed: u64) -> Result<Check> {
    let crit = 1.628 / (b.ks_samples as f64).sqrt();
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for (j, (label, kind, m, n, d)) in densities()?.into_iter().enumerate() {
        let mut rng = substream(seed, 100 + j as u64);
        let mut s = sample_mev(kind, m, n, 1.0, b.ks_samples, &mut rng);
        let table = d.cdf_table(400);
        let stat = ks_statistic(&mut s, |x| table.cdf(x));
        worst = worst.max(stat / crit);
        if stat > crit {
            failures.push(format!("{label}: D={stat:.4}"));
        }
    }
    Ok(Check::new(
        "mev_pdf_ks_1pct",
        failures.is_empty(),
        if failures.is_empty() {
            format!("max D / critical = {worst:.3}")
        } else {
            failures.join("; ")
        },
    ))
}

fn closed_form_vs_quadrature() -> Result<Check> {
    let mut worst = 0.0f64;
    for (k, nr) in [(3usize, 2usize), (4, 2), (5, 2), (5, 4)] {
        let cfg = SystemConfig::new(k, nr, 10).with_snr_db(20.0);
        let d = MevDensity::for_interference(WishartKind::Complex, k, nr, cfg.i0)?;
        for db in [-5.0, 5.0, 15.0, 25.0] {
            let beta = db_to_linear(db);
            let laplace = Quadrature::with_rel_tol(1e-12)
                .integrate_to_infinity(|x| (-beta * x / cfg.s).exp() * d.pdf(x), 0.0)
                .value;
            let oracle = 1.0 - (-beta * cfg.n0 / cfg.s).exp() * laplace;
            worst = worst.max((outage::cdf_f_complex(beta, &cfg)? - oracle).abs());
        }
    }
    Ok(Check::new("complex_cdf_vs_quadrature", worst < 1e-9, format!("max abs diff = {worst:.2e}")))
}

fn top_mc_vs_bound(b: &ValidationBudget, seed: u64) -> Result<Check> {
    let cfg = SystemConfig::new(3, 2, 10).with_snr_db(20.0).with_trials(b.top_trials).with_seed(seed);
    let grid: Vec<f64> = (0..=10).map(|i| 3.0 * i as f64).collect();
    let betas: Vec<f64> = grid.iter().map(|&d| db_to_linear(d)).collect();
    let mc = estimate_top_curve(&cfg, &betas, SinrMode::LowerBound)?;
    let mut worst = (0.0f64, 0.0);
    for ((e, &beta), &db) in mc.iter().zip(&betas).zip(&grid) {
        let bound = outage::top_closed_form(beta, &cfg, TopForm::ComplexExact)?;
        let n = e.trials as f64;
        let sd = (bound * (1.0 - bound) / n).sqrt();
        if bound >= 1e-3 && n * bound.min(1.0 - bound) >= 10.0 {
            let z = (e.value - bound).abs() / sd;
            if z > worst.0 {
                worst = (z, db);
            }
        }
    }
    Ok(Check::new(
        "top_lb_mc_matches_bound",
        worst.0 <= 3.0,
        format!("max |MC - F^L| = {:.2} stderr (beta = {} dB)", worst.0, worst.1),
    ))
}

fn mu_bound(b: &ValidationBudget, seed: u64) -> Result<Check> {
    let cfg = SystemConfig::new(2, 2, 10).with_nt(2).with_snr_db(20.0).with_trials(b.capacity_trials * 5).with_seed(seed);
    let betas: Vec<f64> = [0.0, 5.0, 10.0, 15.0].iter().map(|&d| db_to_linear(d)).collect();
    let mc = estimate_stream_outage(&cfg, &betas)?;
    let mut worst = f64::NEG_INFINITY;
    for (i, per_beta) in mc.iter().enumerate() {
        for (e, &beta) in per_beta.iter().zip(&betas) {
            let bound = outage::top_ub_mu(beta, &cfg, i)?;
            worst = worst.max((e.value - bound) / e.stderr.max(1e-12));
        }
    }
    Ok(Check::new("mu_stream_outage_below_bound", worst <= 2.0, format!("max (MC - bound) = {worst:.2} stderr")))
}

fn scaling_exponents() -> Result<Check> {
    let grid = [10.0, 20.0, 30.0, 40.0];
    let cases: [(SystemConfig, TopForm, f64); 3] = [
        (SystemConfig::new(3, 2, 10), TopForm::ComplexExact, 1.0),
        (SystemConfig::new(6, 1, 10).with_encoding(Encoding::Real), TopForm::RealEvenExact, 2.0),
        (SystemConfig::new(5, 2, 10).with_encoding(Encoding::Real), TopForm::RealK2nr1Approx, 0.5),
    ];
    let mut details = Vec::new();
    let mut ok = true;
    for (cfg, form, expected) in cases {
        let ls = grid
            .iter()
            .map(|&snr| Ok(outage::users_required(0.1, db_to_linear(snr), &cfg.clone().with_snr_db(snr), form)?.exact))
            .collect::<Result<Vec<f64>>>()?;
        let fit = fit_scaling_exponent(&grid, &ls)?;
        ok &= (fit.slope / expected - 1.0).abs() <= 0.15;
        details.push(format!("{form}: {:.3} (expect {expected})", fit.slope));
    }
    Ok(Check::new("users_required_scaling", ok, details.join(", ")))
}

fn capacity_monotone(b: &ValidationBudget, seed: u64) -> Result<Check> {
    let grid: Vec<f64> = (0..=8).map(|i| 5.0 * i as f64).collect();
    let mut ok = true;
    let mut details = Vec::new();
    for enc in [Encoding::Complex, Encoding::Real] {
        let cfg = SystemConfig::new(3, 1, 10).with_encoding(enc).with_trials(b.capacity_trials).with_seed(seed);
        let c = estimate_mean_sum_capacity(&cfg, &grid)?;
        ok &= c.iter().all(|e| e.value >= 0.0) && c.windows(2).all(|w| w[1].value >= w[0].value);
        details.push(format!("{enc}: {:.2} .. {:.2}", c[0].value, c[c.len() - 1].value));
    }
    Ok(Check::new("mean_capacity_monotone_in_snr", ok, details.join(", ")))
}

/// Runs every check. Errors inside a check are reported as failures.
pub fn run_validation(budget: &ValidationBudget, seed: u64) -> Vec<Check> {
    let wrap = |name: &'static str, r: Result<Check>| r.unwrap_or_else(|e| Check::new(name, false, format!("error: {e}")));
    vec![
        wrap("receiver_identities", receiver_identities(budget, seed)),
        wrap("scheduler_distinct_argmax", scheduler_properties(budget, seed)),
        wrap("mev_pdf_normalisation", pdf_normalisation()),
        wrap("mev_pdf_ks_1pct", pdf_ks(budget, seed)),
        wrap("complex_cdf_vs_quadrature", closed_form_vs_quadrature()),
        wrap("top_lb_mc_matches_bound", top_mc_vs_bound(budget, seed)),
        wrap("mu_stream_outage_below_bound", mu_bound(budget, seed)),
        wrap("users_required_scaling", scaling_exponents()),
        wrap("mean_capacity_monotone_in_snr", capacity_monotone(budget, seed)),
    ]
}
