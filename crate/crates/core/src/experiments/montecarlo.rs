//! Monte Carlo estimators.
//!
//! Trial `t` draws every user's channels from substream `t` of the configured
//! seed, so results are independent of thread count. Per-trial values are
//! collected in trial order and summed sequentially.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::channel::{draw_channel, stack_real_matrix, ChannelSample};
use crate::config::db_to_linear;
use crate::receivers::{weighted_gram, PreparedSst};
use crate::rng::substream;
use crate::scheduler::{build_streams, sequential_indices, SchedulerMode, StreamPlan};
use crate::{Encoding, Error, Result, SystemConfig};

/// Smallest trial count accepted by the TOP estimators.
pub const MIN_TOP_TRIALS: usize = 100;

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl Estimate {
    /// Binomial proportion `hits / trials`.
    pub fn proportion(hits: usize, trials: usize) -> Self {
        let p = hits as f64 / trials as f64;
        Self {
            value: p,
            stderr: (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
        }
    }

    /// Mean and `std / √n` of `xs`.
    pub fn mean_of(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            value: mean,
            stderr: (var / n as f64).sqrt(),
            trials: n,
        }
    }

    /// TOP values below `10 / trials` carry too few events to trust.
    pub fn is_reliable_tail(&self) -> bool {
        self.value >= 10.0 / self.trials as f64
    }
}

/// Which SINR the scheduler maximises when estimating outage.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SinrMode {
    /// Exact MMSE / WL-MMSE post-SINR.
    True,
    /// Minimum-eigenvalue lower bound.
    LowerBound,
}

/// Single-stream quantities of one user, independent of the noise level.
pub fn prepare_sst_user(sample: &ChannelSample, cfg: &SystemConfig) -> Result<PreparedSst> {
    let interferers = sample.g.len();
    match cfg.encoding {
        Encoding::Complex => {
            let h = sample.h.column(0).into_owned();
            let g = DMatrix::from_fn(cfg.nr, interferers, |r, c| sample.g[c][(r, 0)]);
            let icm = if interferers > 0 {
                weighted_gram(&g, &vec![cfg.i0; interferers])
            } else {
                DMatrix::zeros(cfg.nr, cfg.nr)
            };
            PreparedSst::new(&h, &icm, cfg.s)
        }
        Encoding::Real => {
            let h = stack_real_matrix(&sample.h).column(0).into_owned();
            let mut g = DMatrix::zeros(2 * cfg.nr, interferers);
            for (c, gi) in sample.g.iter().enumerate() {
                g.column_mut(c).copy_from(&stack_real_matrix(gi).column(0));
            }
            let icm = if interferers > 0 {
                weighted_gram(&g, &vec![cfg.i0; interferers])
            } else {
                DMatrix::zeros(2 * cfg.nr, 2 * cfg.nr)
            };
            PreparedSst::new(&h, &icm, cfg.s)
        }
        Encoding::Mixed(_) => Err(Error::NotApplicable("single-stream estimators need complex or real encoding".into())),
    }
}

fn sst_noise(cfg: &SystemConfig) -> f64 {
    match cfg.encoding {
        Encoding::Complex => cfg.n0,
        _ => cfg.n0 / 2.0,
    }
}

fn check_sst(cfg: &SystemConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.nt != 1 || matches!(cfg.encoding, Encoding::Mixed(_)) {
        return Err(Error::NotApplicable(
            "single-stream outage estimation needs Nt = 1 with complex or real encoding".into(),
        ));
    }
    if cfg.trials < MIN_TOP_TRIALS {
        return Err(Error::config(format!(
            "TOP estimation needs at least {MIN_TOP_TRIALS} trials, got {}",
            cfg.trials
        )));
    }
    Ok(())
}

/// Per-trial maximum over users of the true and lower-bound SINR.
pub fn sst_trial_maxima(cfg: &SystemConfig) -> Result<Vec<(f64, f64)>> {
    check_sst(cfg)?;
    let noise = sst_noise(cfg);
    (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(cfg.seed, t);
            let mut best = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for _ in 0..cfg.l {
                let user = prepare_sst_user(&draw_channel(cfg, &mut rng), cfg)?;
                best.0 = best.0.max(user.gamma(noise));
                best.1 = best.1.max(user.gamma_lb(noise));
            }
            Ok(best)
        })
        .collect()
}

fn curve_from_maxima(maxima: &[(f64, f64)], betas: &[f64], mode: SinrMode) -> Vec<Estimate> {
    betas
        .iter()
        .map(|&b| {
            let hits = maxima
                .iter()
                .filter(|(t, lb)| match mode {
                    SinrMode::True => *t < b,
                    SinrMode::LowerBound => *lb < b,
                })
                .count();
            Estimate::proportion(hits, maxima.len())
        })
        .collect()
}

/// Empirical TOP `P(max_l γ_l < β)` over a grid of targets, reusing the same
/// channel draws for every `β`.
pub fn estimate_top_curve(cfg: &SystemConfig, betas: &[f64], mode: SinrMode) -> Result<Vec<Estimate>> {
    let maxima = sst_trial_maxima(cfg)?;
    Ok(curve_from_maxima(&maxima, betas, mode))
}

/// Empirical TOP at one target SNR.
pub fn estimate_top_mc(cfg: &SystemConfig, beta: f64, mode: SinrMode) -> Result<Estimate> {
    Ok(estimate_top_curve(cfg, &[beta], mode)?[0])
}

/// True and lower-bound TOP curves from a single pass.
pub fn estimate_top_curves(cfg: &SystemConfig, betas: &[f64]) -> Result<(Vec<Estimate>, Vec<Estimate>)> {
    let maxima = sst_trial_maxima(cfg)?;
    Ok((
        curve_from_maxima(&maxima, betas, SinrMode::True),
        curve_from_maxima(&maxima, betas, SinrMode::LowerBound),
    ))
}

/// SINRs of the users picked by sequential max-SINR scheduling in one trial,
/// one entry per SNR point, each holding one SINR per stream.
fn scheduled_sinrs(
    cfg: &SystemConfig,
    plan: &StreamPlan,
    trial: u64,
    noises: &[f64],
    mode: SchedulerMode,
) -> Result<Vec<Vec<f64>>> {
    let mut rng = substream(cfg.seed, trial);
    let users = (0..cfg.l)
        .map(|_| plan.prepare_user(&draw_channel(cfg, &mut rng), cfg.s, cfg.i0))
        .collect::<Result<Vec<_>>>()?;
    let t = plan.t();
    let mut cqi = DMatrix::zeros(cfg.l, t);
    noises
        .iter()
        .map(|&noise| {
            for (u, prep) in users.iter().enumerate() {
                for i in 0..t {
                    cqi[(u, i)] = prep.sinr(i, noise);
                }
            }
            let chosen = sequential_indices(&cqi, mode)?;
            Ok(chosen.iter().enumerate().map(|(i, &u)| cqi[(u, i)]).collect())
        })
        .collect()
}

/// Mean over trials of `K Σ_i pre_log_i log2(1 + γ_i)` at each SNR in
/// `snr_grid_db` with `S = I0 = 1`. Channel draws are shared across the grid.
pub fn estimate_mean_sum_capacity(cfg: &SystemConfig, snr_grid_db: &[f64]) -> Result<Vec<Estimate>> {
    let cfg = SystemConfig {
        s: 1.0,
        i0: 1.0,
        ..cfg.clone()
    };
    cfg.validate()?;
    let plan = build_streams(&cfg)?;
    let pre_log = plan.pre_logs();
    let noises: Vec<f64> = snr_grid_db.iter().map(|&d| plan.noise_variance(db_to_linear(-d))).collect();
    let k = cfg.k as f64;
    let per_trial: Vec<Vec<f64>> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let sinrs = scheduled_sinrs(&cfg, &plan, t, &noises, SchedulerMode::Distinct)?;
            Ok(sinrs
                .iter()
                .map(|g| k * g.iter().zip(&pre_log).map(|(g, p)| p * g.ln_1p() / std::f64::consts::LN_2).sum::<f64>())
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok((0..snr_grid_db.len())
        .map(|j| Estimate::mean_of(&per_trial.iter().map(|row| row[j]).collect::<Vec<_>>()))
        .collect())
}

/// Empirical per-stream outage `P(γ_i < β)` of the stream SINRs delivered by
/// the sequential max-SINR scheduler at the configured SNR. Indexed
/// `[stream][beta]`.
pub fn estimate_stream_outage(cfg: &SystemConfig, betas: &[f64]) -> Result<Vec<Vec<Estimate>>> {
    cfg.validate()?;
    let plan = build_streams(cfg)?;
    let noise = [plan.noise_variance(cfg.n0)];
    let per_trial: Vec<Vec<f64>> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| Ok(scheduled_sinrs(cfg, &plan, t, &noise, SchedulerMode::Distinct)?.remove(0)))
        .collect::<Result<_>>()?;
    Ok((0..plan.t())
        .map(|i| {
            betas
                .iter()
                .map(|&b| Estimate::proportion(per_trial.iter().filter(|g| g[i] < b).count(), per_trial.len()))
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_helpers() {
        let e = Estimate::proportion(25, 100);
        assert_eq!(e.value, 0.25);
        assert!((e.stderr - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
        let m = Estimate::mean_of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.value, 2.5);
        assert!((m.stderr - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn top_limits() {
        let cfg = SystemConfig::new(3, 2, 5).with_trials(200);
        let e = estimate_top_curve(&cfg, &[0.0, 1e30], SinrMode::LowerBound).unwrap();
        assert_eq!(e[0].value, 0.0);
        assert_eq!(e[1].value, 1.0);
        assert!(estimate_top_mc(&cfg.clone().with_trials(10), 1.0, SinrMode::True).is_err());
    }

    #[test]
    fn true_sinr_dominates_lower_bound() {
        let cfg = SystemConfig::new(4, 2, 5).with_trials(300);
        let (t, lb) = estimate_top_curves(&cfg, &[1.0, 10.0, 30.0]).unwrap();
        for (a, b) in t.iter().zip(&lb) {
            assert!(a.value <= b.value);
        }
    }

    #[test]
    fn capacity_is_deterministic_and_monotone() {
        let cfg = SystemConfig::new(3, 2, 6).with_trials(50).with_encoding(Encoding::Real);
        let grid = [0.0, 10.0, 20.0, 30.0];
        let a = estimate_mean_sum_capacity(&cfg, &grid).unwrap();
        let b = estimate_mean_sum_capacity(&cfg, &grid).unwrap();
        assert_eq!(a, b);
        for w in a.windows(2) {
            assert!(w[1].value >= w[0].value);
        }
    }

    #[test]
    fn stream_outage_shapes() {
        let cfg = SystemConfig::new(2, 2, 6).with_nt(2).with_trials(100);
        let o = estimate_stream_outage(&cfg, &[0.5, 2.0]).unwrap();
        assert_eq!(o.len(), 2);
        assert_eq!(o[0].len(), 2);
    }
}
