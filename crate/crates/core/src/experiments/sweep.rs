//! Declarative parameter sweeps.
//!
//! A sweep file is TOML:
//!
//! ```toml
//! metric = "top"            # top | mean_sum_capacity | outage_capacity_vs_L | scaling_exponent
//! axis = "beta_db"          # snr_db | beta_db | L | K | encoding
//! values = [0.0, 5.0, 10.0]
//! target_top = 0.2          # outage_capacity_vs_L, scaling_exponent
//! beta_offset_db = 0.0      # scaling_exponent: beta_db = snr_db + offset
//! forms = ["complex_exact"] # optional closed forms, default chosen per point
//!
//! [system]
//! K = 3
//! Nt = 1
//! Nr = 2
//! L = 10
//! S = 1.0
//! I0 = 1.0
//! N0 = 0.01
//! encoding = "complex"
//! trials = 1000
//! seed = 1
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use super::montecarlo::{estimate_mean_sum_capacity, estimate_top_curves};
use super::records::ResultRecord;
use super::scaling::fit_scaling_exponent;
use crate::config::{db_to_linear, linear_to_db};
use crate::outage::{self, TopForm};
use crate::{Encoding, Error, Result, SystemConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Top,
    MeanSumCapacity,
    OutageCapacityVsL,
    ScalingExponent,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Top => "top",
            Metric::MeanSumCapacity => "mean_sum_capacity",
            Metric::OutageCapacityVsL => "outage_capacity_vs_L",
            Metric::ScalingExponent => "scaling_exponent",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Metric::Top,
            Metric::MeanSumCapacity,
            Metric::OutageCapacityVsL,
            Metric::ScalingExponent,
        ]
        .into_iter()
        .find(|m| m.name() == s)
        .ok_or_else(|| Error::config(format!("unknown metric '{s}'")))
    }
}

/// The swept quantity and its grid.
#[derive(Clone, Debug, PartialEq)]
pub enum Axis {
    SnrDb(Vec<f64>),
    BetaDb(Vec<f64>),
    L(Vec<usize>),
    K(Vec<usize>),
    Encoding(Vec<Encoding>),
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::SnrDb(_) => "snr_db",
            Axis::BetaDb(_) => "beta_db",
            Axis::L(_) => "L",
            Axis::K(_) => "K",
            Axis::Encoding(_) => "encoding",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Axis::SnrDb(v) | Axis::BetaDb(v) => v.len(),
            Axis::L(v) | Axis::K(v) => v.len(),
            Axis::Encoding(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn validate(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::config(format!("{} grid is empty", self.name())));
        }
        let increasing = match self {
            Axis::SnrDb(v) | Axis::BetaDb(v) => v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[0] < w[1]),
            Axis::L(v) | Axis::K(v) => v.windows(2).all(|w| w[0] < w[1]),
            Axis::Encoding(v) => (1..v.len()).all(|i| !v[..i].contains(&v[i])),
        };
        if !increasing {
            return Err(Error::config(format!("{} grid must be strictly increasing", self.name())));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub system: SystemConfig,
    pub metric: Metric,
    pub axis: Axis,
    pub target_top: Option<f64>,
    pub beta_offset_db: f64,
    /// Closed forms to evaluate; empty means the default form per point.
    pub forms: Vec<TopForm>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    metric: String,
    axis: String,
    values: Vec<toml::Value>,
    target_top: Option<f64>,
    #[serde(default)]
    beta_offset_db: f64,
    #[serde(default)]
    forms: Vec<String>,
    system: SystemConfig,
}

fn as_f64(v: &toml::Value) -> Result<f64> {
    match v {
        toml::Value::Float(x) => Ok(*x),
        toml::Value::Integer(i) => Ok(*i as f64),
        other => Err(Error::config(format!("expected a number, got {other}"))),
    }
}

fn as_usize(v: &toml::Value) -> Result<usize> {
    v.as_integer()
        .and_then(|i| usize::try_from(i).ok())
        .ok_or_else(|| Error::config(format!("expected a non-negative integer, got {v}")))
}

impl SweepSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawSweep = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        let axis = match raw.axis.as_str() {
            "snr_db" => Axis::SnrDb(raw.values.iter().map(as_f64).collect::<Result<_>>()?),
            "beta_db" => Axis::BetaDb(raw.values.iter().map(as_f64).collect::<Result<_>>()?),
            "L" => Axis::L(raw.values.iter().map(as_usize).collect::<Result<_>>()?),
            "K" => Axis::K(raw.values.iter().map(as_usize).collect::<Result<_>>()?),
            "encoding" => Axis::Encoding(
                raw.values
                    .iter()
                    .map(|v| {
                        v.as_str()
                            .ok_or_else(|| Error::config(format!("expected an encoding name, got {v}")))?
                            .parse()
                    })
                    .collect::<Result<_>>()?,
            ),
            other => return Err(Error::config(format!("unknown sweep axis '{other}'"))),
        };
        let spec = SweepSpec {
            system: raw.system,
            metric: raw.metric.parse()?,
            axis,
            target_top: raw.target_top,
            beta_offset_db: raw.beta_offset_db,
            forms: raw.forms.iter().map(|f| f.parse()).collect::<Result<_>>()?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.axis.validate()?;
        let allowed: &[&str] = match self.metric {
            Metric::Top => &["beta_db"],
            Metric::MeanSumCapacity => &["snr_db", "L", "K", "encoding"],
            Metric::OutageCapacityVsL => &["L"],
            Metric::ScalingExponent => &["snr_db"],
        };
        if !allowed.contains(&self.axis.name()) {
            return Err(Error::config(format!(
                "metric {} cannot sweep {} (allowed: {})",
                self.metric,
                self.axis.name(),
                allowed.join(", ")
            )));
        }
        if matches!(self.metric, Metric::OutageCapacityVsL | Metric::ScalingExponent) {
            match self.target_top {
                Some(p) if p > 0.0 && p < 1.0 => {}
                Some(p) => return Err(Error::config(format!("target_top must lie in (0, 1), got {p}"))),
                None => return Err(Error::config(format!("metric {} needs target_top", self.metric))),
            }
        }
        Ok(())
    }

    fn forms_for(&self, cfg: &SystemConfig) -> Result<Vec<TopForm>> {
        if self.forms.is_empty() {
            Ok(vec![TopForm::default_for(cfg)?])
        } else {
            Ok(self.forms.clone())
        }
    }
}

/// Closed-form TOP rows for every requested form, no Monte Carlo.
pub fn top_analytic_rows(cfg: &SystemConfig, betas_db: &[f64], forms: &[TopForm]) -> Result<Vec<ResultRecord>> {
    let mut out = Vec::new();
    for &form in forms {
        for &b in betas_db {
            let v = outage::top_closed_form(db_to_linear(b), cfg, form)?;
            out.push(ResultRecord::new("top", cfg).with_beta_db(b).with_analytic(v, form.name()));
        }
    }
    Ok(out)
}

/// TOP curve: lower-bound-SINR Monte Carlo beside the first closed form,
/// true-SINR Monte Carlo, then any further closed forms.
pub fn top_rows(cfg: &SystemConfig, betas_db: &[f64], forms: &[TopForm]) -> Result<Vec<ResultRecord>> {
    let betas: Vec<f64> = betas_db.iter().map(|&b| db_to_linear(b)).collect();
    let (true_mc, lb_mc) = estimate_top_curves(cfg, &betas)?;
    let mut out = Vec::with_capacity(betas.len() * (forms.len() + 1));
    let first = forms.first().copied();
    for (j, &b) in betas_db.iter().enumerate() {
        let mut r = ResultRecord::new("top_lb_sinr", cfg).with_beta_db(b).with_mc(&lb_mc[j]);
        if let Some(form) = first {
            r = r.with_analytic(outage::top_closed_form(betas[j], cfg, form)?, form.name());
        }
        out.push(r);
    }
    for (j, &b) in betas_db.iter().enumerate() {
        out.push(ResultRecord::new("top_true_sinr", cfg).with_beta_db(b).with_mc(&true_mc[j]));
    }
    if forms.len() > 1 {
        out.extend(top_analytic_rows(cfg, betas_db, &forms[1..])?);
    }
    Ok(out)
}

/// Mean sum capacity over an SNR grid (common random numbers).
pub fn capacity_rows(cfg: &SystemConfig, snr_grid_db: &[f64]) -> Result<Vec<ResultRecord>> {
    let est = estimate_mean_sum_capacity(cfg, snr_grid_db)?;
    Ok(snr_grid_db
        .iter()
        .zip(&est)
        .map(|(&snr, e)| {
            let mut r = ResultRecord::new("mean_sum_capacity", cfg).with_mc(e);
            r.snr_db = Some(snr);
            r
        })
        .collect())
}

/// Sum outage capacity at the β meeting `target_top` for each `L`.
///
/// High-SNR approximations can stay above the target for every `β` at small
/// `L`; those points are emitted without an analytic value.
pub fn outage_capacity_rows(cfg: &SystemConfig, l_grid: &[usize], target_top: f64, form: TopForm) -> Result<Vec<ResultRecord>> {
    l_grid
        .iter()
        .map(|&l| {
            let cl = SystemConfig { l, ..cfg.clone() };
            let row = ResultRecord::new("outage_capacity_vs_L", &cl);
            match outage::solve_target_beta(target_top, l, &cl, form) {
                Ok(beta) => {
                    let cap = outage::sum_outage_capacity(beta, &cl)?;
                    Ok(row.with_beta_db(linear_to_db(beta)).with_analytic(cap, form.name()))
                }
                Err(Error::NotBracketed { .. }) if form.is_approximation() => Ok(row),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Users-required at `β = SNR + offset` per grid point, followed by one
/// `scaling_exponent` row holding the fitted slope (standard error in
/// `mc_stderr`).
pub fn scaling_rows(
    cfg: &SystemConfig,
    snr_grid_db: &[f64],
    target_top: f64,
    beta_offset_db: f64,
    form: TopForm,
) -> Result<Vec<ResultRecord>> {
    let mut out = Vec::with_capacity(snr_grid_db.len() + 1);
    let mut l_values = Vec::with_capacity(snr_grid_db.len());
    for &snr in snr_grid_db {
        let c = cfg.clone().with_snr_db(snr);
        let beta_db = snr + beta_offset_db;
        let u = outage::users_required(target_top, db_to_linear(beta_db), &c, form)?;
        l_values.push(u.exact);
        for (metric, v) in [("users_required", u.exact), ("users_required_approx", u.approx)] {
            let mut r = ResultRecord::new(metric, &c).with_beta_db(beta_db).with_analytic(v, form.name());
            r.snr_db = Some(snr);
            out.push(r);
        }
    }
    let fit = fit_scaling_exponent(snr_grid_db, &l_values)?;
    let mut r = ResultRecord::new("scaling_exponent", cfg).with_analytic(fit.slope, form.name());
    r.snr_db = None;
    r.mc_stderr = Some(fit.slope_stderr);
    out.push(r);
    Ok(out)
}

/// Runs a sweep and returns its records in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ResultRecord>> {
    spec.validate()?;
    let base = &spec.system;
    match (spec.metric, &spec.axis) {
        (Metric::Top, Axis::BetaDb(betas)) => top_rows(base, betas, &spec.forms_for(base)?),
        (Metric::MeanSumCapacity, Axis::SnrDb(grid)) => capacity_rows(base, grid),
        (Metric::MeanSumCapacity, axis) => {
            let cfgs: Vec<SystemConfig> = match axis {
                Axis::L(v) => v.iter().map(|&l| SystemConfig { l, ..base.clone() }).collect(),
                Axis::K(v) => v.iter().map(|&k| SystemConfig { k, ..base.clone() }).collect(),
                Axis::Encoding(v) => v.iter().map(|&e| base.clone().with_encoding(e)).collect(),
                _ => unreachable!("validated axis"),
            };
            let mut out = Vec::new();
            for c in &cfgs {
                out.extend(capacity_rows(c, &[base.snr_db()])?);
            }
            Ok(out)
        }
        (Metric::OutageCapacityVsL, Axis::L(ls)) => {
            let target = spec.target_top.expect("validated");
            let mut out = Vec::new();
            for form in spec.forms_for(base)? {
                out.extend(outage_capacity_rows(base, ls, target, form)?);
            }
            Ok(out)
        }
        (Metric::ScalingExponent, Axis::SnrDb(grid)) => {
            let target = spec.target_top.expect("validated");
            let mut out = Vec::new();
            for form in spec.forms_for(base)? {
                out.extend(scaling_rows(base, grid, target, spec.beta_offset_db, form)?);
            }
            Ok(out)
        }
        _ => unreachable!("validated metric/axis pair"),
    }
}
