//! Named figure and table reproductions.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use super::records::{emit_records, ResultRecord};
use super::sweep::{capacity_rows, outage_capacity_rows, top_analytic_rows, top_rows};
use crate::outage::TopForm;
use crate::wishart::{table_one, tabulated};
use crate::{Encoding, Error, Result, SystemConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FigureId {
    TopComplex,
    TopRealEven,
    TopRealOdd,
    CapacityVsL,
    MeanCapacityNr1,
    MeanCapacityNr2,
    SmNr2,
    SmNr4K2,
    SmNr4K3,
    SmNr8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TableId {
    Coeffs,
    MeanCapacityNr1,
    MeanCapacityNr2,
}

impl FigureId {
    pub const ALL: [FigureId; 10] = [
        FigureId::TopComplex,
        FigureId::TopRealEven,
        FigureId::TopRealOdd,
        FigureId::CapacityVsL,
        FigureId::MeanCapacityNr1,
        FigureId::MeanCapacityNr2,
        FigureId::SmNr2,
        FigureId::SmNr4K2,
        FigureId::SmNr4K3,
        FigureId::SmNr8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::TopComplex => "top-complex",
            FigureId::TopRealEven => "top-real-even",
            FigureId::TopRealOdd => "top-real-odd",
            FigureId::CapacityVsL => "capacity-vs-L",
            FigureId::MeanCapacityNr1 => "mean-capacity-nr1",
            FigureId::MeanCapacityNr2 => "mean-capacity-nr2",
            FigureId::SmNr2 => "sm-nr2",
            FigureId::SmNr4K2 => "sm-nr4-k2",
            FigureId::SmNr4K3 => "sm-nr4-k3",
            FigureId::SmNr8 => "sm-nr8",
        }
    }
}

impl TableId {
    pub const ALL: [TableId; 3] = [TableId::Coeffs, TableId::MeanCapacityNr1, TableId::MeanCapacityNr2];

    pub fn name(self) -> &'static str {
        match self {
            TableId::Coeffs => "coeffs",
            TableId::MeanCapacityNr1 => "mean-capacity-nr1",
            TableId::MeanCapacityNr2 => "mean-capacity-nr2",
        }
    }
}

macro_rules! named_id {
    ($t:ty, $what:literal) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $t {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                <$t>::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| {
                    let known: Vec<&str> = <$t>::ALL.iter().map(|x| x.name()).collect();
                    Error::UnknownId(format!("{} '{s}' (known: {})", $what, known.join(", ")))
                })
            }
        }
    };
}

named_id!(FigureId, "figure");
named_id!(TableId, "table");

/// Overrides applied on top of each built-in scenario.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
}

impl RunOptions {
    fn apply(&self, cfg: SystemConfig, default_trials: usize) -> SystemConfig {
        SystemConfig {
            trials: self.trials.unwrap_or(default_trials),
            seed: self.seed.unwrap_or(cfg.seed),
            ..cfg
        }
    }
}

/// Default Monte Carlo realisations for capacity means.
pub const CAPACITY_TRIALS: usize = 1000;
/// Default Monte Carlo realisations for TOP curves.
pub const TOP_TRIALS: usize = 100_000;

/// SNR grid of the capacity figures, dB.
pub fn capacity_snr_grid() -> Vec<f64> {
    (0..=8).map(|i| 5.0 * i as f64).collect()
}

fn top_beta_grid() -> Vec<f64> {
    (0..=16).map(|i| 2.0 * i as f64).collect()
}

fn capacity_l_grid() -> Vec<usize> {
    vec![1, 2, 5, 10, 20, 50, 100, 200, 500, 1000]
}

fn top_figure(opts: &RunOptions, scenarios: &[(SystemConfig, Vec<TopForm>)]) -> Result<Vec<ResultRecord>> {
    let betas = top_beta_grid();
    let mut out = Vec::new();
    for (cfg, forms) in scenarios {
        out.extend(top_rows(&opts.apply(cfg.clone(), TOP_TRIALS), &betas, forms)?);
    }
    Ok(out)
}

fn capacity_figure(opts: &RunOptions, cfgs: impl IntoIterator<Item = SystemConfig>) -> Result<Vec<ResultRecord>> {
    let grid = capacity_snr_grid();
    let mut out = Vec::new();
    for cfg in cfgs {
        out.extend(capacity_rows(&opts.apply(cfg, CAPACITY_TRIALS), &grid)?);
    }
    Ok(out)
}

fn sm_configs(k: usize, nr: usize, l: usize, complex_nt: &[usize], real_nt: &[usize]) -> Vec<SystemConfig> {
    let base = SystemConfig::new(k, nr, l);
    complex_nt
        .iter()
        .map(|&nt| base.clone().with_nt(nt))
        .chain(real_nt.iter().map(|&nt| base.clone().with_nt(nt).with_encoding(Encoding::Real)))
        .collect()
}

pub fn run_figure(id: FigureId, opts: &RunOptions) -> Result<Vec<ResultRecord>> {
    let real = |k, nr, l| SystemConfig::new(k, nr, l).with_encoding(Encoding::Real);
    match id {
        FigureId::TopComplex => top_figure(
            opts,
            &[(SystemConfig::new(3, 2, 10), vec![TopForm::ComplexExact, TopForm::ComplexApprox])],
        ),
        FigureId::TopRealEven => top_figure(
            opts,
            &[(real(6, 2, 10), vec![TopForm::RealEvenExact, TopForm::RealEvenApprox])],
        ),
        FigureId::TopRealOdd => top_figure(
            opts,
            &[
                (real(5, 2, 10), vec![TopForm::RealK2nr1Approx]),
                (real(7, 2, 10), vec![TopForm::RealK2nr3Approx]),
            ],
        ),
        FigureId::CapacityVsL => {
            let ls = capacity_l_grid();
            let mut out = Vec::new();
            for k in [3, 4, 5] {
                let cfg = opts.apply(SystemConfig::new(k, 2, 1), CAPACITY_TRIALS);
                out.extend(outage_capacity_rows(&cfg, &ls, 0.2, TopForm::ComplexExact)?);
            }
            for k in [5, 6, 7] {
                let cfg = opts.apply(real(k, 2, 1), CAPACITY_TRIALS);
                out.extend(outage_capacity_rows(&cfg, &ls, 0.2, TopForm::default_for(&cfg)?)?);
            }
            Ok(out)
        }
        FigureId::MeanCapacityNr1 => capacity_figure(
            opts,
            [3, 4].into_iter().flat_map(|k| [SystemConfig::new(k, 1, 10), real(k, 1, 10)]),
        ),
        FigureId::MeanCapacityNr2 => capacity_figure(
            opts,
            [3, 4, 5].into_iter().flat_map(|k| [SystemConfig::new(k, 2, 50), real(k, 2, 50)]),
        ),
        FigureId::SmNr2 => capacity_figure(opts, sm_configs(3, 2, 10, &[1, 2], &[1, 2, 3, 4])),
        FigureId::SmNr4K2 => capacity_figure(opts, sm_configs(2, 4, 50, &[1, 2, 3, 4], &[2, 3, 4, 5, 6, 8])),
        FigureId::SmNr4K3 => capacity_figure(opts, sm_configs(3, 4, 50, &[1, 2, 3, 4], &[2, 3, 4, 5, 6, 8])),
        FigureId::SmNr8 => {
            let mut cfgs = sm_configs(3, 8, 100, &[2, 3, 4], &[4, 5, 6, 8]);
            cfgs.push(SystemConfig::new(3, 8, 100).with_nt(3).with_encoding(Encoding::Mixed(2)));
            capacity_figure(opts, cfgs)
        }
    }
}

/// One coefficient of a minimum-eigenvalue density table.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientRow {
    /// `printed` for the original table, `tabulated` for the sets used in
    /// computation.
    pub source: &'static str,
    pub kind: String,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub coefficient: f64,
}

/// Output of a table reproduction.
#[derive(Clone, Debug, PartialEq)]
pub enum TableOutput {
    Records(Vec<ResultRecord>),
    Coefficients(Vec<CoefficientRow>),
}

impl TableOutput {
    pub fn rows(&self) -> usize {
        match self {
            TableOutput::Records(r) => r.len(),
            TableOutput::Coefficients(c) => c.len(),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        match self {
            TableOutput::Records(r) => emit_records(r, path),
            TableOutput::Coefficients(rows) => {
                let io = |source| Error::Io {
                    path: path.to_path_buf(),
                    source,
                };
                let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
                writeln!(w, "source,kind,m,n,k,coefficient").map_err(io)?;
                for r in rows {
                    writeln!(w, "{},{},{},{},{},{}", r.source, r.kind, r.m, r.n, r.k, r.coefficient).map_err(io)?;
                }
                w.flush().map_err(io)
            }
        }
    }
}

fn coefficient_rows() -> Vec<CoefficientRow> {
    let printed = table_one().iter().flat_map(|row| {
        row.a.iter().enumerate().map(move |(k, &c)| CoefficientRow {
            source: "printed",
            kind: "real".into(),
            m: row.m,
            n: row.n,
            k,
            coefficient: c,
        })
    });
    let shipped = tabulated().flat_map(|set| {
        set.a.iter().enumerate().map(move |(k, &c)| CoefficientRow {
            source: "tabulated",
            kind: set.kind.to_string(),
            m: set.m,
            n: set.n,
            k,
            coefficient: c,
        })
    });
    printed.chain(shipped).collect()
}

fn capacity_table(opts: &RunOptions, cfgs: &[SystemConfig], snrs: &[f64]) -> Result<Vec<ResultRecord>> {
    let mut out = Vec::new();
    for cfg in cfgs {
        out.extend(capacity_rows(&opts.apply(cfg.clone(), CAPACITY_TRIALS), snrs)?);
    }
    Ok(out)
}

pub fn run_table(id: TableId, opts: &RunOptions) -> Result<TableOutput> {
    let both = |k, nr, l| [SystemConfig::new(k, nr, l), SystemConfig::new(k, nr, l).with_encoding(Encoding::Real)];
    match id {
        TableId::Coeffs => Ok(TableOutput::Coefficients(coefficient_rows())),
        TableId::MeanCapacityNr1 => {
            let cfgs: Vec<SystemConfig> = [10, 50]
                .into_iter()
                .flat_map(|l| [3, 4].into_iter().flat_map(move |k| both(k, 1, l)))
                .collect();
            capacity_table(opts, &cfgs, &[5.0, 30.0]).map(TableOutput::Records)
        }
        TableId::MeanCapacityNr2 => {
            let cfgs: Vec<SystemConfig> = [3, 4, 5].into_iter().flat_map(|k| both(k, 2, 50)).collect();
            capacity_table(opts, &cfgs, &[5.0, 20.0]).map(TableOutput::Records)
        }
    }
}

/// Closed-form TOP curves of a figure without Monte Carlo, for quick looks.
pub fn figure_analytic_preview(id: FigureId) -> Result<Vec<ResultRecord>> {
    let real = |k| SystemConfig::new(k, 2, 10).with_encoding(Encoding::Real);
    let betas = top_beta_grid();
    match id {
        FigureId::TopComplex => top_analytic_rows(
            &SystemConfig::new(3, 2, 10),
            &betas,
            &[TopForm::ComplexExact, TopForm::ComplexApprox],
        ),
        FigureId::TopRealEven => top_analytic_rows(&real(6), &betas, &[TopForm::RealEvenExact, TopForm::RealEvenApprox]),
        FigureId::TopRealOdd => {
            let mut out = top_analytic_rows(&real(5), &betas, &[TopForm::RealK2nr1Approx])?;
            out.extend(top_analytic_rows(&real(7), &betas, &[TopForm::RealK2nr3Approx])?);
            Ok(out)
        }
        other => Err(Error::NotApplicable(format!("figure {other} has no closed-form TOP curve"))),
    }
}
