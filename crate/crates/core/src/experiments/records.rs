//! Sweep-point records and their CSV form.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, SystemConfig};

/// CSV header, in column order.
pub const COLUMNS: [&str; 14] = [
    "metric",
    "encoding",
    "K",
    "Nt",
    "Nr",
    "L",
    "snr_db",
    "beta_db",
    "trials",
    "mc_value",
    "mc_stderr",
    "analytic_value",
    "analytic_kind",
    "seed",
];

/// One sweep point. Absent values are `None` and serialise as empty fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub metric: String,
    pub encoding: String,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "Nt")]
    pub nt: usize,
    #[serde(rename = "Nr")]
    pub nr: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub snr_db: Option<f64>,
    pub beta_db: Option<f64>,
    pub trials: Option<usize>,
    pub mc_value: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub analytic_value: Option<f64>,
    pub analytic_kind: Option<String>,
    pub seed: u64,
}

impl ResultRecord {
    /// A record carrying only the scenario inputs of `cfg`.
    pub fn new(metric: &str, cfg: &SystemConfig) -> Self {
        Self {
            metric: metric.to_string(),
            encoding: cfg.encoding.to_string(),
            k: cfg.k,
            nt: cfg.nt,
            nr: cfg.nr,
            l: cfg.l,
            snr_db: Some(cfg.snr_db()),
            beta_db: None,
            trials: None,
            mc_value: None,
            mc_stderr: None,
            analytic_value: None,
            analytic_kind: None,
            seed: cfg.seed,
        }
    }

    pub fn with_beta_db(mut self, beta_db: f64) -> Self {
        self.beta_db = Some(beta_db);
        self
    }

    pub fn with_mc(mut self, e: &super::Estimate) -> Self {
        self.mc_value = Some(e.value);
        self.mc_stderr = Some(e.stderr);
        self.trials = Some(e.trials);
        self
    }

    pub fn with_analytic(mut self, value: f64, kind: &str) -> Self {
        self.analytic_value = Some(value);
        self.analytic_kind = Some(kind.to_string());
        self
    }
}

/// Writes `records` as CSV. An empty slice yields a header-only file.
pub fn write_records<W: Write>(records: &[ResultRecord], out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(COLUMNS)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> std::result::Result<Vec<ResultRecord>, csv::Error> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().collect()
}

pub fn emit_records(records: &[ResultRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_records(records, std::io::BufWriter::new(file)).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_records(path: &Path) -> Result<Vec<ResultRecord>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_records(std::io::BufReader::new(file)).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}
