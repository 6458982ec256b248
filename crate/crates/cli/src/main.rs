//! `siasim`: figure, table, sweep and validation runner.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use siasim_core::experiments::{
    emit_records, run_figure, run_sweep, run_table, run_validation, FigureId, RunOptions, SweepSpec, TableId,
    TableOutput, ValidationBudget,
};
use siasim_core::{Error, ResultRecord};

const EXIT_USAGE: u8 = 2;
const EXIT_UNKNOWN_ID: u8 = 3;
const EXIT_CONFIG: u8 = 4;
const EXIT_SOLVER: u8 = 5;
const EXIT_IO: u8 = 6;
const EXIT_VALIDATION: u8 = 7;

#[derive(Parser, Debug)]
#[command(name = "siasim", version, about = "Opportunistic scheduling and interference alignment simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// TOML configuration. For `sweep` a sweep file; otherwise optional
    /// `seed` / `trials` overrides.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for CSV and manifest files.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// RNG seed override.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Monte Carlo realisations override.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    trials: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reproduce a figure as plot data.
    Figure {
        /// top-complex, top-real-even, top-real-odd, capacity-vs-L,
        /// mean-capacity-nr1, mean-capacity-nr2, sm-nr2, sm-nr4-k2, sm-nr4-k3, sm-nr8
        id: String,
        #[command(flatten)]
        common: Common,
    },
    /// Reproduce a table.
    Table {
        /// coeffs, mean-capacity-nr1, mean-capacity-nr2
        id: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run a custom sweep described by `--config`.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Run the invariant suite and print pass/fail per property.
    Validate {
        /// Reduced problem sizes.
        #[arg(long)]
        quick: bool,
        #[command(flatten)]
        common: Common,
    },
}

/// Optional overrides read from `--config` for figures, tables and validation.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Overrides {
    seed: Option<u64>,
    trials: Option<usize>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn new(code: u8, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            kind,
            message: message.into(),
        }
    }

    fn config(e: Error) -> Self {
        Self::new(EXIT_CONFIG, "config", e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::UnknownId(_) => (EXIT_UNKNOWN_ID, "unknown_id"),
            Error::InvalidConfig(_) | Error::Parse { .. } => (EXIT_CONFIG, "config"),
            Error::Io { .. } | Error::Csv { .. } => (EXIT_IO, "io"),
            _ => (EXIT_SOLVER, "solver"),
        };
        Self::new(code, kind, e.to_string())
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    id: Option<&'a str>,
    output: String,
    rows: usize,
    seed: Option<u64>,
    trials: Option<usize>,
    snr_convention: &'static str,
    config: serde_json::Value,
    versions: serde_json::Value,
}

fn versions() -> serde_json::Value {
    json!({
        "siasim": env!("CARGO_PKG_VERSION"),
        "mev_coefficients": 1,
        "csv_schema": siasim_core::experiments::records::COLUMNS.join(","),
    })
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::new(EXIT_IO, "io", format!("{}: {e}", path.display()))
}

fn prepare_out(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))
}

fn write_manifest(csv_path: &Path, manifest: &Manifest<'_>) -> Result<PathBuf, Failure> {
    let path = csv_path.with_extension("manifest.json");
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serialises");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| io_failure(&path, e))?;
    Ok(path)
}

fn read_overrides(common: &Common) -> Result<RunOptions, Failure> {
    let file = match &common.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                Failure::new(EXIT_CONFIG, "config", format!("{}: {e}", p.display()))
            })?;
            toml::from_str::<Overrides>(&text)
                .map_err(|e| Failure::new(EXIT_CONFIG, "config", format!("{}: {e}", p.display())))?
        }
        None => Overrides::default(),
    };
    Ok(RunOptions {
        seed: common.seed.or(file.seed),
        trials: common.trials.map(|t| t as usize).or(file.trials),
    })
}

/// Distinct scenarios appearing in `records`, in first-seen order.
fn scenarios(records: &[ResultRecord]) -> serde_json::Value {
    let mut seen: Vec<serde_json::Value> = Vec::new();
    for r in records {
        let v = json!({
            "metric": r.metric,
            "encoding": r.encoding,
            "K": r.k,
            "Nt": r.nt,
            "Nr": r.nr,
            "L": r.l,
            "trials": r.trials,
            "seed": r.seed,
        });
        if !seen.contains(&v) {
            seen.push(v);
        }
    }
    serde_json::Value::Array(seen)
}

struct Outcome {
    summary: serde_json::Value,
    failed: bool,
}

fn run(command: Command) -> Result<Outcome, Failure> {
    let common = match &command {
        Command::Figure { common, .. }
        | Command::Table { common, .. }
        | Command::Sweep { common }
        | Command::Validate { common, .. } => common.clone(),
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .map_err(|e| Failure::new(EXIT_USAGE, "usage", e.to_string()))?;
    }
    let started = Instant::now();
    let (summary, failed) = match command {
        Command::Figure { id, common } => {
            let fig: FigureId = id.parse()?;
            let opts = read_overrides(&common)?;
            prepare_out(&common.out)?;
            let records = run_figure(fig, &opts)?;
            let path = common.out.join(format!("figure-{fig}.csv"));
            emit_records(&records, &path)?;
            let manifest = write_manifest(
                &path,
                &Manifest {
                    command: "figure",
                    id: Some(fig.name()),
                    output: path.display().to_string(),
                    rows: records.len(),
                    seed: opts.seed,
                    trials: opts.trials,
                    snr_convention: "S = I0 = 1, N0 = 10^(-snr_db/10)",
                    config: scenarios(&records),
                    versions: versions(),
                },
            )?;
            (json!({"output": path, "manifest": manifest, "rows": records.len()}), false)
        }
        Command::Table { id, common } => {
            let table: TableId = id.parse()?;
            let opts = read_overrides(&common)?;
            prepare_out(&common.out)?;
            let out = run_table(table, &opts)?;
            let path = common.out.join(format!("table-{table}.csv"));
            out.write_csv(&path)?;
            let config = match &out {
                TableOutput::Records(r) => scenarios(r),
                TableOutput::Coefficients(_) => json!({"source": "bundled coefficient table"}),
            };
            let manifest = write_manifest(
                &path,
                &Manifest {
                    command: "table",
                    id: Some(table.name()),
                    output: path.display().to_string(),
                    rows: out.rows(),
                    seed: opts.seed,
                    trials: opts.trials,
                    snr_convention: "S = I0 = 1, N0 = 10^(-snr_db/10)",
                    config,
                    versions: versions(),
                },
            )?;
            (json!({"output": path, "manifest": manifest, "rows": out.rows()}), false)
        }
        Command::Sweep { common } => {
            let cfg_path = common
                .config
                .clone()
                .ok_or_else(|| Failure::new(EXIT_USAGE, "usage", "sweep needs --config <path>"))?;
            let mut spec = SweepSpec::from_path(&cfg_path).map_err(Failure::config)?;
            if let Some(seed) = common.seed {
                spec.system.seed = seed;
            }
            if let Some(trials) = common.trials {
                spec.system.trials = trials as usize;
            }
            prepare_out(&common.out)?;
            let records = run_sweep(&spec)?;
            let stem = cfg_path.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
            let path = common.out.join(format!("sweep-{stem}.csv"));
            emit_records(&records, &path)?;
            let system = serde_json::to_value(&spec.system).expect("config serialises");
            let manifest = write_manifest(
                &path,
                &Manifest {
                    command: "sweep",
                    id: None,
                    output: path.display().to_string(),
                    rows: records.len(),
                    seed: Some(spec.system.seed),
                    trials: Some(spec.system.trials),
                    snr_convention: "snr_db axis sets S = I0 = 1, N0 = 10^(-snr_db/10); otherwise as configured",
                    config: json!({
                        "metric": spec.metric.name(),
                        "axis": spec.axis.name(),
                        "target_top": spec.target_top,
                        "beta_offset_db": spec.beta_offset_db,
                        "forms": spec.forms.iter().map(|f| f.name()).collect::<Vec<_>>(),
                        "system": system,
                    }),
                    versions: versions(),
                },
            )?;
            (json!({"output": path, "manifest": manifest, "rows": records.len()}), false)
        }
        Command::Validate { quick, common } => {
            let opts = read_overrides(&common)?;
            let mut budget = if quick { ValidationBudget::quick() } else { ValidationBudget::default() };
            if let Some(t) = opts.trials {
                budget.top_trials = t.max(100);
                budget.capacity_trials = t;
            }
            let seed = opts.seed.unwrap_or(1);
            let checks = run_validation(&budget, seed);
            for c in &checks {
                println!("{} {:<32} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            prepare_out(&common.out)?;
            let path = common.out.join("validate.csv");
            let mut w = csv::Writer::from_path(&path).map_err(|e| Failure::new(EXIT_IO, "io", format!("{}: {e}", path.display())))?;
            let csv_err = |e: csv::Error| Failure::new(EXIT_IO, "io", e.to_string());
            w.write_record(["check", "passed", "detail"]).map_err(csv_err)?;
            for c in &checks {
                w.write_record([c.name, if c.passed { "true" } else { "false" }, &c.detail])
                    .map_err(csv_err)?;
            }
            w.flush().map_err(|e| io_failure(&path, e))?;
            let manifest = write_manifest(
                &path,
                &Manifest {
                    command: "validate",
                    id: None,
                    output: path.display().to_string(),
                    rows: checks.len(),
                    seed: Some(seed),
                    trials: opts.trials,
                    snr_convention: "S = I0 = 1, N0 = 10^(-snr_db/10)",
                    config: json!({"budget": format!("{budget:?}")}),
                    versions: versions(),
                },
            )?;
            let failed = checks.iter().filter(|c| !c.passed).count();
            (
                json!({"output": path, "manifest": manifest, "checks": checks.len(), "failed": failed}),
                failed > 0,
            )
        }
    };
    let mut summary = summary;
    summary["wall_time_s"] = json!(started.elapsed().as_secs_f64());
    Ok(Outcome { summary, failed })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(if code == 0 { 0 } else { EXIT_USAGE });
        }
    };
    match run(cli.command) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            if outcome.failed {
                eprintln!("{}", json!({"error": "validation", "message": "one or more checks failed", "exit_code": EXIT_VALIDATION}));
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(f) => {
            eprintln!("{}", json!({"error": f.kind, "message": f.message, "exit_code": f.code}));
            ExitCode::from(f.code)
        }
    }
}
