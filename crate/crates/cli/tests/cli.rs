use std::path::Path;
use std::process::{Command, Output};

fn siasim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_siasim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr_json(o: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text.lines().last().expect("stderr has a line");
    serde_json::from_str(line).expect("stderr is JSON")
}

const HEADER: &str = "metric,encoding,K,Nt,Nr,L,snr_db,beta_db,trials,mc_value,mc_stderr,analytic_value,analytic_kind,seed";

#[test]
fn help_lists_subcommands_and_flags() {
    let o = siasim(&["--help"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    for s in ["figure", "table", "sweep", "validate"] {
        assert!(text.contains(s), "{text}");
    }
    let o = siasim(&["figure", "--help"]);
    let text = String::from_utf8_lossy(&o.stdout);
    for f in ["--config", "--out", "--seed", "--trials", "--threads"] {
        assert!(text.contains(f), "{text}");
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&siasim(&[])), 2);
    assert_eq!(code(&siasim(&["figure"])), 2);
    assert_eq!(code(&siasim(&["render", "x"])), 2);
    assert_eq!(code(&siasim(&["figure", "top-complex", "--trials", "0"])), 2);
}

#[test]
fn unknown_ids_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = siasim(&["figure", "fig-12", "--out", out]);
    assert_eq!(code(&o), 3);
    assert_eq!(stderr_json(&o)["error"], "unknown_id");
    assert_eq!(code(&siasim(&["table", "IV", "--out", out])), 3);
}

#[test]
fn config_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let missing = dir.path().join("missing.toml");
    let o = siasim(&["figure", "sm-nr2", "--config", missing.to_str().unwrap(), "--out", out]);
    assert_eq!(code(&o), 4);
    assert_eq!(stderr_json(&o)["error"], "config");

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "metric = \"top\"\naxis = \"beta_db\"\nvalues = [3, 1]\n").unwrap();
    assert_eq!(code(&siasim(&["sweep", "--config", bad.to_str().unwrap(), "--out", out])), 4);
}

#[test]
fn solver_errors_exit_5() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("noform.toml");
    std::fs::write(
        &cfg,
        "metric = \"outage_capacity_vs_L\"\naxis = \"L\"\nvalues = [1, 2, 4, 8]\ntarget_top = 0.2\n\
         [system]\nK = 9\nNt = 1\nNr = 2\nL = 10\nS = 1.0\nI0 = 1.0\nN0 = 0.01\nencoding = \"real\"\ntrials = 100\nseed = 1\n",
    )
    .unwrap();
    let o = siasim(&["sweep", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 5, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stderr_json(&o)["error"], "solver");
}

#[test]
fn table_coeffs_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = siasim(&["table", "coeffs", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(dir.path().join("table-coeffs.csv")).unwrap();
    assert!(csv.starts_with("source,kind,m,n,k,coefficient\n"));
    assert!(csv.contains("printed,real,2,3,1,"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("table-coeffs.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["id"], "coeffs");
    assert!(manifest["versions"]["siasim"].is_string());
}

fn run_figure(dir: &Path, seed: &str) -> (String, String) {
    let o = siasim(&[
        "figure",
        "top-complex",
        "--trials",
        "400",
        "--seed",
        seed,
        "--threads",
        "2",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    (
        std::fs::read_to_string(dir.join("figure-top-complex.csv")).unwrap(),
        std::fs::read_to_string(dir.join("figure-top-complex.manifest.json")).unwrap(),
    )
}

#[test]
fn figure_outputs_are_byte_identical_per_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (csv_a, man_a) = run_figure(a.path(), "42");
    let (csv_b, man_b) = run_figure(b.path(), "42");
    assert_eq!(csv_a, csv_b);
    assert_eq!(man_a.replace(a.path().to_str().unwrap(), ""), man_b.replace(b.path().to_str().unwrap(), ""));
    assert!(csv_a.starts_with(HEADER));
    assert!(csv_a.lines().skip(1).all(|l| l.ends_with(",42")));
    let (csv_c, _) = run_figure(a.path(), "43");
    assert_ne!(csv_a, csv_c);
}

#[test]
fn sweep_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cap.toml");
    std::fs::write(
        &cfg,
        "metric = \"mean_sum_capacity\"\naxis = \"snr_db\"\nvalues = [0, 10, 20]\n\
         [system]\nK = 3\nNt = 1\nNr = 1\nL = 10\nS = 1.0\nI0 = 1.0\nN0 = 0.01\nencoding = \"complex\"\ntrials = 1000\nseed = 1\n",
    )
    .unwrap();
    let o = siasim(&["sweep", "--config", cfg.to_str().unwrap(), "--trials", "50", "--seed", "5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep-cap.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("mean_sum_capacity,complex,3,1,1,10,10.0,"));
    assert!(rows.iter().all(|r| r.contains(",50,") && r.ends_with(",,,5")));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep-cap.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["system"]["trials"], 50);
}

#[test]
fn validate_quick_reports_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = siasim(&["validate", "--quick", "--out", dir.path().to_str().unwrap()]);
    let text = String::from_utf8_lossy(&o.stdout);
    let lines: Vec<&str> = text.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).collect();
    assert_eq!(lines.len(), 9, "{text}");
    assert_eq!(code(&o), if lines.iter().all(|l| l.starts_with("PASS")) { 0 } else { 7 });
    assert!(dir.path().join("validate.csv").exists());
}
