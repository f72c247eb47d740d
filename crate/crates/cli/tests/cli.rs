use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dampwave_cli::output::render;
use dampwave_cli::Format;
use serde_json::Value;
use tempfile::TempDir;

fn dampwave(dir: &Path, args: &[&str], config: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dampwave"));
    cmd.current_dir(dir).env_remove("DAMPWAVE_THREADS");
    if let Some(text) = config {
        fs::write(dir.join("run.toml"), text).unwrap();
        cmd.args(["--config", "run.toml"]);
    }
    cmd.args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value_after(text: &str, prefix: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(prefix)).expect(prefix);
    line[prefix.len()..]
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn basis_with_defaults_reports_the_first_eigenvalue() {
    let tmp = TempDir::new().unwrap();
    let o = dampwave(tmp.path(), &["basis"], None);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mu1 = value_after(&text, "mu_1 = ");
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((mu1 - pi2).abs() / pi2 < 1e-4, "{mu1}");
    assert!(text.contains("d_1 = 1"));
    assert!(text.contains("dim E_- = 0"));
    assert!(tmp.path().join("out/basis.csv").is_file());
    let summary: Value =
        serde_json::from_slice(&fs::read(tmp.path().join("out/spectrum.json")).unwrap()).unwrap();
    assert_eq!(summary["kernel_modes"], serde_json::json!([1]));
}

#[test]
fn third_eigenvalue_has_two_minus_modes() {
    let tmp = TempDir::new().unwrap();
    let o = dampwave(tmp.path(), &["basis"], Some("[dynamics]\nk = 3\n"));
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("dim E_- = 2"));
}

#[test]
fn malformed_key_exits_with_config_code() {
    let tmp = TempDir::new().unwrap();
    let o = dampwave(tmp.path(), &["basis"], Some("[operator]\nn_gird = 100\n"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_gird"));
    let o = dampwave(tmp.path(), &["basis"], Some("[dynamics]\nc = -1.0\n"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dynamics.c"));
}

#[test]
fn missing_coefficient_file_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let o = dampwave(
        tmp.path(),
        &["basis"],
        Some("[operator]\ncoefficient_file = \"nope.csv\"\n"),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("operator.coefficient_file"));
}

#[test]
fn coefficient_file_is_read_relative_to_the_config() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("a.csv"), "x,a\n0.0,2.0\n1.0,2.0\n").unwrap();
    let o = dampwave(
        tmp.path(),
        &["basis"],
        Some("[operator]\ncoefficient_file = \"a.csv\"\n"),
    );
    assert_eq!(o.status.code(), Some(0));
    let mu1 = value_after(&stdout(&o), "mu_1 = ");
    let expect = 2.0 * std::f64::consts::PI.powi(2);
    assert!((mu1 - expect).abs() / expect < 1e-4, "{mu1}");
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dampwave"))
        .current_dir(tmp.path())
        .env("DAMPWAVE_THREADS", "many")
        .arg("basis")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn index_prints_nonempty_invariant_set() {
    let tmp = TempDir::new().unwrap();
    let o = dampwave(tmp.path(), &["index"], Some("[checks]\nn_samples = 500\n"));
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("K_infty nonempty: true"));
    assert!(text.contains("Sigma^1"));
}

#[test]
fn vanishing_field_is_inconclusive() {
    let tmp = TempDir::new().unwrap();
    let cfg = "[nonlinearity]\nname = \"zero\"\n[checks]\nn_samples = 100\n";
    assert_eq!(
        dampwave(tmp.path(), &["index"], Some(cfg)).status.code(),
        Some(4)
    );
    let o = dampwave(tmp.path(), &["check"], Some(cfg));
    assert_eq!(o.status.code(), Some(4));
    // the report is still written
    let reports: Value =
        serde_json::from_slice(&fs::read(tmp.path().join("out/conditions.json")).unwrap()).unwrap();
    assert!(reports
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["verdict"] == "inconclusive"));
}

#[test]
fn newton_failure_is_a_numerical_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = "[checks]\nn_samples = 200\nnewton_guess = [1e8]\n";
    let o = dampwave(tmp.path(), &["equilibrium"], Some(cfg));
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn unknown_nonlinearity_names_the_key() {
    let tmp = TempDir::new().unwrap();
    let o = dampwave(
        tmp.path(),
        &["basis"],
        Some("[nonlinearity]\nname = \"tanh\"\n"),
    );
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("nonlinearity.name") && err.contains("arctan"),
        "{err}"
    );
}

#[test]
fn check_reports_round_trip() {
    let tmp = TempDir::new().unwrap();
    let o = dampwave(
        tmp.path(),
        &["check", "--seed", "4"],
        Some("[checks]\nn_samples = 300\n"),
    );
    assert_eq!(o.status.code(), Some(0));
    let bytes = fs::read(tmp.path().join("out/conditions.json")).unwrap();
    let reports: Vec<dampwave_core::resonance::ConditionReport> =
        serde_json::from_slice(&bytes).unwrap();
    let names: Vec<&str> = reports.iter().map(|r| r.condition.as_str()).collect();
    assert_eq!(names, ["LL", "G"]);
    assert_eq!(reports[1].seed, Some(4));
    assert_eq!(render(&reports, Format::Json), bytes);
}

#[test]
fn csv_format_and_out_flag() {
    let tmp = TempDir::new().unwrap();
    let cfg = "[dynamics]\nT = 1.0\nn_trajectories = 2\n";
    let o = dampwave(
        tmp.path(),
        &["simulate", "--format", "csv", "--out", "sim"],
        Some(cfg),
    );
    assert_eq!(o.status.code(), Some(0));
    for j in 0..2 {
        let text =
            fs::read_to_string(tmp.path().join(format!("sim/trajectory_{j:03}.csv"))).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            dampwave_core::semiflow::TRAJECTORY_HEADER
        );
        assert_eq!(text.lines().count(), 12);
    }
}

#[test]
fn probe_divergence_recovers_the_forcing_norm() {
    let tmp = TempDir::new().unwrap();
    let o = dampwave(
        tmp.path(),
        &["probe-divergence", "--format", "csv"],
        Some("[checks]\nprobe_seeds = 3\n"),
    );
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(tmp.path().join("out/probe.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let (n, s) = (col("y0_norm"), col("slope"));
    let mut rows = 0;
    for line in lines {
        let f: Vec<f64> = line
            .split(',')
            .map(|v| v.parse().unwrap_or(f64::NAN))
            .collect();
        assert!((f[s] - f[n] * f[n]).abs() < 1e-6 * f[n] * f[n]);
        rows += 1;
    }
    assert_eq!(rows, 6);
}

#[test]
fn connect_reports_the_clause_table() {
    let tmp = TempDir::new().unwrap();
    let o = dampwave(
        tmp.path(),
        &["connect"],
        Some("[nonlinearity]\nname = \"rational_sr\"\n"),
    );
    assert_eq!(o.status.code(), Some(0));
    let rep: Value =
        serde_json::from_slice(&fs::read(tmp.path().join("out/connect.json")).unwrap()).unwrap();
    assert_eq!(rep["strong_resonance"]["verdict"], "SR1");
    assert!(rep["criteria"]["clauses"].as_array().unwrap().len() >= 8);
}

#[test]
fn shipped_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            dampwave_cli::RunConfig::load(&path)
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 4);
}

#[test]
fn default_config_file_matches_builtin_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml");
    let file = dampwave_cli::RunConfig::load(&path).unwrap();
    let builtin = dampwave_cli::RunConfig::default();
    assert_eq!(
        serde_json::to_value(&file).unwrap(),
        serde_json::to_value(&builtin).unwrap()
    );
}
