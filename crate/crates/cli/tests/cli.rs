use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_derivzeros"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg("run")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn run_dir(o: &Output) -> PathBuf {
    PathBuf::from(String::from_utf8(o.stdout.clone()).unwrap().trim())
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

const SWEEP: &str = r#"
experiment = "convergence_sweep"
n_values = [20, 40]
trials = 3
reference_samples = 200
master_seed = 5

[k_schedule]
mode = "fixed"
k = 2

[distribution]
kind = "uniform_circle"
radius = 1.0
"#;

#[test]
fn validate_accepts_good_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.toml", SWEEP);
    let o = bin().arg("validate").arg(&cfg).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("convergence_sweep"));
}

#[test]
fn validate_lists_every_problem_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = SWEEP
        .replace("[20, 40]", "[40, 20]")
        .replace("radius = 1.0", "radius = -1.0");
    let cfg = write_config(dir.path(), "bad.toml", &text);
    let o = bin().arg("validate").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("n_values not increasing"), "{err}");
    assert!(err.contains("distribution.radius"), "{err}");
    let o = run(&cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unreadable_config_is_a_config_error() {
    let o = bin()
        .arg("validate")
        .arg("/nonexistent/x.toml")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.toml", SWEEP);
    let a = run(&cfg, dir.path(), &["--workers", "1"]);
    let b = run(&cfg, dir.path(), &["--workers", "3"]);
    assert!(a.status.success() && b.status.success());
    let (da, db) = (run_dir(&a), run_dir(&b));
    assert_ne!(da, db);
    for f in ["results.json", "results.csv"] {
        assert_eq!(
            fs::read(da.join(f)).unwrap(),
            fs::read(db.join(f)).unwrap(),
            "{f}"
        );
    }
    let results = read_json(&da.join("results.json"));
    let hash = results["config_hash"].as_str().unwrap().to_string();
    assert!(da
        .file_name()
        .unwrap()
        .to_str()
        .unwrap()
        .contains(&hash[..12]));
    assert_eq!(results["records"].as_array().unwrap().len(), 6);
    let csv = fs::read_to_string(da.join("results.csv")).unwrap();
    assert!(csv
        .lines()
        .next()
        .unwrap()
        .contains(&format!("config_hash={hash}")));
    assert_eq!(csv.lines().count(), 2 + 6);
    let timing = read_json(&da.join("timing.json"));
    assert_eq!(timing["config_hash"].as_str().unwrap(), hash);
    assert_eq!(timing["cells"].as_array().unwrap().len(), 6);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.toml", SWEEP);
    let a = read_json(&run_dir(&run(&cfg, dir.path(), &[])).join("results.json"));
    let b = read_json(&run_dir(&run(&cfg, dir.path(), &["--seed", "6"])).join("results.json"));
    assert_eq!(b["config"]["master_seed"], 6);
    assert_ne!(a["config_hash"], b["config_hash"]);
    assert_ne!(a["records"], b["records"]);
}

#[test]
fn failed_cells_give_exit_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SWEEP}\n[rootfind]\nmax_iterations = 1\npolish_steps = 0\n");
    let cfg = write_config(dir.path(), "a.toml", &text);
    let o = run(&cfg, dir.path(), &[]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let results = read_json(&run_dir(&o).join("results.json"));
    let records = results["records"].as_array().unwrap();
    assert_eq!(records.len(), 6);
    assert!(records.iter().any(|r| r["error"].is_string()));
}

#[test]
fn exact_binomial_scenario_through_the_runner() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
experiment = "anticonc_sweep"
n_values = [10]
trials = 1
mc_trials = 10000
epsilon = 0.1
y_source = "direct"

[k_schedule]
mode = "fixed"
k = 1

[distribution]
kind = "finite_atomic"
atoms = [{ point = [-1.0, 0.0], weight = 0.5 }, { point = [1.0, 0.0], weight = 0.5 }]
"#;
    let cfg = write_config(dir.path(), "binom.toml", text);
    let o = run(&cfg, dir.path(), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let d = run_dir(&o);
    let est = read_json(&d.join("estimates.json"));
    let e = &est["estimates"][0];
    let p_hat = e["p_hat"].as_f64().unwrap();
    let p: f64 = 0.246_093_75;
    let sd = (p * (1.0 - p) / 10_000.0).sqrt();
    assert!((p_hat - p).abs() <= 3.0 * sd, "p_hat {p_hat}");
    let (lo, hi) = (
        e["ci95"][0].as_f64().unwrap(),
        e["ci95"][1].as_f64().unwrap(),
    );
    assert!(lo <= p && p <= hi);
    let results = read_json(&d.join("results.json"));
    assert!(results["run_info"]["constants"]["note"]
        .as_str()
        .unwrap()
        .contains("non-paper"));
}

#[test]
fn log_field_scan_writes_grids() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
experiment = "log_field_scan"
n_values = [30]
trials = 2
grid_step = 0.05

[k_schedule]
mode = "fixed"
k = 2

[distribution]
kind = "uniform_disk"
radius = 1.0
"#;
    let cfg = write_config(dir.path(), "field.toml", text);
    let o = run(&cfg, dir.path(), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let d = run_dir(&o);
    let field = fs::read_to_string(d.join("field_n30.csv")).unwrap();
    let mut lines = field.lines();
    assert!(lines.next().unwrap().starts_with("# tool=derivzeros"));
    assert_eq!(lines.next().unwrap(), "x,y,value");
    let results = read_json(&d.join("results.json"));
    assert_eq!(results["run_info"]["z_unverified"], false);
    let rec = &results["records"][0]["metrics"];
    assert_eq!(rec["field_csv"], "field_n30.csv");
    assert_eq!(rec["grid_points"].as_u64().unwrap() as usize, lines.count());
}

#[test]
fn potential_check_runs() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
experiment = "potential_check"
n_values = [6, 12]
trials = 2
grid_step = 0.02

[k_schedule]
mode = "fixed"
k = 2

[distribution]
kind = "complex_gaussian"
mean = [0.0, 0.0]
sigma = 1.0
"#;
    let cfg = write_config(dir.path(), "pot.toml", text);
    let o = run(&cfg, dir.path(), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let results = read_json(&run_dir(&o).join("results.json"));
    for r in results["records"].as_array().unwrap() {
        assert!(r["metrics"]["pj_residual"].as_f64().unwrap() < 1e-6);
        assert!(r["metrics"]["laplacian_residual"].as_f64().unwrap() < 5e-3);
    }
}
