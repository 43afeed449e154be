//! End-to-end tests of the `discern` binary: byte stability, exit codes,
//! and the fixed CSV/JSON surfaces.

use std::path::PathBuf;
use std::process::{Command, Output};

fn discern(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_discern")).args(args).output().expect("the binary should run")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn write_scenario(dir: &tempdir::TempDir, name: &str) -> PathBuf {
    let emitted = discern(&["scenario", name]);
    assert!(emitted.status.success(), "scenario {name} failed");
    let path = dir.path().join(format!("{name}.toml"));
    std::fs::write(&path, &emitted.stdout).unwrap();
    path
}

mod tempdir {
    //! Minimal scoped temporary directory.
    use std::path::{Path, PathBuf};

    pub struct TempDir(PathBuf);

    impl TempDir {
        pub fn new(tag: &str) -> Self {
            let path =
                std::env::temp_dir().join(format!("discern-cli-test-{tag}-{}", std::process::id()));
            std::fs::create_dir_all(&path).unwrap();
            TempDir(path)
        }

        pub fn path(&self) -> &Path {
            &self.0
        }
    }

    impl Drop for TempDir {
        fn drop(&mut self) {
            let _ = std::fs::remove_dir_all(&self.0);
        }
    }
}

#[test]
fn solve_is_byte_stable_on_the_builtin_scenarios() {
    let dir = tempdir::TempDir::new("stable");
    for name in ["example_3_1", "example_4_beneficial", "example_5_2"] {
        let config = write_scenario(&dir, name);
        let config = config.to_str().unwrap();
        for format in ["human", "csv", "json"] {
            let first = discern(&["solve", config, "--format", format]);
            let second = discern(&["solve", config, "--format", format]);
            assert!(first.status.success(), "{name} ({format})");
            assert_eq!(first.stdout, second.stdout, "{name} ({format})");
            assert!(!first.stdout.is_empty());
        }
    }
}

#[test]
fn solve_csv_has_the_fixed_header_and_one_row_per_state() {
    let dir = tempdir::TempDir::new("csv");
    let config = write_scenario(&dir, "example_3_1");
    let output = discern(&["solve", config.to_str().unwrap(), "--format", "csv"]);
    assert!(output.status.success());
    let text = stdout(&output);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "state-label,S,mu,q_bar,h,pi_star,argmin_types,interior");
    // Two binary variables: four product states, one row each.
    assert_eq!(lines.count(), 4);
}

#[test]
fn solve_json_mirrors_the_solution_fields() {
    let dir = tempdir::TempDir::new("json");
    let config = write_scenario(&dir, "example_4_beneficial");
    let output = discern(&["solve", config.to_str().unwrap(), "--format", "json"]);
    assert!(output.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    for field in
        ["variant", "q_bar", "h", "pi_star", "argmin_types", "interior", "welfare", "diagnostics"]
    {
        assert!(parsed.get(field).is_some(), "missing field {field}");
    }
    assert_eq!(parsed["q_bar"].as_array().unwrap().len(), 2);
    for field in ["social_surplus", "trading_net_payoff", "exante_consumer_loss"] {
        assert!(parsed["welfare"].get(field).is_some(), "missing welfare field {field}");
    }
}

#[test]
fn bad_probability_mass_exits_with_one_and_names_the_field() {
    let dir = tempdir::TempDir::new("badmu");
    let config = write_scenario(&dir, "example_4_beneficial");
    let text = std::fs::read_to_string(&config).unwrap().replace("mu = 0.5", "mu = 0.495");
    std::fs::write(&config, text).unwrap();
    let output = discern(&["solve", config.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    let err = String::from_utf8(output.stderr).unwrap();
    assert!(err.contains("mu"), "{err}");
    assert!(output.stdout.is_empty());
}

#[test]
fn missing_benchmark_exits_with_two() {
    let dir = tempdir::TempDir::new("corner");
    let config = dir.path().join("corner.toml");
    std::fs::write(
        &config,
        r#"
schema = 1

[market]
v_star = 3.0
c = 1.0
variant = "exploitative"

[[variables]]
name = "t"
domain = ["0", "1"]

[[states]]
state = ["0"]
mu = 0.5
s = 3.0

[[states]]
state = ["1"]
mu = 0.5
s = 9.0

[[types]]
name = "rational"
coarse = ["t"]
"#,
    )
    .unwrap();
    let output = discern(&["ree", config.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_scenario_lists_the_available_names() {
    let output = discern(&["scenario", "nope"]);
    assert_eq!(output.status.code(), Some(1));
    let err = String::from_utf8(output.stderr).unwrap();
    assert!(err.contains("example_3_1"), "{err}");
}

#[test]
fn beta_prints_a_row_stochastic_matrix() {
    let dir = tempdir::TempDir::new("beta");
    let config = write_scenario(&dir, "example_3_1");
    let output = discern(&["beta", config.to_str().unwrap(), "--type", "t1", "--format", "json"]);
    assert!(output.status.success());
    let rows: Vec<Vec<f64>> = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let sum: f64 = row.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }
}

#[test]
fn compare_types_reports_the_added_type() {
    let dir = tempdir::TempDir::new("compare");
    let config = write_scenario(&dir, "example_4_beneficial");
    let typefile = dir.path().join("add.toml");
    std::fs::write(&typefile, "name = \"added-rational\"\ncoarse = [\"t\"]\n").unwrap();
    let output = discern(&[
        "compare-types",
        config.to_str().unwrap(),
        "--add",
        typefile.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(output.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(parsed["added_type"], "added-rational");
    assert_eq!(parsed["delta_q_bar"].as_array().unwrap().len(), 2);
}

#[test]
fn oracle_agrees_with_the_solver_on_a_builtin() {
    let dir = tempdir::TempDir::new("oracle");
    let config = write_scenario(&dir, "example_3_1");
    let output = discern(&["oracle", config.to_str().unwrap(), "--format", "json"]);
    assert!(output.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    let diff = parsed[0]["max_abs_diff"].as_f64().unwrap();
    assert!(diff < 1e-9, "diff {diff}");
}
