//! End-to-end tests of the batch binary: exit codes, artifact files and
//! byte-level idempotence.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_levyheat"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

const RELATIVISTIC_N3: &str = r#"
[subordinator]
catalog = "relativistic"
alpha = "1/2"

[run]
n = 3
truncation = 4
kappa = "paper"
"#;

#[test]
fn heat_trace_reproduces_low_dimension_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    write(&cfg, RELATIVISTIC_N3);
    let out = dir.path().join("out");
    let status = bin()
        .args(["heat-trace", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("heat-trace.json")).unwrap()).unwrap();
    let norms = json["results"]["normalizations"].as_array().unwrap();
    let paper = norms.iter().find(|n| n["kappa"] == "paper").unwrap();
    assert_eq!(paper["active"], serde_json::Value::Bool(true));
    let terms = paper["expansion"]["power_terms"].as_array().unwrap();
    let pi = std::f64::consts::PI;
    let c0 = terms.iter().find(|t| t["exponent"] == "-3").unwrap()["coeff"].as_f64().unwrap();
    assert!((c0 - 1.0 / (3.0 * pi * pi)).abs() < 1e-12);
    let c2 = terms.iter().find(|t| t["exponent"] == "-1").unwrap()["coeff"].as_f64().unwrap();
    assert!((c2 + 1.0 / (12.0 * pi * pi)).abs() < 1e-12);
    let logs = paper["expansion"]["log_terms"].as_array().unwrap();
    assert_eq!(logs.len(), 1);
    assert!((logs[0]["coeff"].as_f64().unwrap() - 1.0 / (48.0 * pi * pi)).abs() < 1e-12);
    // CSV and txt artifacts exist
    assert!(out.join("heat-trace.csv").exists());
    assert!(out.join("heat-trace.txt").exists());
}

#[test]
fn zeta_single_pole_row_n2_paper() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    write(
        &cfg,
        r#"
[subordinator]
catalog = "relativistic"
alpha = "1/2"

[run]
n = 2
truncation = 4
kappa = "paper"

[zeta]
z_points = [0.0]
"#,
    );
    let out = dir.path().join("out");
    let status = bin()
        .args(["zeta", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("zeta.json")).unwrap()).unwrap();
    let entries = json["results"]["poles"]["table"]["entries"].as_array().unwrap();
    let pi = std::f64::consts::PI;
    let poles: Vec<_> = entries.iter().filter(|e| e["analytic"] == false).collect();
    assert_eq!(poles.len(), 1);
    assert_eq!(poles[0]["z"], "2");
    assert!((poles[0]["residue"].as_f64().unwrap() - 1.0 / (4.0 * pi)).abs() < 1e-12);
    // provenance fields present
    assert_eq!(json["results"]["poles"]["provenance"], "symbolic");
    let cont = json["results"]["continued"].as_array().unwrap();
    assert!(cont[0]["provenance"].as_str().unwrap().starts_with("quadrature("));
}

#[test]
fn empty_config_exits_one_with_usage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    write(&cfg, "");
    let output = bin().args(["expand", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("usage:"), "stderr: {err}");
}

#[test]
fn missing_config_flag_exits_one() {
    let output = bin().arg("zeta").output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn hypothesis_violation_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    write(
        &cfg,
        r#"
[subordinator]
catalog = "power-ratio"
alpha = "1/2"
c = 1.0

[run]
n = 2
"#,
    );
    let output = bin()
        .args(["heat-trace", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("validation failure"));
}

#[test]
fn artifacts_are_byte_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    write(&cfg, RELATIVISTIC_N3);
    let out1 = dir.path().join("o1");
    let out2 = dir.path().join("o2");
    for out in [&out1, &out2] {
        let status = bin()
            .args(["zeta", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    for name in ["zeta.json", "zeta.csv", "zeta.txt"] {
        let a = std::fs::read(out1.join(name)).unwrap();
        let b = std::fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
}

#[test]
fn simulate_small_run_passes_and_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    write(
        &cfg,
        r#"
[subordinator]
catalog = "relativistic"
alpha = "1/2"

[run]
n = 2
seed = 99

[simulate]
paths = 20000
epsilon = 1e-3
time_grid = [1.0]
lambdas = [1.0, 5.0]
bg_paths = 3000
x_grid = [0.1, 0.03]
"#,
    );
    let out1 = dir.path().join("s1");
    let out2 = dir.path().join("s2");
    for out in [&out1, &out2] {
        let status = bin()
            .args(["simulate", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(out1.join("simulate.csv")).unwrap();
    let b = std::fs::read(out2.join("simulate.csv")).unwrap();
    assert_eq!(a, b, "seeded simulate runs must be byte-identical");
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("functional,coord,t,estimate,stderr,target,pass\n"));
    assert!(text.lines().any(|l| l.starts_with("laplace,")));
    assert!(text.lines().any(|l| l.starts_with("bg-index,")));
    assert!(text.lines().any(|l| l.starts_with("arcsine,")));
}

#[test]
fn kappa_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    write(&cfg, RELATIVISTIC_N3); // config says paper
    let out = dir.path().join("out");
    let status = bin()
        .args(["zeta", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--kappa", "direct"])
        .status()
        .unwrap();
    assert!(status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("zeta.json")).unwrap()).unwrap();
    assert_eq!(json["kappa"], "direct");
    let entries = json["results"]["poles"]["table"]["entries"].as_array().unwrap();
    let pi = std::f64::consts::PI;
    // direct normalization: residue at z=3 is 1/(2π²), 3x the paper value
    let top = entries.iter().find(|e| e["z"] == "3").unwrap();
    assert!((top["residue"].as_f64().unwrap() - 1.0 / (2.0 * pi * pi)).abs() < 1e-12);
}

#[test]
fn custom_subordinator_flows_through() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    // declared coefficients for the relativistic density at order 1/2
    let p0 = 0.5 / std::f64::consts::PI.sqrt();
    write(
        &cfg,
        &format!(
            r#"
[subordinator]
alpha = "1/2"
p = [{p0}, {}, {}]
density = "relativistic"
density_alpha = "1/2"

[run]
n = 2
truncation = 2
"#,
            -p0,
            p0 / 2.0
        ),
    );
    let out = dir.path().join("out");
    let status = bin()
        .args(["expand", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("expand.json")).unwrap()).unwrap();
    assert_eq!(json["subordinator"]["catalog"], serde_json::Value::Null);
    let terms = json["results"]["watson"]["terms"].as_array().unwrap();
    // leading Watson term λ^(1/2) with coefficient 1
    assert_eq!(terms[0]["exponent"], "1/2");
    assert!((terms[0]["coeff"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}
