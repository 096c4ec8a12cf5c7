//! End-to-end runs of the `potwell` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const MODEL: &str = r#"
[model]
p = 3.0
preset = { name = "double_dispersion", gamma1 = 1.0, gamma2 = 1.0 }

[grid]
half_length = 30.0
n_modes = 512
"#;

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, format!("{MODEL}\n{body}")).unwrap();
    path
}

fn potwell(args: &[&str], config: Option<&Path>, out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_potwell"));
    cmd.args(args);
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    if let Some(o) = out {
        cmd.arg("--out").arg(o);
    }
    cmd.output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn preset_list_names_both_presets() {
    let text = ok(&potwell(&["preset-list"], None, None));
    assert!(text.contains("double_dispersion") && text.contains("good_boussinesq"));
}

#[test]
fn invalid_model_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(
        &path,
        r#"
[model]
p = 3.0
l = { numerator = [1.0] }
b = { numerator = [1.0] }

[grid]
half_length = 30.0
n_modes = 256
"#,
    )
    .unwrap();
    for sub in ["validate", "threshold", "simulate"] {
        let out = potwell(&[sub], Some(&path), Some(dir.path()));
        assert_eq!(out.status.code(), Some(2), "{sub}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn malformed_configs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(dir.path(), "unknown.toml", "colour = \"red\"\n");
    assert_eq!(potwell(&["classify"], Some(&unknown), None).status.code(), Some(2));
    let fine = write_config(dir.path(), "fine.toml", "");
    let out = Command::new(env!("CARGO_BIN_EXE_potwell"))
        .args(["classify", "--gamma", "1.5", "--config"])
        .arg(&fine)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let missing = potwell(&["classify"], Some(&dir.path().join("nope.toml")), None);
    assert_ne!(missing.status.code(), Some(0));
}

#[test]
fn threshold_table_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "t.toml", "[threshold]\nmax_iters = 5000\nrel_tol = 1e-12\ngrad_tol = 1e-8\ngamma_fractions = [0.25, 0.5]\n");
    ok(&potwell(&["threshold"], Some(&cfg), Some(dir.path())));
    let file = json(&dir.path().join("threshold.json"));
    let entries = file["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 3);
    let d: Vec<f64> = entries.iter().map(|e| e["d"].as_f64().unwrap()).collect();
    assert!((d[0] - 4.0 / 3.0).abs() / (4.0 / 3.0) < 0.02, "{d:?}");
    assert!(d[1] < d[0] && d[2] < d[1], "{d:?}");
    for e in entries {
        assert!(dir.path().join(e["minimizer_file"].as_str().unwrap()).exists());
    }
}

#[test]
fn classify_labels_scaled_ground_states() {
    let dir = tempfile::tempdir().unwrap();
    for (body, want) in [
        ("[initial.u]\nfamily = \"scaled_ground_state\"\nlambda = 0.9\n", "SigmaPlus"),
        ("[initial.u]\nfamily = \"scaled_ground_state\"\nlambda = 1.1\n", "SigmaMinus"),
        ("[initial.u]\nfamily = \"derivative_of_gaussian\"\namplitude = 5.0\nwidth = 1.0\n", "SigmaMinus"),
        ("[initial.u]\nfamily = \"gaussian\"\namplitude = 1.5\nwidth = 1.0\ncenter = 0.0\n", "Supercritical"),
    ] {
        let cfg = write_config(dir.path(), "c.toml", body);
        let text = ok(&potwell(&["classify"], Some(&cfg), Some(dir.path())));
        let rows: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(rows[0]["label"], want, "{body}");
        assert_eq!(json(&dir.path().join("classify.json")), rows);
    }
}

const BLOWUP: &str = r#"
[initial.u]
family = "derivative_of_gaussian"
amplitude = 5.0
width = 1.0

[solver]
t_end = 5.0
output_stride = 4
dealias = true
blowup_norm_threshold = 1e6
snapshot_times = [0.0, 0.2]
"#;

#[test]
fn simulate_writes_outputs_and_detects_blowup() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.toml", BLOWUP);
    ok(&potwell(&["simulate"], Some(&cfg), Some(dir.path())));
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,E,M,I,Q,twoI_minus_Q,u_Hs0,w_Hs,H,Hp,Hpp");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 11);
    assert!(first[8].parse::<f64>().is_ok(), "levine columns filled for mean-free data");
    let summary = json(&dir.path().join("summary.json"));
    assert_eq!(summary["outcome"], "blowup");
    assert_eq!(summary["initial"]["label"], "SigmaMinus");
    let t = summary["blowup"]["t_detect"].as_f64().unwrap();
    assert!(t > 0.3 && t < 1.0, "t_detect {t}");
    assert!(summary["blowup"]["delta_bound"].as_f64().unwrap() > 0.0);
    assert_eq!(summary["levine"]["passed"], true);
    assert!(dir.path().join("diagnostics.svg").exists());
    assert!(dir.path().join("snapshot_001_u.bin").exists());
}

#[test]
fn same_seed_gives_identical_trajectories() {
    let body = r#"
[initial.u]
family = "random_bumps"
amplitude = 0.4
count = 4

[solver]
t_end = 2.0
output_stride = 10
dealias = true
blowup_norm_threshold = 1e6
"#;
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "r.toml", body);
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_potwell"))
            .args(["simulate", "--seed", seed, "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        ok(&o);
        fs::read(out.join("trajectory.csv")).unwrap()
    };
    let a = run("a", "7");
    assert_eq!(a, run("b", "7"));
    assert_ne!(a, run("c", "8"));
}

#[test]
fn lambda_sweep_brackets_the_threshold() {
    let body = r#"
[initial.u]
family = "scaled_ground_state"
lambda = 0.5

[solver]
t_end = 10.0
output_stride = 20
dealias = true
blowup_norm_threshold = 1e6

[sweep]
parameter = "u.lambda"
values = [0.5, 0.8, 1.1, 1.4]
"#;
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sw.toml", body);
    let out = Command::new(env!("CARGO_BIN_EXE_potwell"))
        .args(["sweep", "--threads", "2", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    ok(&out);
    let result = json(&dir.path().join("sweep.json"));
    assert_eq!(result["bracket"], serde_json::json!([0.8, 1.1]));
    let labels: Vec<&str> = result["rows"].as_array().unwrap().iter().map(|r| r["label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["SigmaPlus", "SigmaPlus", "SigmaMinus", "SigmaMinus"]);
    assert!(dir.path().join("sweep.csv").exists() && dir.path().join("sweep.svg").exists());
    assert!(dir.path().join("sweep/run_003/trajectory.csv").exists());
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            potwell_cli::RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 4);
}
