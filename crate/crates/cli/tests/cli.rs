use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const CONFIG: &str = r#"scenario = "crump_young"
seed = 5
replicates = 4
horizon = 4.0
intervals = 8

[params]
dilution = 0.5
s_in = 0.003
stoichiometry = 0.23
volume = 1e-8
cell_mass = 7e-13

[kinetics]
kind = "monod"
mu_max = 1.35
half_saturation = 0.004

[init]
population = 5
substrate = 0.003
"#;

fn chemostat(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chemostat"));
    cmd.args(args).env_remove("CHEMOSTAT_OUT_DIR");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn invalid_config_fails_with_a_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &CONFIG.replace("replicates = 4", "replicates = 0"));
    let out = chemostat(&["run", path.to_str().unwrap(), "--out-dir", dir.path().join("o").to_str().unwrap()], &[]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("3:") && err.contains("replicates"), "{err}");
    assert!(!dir.path().join("o").exists());
}

#[test]
fn run_writes_outputs_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), CONFIG);
    let mut trajectories = Vec::new();
    for name in ["a", "b"] {
        let out_dir = dir.path().join(name);
        let out = chemostat(&["run", path.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()], &[]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stdout).contains("wrote"));
        for f in ["summary.json", "timing.json", "config.toml"] {
            assert!(out_dir.join(f).exists(), "{f} missing");
        }
        trajectories.push(std::fs::read(out_dir.join("trajectories.csv")).unwrap());
    }
    assert_eq!(trajectories[0], trajectories[1]);
}

#[test]
fn out_dir_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), CONFIG);
    let target = dir.path().join("from-env");
    let out = chemostat(&["run", path.to_str().unwrap()], &[("CHEMOSTAT_OUT_DIR", &target)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(target.join("trajectories.csv").exists());
}

#[test]
fn command_line_overrides_reach_the_echoed_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), CONFIG);
    let out_dir = dir.path().join("o");
    let out = chemostat(
        &[
            "run",
            path.to_str().unwrap(),
            "--seed",
            "17",
            "--replicates",
            "2",
            "--horizon",
            "1.5",
            "--out-dir",
            out_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let echoed = std::fs::read_to_string(out_dir.join("config.toml")).unwrap();
    for line in ["seed = 17", "replicates = 2", "horizon = 1.5"] {
        assert!(echoed.lines().any(|l| l == line), "{line} not in\n{echoed}");
    }
    let bad = chemostat(&["run", path.to_str().unwrap(), "--horizon=-1"], &[]);
    assert!(!bad.status.success());
}

#[test]
fn check_prints_the_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), CONFIG);
    let out = chemostat(&["check", path.to_str().unwrap()], &[]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("dt = 0.001"), "{text}");
}
