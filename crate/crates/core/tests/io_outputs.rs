//! Output files: schema lines, summary layout, config echo and independence
//! from the worker count.

use std::collections::BTreeMap;
use std::path::Path;

use chemostat::io::{run, write_outputs, RunConfig, SUMMARY_SCHEMA, TRAJECTORY_HEADER, TRAJECTORY_SCHEMA};

const SMALL_RUN: &str = r#"
scenario = "crump_young"
seed = 99
replicates = 6
horizon = 5.0
intervals = 10

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

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn trajectory_file_layout() {
    let cfg = RunConfig::from_toml(SMALL_RUN).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_outputs(&run(&cfg).unwrap(), dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("trajectories.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(TRAJECTORY_SCHEMA));
    assert_eq!(lines.next().unwrap(), TRAJECTORY_HEADER.join(","));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6 * 11);
    assert!(rows.iter().all(|r| r.len() == TRAJECTORY_HEADER.len() && r[1] == "crump_young"));
    // First frame of replicate 0 is the initial state.
    assert_eq!(rows[0][0].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows[0][3].parse::<f64>().unwrap(), 5.0);
    assert_eq!(rows[0][4].parse::<f64>().unwrap(), 0.003);
}

#[test]
fn summary_and_config_echo() {
    let cfg = RunConfig::from_toml(SMALL_RUN).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = write_outputs(&run(&cfg).unwrap(), dir.path()).unwrap();
    assert!(written.iter().all(|p| p.exists()));
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema"], SUMMARY_SCHEMA);
    assert_eq!(summary["seed"]["master"], 99);
    assert_eq!(summary["units"]["time"], "h");
    assert!(summary["batches"].as_array().is_some_and(|b| b.len() == 1));
    let timing: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("timing.json")).unwrap()).unwrap();
    assert!(timing["entries"][0]["events"].as_u64().is_some());
    let echoed = RunConfig::from_path(&dir.path().join("config.toml")).unwrap();
    assert_eq!(echoed, cfg);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let mut cfg = RunConfig::from_toml(SMALL_RUN).unwrap();
    let mut outputs = Vec::new();
    for threads in [1, 3] {
        cfg.threads = threads;
        let dir = tempfile::tempdir().unwrap();
        write_outputs(&run(&cfg).unwrap(), dir.path()).unwrap();
        let mut f = files(dir.path());
        f.remove("timing.json");
        f.remove("config.toml");
        outputs.push(f);
    }
    assert_eq!(outputs[0].keys().collect::<Vec<_>>(), outputs[1].keys().collect::<Vec<_>>());
    for (name, bytes) in &outputs[0] {
        assert!(bytes == &outputs[1][name], "{name} differs between thread counts");
    }
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            RunConfig::from_path(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 5);
}
