use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::analysis::Table;
use super::runner::RunOutput;
use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// First line of every trajectory file.
pub const TRAJECTORY_SCHEMA: &str = "# chemostat-trajectories v1";
pub const TRAJECTORY_HEADER: [&str; 7] = ["time", "model", "replicate", "N", "S", "Q", "R"];

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

/// Long-format CSV: one row per frame per replicate. `Q` and `R` are blank
/// when the model does not carry them.
pub fn write_trajectories<W: Write>(mut out: W, trajectories: &[Trajectory]) -> Result<()> {
    writeln!(out, "{TRAJECTORY_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER).map_err(csv_error)?;
    for tr in trajectories {
        let (model, rep) = (tr.model.as_str(), tr.replicate.to_string());
        for f in &tr.frames {
            w.write_record([
                f.time.to_string().as_str(),
                model,
                &rep,
                &f.count.to_string(),
                &f.substrate.to_string(),
                &opt(f.q),
                &opt(f.r),
            ])
            .map_err(csv_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_table(path: &Path, table: &Table) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(&table.header).map_err(csv_error)?;
    for row in &table.rows {
        w.write_record(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

/// Write every output of a run under `dir` from the calling thread and
/// return the paths written. Everything except `timing.json` is a pure
/// function of the configuration.
pub fn write_outputs(out: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let single = out.batches.len() == 1;
    for b in &out.batches {
        let name = if single {
            "trajectories.csv".to_string()
        } else {
            format!("trajectories_{}_{}.csv", b.label, b.model)
        };
        let path = dir.join(name);
        let f = BufWriter::new(File::create(&path)?);
        write_trajectories(f, &b.trajectories)?;
        written.push(path);
    }
    for t in &out.tables {
        let path = dir.join(format!("{}.csv", t.name));
        write_table(&path, t)?;
        written.push(path);
    }
    let path = dir.join("summary.json");
    write_json(&path, &out.summary)?;
    written.push(path);
    let path = dir.join("timing.json");
    write_json(&path, &out.timing)?;
    written.push(path);
    let path = dir.join("config.toml");
    std::fs::write(&path, out.config.to_toml())?;
    written.push(path);
    Ok(written)
}
