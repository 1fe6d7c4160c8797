//! Run configuration, ensemble orchestration and output files.

mod analysis;
mod config;
mod output;
mod runner;

pub use analysis::Table;
pub use config::{
    AnalysisSpec, CompareSde, CompareSpec, DivisionSpec, EquilibriumChoice, GrowthSpec, InitSpec,
    InitialState, KernelSpec, KineticsSpec, MassSpec, RunConfig, Scenario, SizeSpec,
};
pub use output::{write_outputs, write_trajectories, TRAJECTORY_HEADER, TRAJECTORY_SCHEMA};
pub use runner::{aligned_step, run, Batch, RunOutput, TimingEntry, TimingReport};

/// Version tag of `summary.json`.
pub const SUMMARY_SCHEMA: &str = "chemostat-summary v1";

/// Units of the quantities in the summary.
pub fn units() -> serde_json::Value {
    serde_json::json!({
        "time": "h",
        "N": "individuals",
        "S": "g/l",
        "Q": "individuals (√n-scaled deviation from the ODE)",
        "R": "g/l (√n-scaled deviation from the ODE)",
        "dilution": "1/h",
        "s_in": "g/l",
        "volume": "l",
        "cell_mass": "g",
        "alpha": "individuals²",
        "beta": "(g/l)²",
        "cross": "individuals·g/l",
        "decay_rate": "1/h",
        "rate": "1/h (exponential tail of the survival curve)",
        "wall_time": "s",
    })
}
