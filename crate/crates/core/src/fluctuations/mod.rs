//! Statistical post-processing of simulated ensembles: fluctuation paths,
//! quadratic-variation checks, quasi-stationary moments, confidence ellipses
//! and extinction statistics.

mod ellipse;
mod extinction;
mod paths;
mod qsd;
mod qv;
pub mod stats;
mod summary;
mod test_function;

pub use ellipse::{chi2_2_quantile, confidence_ellipse, Ellipse, EllipseShape};
pub use extinction::{extinction_stats, ExtinctionReport, SurvivalPoint, TailFit};
pub use paths::{fluctuation_paths, FluctuationPath};
pub use qsd::{
    estimate_qsd, GaussianComparison, QsdReport, Stabilization, SurvivorMoments,
    QSD_CORRELATION_TOLERANCE, QSD_KS_LEVEL, QSD_VARIANCE_TOLERANCE,
};
pub use qv::{qv_check, QvPoint, QvReport};
pub use summary::{summarize, EnsembleSummary, GridMoments};
pub use test_function::{PreparedTestFunction, TestFunction};
