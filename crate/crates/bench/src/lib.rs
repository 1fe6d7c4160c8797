//! Shared set-up for the benchmarks: the three Monod population sizes.

use chemostat::ChemostatParams;

/// One population size: label, volume (l) and initial count.
#[derive(Debug, Clone, Copy)]
pub struct Size {
    pub label: &'static str,
    pub volume: f64,
    pub population: u64,
}

pub const SIZES: [Size; 3] = [
    Size { label: "small", volume: 1e-8, population: 5 },
    Size { label: "medium", volume: 1e-6, population: 500 },
    Size { label: "large", volume: 1e-5, population: 5000 },
];

/// Feed concentration, also the initial substrate of every size.
pub const S0: f64 = 0.003;

impl Size {
    pub fn params(&self) -> ChemostatParams {
        ChemostatParams::monod_reference(self.volume)
    }
}
