//! Simulation and verification of chemostat models: exact stochastic
//! simulation, deterministic and diffusion limits, stationary laws and
//! fluctuation diagnostics.

pub mod deterministic;
pub mod exact;
pub mod fluctuations;
pub mod io;
mod error;
pub mod kinetics;
pub mod params;
pub mod rng;
pub mod sde;
pub mod stationary;
pub mod trajectory;

pub use error::{Error, Result};
pub use kinetics::{Equilibrium, EquilibriumKind, Kinetics, MassKinetics};
pub use params::ChemostatParams;
pub use rng::{RngStream, SimRng};
pub use trajectory::{Frame, ModelTag, OutputGrid, Trajectory};
