//! Quantum-noise engine for a squeezed-light interferometer read out
//! through a Mach-Zehnder optomechanical phase-sensitive amplifier.

pub mod amplifier;
pub mod chain;
pub mod coating;
pub mod config;
pub mod consts;
pub mod error;
pub mod filter_cavity;
pub mod interferometer;
pub mod optimize;
pub mod output;
pub mod preset;
pub mod technical;
pub mod twophoton;

pub use chain::{budget, gain_curve, ChainConfig, StrainBudget};
pub use error::{Error, Result};
pub use preset::preset;
pub use twophoton::{FrequencyGrid, Mat2, NoisePath, PathSet, QuadratureTransfer, Source, Vec2};

pub const ENGINE: &str = concat!("qnamp ", env!("CARGO_PKG_VERSION"));
