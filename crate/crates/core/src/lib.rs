//! Spectral solver and analyticity diagnostics for the thermal
//! quasi-geostrophic system on the 2-torus.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod export;
pub mod field;
pub mod grid;
pub mod integrator;
pub mod lemmas;
pub mod norms;
pub mod tracker;

pub use config::{parse_config, ExperimentConfig, Mode};
pub use dynamics::{
    advect, inner_product_complex, solve_streamfunction, tqg_rhs, trilinear, velocity,
    AdvectionMethod, TqgDataSet, TqgState,
};
pub use error::{Result, TqgError};
pub use experiment::{run_experiment, ExperimentError};
pub use field::{Axis, SpectralField, VectorSpectralField};
pub use grid::{SpectralGrid, Wavevector};
pub use norms::{gevrey_norm, sobolev_norm, GevreyParams, RadiusFit};
