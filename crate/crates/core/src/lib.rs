//! Pseudo-Hermitian spin-1/2 ⊗ oscillator model: per-subspace Hamiltonian
//! blocks, spectra and exceptional points, biorthogonal metric operators, the
//! metric-weighted partition function and its thermodynamics, a truncated
//! full-space oracle, and coupling sweeps for figure data.

pub mod cli;
pub mod error;
pub mod fullspace;
pub mod metric;
pub mod model;
pub mod smallmat;
pub mod spectral;
pub mod sweep;
pub mod thermo;
pub mod verify;

pub use error::{Error, Result};
pub use model::{build_block, BlockMatrix2, ModelParams, SubspaceIndex};
pub use spectral::{PhaseRegion, Spectrum2};
pub use thermo::{Temperature, ThermoPoint};
