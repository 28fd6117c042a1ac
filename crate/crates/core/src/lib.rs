//! Spectrum of correlation lengths for signed toric-code PEPS on cylinders,
//! and detection of translation-symmetry fractionalization from it.
//!
//! Pipeline: [`model`] builds the tensors, [`transfer`] the column transfer
//! operator, [`momentum`] splits it into momentum sectors, [`spectra`]
//! diagonalizes them and extracts SCL minima and gaps, and [`classify`]
//! turns curves over several perimeters into `η_e`/`η_m` verdicts.
//! [`oracle`] holds brute-force cross-checks.

pub mod classify;
pub mod cli;
pub mod error;
pub mod model;
pub mod momentum;
pub mod oracle;
pub mod spectra;
pub mod transfer;

pub use error::{Error, Result};
pub use model::{ModelParams, Sector, Sign};
