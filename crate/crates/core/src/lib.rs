//! Pseudo-spectral simulator for an extended charged particle coupled to the
//! Maxwell field on a periodic box, with certified fixed-point time stepping.

pub mod charge;
pub mod config;
pub mod constraints;
pub mod diagnostics;
pub mod cheb;
pub mod error;
pub mod model;
pub mod oracle;
pub mod picard;
pub mod propagator;
pub mod run;
pub mod spectral;
pub mod state_file;

#[cfg(test)]
pub(crate) mod quadcheck;

pub use charge::{ChargeProfile, NormTable};
pub use config::RunConfig;
pub use error::{Error, Result};
pub use model::{ModelKind, ParticleState};
pub use picard::{PicardParams, SystemState};
pub use propagator::EMState;
pub use spectral::{Grid, SobolevIndex, SpectralField3, SpectralScalar};
