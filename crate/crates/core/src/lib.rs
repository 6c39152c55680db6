//! Simulation and resource estimation for variational circuits executed with
//! error-corrected Cliffords and injected Rz rotations.

pub mod ansatz;
pub mod circuit;
pub mod error;
pub mod estimator;
pub mod injection;
pub mod layout;
pub mod noise;
pub mod oracle;
pub mod rng;
pub mod stab;
pub mod vqe;

pub use error::{Error, Result};
