pub mod cases;
pub mod certify;
pub mod dg;
pub mod error;
pub mod fluxes;
pub mod io;
pub mod limiters;
pub mod mesh;
pub mod physics;
pub mod runner;
pub mod sampling;
pub mod sbp;
pub mod time_integration;

pub use error::{Error, Result};
