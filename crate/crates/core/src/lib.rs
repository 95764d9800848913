pub mod analytic;
pub mod classical;
pub mod error;
pub mod model;
pub mod numeric;
pub mod protocols;
pub mod quantum;
pub mod runner;

pub use error::{Error, Result};
