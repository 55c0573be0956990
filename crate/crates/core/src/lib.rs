//! Separation of variables for higher-spin quasi-periodic rational spin chains.

pub mod baxter;
pub mod error;
pub mod linalg;
pub mod model;
pub mod monodromy;
pub mod repn;
pub mod sov;
pub mod spectrum;

pub use error::{Result, SovError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
