pub mod checks;
pub mod error;
pub mod market_data;
pub mod market_mode;
pub mod numfmt;
pub mod rebase;
pub mod reports;
pub mod rmt;
pub mod rng;
pub mod rolling;
pub mod spectra;
pub mod surrogates;

pub use error::{Error, ErrorClass, Result};
