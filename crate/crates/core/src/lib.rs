pub mod error;
pub mod numerics;
pub mod pam;
pub mod schemes;
pub mod analysis;
pub mod montecarlo;
pub mod cli;

pub use error::{Error, Result};
