//! Trial runners for the transmission schemes, driven entirely by
//! caller-supplied noise and dither samples.

mod config;
mod params;
mod trial;

pub use config::{Feedback, SystemConfig};
pub use params::{derive_params, lambda_for, DerivedParams};
pub(crate) use params::snr_growth;
pub use trial::{run_trial_coupled, run_trial_proposed, run_trial_sk, run_trial_uncoded, TrialRecord};
