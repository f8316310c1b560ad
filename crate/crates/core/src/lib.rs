//! Cumulative message authentication (CuMAC and CuMAC/S) with baseline
//! short-tag schemes and the harnesses used to evaluate them.

mod error;
pub mod mac;
pub mod parallel;
pub mod schemes;
pub mod security;
pub mod simkit;
pub mod speculation;

pub use error::{Error, Result};
