//! Toy-scale uf-cma-r forgery experiments for CuMAC and CuMAC/S, and the
//! segment-recovery equations a reduction to `MacGen` relies on.
//!
//! Absolute forgery rates depend on the toy MAC; what the experiments pin
//! down are ratios: how much more often a forgery succeeds than the
//! simulator can convert it into a `MacGen` forgery.

mod experiment;
mod recovery;

pub use experiment::{
    predicted_epsilon, predicted_ratio, run_ufcma_r, zero_speculator, Adversary, ExperimentConfig, ExperimentResult,
    TOY_MAX_MAC_BITS,
};
pub use recovery::{build_view, recover_segment_cumac, recover_segment_cumacs, Recovered, RecoveryView};
