//! Evaluation harnesses: a lossy-channel Monte-Carlo simulator, a CAN
//! bus-load model and an LPWAN sensor service-life model.

mod canbus;
mod channel;
mod energy;

pub use canbus::{bus_load, supported_messages, CanWorkload};
pub use channel::{
    analytic_processing_rate, run_lossy, sweep_drop_rates, ChannelConfig, MessageSource, SimulationReport,
};
pub use energy::{service_life_days, EnergyParams};
