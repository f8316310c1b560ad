use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Charge budget of a battery-powered uplink-only sensor node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    pub battery_coulombs: f64,
    pub sleep_c_per_day: f64,
    pub packets_per_day: f64,
    pub packet_base_c: f64,
    pub payload_c_per_bit: f64,
}

impl Default for EnergyParams {
    /// 8000 mAh cells, one Sigfox uplink per hour.
    fn default() -> Self {
        Self {
            battery_coulombs: 28_800.0,
            sleep_c_per_day: 0.11,
            packets_per_day: 24.0,
            packet_base_c: 0.20,
            payload_c_per_bit: 0.002,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.battery_coulombs,
            self.sleep_c_per_day,
            self.packets_per_day,
            self.packet_base_c,
            self.payload_c_per_bit,
        ];
        if all.iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            param("energy parameters must all be positive")
        }
    }

    /// Charge drawn per day when each packet carries `bits` of payload.
    pub fn daily_charge(&self, bits: u32) -> f64 {
        self.sleep_c_per_day + self.packets_per_day * (self.packet_base_c + self.payload_c_per_bit * bits as f64)
    }
}

/// Days until the battery is exhausted, ignoring self-discharge.
pub fn service_life_days(message_bits: u32, tag_bits: u32, params: &EnergyParams) -> Result<f64> {
    params.validate()?;
    Ok(params.battery_coulombs / params.daily_charge(message_bits + tag_bits))
}
