use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// A CAN workload: payload-size and period mixes plus frame constants.
///
/// Per-message load is `mean_rate * frame_bits / bus_speed`, where the
/// frame carries the payload, the tag and `frame_overhead_bits` of framing,
/// all scaled by `stuffing_factor`. A tag that needs `extra_packets` separate frames
/// pays `frame_overhead_bits + tag_bits` for each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanWorkload {
    /// `(payload bytes, share)`.
    pub size_dist: Vec<(u32, f64)>,
    /// `(period ms, share)`.
    pub period_dist: Vec<(f64, f64)>,
    pub bus_speed_bps: f64,
    pub frame_overhead_bits: f64,
    pub stuffing_factor: f64,
}

impl Default for CanWorkload {
    /// Measured in-vehicle mix on a 500 kbit/s classic CAN bus.
    fn default() -> Self {
        Self {
            size_dist: vec![(1, 0.35), (2, 0.49), (4, 0.13), (6, 0.03)],
            period_dist: vec![
                (5.0, 0.07),
                (10.0, 0.25),
                (20.0, 0.25),
                (50.0, 0.03),
                (100.0, 0.20),
                (200.0, 0.01),
                (1000.0, 0.19),
            ],
            bus_speed_bps: 500_000.0,
            frame_overhead_bits: 47.0,
            stuffing_factor: 1.0,
        }
    }
}

fn check_shares(name: &str, shares: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    for s in shares {
        if !(0.0..=1.0).contains(&s) {
            return param(format!("{name} share {s} outside [0, 1]"));
        }
        total += s;
    }
    if (total - 1.0).abs() > 1e-9 {
        return param(format!("{name} shares sum to {total}, not 1"));
    }
    Ok(())
}

impl CanWorkload {
    pub fn validate(&self) -> Result<()> {
        check_shares("size", self.size_dist.iter().map(|s| s.1))?;
        check_shares("period", self.period_dist.iter().map(|p| p.1))?;
        if self.period_dist.iter().any(|p| p.0 <= 0.0 || !p.0.is_finite()) {
            return param("message periods must be positive");
        }
        if !(self.bus_speed_bps > 0.0 && self.bus_speed_bps.is_finite()) {
            return param("bus speed must be positive");
        }
        if !(self.frame_overhead_bits >= 0.0 && self.stuffing_factor >= 1.0) {
            return param("overhead must be non-negative and stuffing at least 1");
        }
        Ok(())
    }

    /// Messages per second offered by one average message stream.
    pub fn mean_rate_hz(&self) -> f64 {
        self.period_dist.iter().map(|(ms, share)| share * 1000.0 / ms).sum()
    }

    pub fn mean_payload_bits(&self) -> f64 {
        self.size_dist.iter().map(|(b, share)| share * (*b as f64) * 8.0).sum()
    }

    /// Bits on the wire for one average message.
    pub fn frame_bits(&self, tag_bits: u32, extra_packets: u32) -> f64 {
        let base = self.frame_overhead_bits + self.mean_payload_bits();
        let raw = if extra_packets == 0 {
            base + tag_bits as f64
        } else {
            base + extra_packets as f64 * (self.frame_overhead_bits + tag_bits as f64)
        };
        raw * self.stuffing_factor
    }

    /// Bus share used by one message stream.
    pub fn per_message_load(&self, tag_bits: u32, extra_packets: u32) -> f64 {
        self.mean_rate_hz() * self.frame_bits(tag_bits, extra_packets) / self.bus_speed_bps
    }
}

/// Fraction of bus capacity used by `num_message_types` periodic streams.
pub fn bus_load(workload: &CanWorkload, tag_bits: u32, extra_packets: u32, num_message_types: u32) -> Result<f64> {
    workload.validate()?;
    Ok(num_message_types as f64 * workload.per_message_load(tag_bits, extra_packets))
}

/// Largest stream count whose bus load stays within `capacity`.
pub fn supported_messages(workload: &CanWorkload, tag_bits: u32, extra_packets: u32, capacity: f64) -> Result<u32> {
    workload.validate()?;
    if !(capacity > 0.0 && capacity <= 1.0) {
        return param(format!("capacity {capacity} outside (0, 1]"));
    }
    let per = workload.per_message_load(tag_bits, extra_packets);
    let fits = |k: u32| k as f64 * per <= capacity;
    let mut k = (capacity / per).floor().min(u32::MAX as f64 - 1.0) as u32;
    while k > 0 && !fits(k) {
        k -= 1;
    }
    while fits(k + 1) {
        k += 1;
    }
    Ok(k)
}
