use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuthLevel {
    None,
    RealTime,
    PartiallyAccumulated,
    Full,
}

/// Authentication state of one message at the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AuthReport {
    pub counter: u32,
    pub level: AuthLevel,
    /// `l` times the number of distinct verified segments of `σ_i`.
    pub accumulated_bits: u32,
    /// Packets after the message's own packet at which the current strength was reached.
    pub delay_packets: u32,
    pub segments_accumulated: u32,
    /// The scheme's own acceptance criterion was met: the message's
    /// arrival-time tag verified for truncated and cumulative schemes, full
    /// verification for trailing and block schemes.
    pub authenticated: bool,
}

impl AuthReport {
    pub fn unknown(counter: u32) -> Self {
        Self {
            counter,
            level: AuthLevel::None,
            accumulated_bits: 0,
            delay_packets: 0,
            segments_accumulated: 0,
            authenticated: false,
        }
    }
}

/// A message's final report plus every `(delay, bits)` step it went through.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageRecord {
    pub report: AuthReport,
    pub timeline: Vec<(u32, u32)>,
}

#[derive(Debug, Clone, Default)]
struct Entry {
    confirmed: u128,
    timeline: Vec<(u32, u32)>,
    authenticated: bool,
}

/// Receiver-side accumulation (accRx): verified segment indices per message.
#[derive(Debug, Clone)]
pub(crate) struct Accumulator {
    segment_bits: u32,
    full_bits: u32,
    capacity: u32,
    live: BTreeMap<u32, Entry>,
    /// Segments credited by valid tags before the message itself arrived (CuMAC/S).
    provisional: BTreeMap<u32, u128>,
    frozen: BTreeMap<u32, Entry>,
}

impl Accumulator {
    pub fn new(segment_bits: u32, full_bits: u32, capacity: u32) -> Self {
        Self {
            segment_bits,
            full_bits,
            capacity,
            live: BTreeMap::new(),
            provisional: BTreeMap::new(),
            frozen: BTreeMap::new(),
        }
    }

    pub fn arrive(&mut self, counter: u32) {
        self.live.entry(counter).or_default();
        let keep_from = counter.saturating_sub(self.capacity - 1);
        let mut still_live = self.live.split_off(&keep_from);
        std::mem::swap(&mut self.live, &mut still_live);
        self.frozen.extend(still_live);
        self.provisional = self.provisional.split_off(&keep_from);
    }

    #[cfg(test)]
    pub fn is_live(&self, counter: u32) -> bool {
        self.live.contains_key(&counter)
    }

    /// Adds segment bits `mask` (bit `j-1` = segment `j`) for `counter`,
    /// verified by the packet at `at`.
    pub fn credit(&mut self, counter: u32, mask: u128, at: u32) {
        let bits_per = self.segment_bits;
        let Some(e) = self.live.get_mut(&counter) else {
            return;
        };
        let new = mask & !e.confirmed;
        if new == 0 {
            return;
        }
        e.confirmed |= new;
        let bits = (e.confirmed.count_ones() * bits_per).min(self.full_bits);
        let delay = at.saturating_sub(counter);
        match e.timeline.last_mut() {
            Some(last) if last.0 == delay => last.1 = bits,
            _ => e.timeline.push((delay, bits)),
        }
    }

    pub fn credit_provisional(&mut self, counter: u32, mask: u128) {
        *self.provisional.entry(counter).or_default() |= mask;
    }

    /// Merges (on a speculation hit) or discards provisional credit for `counter`.
    pub fn resolve_provisional(&mut self, counter: u32, hit: bool) {
        if let Some(mask) = self.provisional.remove(&counter) {
            if hit {
                self.credit(counter, mask, counter);
            }
        }
    }

    pub fn mark_authenticated(&mut self, counter: u32) {
        if let Some(e) = self.live.get_mut(&counter) {
            e.authenticated = true;
        }
    }

    pub fn report(&self, counter: u32) -> Option<AuthReport> {
        let e = self.live.get(&counter).or_else(|| self.frozen.get(&counter))?;
        Some(self.build(counter, e))
    }

    pub fn timeline(&self, counter: u32) -> Option<&[(u32, u32)]> {
        let e = self.live.get(&counter).or_else(|| self.frozen.get(&counter))?;
        Some(&e.timeline)
    }

    /// Hands over reports that can no longer change.
    pub fn drain_frozen(&mut self) -> Vec<MessageRecord> {
        std::mem::take(&mut self.frozen)
            .into_iter()
            .map(|(c, e)| MessageRecord {
                report: self.build(c, &e),
                timeline: e.timeline,
            })
            .collect()
    }

    /// Freezes everything, e.g. at the end of a run.
    pub fn freeze_all(&mut self) {
        let live = std::mem::take(&mut self.live);
        self.frozen.extend(live);
        self.provisional.clear();
    }

    fn build(&self, counter: u32, e: &Entry) -> AuthReport {
        let segments = e.confirmed.count_ones();
        let bits = (segments * self.segment_bits).min(self.full_bits);
        let delay = e.timeline.last().map_or(0, |t| t.0);
        let level = if bits == 0 {
            AuthLevel::None
        } else if bits == self.full_bits {
            AuthLevel::Full
        } else if delay == 0 {
            AuthLevel::RealTime
        } else {
            AuthLevel::PartiallyAccumulated
        };
        AuthReport {
            counter,
            level,
            accumulated_bits: bits,
            delay_packets: delay,
            segments_accumulated: segments,
            authenticated: e.authenticated,
        }
    }
}
