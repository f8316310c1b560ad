//! Sender and receiver state machines for six short-tag MAC schemes behind
//! one interface:
//!
//! - **Truncated**: each packet carries the first `l` bits of its own MAC.
//! - **Trailing**: the message packet carries no tag and is followed by
//!   `trailing_split` packets holding the full MAC in order.
//! - **Compound**: one MAC over a block of `n` messages, segment `j` riding
//!   on packet `j` of the block.
//! - **Aggregate**: the XOR of the block's `n` per-message MACs, split the same way.
//! - **CuMAC**: tag `τ_i` XORs segment `j` of the MAC of message `i-j+1` for
//!   every `j`, so each MAC is spread over `n` consecutive tags.
//! - **CuMAC/S**: CuMAC plus segments of MACs of *speculated* future
//!   messages, so a correctly predicted message is fully authenticated on arrival.

mod cumulative;
mod matrix;
mod message;
mod receiver;
mod report;
mod sender;

pub use matrix::{MatrixRole, MessageWindow, SegmentMatrix, WindowEntry};
pub use message::{Message, Packet};
pub use receiver::{Receiver, Verdict, VerifyOutcome};
pub use report::{AuthLevel, AuthReport, MessageRecord};
pub use sender::Sender;

pub(crate) use cumulative::{message_mac, value_input, CumulativeState};

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::mac::MacParams;
use crate::speculation::SpeculationConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Truncated,
    Trailing,
    Compound,
    Aggregate,
    #[serde(rename = "cumac")]
    CuMac,
    #[serde(rename = "cumacs")]
    CuMacS,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 6] = [
        SchemeKind::Truncated,
        SchemeKind::Trailing,
        SchemeKind::Compound,
        SchemeKind::Aggregate,
        SchemeKind::CuMac,
        SchemeKind::CuMacS,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Truncated => "truncated",
            SchemeKind::Trailing => "trailing",
            SchemeKind::Compound => "compound",
            SchemeKind::Aggregate => "aggregate",
            SchemeKind::CuMac => "cumac",
            SchemeKind::CuMacS => "cumacs",
        }
    }

    /// One packet per message, counter frozen on a lost packet.
    pub(crate) fn per_message(self) -> bool {
        matches!(self, SchemeKind::Truncated | SchemeKind::CuMac | SchemeKind::CuMacS)
    }
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Param(format!("unknown scheme `{s}`")))
    }
}

/// What happens to a packet reported lost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Delivery {
    /// The same packet is sent again until delivered.
    Retransmit,
    /// The packet is abandoned; per-message schemes reuse its counter.
    #[default]
    NoRetransmit,
}

/// Parameters of one scheme instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSchemeParams", into = "RawSchemeParams")]
pub struct SchemeParams {
    kind: SchemeKind,
    mac: MacParams,
    trailing_split: u32,
    speculation: Option<SpeculationConfig>,
}

#[derive(Serialize, Deserialize)]
struct RawSchemeParams {
    kind: SchemeKind,
    mac: MacParams,
    #[serde(default = "default_split")]
    trailing_split: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    speculation: Option<SpeculationConfig>,
}

fn default_split() -> u32 {
    2
}

impl TryFrom<RawSchemeParams> for SchemeParams {
    type Error = Error;
    fn try_from(r: RawSchemeParams) -> Result<Self> {
        SchemeParams::build(r.kind, r.mac, r.trailing_split, r.speculation)
    }
}

impl From<SchemeParams> for RawSchemeParams {
    fn from(p: SchemeParams) -> Self {
        RawSchemeParams {
            kind: p.kind,
            mac: p.mac,
            trailing_split: p.trailing_split,
            speculation: p.speculation,
        }
    }
}

impl SchemeParams {
    /// Any scheme but CuMAC/S, with a trailing split of 2.
    pub fn new(kind: SchemeKind, mac: MacParams) -> Result<Self> {
        Self::build(kind, mac, default_split(), None)
    }

    pub fn cumacs(mac: MacParams, speculation: SpeculationConfig) -> Result<Self> {
        Self::build(SchemeKind::CuMacS, mac, default_split(), Some(speculation))
    }

    pub fn build(
        kind: SchemeKind,
        mac: MacParams,
        trailing_split: u32,
        speculation: Option<SpeculationConfig>,
    ) -> Result<Self> {
        match (&speculation, kind) {
            (None, SchemeKind::CuMacS) => return param("CuMAC/S needs a speculation config"),
            (Some(_), k) if k != SchemeKind::CuMacS => return param(format!("{k} does not take a speculation config")),
            (Some(s), _) => s.validate()?,
            _ => {}
        }
        if trailing_split == 0 || !mac.total_bits().is_multiple_of(trailing_split) {
            return param(format!(
                "trailing split {trailing_split} does not divide L = {}",
                mac.total_bits()
            ));
        }
        Ok(Self {
            kind,
            mac,
            trailing_split,
            speculation,
        })
    }

    /// The evaluation setup: `L = 128`, `n = 8`, `l = 16`, trailing split 2,
    /// and for CuMAC/S a first-difference drift speculator.
    pub fn evaluation_default(kind: SchemeKind) -> Self {
        let mac = MacParams::new(128, 8, 16).expect("valid");
        let spec = (kind == SchemeKind::CuMacS).then(SpeculationConfig::drift);
        Self::build(kind, mac, default_split(), spec).expect("valid")
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn mac(&self) -> &MacParams {
        &self.mac
    }

    pub fn trailing_split(&self) -> u32 {
        self.trailing_split
    }

    pub fn speculation(&self) -> Option<&SpeculationConfig> {
        self.speculation.as_ref()
    }

    /// Tag bits carried by a message packet.
    pub fn tag_bits(&self) -> u32 {
        match self.kind {
            SchemeKind::Trailing => 0,
            _ => self.mac.segment_bits(),
        }
    }

    /// Bits per trailing tag packet.
    pub fn trailing_tag_bits(&self) -> u32 {
        self.mac.total_bits() / self.trailing_split
    }

    /// Tag-only packets sent per message.
    pub fn extra_packets(&self) -> u32 {
        match self.kind {
            SchemeKind::Trailing => self.trailing_split,
            _ => 0,
        }
    }

    /// Highest strength a message can reach: `l` for truncated, `L` otherwise.
    pub fn max_bits(&self) -> u32 {
        match self.kind {
            SchemeKind::Truncated => self.mac.segment_bits(),
            _ => self.mac.total_bits(),
        }
    }
}

/// Whether CuMAC/S speculation of the message was correct at arrival.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeculationCase {
    Correct,
    Mispredicted,
}

/// Closed-form strength once `r` tags covering a message (its own plus
/// `r - 1` later ones) have verified, `1 <= r <= n`.
pub fn strength_profile(params: &SchemeParams, r: u32, case: SpeculationCase) -> Result<u32> {
    let n = params.mac.segments();
    if r == 0 || r > n {
        return param(format!("r = {r} outside 1..={n}"));
    }
    Ok(profile(params, r, case))
}

fn profile(params: &SchemeParams, r: u32, case: SpeculationCase) -> u32 {
    let (total, l, n) = (
        params.mac.total_bits(),
        params.mac.segment_bits(),
        params.mac.segments(),
    );
    match params.kind {
        SchemeKind::Truncated => l,
        SchemeKind::Trailing if r > params.trailing_split => total,
        SchemeKind::Trailing => 0,
        SchemeKind::Compound | SchemeKind::Aggregate if r == n => total,
        SchemeKind::Compound | SchemeKind::Aggregate => 0,
        SchemeKind::CuMac => r * l,
        SchemeKind::CuMacS => match case {
            SpeculationCase::Correct => total,
            SpeculationCase::Mispredicted => r * l,
        },
    }
}

/// `(delay in packets, bits)` for delays `0 ..= n-1`.
pub fn strength_delay_curve(params: &SchemeParams, case: SpeculationCase) -> Vec<(u32, u32)> {
    (1..=params.mac.segments())
        .map(|r| (r - 1, profile(params, r, case)))
        .collect()
}

/// Expected strength when speculation fails with probability `beta`.
pub fn expected_strength_curve(params: &SchemeParams, beta: f64) -> Result<Vec<(u32, f64)>> {
    if !(0.0..=1.0).contains(&beta) {
        return param(format!("beta {beta} outside [0, 1]"));
    }
    Ok((1..=params.mac.segments())
        .map(|r| {
            let hit = profile(params, r, SpeculationCase::Correct) as f64;
            let miss = profile(params, r, SpeculationCase::Mispredicted) as f64;
            (r - 1, (1.0 - beta) * hit + beta * miss)
        })
        .collect())
}
