//! MAC primitives shared by every scheme: keys, the keyed AES-CMAC function,
//! MSB-first segmentation of a MAC output, and XOR aggregation of segments.
//!
//! Bitstrings of up to 128 bits are held right-aligned in a `u128`; bit 1 of
//! an `L`-bit value is its most significant bit.

mod key;
mod prf;

pub(crate) use key::key_from_rng;
pub use key::{key_gen, SecretKey};
pub use prf::{aes_cmac, mac_gen, Mac, COUNTER_BYTES};

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Largest MAC output the `u128` representation can hold.
pub const MAX_MAC_BITS: u32 = 128;

#[inline]
pub(crate) fn low_mask(len: u32) -> u128 {
    if len >= 128 {
        u128::MAX
    } else {
        (1u128 << len) - 1
    }
}

/// Shape of a segmented MAC: `total_bits == segments * segment_bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawMacParams", into = "RawMacParams")]
pub struct MacParams {
    total_bits: u32,
    segments: u32,
    segment_bits: u32,
}

#[derive(Serialize, Deserialize)]
struct RawMacParams {
    total_bits: u32,
    segments: u32,
    segment_bits: u32,
}

impl TryFrom<RawMacParams> for MacParams {
    type Error = Error;
    fn try_from(raw: RawMacParams) -> Result<Self> {
        MacParams::new(raw.total_bits, raw.segments, raw.segment_bits)
    }
}

impl From<MacParams> for RawMacParams {
    fn from(p: MacParams) -> Self {
        RawMacParams {
            total_bits: p.total_bits,
            segments: p.segments,
            segment_bits: p.segment_bits,
        }
    }
}

impl MacParams {
    /// Validates `L == n * l`, all positive, `L <= 128`.
    pub fn new(total_bits: u32, segments: u32, segment_bits: u32) -> Result<Self> {
        if total_bits == 0 || segments == 0 || segment_bits == 0 {
            return param("MAC length, segment count and segment length must be positive");
        }
        if segments.checked_mul(segment_bits) != Some(total_bits) {
            return param(format!(
                "MAC length {total_bits} != {segments} segments x {segment_bits} bits"
            ));
        }
        if total_bits > MAX_MAC_BITS {
            return param(format!("MAC length {total_bits} exceeds {MAX_MAC_BITS} bits"));
        }
        Ok(Self {
            total_bits,
            segments,
            segment_bits,
        })
    }

    pub fn from_segments(segments: u32, segment_bits: u32) -> Result<Self> {
        Self::new(segments.saturating_mul(segment_bits), segments, segment_bits)
    }

    /// `L`
    pub fn total_bits(&self) -> u32 {
        self.total_bits
    }

    /// `n`
    pub fn segments(&self) -> u32 {
        self.segments
    }

    /// `l`
    pub fn segment_bits(&self) -> u32 {
        self.segment_bits
    }
}

/// An `L`-bit MAC value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MacOutput {
    value: u128,
    len: u32,
}

impl MacOutput {
    pub fn new(value: u128, len: u32) -> Result<Self> {
        if len == 0 || len > MAX_MAC_BITS {
            return param(format!("MAC output length {len} out of range"));
        }
        if value & !low_mask(len) != 0 {
            return param(format!("value does not fit in {len} bits"));
        }
        Ok(Self { value, len })
    }

    pub fn value(&self) -> u128 {
        self.value
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Segment `j` (1-based) as a right-aligned `l`-bit value. No bounds
    /// checking beyond debug assertions; callers hold validated params.
    #[inline]
    pub(crate) fn segment_value(&self, j: u32, segment_bits: u32) -> u128 {
        debug_assert!(j >= 1 && j * segment_bits <= self.len);
        (self.value >> (self.len - j * segment_bits)) & low_mask(segment_bits)
    }

    /// All `n` segment values in order, without the bookkeeping of [`Segment`].
    pub(crate) fn segment_values(&self, params: &MacParams) -> Vec<u128> {
        (1..=params.segments)
            .map(|j| self.segment_value(j, params.segment_bits))
            .collect()
    }
}

/// The `j`-th `l`-bit slice of the MAC of message `msg_counter`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Segment {
    pub value: u128,
    pub len: u32,
    pub msg_counter: u32,
    pub seg_index: u32,
    pub speculated: bool,
}

impl Segment {
    pub fn new(value: u128, len: u32, msg_counter: u32, seg_index: u32) -> Result<Self> {
        if len == 0 || len > MAX_MAC_BITS || value & !low_mask(len) != 0 {
            return param("segment value does not fit its length");
        }
        if seg_index == 0 {
            return param("segment indices are 1-based");
        }
        Ok(Self {
            value,
            len,
            msg_counter,
            seg_index,
            speculated: false,
        })
    }
}

/// A short bitstring carried in a packet's tag field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Tag {
    pub value: u128,
    pub len: u32,
}

impl Tag {
    pub const EMPTY: Tag = Tag { value: 0, len: 0 };

    pub fn new(value: u128, len: u32) -> Result<Self> {
        if len > MAX_MAC_BITS || value & !low_mask(len) != 0 {
            return param(format!("tag value does not fit in {len} bits"));
        }
        Ok(Self { value, len })
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Returns a copy with bit `bit` (0 = most significant) inverted.
    pub fn with_bit_flipped(&self, bit: u32) -> Tag {
        assert!(bit < self.len, "bit {bit} outside {}-bit tag", self.len);
        Tag {
            value: self.value ^ (1u128 << (self.len - 1 - bit)),
            len: self.len,
        }
    }
}

/// Splits `mac` into `n` segments, segment `j` holding bits
/// `(j-1)*l + 1 ..= j*l` counted from the most significant bit.
pub fn segment_mac(mac: &MacOutput, params: &MacParams, msg_counter: u32) -> Result<Vec<Segment>> {
    if mac.len != params.total_bits {
        return param(format!(
            "MAC length {} does not match parameter L = {}",
            mac.len, params.total_bits
        ));
    }
    Ok((1..=params.segments)
        .map(|j| Segment {
            value: mac.segment_value(j, params.segment_bits),
            len: params.segment_bits,
            msg_counter,
            seg_index: j,
            speculated: false,
        })
        .collect())
}

/// Concatenates segments back into a MAC (inverse of [`segment_mac`]).
pub fn concat_segments(segments: &[Segment]) -> Result<MacOutput> {
    let total: u32 = segments.iter().map(|s| s.len).sum();
    if segments.is_empty() || total > MAX_MAC_BITS {
        return param("cannot concatenate an empty or oversized segment list");
    }
    let value = segments.iter().fold(0u128, |acc, s| {
        if s.len == 128 {
            s.value
        } else {
            (acc << s.len) | s.value
        }
    });
    MacOutput::new(value, total)
}

/// Bitwise XOR of equally sized segments.
pub fn xor_aggregate(segments: &[Segment]) -> Result<Tag> {
    let Some(first) = segments.first() else {
        return param("cannot aggregate an empty segment list");
    };
    if segments.iter().any(|s| s.len != first.len) {
        return param("segments of mixed lengths cannot be aggregated");
    }
    Ok(Tag {
        value: segments.iter().fold(0, |acc, s| acc ^ s.value),
        len: first.len,
    })
}
