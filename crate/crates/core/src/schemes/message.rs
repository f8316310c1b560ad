use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::mac::{low_mask, Tag};

/// A payload bitstring. Bits past `bit_len` in the last byte are zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Message {
    data: Vec<u8>,
    bit_len: u16,
}

impl Message {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::from_bits(bytes.to_vec(), bytes.len() * 8)
    }

    /// `data` holds `bit_len` bits MSB-first, zero-padded to a byte boundary.
    pub fn from_bits(data: Vec<u8>, bit_len: usize) -> Result<Self> {
        if bit_len > u16::MAX as usize {
            return param(format!("message of {bit_len} bits exceeds the 16-bit length field"));
        }
        if data.len() != bit_len.div_ceil(8) {
            return param(format!("{} bytes cannot hold exactly {bit_len} bits", data.len()));
        }
        let spare = data.len() * 8 - bit_len;
        if spare > 0 && data[data.len() - 1] & ((1u8 << spare) - 1) != 0 {
            return param("padding bits must be zero");
        }
        Ok(Self {
            data,
            bit_len: bit_len as u16,
        })
    }

    /// An 8-byte big-endian two's-complement encoding of `value`.
    pub fn from_value(value: i64) -> Self {
        Self {
            data: value.to_be_bytes().to_vec(),
            bit_len: 64,
        }
    }

    /// The `width` low-order bytes of `value`, big-endian. Round-trips through
    /// [`Message::value`] when `value` fits in `width` signed bytes.
    pub fn from_value_width(value: i64, width: u8) -> Result<Self> {
        if !(1..=8).contains(&width) {
            return param(format!("value width {width} outside 1..=8 bytes"));
        }
        let bytes = value.to_be_bytes();
        Ok(Self {
            data: bytes[8 - width as usize..].to_vec(),
            bit_len: width as u16 * 8,
        })
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn bit_len(&self) -> u16 {
        self.bit_len
    }

    /// Signed big-endian reading of a 1 to 8 byte payload, with its width.
    pub fn value(&self) -> Option<(i64, u8)> {
        let n = self.data.len();
        if !self.bit_len.is_multiple_of(8) || !(1..=8).contains(&n) {
            return None;
        }
        let fill = if self.data[0] & 0x80 != 0 { 0xff } else { 0 };
        let mut buf = [fill; 8];
        buf[8 - n..].copy_from_slice(&self.data);
        Some((i64::from_be_bytes(buf), n as u8))
    }

    pub(crate) fn len_prefix(&self) -> [u8; 2] {
        self.bit_len.to_be_bytes()
    }

    /// Copy with bit `bit` (0 = first transmitted bit) inverted.
    pub fn with_bit_flipped(&self, bit: usize) -> Message {
        assert!(
            bit < self.bit_len as usize,
            "bit {bit} outside {}-bit message",
            self.bit_len
        );
        let mut m = self.clone();
        m.data[bit / 8] ^= 0x80 >> (bit % 8);
        m
    }
}

/// The wire unit: counter, message, tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Packet {
    pub counter: u32,
    pub message: Message,
    pub tag: Tag,
    /// Set on the tag-only packets that follow a trailing-MAC message packet.
    pub is_trailing_tag: bool,
}

impl Packet {
    /// `counter (4, BE) || payload bit length (2, BE) || payload || tag`,
    /// payload and tag each zero-padded to a byte boundary.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(6 + self.message.data.len() + 16);
        out.extend_from_slice(&self.counter.to_be_bytes());
        out.extend_from_slice(&self.message.len_prefix());
        out.extend_from_slice(&self.message.data);
        out.extend_from_slice(&tag_bytes(&self.tag));
        out
    }

    /// Inverse of [`Packet::encode`]. The tag length is not on the wire: a
    /// packet whose trailing bytes fit `trailing_tag_bits` and whose payload is
    /// empty decodes as a trailing tag packet, anything else must carry a tag
    /// of exactly `tag_bits`.
    pub fn decode(bytes: &[u8], tag_bits: u32, trailing_tag_bits: Option<u32>) -> Result<Self> {
        let short = || Error::Input(format!("packet of {} bytes is truncated", bytes.len()));
        let counter = u32::from_be_bytes(bytes.get(0..4).ok_or_else(short)?.try_into().unwrap());
        let bit_len = u16::from_be_bytes(bytes.get(4..6).ok_or_else(short)?.try_into().unwrap()) as usize;
        let end = 6 + bit_len.div_ceil(8);
        let payload = bytes.get(6..end).ok_or_else(short)?;
        let rest = &bytes[end..];
        let message = Message::from_bits(payload.to_vec(), bit_len).map_err(|e| Error::Input(e.to_string()))?;

        let (len, is_trailing_tag) = match trailing_tag_bits {
            Some(t) if bit_len == 0 && rest.len() == t.div_ceil(8) as usize => (t, true),
            Some(_) if rest.is_empty() => (0, false),
            _ => (tag_bits, false),
        };
        if rest.len() != len.div_ceil(8) as usize {
            return Err(Error::Input(format!(
                "expected {} tag bytes, found {}",
                len.div_ceil(8),
                rest.len()
            )));
        }
        let tag = tag_from_bytes(rest, len)?;
        Ok(Self {
            counter,
            message,
            tag,
            is_trailing_tag,
        })
    }

    /// Bits occupied by the payload and tag fields (no counter).
    pub fn data_field_bits(&self) -> u32 {
        self.message.bit_len as u32 + self.tag.len
    }
}

fn tag_bytes(tag: &Tag) -> Vec<u8> {
    let n = tag.len.div_ceil(8) as usize;
    if n == 0 {
        return Vec::new();
    }
    let aligned = tag.value << (128 - tag.len);
    aligned.to_be_bytes()[..n].to_vec()
}

fn tag_from_bytes(bytes: &[u8], len: u32) -> Result<Tag> {
    if len == 0 {
        return Ok(Tag::EMPTY);
    }
    let mut buf = [0u8; 16];
    buf[..bytes.len()].copy_from_slice(bytes);
    let aligned = u128::from_be_bytes(buf);
    if aligned & !(low_mask(len) << (128 - len)) != 0 {
        return Err(Error::Input("nonzero tag padding".into()));
    }
    Tag::new(aligned >> (128 - len), len)
}
