use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::mac::{Mac, MacOutput, SecretKey, Tag};

use super::cumulative::{message_mac, CumulativeState};
use super::matrix::{MatrixRole, MessageWindow, SegmentMatrix};
use super::{Delivery, Message, Packet, SchemeKind, SchemeParams};

#[derive(Debug, Clone)]
enum Engine {
    Truncated,
    Cumulative(CumulativeState),
    Trailing,
    Block(Vec<Message>),
}

#[derive(Debug, Clone)]
enum Undo {
    RemoveRow(u32),
    Restore(Box<CumulativeState>),
}

/// Tag generation state. Counters start at 1.
#[derive(Debug, Clone)]
pub struct Sender {
    params: SchemeParams,
    mac: Mac,
    delivery: Delivery,
    next_counter: u32,
    engine: Engine,
    in_flight: VecDeque<Packet>,
    undo: Option<Undo>,
}

impl Sender {
    pub fn new(params: SchemeParams, key: &SecretKey, delivery: Delivery) -> Result<Self> {
        let mac = Mac::new(key, *params.mac())?;
        let engine = match params.kind() {
            SchemeKind::Truncated => Engine::Truncated,
            SchemeKind::CuMac | SchemeKind::CuMacS => Engine::Cumulative(CumulativeState::new(
                *params.mac(),
                MatrixRole::SegTx,
                params.speculation().cloned(),
            )),
            SchemeKind::Trailing => Engine::Trailing,
            SchemeKind::Compound | SchemeKind::Aggregate => Engine::Block(Vec::new()),
        };
        Ok(Self {
            params,
            mac,
            delivery,
            next_counter: 1,
            engine,
            in_flight: VecDeque::new(),
            undo: None,
        })
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    /// Counter the next generated packet will carry.
    pub fn next_counter(&self) -> u32 {
        self.next_counter
    }

    /// Packets emitted but not yet acknowledged, oldest first.
    pub fn in_flight(&self) -> impl Iterator<Item = &Packet> {
        self.in_flight.iter()
    }

    /// segTx, for the cumulative schemes.
    pub fn segment_matrix(&self) -> Option<&SegmentMatrix> {
        match &self.engine {
            Engine::Cumulative(s) => Some(s.rows()),
            _ => None,
        }
    }

    /// msgTx, for CuMAC/S.
    pub fn message_window(&self) -> Option<&MessageWindow> {
        match &self.engine {
            Engine::Cumulative(s) => s.window(),
            _ => None,
        }
    }

    /// TagGen. Block schemes return no packets until the `n`-th message of a
    /// block; trailing returns the message packet and its tag packets.
    pub fn tag_gen(&mut self, m: &Message) -> Result<Vec<Packet>> {
        if let Some(p) = self.in_flight.front() {
            return Err(Error::ProtocolOrder(format!(
                "packet {} is still unresolved",
                p.counter
            )));
        }
        let c = self.next_counter;
        let l = self.params.mac().segment_bits();
        let packets = match &mut self.engine {
            Engine::Truncated => {
                let sigma = message_mac(&self.mac, c, m);
                vec![packet(c, m.clone(), leading_bits(&sigma, l))]
            }
            Engine::Cumulative(state) => {
                let undo = if self.params.kind() == SchemeKind::CuMacS {
                    Undo::Restore(Box::new(state.clone()))
                } else {
                    Undo::RemoveRow(c)
                };
                let out = state.step(&self.mac, c, m)?;
                self.undo = Some(undo);
                vec![packet(c, m.clone(), out.tag)]
            }
            Engine::Trailing => {
                let sigma = message_mac(&self.mac, c, m);
                let split = self.params.trailing_split();
                let chunk = self.params.trailing_tag_bits();
                let mut out = vec![packet(c, m.clone(), Tag::EMPTY)];
                for k in 0..split {
                    let value = (sigma.value() >> (sigma.len() - (k + 1) * chunk)) & crate::mac::low_mask(chunk);
                    out.push(Packet {
                        counter: c + 1 + k,
                        message: Message::empty(),
                        tag: Tag::new(value, chunk)?,
                        is_trailing_tag: true,
                    });
                }
                self.next_counter += 1 + split;
                out
            }
            Engine::Block(buffer) => {
                buffer.push(m.clone());
                self.next_counter += 1;
                let n = self.params.mac().segments() as usize;
                if buffer.len() < n {
                    return Ok(Vec::new());
                }
                let block = std::mem::take(buffer);
                let first = c + 1 - n as u32;
                let sigma = block_mac(&self.mac, self.params.kind(), first, &block);
                let segs = sigma.segment_values(self.params.mac());
                block
                    .into_iter()
                    .zip(segs)
                    .enumerate()
                    .map(|(j, (msg, s))| packet(first + j as u32, msg, Tag { value: s, len: l }))
                    .collect()
            }
        };
        self.in_flight.extend(packets.iter().cloned());
        Ok(packets)
    }

    /// Resolves the oldest in-flight packet. Returns the packet to resend in
    /// retransmit mode when it was lost.
    pub fn ack(&mut self, counter: u32, delivered: bool) -> Result<Option<Packet>> {
        match self.in_flight.front() {
            Some(p) if p.counter == counter => {}
            _ => return Err(Error::UnknownCounter(counter)),
        }
        if !delivered && self.delivery == Delivery::Retransmit {
            return Ok(self.in_flight.front().cloned());
        }
        self.in_flight.pop_front();
        let undo = self.undo.take();
        if !self.params.kind().per_message() {
            return Ok(None);
        }
        if delivered {
            self.next_counter += 1;
        } else {
            // lost and abandoned: keep the counter, forget the message
            match (undo, &mut self.engine) {
                (Some(Undo::RemoveRow(c)), Engine::Cumulative(state)) => state.remove_row(c),
                (Some(Undo::Restore(saved)), Engine::Cumulative(state)) => *state = *saved,
                _ => {}
            }
        }
        Ok(None)
    }
}

fn packet(counter: u32, message: Message, tag: Tag) -> Packet {
    Packet {
        counter,
        message,
        tag,
        is_trailing_tag: false,
    }
}

pub(crate) fn leading_bits(sigma: &MacOutput, bits: u32) -> Tag {
    Tag {
        value: sigma.value() >> (sigma.len() - bits),
        len: bits,
    }
}

/// Compound: one MAC over the block. Aggregate: XOR of per-message MACs.
pub(crate) fn block_mac(mac: &Mac, kind: SchemeKind, first: u32, block: &[Message]) -> MacOutput {
    if kind == SchemeKind::Compound {
        let prefixes: Vec<[u8; 2]> = block.iter().map(Message::len_prefix).collect();
        let parts: Vec<&[u8]> = block
            .iter()
            .zip(&prefixes)
            .flat_map(|(m, p)| [p.as_slice(), m.data()])
            .collect();
        mac.compute_parts(first, &parts)
    } else {
        let len = mac.params().total_bits();
        let value = block
            .iter()
            .enumerate()
            .fold(0u128, |acc, (j, m)| acc ^ message_mac(mac, first + j as u32, m).value());
        MacOutput::new(value, len).expect("XOR of L-bit values")
    }
}
