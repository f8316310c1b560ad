use crate::error::{Error, Result};
use crate::mac::{low_mask, Mac, MacOutput, SecretKey, Tag};

use super::cumulative::{message_mac, CumulativeState};
use super::matrix::{MatrixRole, MessageWindow, SegmentMatrix};
use super::report::{Accumulator, AuthReport, MessageRecord};
use super::sender::{block_mac, leading_bits};
use super::{Message, Packet, SchemeKind, SchemeParams};

/// Result of checking one packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Valid,
    Invalid,
    /// Nothing to check yet: a trailing message packet or a non-final block packet.
    Deferred,
    /// Verification cannot complete because a packet it depends on is missing.
    Incomplete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOutcome {
    pub verdict: Verdict,
    /// `verdict == Valid`; accRx changes only when this is set.
    pub valid: bool,
    pub report: AuthReport,
}

#[derive(Debug, Clone)]
struct PendingTrailing {
    counter: u32,
    expected: MacOutput,
    seen: u128,
    failed: bool,
}

#[derive(Debug, Clone)]
struct BlockBuffer {
    index: u32,
    slots: Vec<Option<(Message, Tag)>>,
}

#[derive(Debug, Clone)]
enum Engine {
    Truncated,
    Cumulative(CumulativeState),
    Trailing(Option<PendingTrailing>),
    Block(Option<BlockBuffer>),
}

/// Tag verification and accumulation state.
#[derive(Debug, Clone)]
pub struct Receiver {
    params: SchemeParams,
    mac: Mac,
    last: Option<u32>,
    engine: Engine,
    acc: Accumulator,
}

impl Receiver {
    pub fn new(params: SchemeParams, key: &SecretKey) -> Result<Self> {
        let mac = Mac::new(key, *params.mac())?;
        let n = params.mac().segments();
        let engine = match params.kind() {
            SchemeKind::Truncated => Engine::Truncated,
            SchemeKind::CuMac | SchemeKind::CuMacS => Engine::Cumulative(CumulativeState::new(
                *params.mac(),
                MatrixRole::SegRx,
                params.speculation().cloned(),
            )),
            SchemeKind::Trailing => Engine::Trailing(None),
            SchemeKind::Compound | SchemeKind::Aggregate => Engine::Block(None),
        };
        // block and trailing credits land up to n (resp. split) packets late
        let window = (4 * n).max(params.trailing_split() + 2);
        let acc = Accumulator::new(params.mac().segment_bits(), params.mac().total_bits(), window);
        Ok(Self {
            params,
            mac,
            last: None,
            engine,
            acc,
        })
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn last_counter(&self) -> Option<u32> {
        self.last
    }

    /// segRx, for the cumulative schemes.
    pub fn segment_matrix(&self) -> Option<&SegmentMatrix> {
        match &self.engine {
            Engine::Cumulative(s) => Some(s.rows()),
            _ => None,
        }
    }

    /// msgRx, for CuMAC/S.
    pub fn message_window(&self) -> Option<&MessageWindow> {
        match &self.engine {
            Engine::Cumulative(s) => s.window(),
            _ => None,
        }
    }

    /// TagVerify. Counters must strictly increase; gaps are accepted.
    pub fn verify(&mut self, p: &Packet) -> Result<VerifyOutcome> {
        if p.counter == 0 {
            return Err(Error::Param("packet counters start at 1".into()));
        }
        if let Some(last) = self.last {
            if p.counter <= last {
                return Err(Error::Replay {
                    counter: p.counter,
                    last,
                });
            }
        }
        self.last = Some(p.counter);
        let c = p.counter;
        let n = self.params.mac().segments();
        let l = self.params.mac().segment_bits();
        let full = low_mask(n);

        let (verdict, about) = match &mut self.engine {
            Engine::Truncated => {
                self.acc.arrive(c);
                let ok = !p.is_trailing_tag && leading_bits(&message_mac(&self.mac, c, &p.message), l) == p.tag;
                if ok {
                    self.acc.credit(c, 1, c);
                    self.acc.mark_authenticated(c);
                }
                (verdict_of(ok), c)
            }
            Engine::Cumulative(state) => {
                self.acc.arrive(c);
                // segRx is rebuilt from every received message, valid or not
                let out = match state.step(&self.mac, c, &p.message) {
                    Ok(out) => out,
                    Err(_) => return Ok(self.outcome(Verdict::Invalid, c)),
                };
                if let Some(hit) = out.hit {
                    self.acc.resolve_provisional(c, hit);
                }
                let ok = !p.is_trailing_tag && out.tag == p.tag;
                if ok {
                    for j in 1..=n.min(c) {
                        self.acc.credit(c - j + 1, 1 << (j - 1), c);
                    }
                    for &(future, j) in &out.speculated_terms {
                        self.acc.credit_provisional(future, 1 << (j - 1));
                    }
                    self.acc.mark_authenticated(c);
                }
                (verdict_of(ok), c)
            }
            Engine::Trailing(pending) => {
                if !p.is_trailing_tag {
                    self.acc.arrive(c);
                    *pending = Some(PendingTrailing {
                        counter: c,
                        expected: message_mac(&self.mac, c, &p.message),
                        seen: 0,
                        failed: !p.tag.is_empty(),
                    });
                    (Verdict::Deferred, c)
                } else {
                    let split = self.params.trailing_split();
                    let chunk = self.params.trailing_tag_bits();
                    match pending {
                        Some(pt) if c - pt.counter <= split => {
                            let k = c - pt.counter - 1;
                            let want = (pt.expected.value() >> (pt.expected.len() - (k + 1) * chunk)) & low_mask(chunk);
                            if p.tag.len == chunk && p.tag.value == want {
                                pt.seen |= 1 << k;
                            } else {
                                pt.failed = true;
                            }
                            let verdict = if pt.failed {
                                Verdict::Invalid
                            } else if k + 1 < split {
                                Verdict::Valid
                            } else if pt.seen == low_mask(split) {
                                self.acc.credit(pt.counter, full, c);
                                self.acc.mark_authenticated(pt.counter);
                                Verdict::Valid
                            } else {
                                Verdict::Incomplete
                            };
                            (verdict, pt.counter)
                        }
                        _ => (Verdict::Incomplete, c),
                    }
                }
            }
            Engine::Block(buffer) => {
                let index = (c - 1) / n;
                let pos = ((c - 1) % n) as usize;
                if buffer.as_ref().is_none_or(|b| b.index != index) {
                    *buffer = Some(BlockBuffer {
                        index,
                        slots: vec![None; n as usize],
                    });
                }
                let b = buffer.as_mut().expect("just set");
                self.acc.arrive(c);
                b.slots[pos] = Some((p.message.clone(), p.tag));
                if pos + 1 < n as usize {
                    (Verdict::Deferred, c)
                } else if b.slots.iter().any(Option::is_none) {
                    (Verdict::Incomplete, c)
                } else {
                    let first = index * n + 1;
                    let msgs: Vec<Message> = b.slots.iter().map(|s| s.as_ref().unwrap().0.clone()).collect();
                    let sigma = block_mac(&self.mac, self.params.kind(), first, &msgs);
                    let ok = sigma
                        .segment_values(self.params.mac())
                        .iter()
                        .zip(&b.slots)
                        .all(|(s, slot)| slot.as_ref().unwrap().1 == Tag { value: *s, len: l });
                    if ok {
                        for counter in first..=c {
                            self.acc.credit(counter, full, c);
                            self.acc.mark_authenticated(counter);
                        }
                    }
                    *buffer = None;
                    (verdict_of(ok), c)
                }
            }
        };
        Ok(self.outcome(verdict, about))
    }

    fn outcome(&self, verdict: Verdict, about: u32) -> VerifyOutcome {
        VerifyOutcome {
            verdict,
            valid: verdict == Verdict::Valid,
            report: self.acc.report(about).unwrap_or_else(|| AuthReport::unknown(about)),
        }
    }

    /// Current accumulation state of message `counter`.
    pub fn auth_status(&self, counter: u32) -> Result<AuthReport> {
        self.acc.report(counter).ok_or(Error::NotFound(counter))
    }

    /// `(delay, bits)` steps of message `counter`.
    pub fn timeline(&self, counter: u32) -> Result<Vec<(u32, u32)>> {
        self.acc
            .timeline(counter)
            .map(<[_]>::to_vec)
            .ok_or(Error::NotFound(counter))
    }

    /// Records that fell out of the accumulation window since the last call.
    pub fn drain_finalized(&mut self) -> Vec<MessageRecord> {
        self.acc.drain_frozen()
    }

    /// Ends the stream: freezes and returns every remaining record.
    pub fn finish(&mut self) -> Vec<MessageRecord> {
        self.acc.freeze_all();
        self.acc.drain_frozen()
    }
}

fn verdict_of(ok: bool) -> Verdict {
    if ok {
        Verdict::Valid
    } else {
        Verdict::Invalid
    }
}
