use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::mac::key_gen;
use crate::parallel::Exec;
use crate::schemes::{AuthReport, Delivery, Message, MessageRecord, Receiver, SchemeKind, SchemeParams, Sender};
use crate::speculation::Trace;

/// An erasure channel dropping each packet independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    /// Per-packet drop probability ρ.
    pub drop_rate: f64,
    #[serde(default)]
    pub retransmit: bool,
    pub rng_seed: u64,
    /// Messages offered by the sender (packets for per-message schemes).
    pub num_messages: u32,
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.drop_rate) {
            return param(format!("drop rate {} outside [0, 1]", self.drop_rate));
        }
        if self.retransmit && self.drop_rate >= 1.0 {
            return param("retransmission never terminates at drop rate 1");
        }
        Ok(())
    }

    fn delivery(&self) -> Delivery {
        if self.retransmit {
            Delivery::Retransmit
        } else {
            Delivery::NoRetransmit
        }
    }
}

/// Where message payloads come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageSource {
    /// Uniform random integers of `width` bytes.
    Random { width: u8 },
    /// Trace values in order (cycling), as 8-byte integers.
    Trace(Trace),
}

impl MessageSource {
    fn message(&self, index: usize, rng: &mut ChaCha8Rng) -> Result<Message> {
        match self {
            MessageSource::Random { width } => {
                let bits = *width as u32 * 8;
                let v: u64 = rng.gen();
                let v = if bits >= 64 {
                    v as i64
                } else {
                    ((v << (64 - bits)) as i64) >> (64 - bits)
                };
                Message::from_value_width(v, *width)
            }
            MessageSource::Trace(t) => Ok(Message::from_value(t.values[index % t.values.len()])),
        }
    }
}

/// Outcome of one channel run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub scheme: SchemeKind,
    pub drop_rate: f64,
    pub seed: u64,
    pub num_messages: u32,
    /// Messages whose own (message-carrying) packet arrived.
    pub delivered_messages: u32,
    /// Messages meeting the scheme's acceptance criterion.
    pub authenticated_messages: u32,
    /// `authenticated_messages / num_messages`.
    pub processing_rate: f64,
    /// Mean strength reached by each delay over delivered messages.
    pub strength_vs_delay: Vec<(u32, f64)>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub per_message_reports: Vec<AuthReport>,
}

/// Drives a sender/receiver pair keyed from `channel.rng_seed` through the
/// channel. Reports for individual messages are kept when `keep_reports`.
pub fn run_lossy(
    scheme: &SchemeParams,
    channel: &ChannelConfig,
    source: &MessageSource,
    keep_reports: bool,
) -> Result<SimulationReport> {
    channel.validate()?;
    let key = key_gen(128, Some(channel.rng_seed))?;
    let mut tx = Sender::new(scheme.clone(), &key, channel.delivery())?;
    let mut rx = Receiver::new(scheme.clone(), &key)?;
    let mut drops = ChaCha8Rng::seed_from_u64(channel.rng_seed);
    drops.set_stream(1);
    let mut payloads = ChaCha8Rng::seed_from_u64(channel.rng_seed);
    payloads.set_stream(2);

    let n = scheme.mac().segments();
    let mut acc = Tally::new(n);
    for i in 0..channel.num_messages as usize {
        let m = source.message(i, &mut payloads)?;
        for pkt in tx.tag_gen(&m)? {
            let mut attempt = pkt;
            loop {
                let lost = drops.gen::<f64>() < channel.drop_rate;
                if !lost {
                    rx.verify(&attempt)?;
                }
                match tx.ack(attempt.counter, !lost)? {
                    Some(again) => attempt = again,
                    None => break,
                }
            }
        }
        if i % 1024 == 1023 {
            acc.absorb(rx.drain_finalized(), keep_reports);
        }
    }
    acc.absorb(rx.finish(), keep_reports);

    let total = channel.num_messages.max(1) as f64;
    Ok(SimulationReport {
        scheme: scheme.kind(),
        drop_rate: channel.drop_rate,
        seed: channel.rng_seed,
        num_messages: channel.num_messages,
        delivered_messages: acc.delivered,
        authenticated_messages: acc.authenticated,
        processing_rate: acc.authenticated as f64 / total,
        strength_vs_delay: acc.curve(),
        per_message_reports: acc.reports,
    })
}

struct Tally {
    delays: u32,
    delivered: u32,
    authenticated: u32,
    bits_at_delay: Vec<u64>,
    reports: Vec<AuthReport>,
}

impl Tally {
    fn new(delays: u32) -> Self {
        Self {
            delays,
            delivered: 0,
            authenticated: 0,
            bits_at_delay: vec![0; delays as usize],
            reports: Vec::new(),
        }
    }

    fn absorb(&mut self, records: Vec<MessageRecord>, keep: bool) {
        for r in records {
            self.delivered += 1;
            self.authenticated += u32::from(r.report.authenticated);
            let mut bits = 0;
            let mut steps = r.timeline.iter().peekable();
            for d in 0..self.delays {
                while let Some(&&(at, b)) = steps.peek() {
                    if at > d {
                        break;
                    }
                    bits = b;
                    steps.next();
                }
                self.bits_at_delay[d as usize] += bits as u64;
            }
            if keep {
                self.reports.push(r.report);
            }
        }
    }

    fn curve(&self) -> Vec<(u32, f64)> {
        let denom = self.delivered.max(1) as f64;
        (0..self.delays)
            .map(|d| (d, self.bits_at_delay[d as usize] as f64 / denom))
            .collect()
    }
}

/// Closed-form processing rate: `1-ρ` per message for one-packet schemes,
/// `(1-ρ)^n` for block schemes, `(1-ρ)^(1+split)` for trailing.
pub fn analytic_processing_rate(scheme: &SchemeParams, drop_rate: f64, retransmit: bool) -> f64 {
    if retransmit {
        return 1.0;
    }
    let keep = 1.0 - drop_rate;
    match scheme.kind() {
        SchemeKind::Compound | SchemeKind::Aggregate => keep.powi(scheme.mac().segments() as i32),
        SchemeKind::Trailing => keep.powi(1 + scheme.trailing_split() as i32),
        _ => keep,
    }
}

/// One `run_lossy` per (scheme, drop rate) pair, in input order.
pub fn sweep_drop_rates(
    schemes: &[SchemeParams],
    drop_rates: &[f64],
    base: &ChannelConfig,
    source: &MessageSource,
    exec: Exec,
) -> Result<Vec<SimulationReport>> {
    let points: Vec<(SchemeParams, f64)> = schemes
        .iter()
        .flat_map(|s| drop_rates.iter().map(move |&r| (s.clone(), r)))
        .collect();
    exec.map(&points, |(s, rho)| {
        let ch = ChannelConfig {
            drop_rate: *rho,
            ..base.clone()
        };
        run_lossy(s, &ch, source, false)
    })
    .into_iter()
    .collect()
}
