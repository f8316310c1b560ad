use std::collections::{BTreeMap, BTreeSet};

use crate::error::{param, Error, Result};
use crate::mac::{Mac, MacOutput, MacParams, Segment, Tag};
use crate::schemes::{message_mac, value_input, Message};
use crate::speculation::SpeculationConfig;

/// Everything a proof simulator holds when it unmasks a target MAC: the
/// forged tags, `MacGen` outputs for every other message, the speculated
/// MACs it could compute, and which counters were speculated correctly.
///
/// The target's own MAC is never in `macs` or `spec_macs`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecoveryView {
    pub tags: BTreeMap<u32, Tag>,
    pub macs: BTreeMap<u32, MacOutput>,
    pub spec_macs: BTreeMap<u32, MacOutput>,
    pub speculation_hits: BTreeSet<u32>,
}

/// Outcome of a CuMAC/S recovery attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recovered {
    Segment(Segment),
    /// The needed segment was speculated for a different message value.
    Miss,
}

fn missing(what: &str, counter: u32) -> Error {
    Error::InsufficientOracleData(format!("no {what} for counter {counter}"))
}

impl RecoveryView {
    fn tag(&self, c: u32) -> Result<u128> {
        self.tags.get(&c).map(|t| t.value).ok_or_else(|| missing("tag", c))
    }

    fn actual(&self, c: u32, j: u32, l: u32) -> Result<u128> {
        self.macs
            .get(&c)
            .map(|m| m.segment_value(j, l))
            .ok_or_else(|| missing("MAC", c))
    }

    fn speculated(&self, c: u32, j: u32, l: u32) -> Result<u128> {
        self.spec_macs
            .get(&c)
            .map(|m| m.segment_value(j, l))
            .ok_or_else(|| missing("speculated MAC", c))
    }

    /// `⊕_{j=1..n, j≠skip} s_{c-j+1}^j` over counters that exist.
    fn actual_terms(&self, params: &MacParams, c: u32, skip: u32) -> Result<u128> {
        let mut acc = 0;
        for j in (1..=params.segments().min(c)).filter(|&j| j != skip) {
            acc ^= self.actual(c - j + 1, j, params.segment_bits())?;
        }
        Ok(acc)
    }

    /// `⊕_{j=2..n, j≠skip} ŝ_{c+j-1}^j`.
    fn speculated_terms(&self, params: &MacParams, c: u32, skip: u32) -> Result<u128> {
        let mut acc = 0;
        for j in (2..=params.segments()).filter(|&j| j != skip) {
            acc ^= self.speculated(c + j - 1, j, params.segment_bits())?;
        }
        Ok(acc)
    }
}

fn check_index(params: &MacParams, i_star: u32, k: u32) -> Result<()> {
    if i_star == 0 || k == 0 || k > params.segments() {
        return param(format!("segment ({i_star}, {k}) out of range"));
    }
    Ok(())
}

/// `s_{i*}^k = τ_{i*+k-1} ⊕ ⊕_{j≠k} s_{i*+k-j}^j`: unmasks a CuMAC segment
/// from the tag it first appears in.
pub fn recover_segment_cumac(view: &RecoveryView, params: &MacParams, i_star: u32, k: u32) -> Result<Segment> {
    check_index(params, i_star, k)?;
    let c = i_star + k - 1;
    let v = view.tag(c)? ^ view.actual_terms(params, c, k)?;
    Segment::new(v, params.segment_bits(), i_star, k)
}

/// CuMAC/S recovery. Uses the forward tag `τ_{i*+k-1}` when the view has
/// it; otherwise unmasks the speculated copy `ŝ_{i*}^k` from the earlier tag
/// `τ_{i*-k+1}`, which equals `s_{i*}^k` only on a speculation hit.
pub fn recover_segment_cumacs(view: &RecoveryView, params: &MacParams, i_star: u32, k: u32) -> Result<Recovered> {
    check_index(params, i_star, k)?;
    let forward = i_star + k - 1;
    if view.tags.contains_key(&forward) {
        let v =
            view.tag(forward)? ^ view.actual_terms(params, forward, k)? ^ view.speculated_terms(params, forward, 0)?;
        return Ok(Recovered::Segment(Segment::new(v, params.segment_bits(), i_star, k)?));
    }
    if k < 2 || i_star < k {
        return Err(Error::InsufficientOracleData(format!(
            "segment {k} of counter {i_star} has no earlier tag"
        )));
    }
    let back = i_star - k + 1;
    // checked before touching tags so a miss needs no oracle data
    if !view.speculation_hits.contains(&i_star) {
        return Ok(Recovered::Miss);
    }
    let v = view.tag(back)? ^ view.actual_terms(params, back, 0)? ^ view.speculated_terms(params, back, k)?;
    Ok(Recovered::Segment(Segment::new(v, params.segment_bits(), i_star, k)?))
}

/// Value and width CuMAC/S speculated for `counter`, reproducing the
/// first-fill rule: the entry is forecast at step `max(1, counter-n+1)` from
/// the actual values up to that step.
pub(crate) fn speculation_for(config: &SpeculationConfig, values: &[(i64, u8)], counter: u32, n: u32) -> (i64, u8) {
    debug_assert!(counter >= 2);
    let step = counter.saturating_sub(n - 1).max(1) as usize;
    let hist = config.history_min().max(1);
    let known = &values[..step.min(values.len())];
    let mut forecast: Vec<i64> = known[known.len().saturating_sub(hist)..].iter().map(|v| v.0).collect();
    let mut predicted = 0;
    for _ in step as u32 + 1..=counter {
        predicted = config.predict(&forecast);
        forecast.push(predicted);
        if forecast.len() > hist {
            forecast.remove(0);
        }
    }
    (predicted, known.last().map_or(1, |v| v.1))
}

/// Builds the simulator's view of a transcript `(messages[c-1], tags[c-1])`
/// by querying `MacGen` for every message except `withheld`. CuMAC/S views
/// (`speculation` set) also get every speculated MAC the tags aggregate.
///
/// Returns the view and the number of `MacGen` queries made.
pub fn build_view(
    mac: &Mac,
    speculation: Option<&SpeculationConfig>,
    messages: &[Message],
    tags: &[Tag],
    withheld: u32,
) -> Result<(RecoveryView, u64)> {
    if messages.len() != tags.len() {
        return param("transcript needs one tag per message");
    }
    let n = mac.params().segments();
    let count = messages.len() as u32;
    let mut view = RecoveryView {
        tags: (1..).zip(tags.iter().copied()).collect(),
        ..RecoveryView::default()
    };
    let mut calls = 0u64;
    let Some(config) = speculation else {
        for (c, m) in (1..).zip(messages) {
            if c != withheld {
                view.macs.insert(c, message_mac(mac, c, m));
                calls += 1;
            }
        }
        return Ok((view, calls));
    };

    let values: Vec<(i64, u8)> = messages
        .iter()
        .map(|m| {
            m.value()
                .ok_or_else(|| Error::Param("CuMAC/S messages must be 1 to 8 whole bytes".into()))
        })
        .collect::<Result<_>>()?;
    for (c, &(v, w)) in (1..).zip(&values) {
        if c != withheld {
            view.macs.insert(c, mac.compute(c, &value_input(w, config.masked(v))));
            calls += 1;
        }
    }
    for c in 2..count + n {
        let (guess, width) = speculation_for(config, &values, c, n);
        if let Some(&(v, w)) = values.get(c as usize - 1) {
            if w == width && config.matches(v, guess) {
                view.speculation_hits.insert(c);
            }
        }
        if c != withheld {
            view.spec_macs
                .insert(c, mac.compute(c, &value_input(width, config.masked(guess))));
            calls += 1;
        }
    }
    Ok((view, calls))
}
