use std::collections::BTreeMap;

use crate::error::{param, Result};
use crate::mac::{segment_mac, MacOutput, MacParams, Segment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatrixRole {
    /// Sender-side store of segments awaiting aggregation.
    SegTx,
    /// Receiver-side mirror rebuilt from received messages.
    SegRx,
}

/// Rows of `n` MAC segments keyed by message counter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentMatrix {
    role: MatrixRole,
    params: MacParams,
    /// Past rows retained behind the newest actual counter.
    capacity: u32,
    rows: BTreeMap<u32, Vec<Segment>>,
}

impl SegmentMatrix {
    pub fn new(role: MatrixRole, params: MacParams, capacity: u32) -> Self {
        Self {
            role,
            params,
            capacity: capacity.max(params.segments()),
            rows: BTreeMap::new(),
        }
    }

    pub fn role(&self) -> MatrixRole {
        self.role
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Replaces row `counter` with the segments of `mac`.
    pub fn insert_mac(&mut self, counter: u32, mac: &MacOutput, speculated: bool) -> Result<()> {
        let mut segs = segment_mac(mac, &self.params, counter)?;
        segs.iter_mut().for_each(|s| s.speculated = speculated);
        self.rows.insert(counter, segs);
        Ok(())
    }

    pub fn insert_row(&mut self, counter: u32, row: Vec<Segment>) -> Result<()> {
        let ok = row.len() == self.params.segments() as usize
            && row.iter().enumerate().all(|(k, s)| {
                s.seg_index == k as u32 + 1 && s.len == self.params.segment_bits() && s.msg_counter == counter
            });
        if !ok {
            return param(format!(
                "row {counter} is not {} ordered segments of this message",
                self.params.segments()
            ));
        }
        self.rows.insert(counter, row);
        Ok(())
    }

    pub fn remove_row(&mut self, counter: u32) -> Option<Vec<Segment>> {
        self.rows.remove(&counter)
    }

    pub fn row(&self, counter: u32) -> Option<&[Segment]> {
        self.rows.get(&counter).map(Vec::as_slice)
    }

    /// Segment `j` (1-based) of row `counter`.
    #[inline]
    pub fn segment(&self, counter: u32, j: u32) -> Option<&Segment> {
        self.rows.get(&counter).and_then(|r| r.get(j as usize - 1))
    }

    pub(crate) fn mark_actual(&mut self, counter: u32) {
        if let Some(r) = self.rows.get_mut(&counter) {
            r.iter_mut().for_each(|s| s.speculated = false);
        }
    }

    /// Drops rows more than `capacity` behind `newest`.
    pub fn prune(&mut self, newest: u32) {
        let keep_from = newest.saturating_sub(self.capacity - 1);
        self.rows = self.rows.split_off(&keep_from);
    }

    pub fn counters(&self) -> impl Iterator<Item = u32> + '_ {
        self.rows.keys().copied()
    }
}

/// One entry of the CuMAC/S message window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WindowEntry {
    pub value: i64,
    /// Payload width in bytes.
    pub width: u8,
    pub speculated: bool,
}

/// Transmitted (or received) message values plus speculated future values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageWindow {
    horizon: u32,
    history: u32,
    entries: BTreeMap<u32, WindowEntry>,
}

impl MessageWindow {
    /// `horizon` future entries (`n - 1`) and at least `history` past ones.
    pub fn new(horizon: u32, history: u32) -> Self {
        Self {
            horizon,
            history: history.max(1),
            entries: BTreeMap::new(),
        }
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn get(&self, counter: u32) -> Option<&WindowEntry> {
        self.entries.get(&counter)
    }

    pub fn set(&mut self, counter: u32, entry: WindowEntry) {
        self.entries.insert(counter, entry);
    }

    /// Actual (non-speculated) values up to and including `counter`, oldest
    /// first, at most `max` of them.
    pub fn actual_values_through(&self, counter: u32, max: usize) -> Vec<i64> {
        let mut v: Vec<i64> = self
            .entries
            .range(..=counter)
            .rev()
            .filter(|(_, e)| !e.speculated)
            .take(max)
            .map(|(_, e)| e.value)
            .collect();
        v.reverse();
        v
    }

    /// Width of the newest actual entry before `counter`.
    pub fn last_actual_width(&self, counter: u32) -> Option<u8> {
        self.entries
            .range(..counter)
            .rev()
            .find(|(_, e)| !e.speculated)
            .map(|(_, e)| e.width)
    }

    pub fn prune(&mut self, newest: u32) {
        let keep_from = newest.saturating_sub(self.history);
        self.entries = self.entries.split_off(&keep_from);
    }

    pub fn speculated_counters(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().filter(|(_, e)| e.speculated).map(|(c, _)| *c)
    }
}
