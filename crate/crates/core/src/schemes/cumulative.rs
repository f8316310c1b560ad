//! The TagGen step shared by CuMAC and CuMAC/S senders and receivers. Both
//! ends run the identical state update, so a receiver fed the sender's
//! (counter, message) stream reproduces every tag.

use crate::error::{param, Result};
use crate::mac::{Mac, MacOutput, MacParams, Tag};
use crate::speculation::SpeculationConfig;

use super::matrix::{MatrixRole, MessageWindow, SegmentMatrix, WindowEntry};
use super::Message;

#[derive(Debug, Clone)]
pub(crate) struct Speculative {
    pub config: SpeculationConfig,
    pub window: MessageWindow,
}

#[derive(Debug, Clone)]
pub(crate) struct CumulativeState {
    params: MacParams,
    rows: SegmentMatrix,
    spec: Option<Speculative>,
}

/// What one step aggregated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct StepOutput {
    pub tag: Tag,
    /// CuMAC/S: whether `m_i` matched its speculation (reusing `σ̂_i`).
    pub hit: Option<bool>,
    /// `(counter, segment index)` of every speculated segment XORed in.
    pub speculated_terms: Vec<(u32, u32)>,
    /// `MacGen` invocations this step made.
    pub macs_computed: u32,
}

/// CuMAC/S MAC input for a value: `width || masked value (8 bytes, BE)`.
pub(crate) fn value_input(width: u8, masked: i64) -> [u8; 9] {
    let mut b = [0u8; 9];
    b[0] = width;
    b[1..].copy_from_slice(&masked.to_be_bytes());
    b
}

/// Per-message MAC used by every scheme except CuMAC/S:
/// `MAC(counter || bit length || payload)`.
pub(crate) fn message_mac(mac: &Mac, counter: u32, m: &Message) -> MacOutput {
    mac.compute_parts(counter, &[&m.len_prefix(), m.data()])
}

impl CumulativeState {
    pub fn new(params: MacParams, role: MatrixRole, spec: Option<SpeculationConfig>) -> Self {
        let n = params.segments();
        let rows = SegmentMatrix::new(role, params, 2 * n);
        let spec = spec.map(|config| {
            let history = (2 * n).max(config.history_min() as u32 + 1);
            Speculative {
                window: MessageWindow::new(n - 1, history),
                config,
            }
        });
        Self { params, rows, spec }
    }

    pub fn rows(&self) -> &SegmentMatrix {
        &self.rows
    }

    pub fn window(&self) -> Option<&MessageWindow> {
        self.spec.as_ref().map(|s| &s.window)
    }

    /// Removes row `counter` (lost-packet rule for plain CuMAC).
    pub fn remove_row(&mut self, counter: u32) {
        self.rows.remove_row(counter);
    }

    /// Runs TagGen for `(counter, m)`, updating the matrix (and window).
    pub fn step(&mut self, mac: &Mac, counter: u32, m: &Message) -> Result<StepOutput> {
        let n = self.params.segments();
        let mut macs_computed = 1;
        let (hit, speculated_terms) = match self.spec.as_mut() {
            None => {
                self.rows.insert_mac(counter, &message_mac(mac, counter, m), false)?;
                (None, Vec::new())
            }
            Some(spec) => {
                let Some((value, width)) = m.value() else {
                    return param("CuMAC/S messages must be 1 to 8 whole bytes");
                };
                let masked = spec.config.masked(value);
                // step 1: reuse σ̂_i on a hit, otherwise replace the row
                let hit = matches!(
                    spec.window.get(counter),
                    Some(e) if e.speculated && e.width == width && spec.config.masked(e.value) == masked
                );
                if hit && self.rows.row(counter).is_some() {
                    self.rows.mark_actual(counter);
                    macs_computed = 0;
                } else {
                    let out = mac.compute(counter, &value_input(width, masked));
                    self.rows.insert_mac(counter, &out, false)?;
                }
                spec.window.set(
                    counter,
                    WindowEntry {
                        value,
                        width,
                        speculated: false,
                    },
                );

                // steps 2-3: fill every missing m̂ in i+1 ..= i+n-1 with the
                // multi-step forecast from actual values up to i
                let hist = spec.config.history_min().max(1);
                let mut forecast = spec.window.actual_values_through(counter, hist);
                for c in counter + 1..counter + n {
                    let predicted = spec.config.predict(&forecast);
                    forecast.push(predicted);
                    if forecast.len() > hist {
                        forecast.remove(0);
                    }
                    if spec.window.get(c).is_some() {
                        continue;
                    }
                    let w = spec.window.last_actual_width(c).unwrap_or(width);
                    spec.window.set(
                        c,
                        WindowEntry {
                            value: predicted,
                            width: w,
                            speculated: true,
                        },
                    );
                    let out = mac.compute(c, &value_input(w, spec.config.masked(predicted)));
                    self.rows.insert_mac(c, &out, true)?;
                    macs_computed += 1;
                }
                spec.window.prune(counter);
                (Some(hit), (2..=n).map(|j| (counter + j - 1, j)).collect())
            }
        };

        // step 4: τ_i = ⊕_{j, i-j+1 ≥ 1} s_{i-j+1}^j ⊕ ⊕_{j≥2} ŝ_{i+j-1}^j
        let mut acc = 0u128;
        for j in 1..=n.min(counter) {
            if let Some(s) = self.rows.segment(counter - j + 1, j) {
                acc ^= s.value;
            }
        }
        for &(c, j) in &speculated_terms {
            if let Some(s) = self.rows.segment(c, j) {
                acc ^= s.value;
            }
        }
        self.rows.prune(counter);
        Ok(StepOutput {
            tag: Tag::new(acc, self.params.segment_bits())?,
            hit,
            speculated_terms,
            macs_computed,
        })
    }
}
