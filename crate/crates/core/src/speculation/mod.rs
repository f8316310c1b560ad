//! Deterministic message-value speculation for CuMAC/S.
//!
//! The predictor is an autoregressive model on the `d`-th difference of the
//! message series (ARIMA with no moving-average terms). Coefficients are
//! fixed-point integers with a 2^16 scale so that a sender and a receiver
//! fed the same history produce bit-identical predictions on any platform.

mod diagnostics;
mod fit;
mod ser;
mod trace;

pub use diagnostics::{acf, pacf};
pub use fit::{fit_ar, ArFit};
pub use ser::speculation_error_rate;
pub use trace::Trace;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Fractional bits of the fixed-point coefficients.
pub const COEFF_FRAC_BITS: u32 = 16;
/// `1.0` in coefficient units.
pub const COEFF_ONE: i64 = 1 << COEFF_FRAC_BITS;

const MAX_ORDER: u32 = 64;
const MAX_DIFF: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpeculationConfig {
    /// AR order.
    pub p: u32,
    /// Differencing order.
    pub d: u32,
    /// `p` coefficients in units of 2^-16; `coeffs[0]` weighs the most recent difference.
    pub coeffs: Vec<i64>,
    /// Low bits ignored when comparing (and MACing) message values.
    #[serde(default)]
    pub lsb_ignore: u32,
}

impl SpeculationConfig {
    pub fn new(p: u32, d: u32, coeffs: Vec<i64>, lsb_ignore: u32) -> Result<Self> {
        let cfg = Self {
            p,
            d,
            coeffs,
            lsb_ignore,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `m̂ = last value`.
    pub fn persistence() -> Self {
        Self {
            p: 1,
            d: 0,
            coeffs: vec![COEFF_ONE],
            lsb_ignore: 0,
        }
    }

    /// Continue the most recent first difference: `m̂ = m_t + (m_t - m_{t-1})`.
    pub fn drift() -> Self {
        Self {
            p: 1,
            d: 1,
            coeffs: vec![COEFF_ONE],
            lsb_ignore: 0,
        }
    }

    /// Quantizes floating-point coefficients to the fixed-point scale.
    pub fn from_f64(d: u32, coeffs: &[f64], lsb_ignore: u32) -> Result<Self> {
        let q = coeffs.iter().map(|c| quantize(*c)).collect::<Result<Vec<_>>>()?;
        Self::new(coeffs.len() as u32, d, q, lsb_ignore)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.p > MAX_ORDER {
            return param(format!("AR order p = {} outside 1..={MAX_ORDER}", self.p));
        }
        if self.d > MAX_DIFF {
            return param(format!("differencing order d = {} exceeds {MAX_DIFF}", self.d));
        }
        if self.coeffs.len() != self.p as usize {
            return param(format!("expected {} coefficients, got {}", self.p, self.coeffs.len()));
        }
        Ok(())
    }

    /// Samples needed before the model (rather than the last-value rule) applies.
    pub fn history_min(&self) -> usize {
        (self.p + self.d) as usize
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|&c| c as f64 / COEFF_ONE as f64).collect()
    }

    /// One-step prediction from `history` (oldest first). With fewer than
    /// `p + d` samples the last observed value is returned, and an empty
    /// history predicts 0.
    pub fn predict(&self, history: &[i64]) -> i64 {
        let Some(&last) = history.last() else {
            return 0;
        };
        let need = self.history_min();
        if history.len() < need {
            return last;
        }
        let tail = &history[history.len() - need..];
        let mut diffs: Vec<i128> = tail.iter().map(|&v| v as i128).collect();
        for _ in 0..self.d {
            diffs = diffs.windows(2).map(|w| w[1] - w[0]).collect();
        }
        let p = self.p as usize;
        let ar: i128 = (0..p).map(|k| self.coeffs[k] as i128 * diffs[p - 1 - k]).sum();

        // x_{t+1} = ∇^d x_{t+1} - Σ_{k=1..d} (-1)^k C(d,k) x_{t+1-k}
        let d = self.d as usize;
        let mut base: i128 = 0;
        let mut binom: i128 = 1;
        for k in 1..=d {
            binom = binom * (d + 1 - k) as i128 / k as i128;
            let sign: i128 = if k % 2 == 1 { -1 } else { 1 };
            base -= sign * binom * history[history.len() - k] as i128;
        }
        let total = ar + (base << COEFF_FRAC_BITS);
        // floor(x + 1/2): ties round toward +inf
        let rounded = (total + (1i128 << (COEFF_FRAC_BITS - 1))) >> COEFF_FRAC_BITS;
        rounded.clamp(i64::MIN as i128, i64::MAX as i128) as i64
    }

    /// Value after dropping the ignored low bits.
    #[inline]
    pub fn masked(&self, value: i64) -> i64 {
        masked(value, self.lsb_ignore)
    }

    /// Whether a prediction counts as correct for `actual`.
    #[inline]
    pub fn matches(&self, actual: i64, predicted: i64) -> bool {
        self.masked(actual) == self.masked(predicted)
    }
}

#[inline]
pub(crate) fn masked(value: i64, lsb_ignore: u32) -> i64 {
    if lsb_ignore >= 64 {
        0
    } else {
        value >> lsb_ignore
    }
}

pub(crate) fn quantize(c: f64) -> Result<i64> {
    let q = (c * COEFF_ONE as f64).round();
    if !q.is_finite() || q.abs() > (i64::MAX >> 20) as f64 {
        return param(format!("coefficient {c} cannot be quantized"));
    }
    Ok(q as i64)
}

/// A predictor holding the last `p + d` observations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeculationModel {
    config: SpeculationConfig,
    history: VecDeque<i64>,
}

impl SpeculationModel {
    pub fn new(config: SpeculationConfig) -> Result<Self> {
        config.validate()?;
        let cap = config.history_min().max(1);
        Ok(Self {
            config,
            history: VecDeque::with_capacity(cap),
        })
    }

    pub fn config(&self) -> &SpeculationConfig {
        &self.config
    }

    pub fn observe(&mut self, value: i64) {
        if self.history.len() == self.config.history_min().max(1) {
            self.history.pop_front();
        }
        self.history.push_back(value);
    }

    pub fn predict_next(&self) -> i64 {
        let (a, b) = self.history.as_slices();
        if b.is_empty() {
            self.config.predict(a)
        } else {
            let v: Vec<i64> = self.history.iter().copied().collect();
            self.config.predict(&v)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model_with(config: SpeculationConfig, history: &[i64]) -> SpeculationModel {
        let mut m = SpeculationModel::new(config).unwrap();
        history.iter().for_each(|&v| m.observe(v));
        m
    }

    #[test]
    fn persistence_on_constant_history() {
        let m = model_with(SpeculationConfig::drift(), &[10, 10, 10]);
        assert_eq!(m.predict_next(), 10);
    }

    #[test]
    fn drift_continues_progression() {
        let m = model_with(SpeculationConfig::drift(), &[1, 4, 7]);
        assert_eq!(m.predict_next(), 10);
    }

    #[test]
    fn short_history_returns_last_value() {
        let cfg = SpeculationConfig::from_f64(1, &[0.5, -0.3, 0.1], 0).unwrap();
        assert_eq!(cfg.predict(&[5, 9]), 9);
        assert_eq!(cfg.predict(&[]), 0);
    }

    #[test]
    fn ties_round_up() {
        // 0.5 * (3 - 2) = 0.5 on top of 3 -> 3.5 -> 4 ; negative side -3.5 -> -3
        let cfg = SpeculationConfig::from_f64(1, &[0.5], 0).unwrap();
        assert_eq!(cfg.predict(&[2, 3]), 4);
        assert_eq!(cfg.predict(&[-2, -3]), -3);
    }

    #[test]
    fn second_order_differencing_extrapolates_quadratics() {
        // x_t = t^2: second differences are constant 2
        let cfg = SpeculationConfig::new(1, 2, vec![COEFF_ONE], 0).unwrap();
        assert_eq!(cfg.predict(&[1, 4, 9, 16]), 25);
    }

    #[test]
    fn config_validation() {
        assert!(SpeculationConfig::new(0, 1, vec![], 0).is_err());
        assert!(SpeculationConfig::new(2, 1, vec![1], 0).is_err());
        assert!(SpeculationConfig::new(1, 9, vec![1], 0).is_err());
    }

    #[test]
    fn full_mask_matches_everything() {
        let mut cfg = SpeculationConfig::persistence();
        cfg.lsb_ignore = 64;
        assert!(cfg.matches(i64::MIN, i64::MAX));
        cfg.lsb_ignore = 3;
        assert!(cfg.matches(16, 23));
        assert!(!cfg.matches(16, 24));
    }

    proptest! {
        #[test]
        fn persistence_is_last_value(h in proptest::collection::vec(any::<i32>(), 1..20)) {
            let h: Vec<i64> = h.into_iter().map(i64::from).collect();
            prop_assert_eq!(SpeculationConfig::persistence().predict(&h), *h.last().unwrap());
        }

        #[test]
        fn equal_histories_give_equal_predictions(
            coeffs in proptest::collection::vec(-2.0f64..2.0, 1..5),
            d in 0u32..3,
            stream in proptest::collection::vec(-100_000i64..100_000, 1..60),
        ) {
            let cfg = SpeculationConfig::from_f64(d, &coeffs, 0).unwrap();
            let mut a = SpeculationModel::new(cfg.clone()).unwrap();
            let mut b = SpeculationModel::new(cfg).unwrap();
            for v in stream {
                prop_assert_eq!(a.predict_next(), b.predict_next());
                a.observe(v);
                b.observe(v);
            }
            prop_assert_eq!(a.predict_next(), b.predict_next());
        }

        #[test]
        fn coarser_mask_never_turns_a_match_into_a_miss(
            a in any::<i64>(), b in any::<i64>(), k in 0u32..64,
        ) {
            if masked(a, k) == masked(b, k) {
                prop_assert_eq!(masked(a, k + 1), masked(b, k + 1));
            }
        }
    }
}
