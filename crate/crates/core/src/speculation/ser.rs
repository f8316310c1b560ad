use super::{SpeculationConfig, Trace};
use crate::error::{param, Result};

/// Fraction of one-step-ahead predictions over the held-out tail
/// (`train_fraction ..`) that miss after LSB masking.
pub fn speculation_error_rate(trace: &Trace, config: &SpeculationConfig, train_fraction: f64) -> Result<f64> {
    config.validate()?;
    if !(0.0..1.0).contains(&train_fraction) {
        return param(format!("train_fraction {train_fraction} outside [0, 1)"));
    }
    let v = &trace.values;
    // the first sample has nothing to predict from
    let start = ((v.len() as f64 * train_fraction).floor() as usize).max(1);
    if start >= v.len() {
        return param("test partition is empty");
    }
    let misses = (start..v.len())
        .filter(|&t| !config.matches(v[t], config.predict(&v[..t])))
        .count();
    Ok(misses as f64 / (v.len() - start) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_trace_has_no_errors() {
        let t = Trace::drift(-50, 7, 1000);
        assert_eq!(
            speculation_error_rate(&t, &SpeculationConfig::drift(), 0.9).unwrap(),
            0.0
        );
    }

    #[test]
    fn full_mask_has_no_errors() {
        let t = Trace::white_noise(1000, 500, 2);
        let mut cfg = SpeculationConfig::persistence();
        cfg.lsb_ignore = 64;
        assert_eq!(speculation_error_rate(&t, &cfg, 0.5).unwrap(), 0.0);
    }

    // Drift on a ramp with independent Bernoulli(0.2) bumps e_t: the
    // prediction error is e_t - 2e_{t-1} + e_{t-2}, which is zero only when
    // all three agree, so SER(0) = 1 - (0.8^3 + 0.2^3) = 0.48.
    #[test]
    fn ramp_jitter_ser_and_masking() {
        let t = Trace::ramp_with_jitter(16, 0.2, 100_000, 9);
        let mut cfg = SpeculationConfig::drift();
        let ser0 = speculation_error_rate(&t, &cfg, 0.9).unwrap();
        cfg.lsb_ignore = 3;
        let ser3 = speculation_error_rate(&t, &cfg, 0.9).unwrap();
        let analytic = 1.0 - (0.8f64.powi(3) + 0.2f64.powi(3));
        assert!((ser0 - analytic).abs() < 0.03, "SER(0) = {ser0}");
        assert!(ser3 <= ser0, "SER(3) = {ser3}");
    }

    #[test]
    fn ser_is_non_increasing_in_mask() {
        let t = Trace::torque_like(5_000, 4);
        let mut prev = f64::INFINITY;
        for k in 0..=12 {
            let cfg = SpeculationConfig {
                lsb_ignore: k,
                ..SpeculationConfig::drift()
            };
            let s = speculation_error_rate(&t, &cfg, 0.5).unwrap();
            assert!(s <= prev, "lsb_ignore {k}: {s} > {prev}");
            prev = s;
        }
    }

    #[test]
    fn empty_test_split_is_rejected() {
        assert!(speculation_error_rate(&Trace::constant(1, 1), &SpeculationConfig::persistence(), 0.0).is_err());
    }
}
