use super::Trace;
use crate::error::{Error, Result};

/// Sample autocorrelations `acf[0..=max_lag]` (biased estimator, `acf[0] == 1`).
pub fn acf(trace: &Trace, max_lag: usize) -> Result<Vec<f64>> {
    let n = trace.values.len();
    if max_lag >= n {
        return Err(Error::Diagnostics(format!(
            "max_lag {max_lag} must be below trace length {n}"
        )));
    }
    let mean = trace.values.iter().map(|&v| v as f64).sum::<f64>() / n as f64;
    let x: Vec<f64> = trace.values.iter().map(|&v| v as f64 - mean).collect();
    let var: f64 = x.iter().map(|v| v * v).sum();
    if var <= 0.0 {
        return Err(Error::Diagnostics("trace has zero variance".into()));
    }
    Ok((0..=max_lag)
        .map(|k| x[..n - k].iter().zip(&x[k..]).map(|(a, b)| a * b).sum::<f64>() / var)
        .collect())
}

/// Partial autocorrelations `pacf[0..=max_lag]` via Durbin-Levinson; `pacf[0] == 1`.
pub fn pacf(trace: &Trace, max_lag: usize) -> Result<Vec<f64>> {
    let r = acf(trace, max_lag)?;
    let mut out = vec![1.0];
    let mut phi: Vec<f64> = Vec::new();
    for k in 1..=max_lag {
        let num = r[k] - (1..k).map(|j| phi[j - 1] * r[k - j]).sum::<f64>();
        let den = 1.0 - (1..k).map(|j| phi[j - 1] * r[j]).sum::<f64>();
        if den.abs() < 1e-12 {
            return Err(Error::Diagnostics(format!("Durbin-Levinson breaks down at lag {k}")));
        }
        let kk = num / den;
        let mut next: Vec<f64> = (1..k).map(|j| phi[j - 1] - kk * phi[k - j - 1]).collect();
        next.push(kk);
        phi = next;
        out.push(kk);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lag_zero_is_one() {
        let t = Trace::torque_like(300, 1);
        assert!((acf(&t, 5).unwrap()[0] - 1.0).abs() < 1e-12);
        assert_eq!(pacf(&t, 5).unwrap()[0], 1.0);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(matches!(acf(&Trace::constant(3, 50), 2), Err(Error::Diagnostics(_))));
        assert!(acf(&Trace::drift(0, 1, 5), 5).is_err());
    }

    #[test]
    fn white_noise_stays_in_band() {
        let t = Trace::white_noise(1_000_000, 10_000, 21);
        let r = acf(&t, 20).unwrap();
        for (k, v) in r.iter().enumerate().skip(1) {
            assert!(v.abs() < 0.05, "acf[{k}] = {v}");
        }
    }

    #[test]
    fn ar1_matches_known_process() {
        // scaled so rounding to integers is negligible
        let t = Trace::ar_process(&[0.8], 0, 1000.0, 0.0, 20_000, 5);
        let r = acf(&t, 6).unwrap();
        for (k, v) in r.iter().enumerate() {
            assert!((v - 0.8f64.powi(k as i32)).abs() < 0.05, "acf[{k}] = {v}");
        }
        let p = pacf(&t, 6).unwrap();
        assert!((p[1] - 0.8).abs() < 0.05);
        for (k, v) in p.iter().enumerate().skip(2) {
            assert!(v.abs() < 0.05, "pacf[{k}] = {v}");
        }
    }

    // 2/sqrt(N) is a per-lag 95% band, so it is checked as a rate over
    // independent realizations rather than on every single lag.
    #[test]
    fn ar3_pacf_cuts_off_after_order() {
        let n = 20_000;
        let band = 2.0 / (n as f64).sqrt();
        let (mut inside, mut total) = (0, 0);
        for seed in 0..20 {
            let t = Trace::ar_process(&[0.5, -0.3, 0.1], 0, 1000.0, 0.0, n, seed);
            let p = pacf(&t, 10).unwrap();
            assert!(p[3].abs() > band, "seed {seed}: pacf[3] = {}", p[3]);
            for v in &p[4..] {
                total += 1;
                inside += usize::from(v.abs() < band);
            }
        }
        let rate = inside as f64 / total as f64;
        assert!(rate >= 0.9, "only {rate} of lags beyond 3 inside the band");
    }
}
