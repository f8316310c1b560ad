use super::{quantize, SpeculationConfig, Trace, COEFF_ONE};
use crate::error::{param, Result};

/// Output of [`fit_ar`].
#[derive(Debug, Clone, PartialEq)]
pub struct ArFit {
    pub config: SpeculationConfig,
    /// Set when the design matrix was rank-deficient and the persistence
    /// coefficients `[1, 0, ...]` were substituted.
    pub persistence_fallback: bool,
}

/// Least-squares AR(`p`) fit on the `d`-th difference of the first
/// `train_fraction` of the trace.
pub fn fit_ar(trace: &Trace, p: u32, d: u32, train_fraction: f64) -> Result<ArFit> {
    if !(train_fraction > 0.0 && train_fraction <= 1.0) {
        return param(format!("train_fraction {train_fraction} outside (0, 1]"));
    }
    let split = (trace.values.len() as f64 * train_fraction).floor() as usize;
    let need = (p + d) as usize;
    if split <= need {
        return param(format!(
            "training prefix of {split} samples needs more than p + d = {need}"
        ));
    }
    let mut x: Vec<f64> = trace.values[..split].iter().map(|&v| v as f64).collect();
    for _ in 0..d {
        x = x.windows(2).map(|w| w[1] - w[0]).collect();
    }

    let p = p as usize;
    // normal equations X'X φ = X'y, row t regresses x_t on x_{t-1..t-p}
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for t in p..x.len() {
        for a in 0..p {
            xty[a] += x[t - 1 - a] * x[t];
            for b in 0..p {
                xtx[a][b] += x[t - 1 - a] * x[t - 1 - b];
            }
        }
    }
    let fallback = || {
        let mut coeffs = vec![0; p];
        coeffs[0] = COEFF_ONE;
        ArFit {
            config: SpeculationConfig {
                p: p as u32,
                d,
                coeffs,
                lsb_ignore: 0,
            },
            persistence_fallback: true,
        }
    };
    let Some(phi) = solve(xtx, xty) else {
        return Ok(fallback());
    };
    match phi.iter().map(|&c| quantize(c)).collect::<Result<Vec<_>>>() {
        Ok(coeffs) => Ok(ArFit {
            config: SpeculationConfig::new(p as u32, d, coeffs, 0)?,
            persistence_fallback: false,
        }),
        Err(_) => Ok(fallback()),
    }
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    let tol = scale * 1e-10;
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= tol {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (top, bottom) = a.split_at_mut(row);
            for (x, p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
