use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// A sampled integer message series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub name: String,
    pub values: Vec<i64>,
    pub period_ms: f64,
}

#[derive(Deserialize)]
struct Row {
    timestamp_ms: f64,
    value: String,
}

impl Trace {
    pub fn new(name: impl Into<String>, values: Vec<i64>, period_ms: f64) -> Result<Self> {
        if values.is_empty() {
            return param("a trace needs at least one sample");
        }
        Ok(Self {
            name: name.into(),
            values,
            period_ms,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Parses `timestamp_ms,value` CSV. Timestamps must be non-decreasing;
    /// values must be integers (an integral float such as `12.0` is accepted).
    pub fn from_csv_reader<R: Read>(name: impl Into<String>, reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Input(e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["timestamp_ms", "value"] {
            return Err(Error::Input(format!(
                "expected header `timestamp_ms,value`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut values = Vec::new();
        let mut stamps = Vec::new();
        for (line, row) in rdr.deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| Error::Input(e.to_string()))?;
            let value = parse_integer(&row.value)
                .ok_or_else(|| Error::Input(format!("row {}: `{}` is not an integer", line + 2, row.value)))?;
            if let Some(&prev) = stamps.last() {
                if row.timestamp_ms < prev {
                    return Err(Error::Input(format!("row {}: timestamps go backwards", line + 2)));
                }
            }
            stamps.push(row.timestamp_ms);
            values.push(value);
        }
        if values.is_empty() {
            return Err(Error::Input("trace file has no samples".into()));
        }
        let period_ms = if stamps.len() > 1 {
            (stamps[stamps.len() - 1] - stamps[0]) / (stamps.len() - 1) as f64
        } else {
            0.0
        };
        Ok(Self {
            name: name.into(),
            values,
            period_ms,
        })
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::from_csv_reader(name, file)
    }

    pub fn to_csv_writer<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Input(e.to_string());
        w.write_record(["timestamp_ms", "value"]).map_err(io)?;
        for (t, v) in self.values.iter().enumerate() {
            w.write_record([format_ms(t as f64 * self.period_ms), v.to_string()])
                .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Input(e.to_string()))
    }

    pub fn constant(value: i64, len: usize) -> Self {
        Self::synthetic("constant", vec![value; len.max(1)])
    }

    /// `v_t = start + step * t`.
    pub fn drift(start: i64, step: i64, len: usize) -> Self {
        Self::synthetic("drift", (0..len.max(1) as i64).map(|t| start + step * t).collect())
    }

    /// Linear ramp plus an independent Bernoulli(`p_jitter`) unit bump on each sample.
    pub fn ramp_with_jitter(step: i64, p_jitter: f64, len: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..len.max(1) as i64)
            .map(|t| step * t + i64::from(rng.gen_bool(p_jitter)))
            .collect();
        Self::synthetic("ramp_jitter", values)
    }

    /// Uniform i.i.d. integers in `[-amplitude, amplitude]`.
    pub fn white_noise(amplitude: i64, len: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..len.max(1)).map(|_| rng.gen_range(-amplitude..=amplitude)).collect();
        Self::synthetic("white_noise", values)
    }

    /// AR(p) on the `d`-th difference: `Δ^d v_t = Σ φ_k Δ^d v_{t-k} + σ ε_t`
    /// with Gaussian `ε`, then integrated `d` times and rounded. The first `p`
    /// differences are drawn uniformly from `[-start_scale, start_scale]` so a
    /// zero-noise series still excites every lag.
    pub fn ar_process(coeffs: &[f64], d: u32, noise_std: f64, start_scale: f64, len: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = coeffs.len();
        let mut x: Vec<f64> = Vec::with_capacity(len);
        for t in 0..len.max(1) {
            let v = if t < p {
                rng.gen_range(-start_scale..=start_scale)
            } else {
                let ar: f64 = coeffs.iter().enumerate().map(|(k, c)| c * x[t - 1 - k]).sum();
                ar + noise_std * gaussian(&mut rng)
            };
            x.push(v);
        }
        for _ in 0..d {
            let mut acc = 0.0;
            for v in x.iter_mut() {
                acc += *v;
                *v = acc;
            }
        }
        Self::synthetic("ar", x.into_iter().map(|v| v.round() as i64).collect())
    }

    /// Engine-torque-like profile: alternating plateaus and linear ramps of
    /// random length, with occasional ±1 sensor jitter.
    pub fn torque_like(len: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = Vec::with_capacity(len.max(1));
        let mut level: i64 = 400;
        while values.len() < len.max(1) {
            let run = rng.gen_range(20..200);
            let slope: i64 = if rng.gen_bool(0.5) { 0 } else { rng.gen_range(-4..=4) };
            for _ in 0..run {
                level = (level + slope).clamp(0, 4000);
                let jitter = if rng.gen_bool(0.05) { rng.gen_range(-1..=1) } else { 0 };
                values.push(level + jitter);
                if values.len() == len.max(1) {
                    break;
                }
            }
        }
        Self::synthetic("torque", values)
    }

    fn synthetic(name: &str, values: Vec<i64>) -> Self {
        Self {
            name: name.into(),
            values,
            period_ms: 10.0,
        }
    }
}

fn parse_integer(s: &str) -> Option<i64> {
    s.parse::<i64>().ok().or_else(|| {
        let f: f64 = s.parse().ok()?;
        (f.fract() == 0.0 && f.abs() < 9.0e18).then_some(f as i64)
    })
}

fn format_ms(ms: f64) -> String {
    if ms.fract() == 0.0 {
        format!("{}", ms as i64)
    } else {
        format!("{ms}")
    }
}

/// Standard normal draw (Box-Muller).
pub(crate) fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
