//! Run configuration: one JSON document with a section per command. A user
//! file is merged key by key over the embedded defaults, so it only needs
//! the fields it changes.

use std::path::{Path, PathBuf};

use cumac::mac::MacParams;
use cumac::schemes::{SchemeKind, SchemeParams};
use cumac::security::Adversary;
use cumac::simkit::{CanWorkload, EnergyParams, MessageSource};
use cumac::speculation::{SpeculationConfig, Trace};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const DEFAULTS: &str = include_str!("../config/default.json");

/// Message or trace generator named in a config.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    Random {
        width: u8,
    },
    Torque {
        length: usize,
    },
    Constant {
        value: i64,
        length: usize,
    },
    Drift {
        start: i64,
        step: i64,
        length: usize,
    },
    RampJitter {
        step: i64,
        jitter: f64,
        length: usize,
    },
    Ar {
        coeffs: Vec<f64>,
        d: u32,
        noise_std: f64,
        start_scale: f64,
        length: usize,
    },
    Csv {
        path: PathBuf,
    },
}

impl SourceSpec {
    /// Synthetic generators draw from `seed`.
    pub fn trace(&self, seed: u64) -> Result<Trace, CliError> {
        Ok(match self {
            SourceSpec::Random { .. } => return Err(CliError::Config("a trace source is required here".into())),
            SourceSpec::Torque { length } => Trace::torque_like(*length, seed),
            SourceSpec::Constant { value, length } => Trace::constant(*value, *length),
            SourceSpec::Drift { start, step, length } => Trace::drift(*start, *step, *length),
            SourceSpec::RampJitter { step, jitter, length } => Trace::ramp_with_jitter(*step, *jitter, *length, seed),
            SourceSpec::Ar {
                coeffs,
                d,
                noise_std,
                start_scale,
                length,
            } => Trace::ar_process(coeffs, *d, *noise_std, *start_scale, *length, seed),
            SourceSpec::Csv { path } => Trace::from_csv_path(path).map_err(|e| CliError::Runtime(e.to_string()))?,
        })
    }

    pub fn message_source(&self, seed: u64) -> Result<MessageSource, CliError> {
        match self {
            SourceSpec::Random { width } => Ok(MessageSource::Random { width: *width }),
            other => other.trace(seed).map(MessageSource::Trace),
        }
    }

    fn check(&self, section: &str) -> Result<(), CliError> {
        let len = match self {
            SourceSpec::Random { width } if !(1..=8).contains(width) => {
                return Err(CliError::Config(format!("{section}.source.random.width must be 1..=8")))
            }
            SourceSpec::Random { .. } => 1,
            SourceSpec::Csv { path } if !path.is_file() => {
                return Err(CliError::Config(format!(
                    "{section}.source.csv.path: no such file {}",
                    path.display()
                )))
            }
            SourceSpec::Csv { .. } => 1,
            SourceSpec::Torque { length }
            | SourceSpec::Constant { length, .. }
            | SourceSpec::Drift { length, .. }
            | SourceSpec::RampJitter { length, .. }
            | SourceSpec::Ar { length, .. } => *length,
        };
        if len == 0 {
            return Err(CliError::Config(format!("{section}.source.length must be positive")));
        }
        Ok(())
    }
}

fn scheme_params(
    section: &str,
    schemes: &[SchemeKind],
    mac: MacParams,
    trailing_split: u32,
    speculation: &SpeculationConfig,
) -> Result<Vec<SchemeParams>, CliError> {
    let mut seen = Vec::new();
    let mut out = Vec::new();
    for &kind in schemes {
        if seen.contains(&kind) {
            return Err(CliError::Config(format!("{section}.schemes lists {kind} twice")));
        }
        seen.push(kind);
        let spec = (kind == SchemeKind::CuMacS).then(|| speculation.clone());
        let p = SchemeParams::build(kind, mac, trailing_split, spec)
            .map_err(|e| CliError::Config(format!("{section}: {e}")))?;
        out.push(p);
    }
    Ok(out)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub schemes: Vec<SchemeKind>,
    pub mac: MacParams,
    pub trailing_split: u32,
    pub speculation: SpeculationConfig,
    pub drop_rates: Vec<f64>,
    pub retransmit: bool,
    pub num_messages: u32,
    pub source: SourceSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub schemes: Vec<SchemeKind>,
    pub mac: MacParams,
    pub trailing_split: u32,
    pub speculation: SpeculationConfig,
    pub partial_r: u32,
    pub cumacs_betas: Vec<f64>,
    pub drop_rates: Vec<f64>,
    pub num_messages: u32,
    pub source: SourceSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusConfiguration {
    pub name: String,
    pub tag_bits: u32,
    pub extra_packets: u32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusloadConfig {
    pub workload: CanWorkload,
    pub configurations: Vec<BusConfiguration>,
    pub load_caps: Vec<f64>,
    pub max_messages: u32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyConfig {
    pub params: EnergyParams,
    pub message_bits: Vec<u32>,
    pub tag_bits: Vec<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeculateConfig {
    pub source: SourceSpec,
    pub p: u32,
    pub d: u32,
    pub train_fraction: f64,
    pub lsb_ignore: Vec<u32>,
    pub max_lag: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackConfig {
    pub schemes: Vec<SchemeKind>,
    pub adversaries: Vec<Adversary>,
    pub lambda_bits: u32,
    pub mac: MacParams,
    pub r_values: Vec<u32>,
    pub beta_values: Vec<f64>,
    pub trials: u64,
    pub min_successes: u64,
    pub max_trials: u64,
    #[serde(default)]
    pub query_budget: Option<u32>,
}

/// A merged, parsed configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    merged: Value,
}

/// Overlays `patch` onto `base`: objects merge per key, anything else
/// replaces.
/// Deep merge of `patch` over `base`. An object sharing no key with the one
/// it lands on replaces it, so `{"csv": ..}` swaps out a `{"torque": ..}`
/// source instead of producing a two-variant map.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) if b.is_empty() || p.is_empty() || p.keys().any(|k| b.contains_key(k)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn ensure_known_keys(user: &Value, defaults: &Value, path: &str) -> Result<(), CliError> {
    let (Value::Object(u), Value::Object(d)) = (user, defaults) else {
        return Ok(());
    };
    for k in u.keys() {
        if !d.contains_key(k) {
            let at = if path.is_empty() {
                k.clone()
            } else {
                format!("{path}.{k}")
            };
            return Err(CliError::Config(format!("unknown config key `{at}`")));
        }
    }
    Ok(())
}

impl RunConfig {
    /// Defaults, overlaid with the JSON file at `path`, then `seed`.
    pub fn load(path: Option<&Path>, seed: Option<u64>) -> Result<Self, CliError> {
        let mut merged: Value = serde_json::from_str(DEFAULTS).expect("embedded defaults parse");
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let user: Value =
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            if !user.is_object() {
                return Err(CliError::Config(format!("{}: expected a JSON object", path.display())));
            }
            ensure_known_keys(&user, &merged, "")?;
            merge(&mut merged, user);
        }
        if let Some(s) = seed {
            merged["seed"] = Value::from(s);
        }
        let seed = merged["seed"]
            .as_u64()
            .ok_or_else(|| CliError::Config("`seed` must be a non-negative integer".into()))?;
        Ok(Self { seed, merged })
    }

    fn section<T: DeserializeOwned>(&self, name: &str) -> Result<T, CliError> {
        serde_json::from_value(self.merged[name].clone()).map_err(|e| CliError::Config(format!("{name}: {e}")))
    }

    /// SHA-256 of the canonical (sorted-key, compact) JSON of the sections a
    /// command reads, plus the seed.
    pub fn digest(&self, command: &str) -> String {
        let used = serde_json::json!({ "seed": self.seed, command: self.merged[command] });
        hex::encode(Sha256::digest(serde_json::to_vec(&used).expect("serializable")))
    }

    pub fn simulate(&self) -> Result<(SimulateConfig, Vec<SchemeParams>), CliError> {
        let c: SimulateConfig = self.section("simulate")?;
        let params = scheme_params("simulate", &c.schemes, c.mac, c.trailing_split, &c.speculation)?;
        if params.is_empty() {
            return Err(CliError::Config("simulate.schemes must not be empty".into()));
        }
        check_rates("simulate.drop_rates", &c.drop_rates, c.retransmit)?;
        c.source.check("simulate")?;
        Ok((c, params))
    }

    pub fn compare(&self) -> Result<(CompareConfig, Vec<SchemeParams>), CliError> {
        let c: CompareConfig = self.section("compare")?;
        let params = scheme_params("compare", &c.schemes, c.mac, c.trailing_split, &c.speculation)?;
        if params.len() < 2 {
            return Err(CliError::Config(
                "compare.schemes must list at least two schemes".into(),
            ));
        }
        if !(1..=c.mac.segments()).contains(&c.partial_r) {
            return Err(CliError::Config(format!(
                "compare.partial_r = {} outside 1..={}",
                c.partial_r,
                c.mac.segments()
            )));
        }
        // an empty list skips the drop-rate sweep
        if !c.drop_rates.is_empty() {
            check_rates("compare.drop_rates", &c.drop_rates, false)?;
        }
        check_rates("compare.cumacs_betas", &c.cumacs_betas, false)?;
        c.source.check("compare")?;
        Ok((c, params))
    }

    pub fn busload(&self) -> Result<BusloadConfig, CliError> {
        let c: BusloadConfig = self.section("busload")?;
        c.workload
            .validate()
            .map_err(|e| CliError::Config(format!("busload.workload: {e}")))?;
        if c.configurations.is_empty() {
            return Err(CliError::Config("busload.configurations must not be empty".into()));
        }
        if c.load_caps.iter().any(|&x| !(x > 0.0 && x <= 1.0)) {
            return Err(CliError::Config("busload.load_caps must lie in (0, 1]".into()));
        }
        Ok(c)
    }

    pub fn energy(&self) -> Result<EnergyConfig, CliError> {
        let c: EnergyConfig = self.section("energy")?;
        c.params
            .validate()
            .map_err(|e| CliError::Config(format!("energy.params: {e}")))?;
        if c.tag_bits.is_empty() || c.message_bits.is_empty() {
            return Err(CliError::Config(
                "energy.tag_bits and energy.message_bits must not be empty".into(),
            ));
        }
        Ok(c)
    }

    pub fn speculate(&self) -> Result<SpeculateConfig, CliError> {
        let c: SpeculateConfig = self.section("speculate")?;
        c.source.check("speculate")?;
        if matches!(c.source, SourceSpec::Random { .. }) {
            return Err(CliError::Config("speculate.source must be a trace".into()));
        }
        if !(c.train_fraction > 0.0 && c.train_fraction < 1.0) {
            return Err(CliError::Config("speculate.train_fraction must lie in (0, 1)".into()));
        }
        if c.lsb_ignore.is_empty() {
            return Err(CliError::Config("speculate.lsb_ignore must not be empty".into()));
        }
        Ok(c)
    }

    pub fn attack(&self) -> Result<AttackConfig, CliError> {
        let c: AttackConfig = self.section("attack")?;
        if c.schemes
            .iter()
            .any(|k| !matches!(k, SchemeKind::CuMac | SchemeKind::CuMacS))
        {
            return Err(CliError::Config("attack.schemes may only list cumac and cumacs".into()));
        }
        if c.schemes.is_empty() || c.adversaries.is_empty() || c.r_values.is_empty() || c.beta_values.is_empty() {
            return Err(CliError::Config("attack lists must not be empty".into()));
        }
        check_rates("attack.beta_values", &c.beta_values, false)?;
        Ok(c)
    }
}

fn check_rates(field: &str, rates: &[f64], retransmit: bool) -> Result<(), CliError> {
    if rates.is_empty() {
        return Err(CliError::Config(format!("{field} must not be empty")));
    }
    if let Some(bad) = rates
        .iter()
        .find(|r| !(0.0..=1.0).contains(*r) || (retransmit && **r >= 1.0))
    {
        return Err(CliError::Config(format!("{field}: {bad} is not a usable probability")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_for_every_command() {
        let c = RunConfig::load(None, None).unwrap();
        c.simulate().unwrap();
        c.compare().unwrap();
        c.busload().unwrap();
        c.energy().unwrap();
        c.speculate().unwrap();
        c.attack().unwrap();
    }

    #[test]
    fn merge_overrides_leaves_only() {
        let mut base = serde_json::json!({"a": {"b": 1, "c": 2}, "d": [1, 2]});
        merge(&mut base, serde_json::json!({"a": {"c": 5}, "d": [3]}));
        assert_eq!(base, serde_json::json!({"a": {"b": 1, "c": 5}, "d": [3]}));
        merge(&mut base, serde_json::json!({"a": {"x": 0}}));
        assert_eq!(base["a"], serde_json::json!({"x": 0}));
    }

    #[test]
    fn digest_tracks_seed_and_section() {
        let a = RunConfig::load(None, Some(1)).unwrap();
        let b = RunConfig::load(None, Some(2)).unwrap();
        assert_eq!(
            a.digest("energy"),
            RunConfig::load(None, Some(1)).unwrap().digest("energy")
        );
        assert_ne!(a.digest("energy"), b.digest("energy"));
        assert_eq!(a.digest("energy").len(), 64);
    }
}
