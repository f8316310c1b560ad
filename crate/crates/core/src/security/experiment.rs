use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::recovery::{build_view, recover_segment_cumac, recover_segment_cumacs, Recovered, RecoveryView};
use crate::error::{param, Result};
use crate::mac::{key_from_rng, low_mask, Mac, MacParams, Tag};
use crate::parallel::Exec;
use crate::schemes::{
    message_mac, value_input, CumulativeState, MatrixRole, Message, Packet, Receiver, SchemeKind, SchemeParams, Verdict,
};
use crate::speculation::SpeculationConfig;

/// Largest `L` for which forgery rates stay measurable by sampling.
pub const TOY_MAX_MAC_BITS: u32 = 20;

/// How the adversary builds its forgery. All three query the tagging
/// oracle for the transcript prefix before the target and copy those tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Adversary {
    /// Draws every tag from the target onwards uniformly at random.
    RandomGuess,
    /// Learns every segment except the target's from `MacGen` (the proof
    /// simulator's view), unmasks each remaining tag with the recovery
    /// equations and guesses only the target's fresh segments.
    RecoveryAssisted,
    /// Negative control: queries the target message and replays its tags.
    /// Every such run must be rejected as non-fresh.
    Replay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub lambda_bits: u32,
    pub mac: MacParams,
    /// Tags accumulated after the target: the target sits at `n-r+1`
    /// (CuMAC) or `2n-r` (CuMAC/S).
    pub r: u32,
    /// Initial trial count; doubled until `min_successes` is met.
    pub trials: u64,
    #[serde(default = "default_min_successes")]
    pub min_successes: u64,
    #[serde(default = "default_max_trials")]
    pub max_trials: u64,
    /// Oracle messages the adversary may submit; twice the forgery length
    /// when unset.
    #[serde(default)]
    pub query_budget: Option<u32>,
    /// CuMAC/S: probability that the forged target differs from its
    /// speculation.
    #[serde(default)]
    pub beta: f64,
    pub rng_seed: u64,
}

fn default_min_successes() -> u64 {
    30
}

fn default_max_trials() -> u64 {
    1 << 26
}

impl ExperimentConfig {
    pub fn new(mac: MacParams, r: u32, trials: u64, rng_seed: u64) -> Self {
        Self {
            lambda_bits: 128,
            mac,
            r,
            trials,
            min_successes: default_min_successes(),
            max_trials: default_max_trials(),
            query_budget: None,
            beta: 0.0,
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.mac.segments();
        if self.trials == 0 || self.max_trials < self.trials {
            return param("trials must be at least 1 and at most max_trials");
        }
        if !(1..=n).contains(&self.r) {
            return param(format!("r = {} outside 1..={n}", self.r));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return param(format!("beta {} outside [0, 1]", self.beta));
        }
        if self.lambda_bits == 0 || !self.lambda_bits.is_multiple_of(8) || self.lambda_bits > 128 {
            return param("lambda_bits must be a multiple of 8 in 8..=128");
        }
        if self.mac.total_bits() > TOY_MAX_MAC_BITS {
            return param(format!(
                "L = {} bits is too large to measure forgery rates; use a toy MAC with L <= {TOY_MAX_MAC_BITS} (e.g. l = 2, n = 4)",
                self.mac.total_bits()
            ));
        }
        Ok(())
    }

    /// `(forgery length, target counter)`.
    fn layout(&self, kind: SchemeKind) -> (u32, u32) {
        let n = self.mac.segments();
        match kind {
            SchemeKind::CuMacS => (2 * n - 1, 2 * n - self.r),
            _ => (n, n - self.r + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub scheme: SchemeKind,
    pub adversary: Adversary,
    pub r: u32,
    pub beta: f64,
    pub trials: u64,
    /// Valid, fresh forgeries.
    pub successes: u64,
    /// Valid forgeries discarded because the target was queried.
    pub rejected: u64,
    /// Trials that ran out of oracle queries.
    pub aborted: u64,
    pub empirical_epsilon: f64,
    /// Bound on the forgery rate when `MacGen` is a random `L`-bit function.
    pub predicted_epsilon: f64,
    /// Forgeries the proof simulator turned into `MacGen` forgeries.
    pub simulator_successes: u64,
    /// `successes / simulator_successes`; the proof predicts `predicted_ratio`.
    pub measured_ratio: Option<f64>,
    pub predicted_ratio: f64,
    pub oracle_queries: u64,
    /// Every `MacGen` evaluation: oracle answers plus simulator queries.
    pub macgen_calls: u64,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl ExperimentResult {
    pub fn simulator_epsilon(&self) -> f64 {
        self.simulator_successes as f64 / self.trials as f64
    }
}

/// Slowdown the proof attributes to the unrecoverable segments.
pub fn predicted_ratio(kind: SchemeKind, mac: &MacParams, r: u32, beta: f64) -> f64 {
    let hidden = (mac.segment_bits() * (mac.segments() - r)) as i32;
    match kind {
        SchemeKind::CuMacS => 1.0 / ((1.0 - beta) + beta * 2f64.powi(-hidden)),
        _ => 2f64.powi(hidden),
    }
}

/// Forgery-rate bound with `ε = 2^-L` for an ideal `MacGen`.
pub fn predicted_epsilon(kind: SchemeKind, mac: &MacParams, r: u32, beta: f64) -> f64 {
    predicted_ratio(kind, mac, r, beta) * 2f64.powi(-(mac.total_bits() as i32))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Tally {
    trials: u64,
    successes: u64,
    rejected: u64,
    aborted: u64,
    simulator_successes: u64,
    oracle_queries: u64,
    macgen_calls: u64,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            trials: self.trials + o.trials,
            successes: self.successes + o.successes,
            rejected: self.rejected + o.rejected,
            aborted: self.aborted + o.aborted,
            simulator_successes: self.simulator_successes + o.simulator_successes,
            oracle_queries: self.oracle_queries + o.oracle_queries,
            macgen_calls: self.macgen_calls + o.macgen_calls,
        }
    }
}

/// The speculator used in CuMAC/S experiments: always predicts 0, so the
/// adversary controls `β` through how often the target is 0.
pub fn zero_speculator() -> SpeculationConfig {
    SpeculationConfig::new(1, 0, vec![0], 0).expect("valid")
}

/// Runs the uf-cma-r experiment `trials` times (more if fewer than
/// `min_successes` forgeries or simulator forgeries occur), one fresh key
/// per trial. Trial `t` draws from stream `t` of the seeded generator, so
/// results do not depend on `exec`.
pub fn run_ufcma_r(
    config: &ExperimentConfig,
    kind: SchemeKind,
    adversary: Adversary,
    exec: Exec,
) -> Result<ExperimentResult> {
    config.validate()?;
    if !matches!(kind, SchemeKind::CuMac | SchemeKind::CuMacS) {
        return param(format!(
            "uf-cma-r experiments are defined for CuMAC and CuMAC/S, not {kind}"
        ));
    }
    let start = Instant::now();
    let scheme = match kind {
        SchemeKind::CuMacS => SchemeParams::cumacs(config.mac, zero_speculator())?,
        _ => SchemeParams::new(kind, config.mac)?,
    };
    let mut total = Tally::default();
    let mut target = config.trials;
    loop {
        let done = total.trials;
        let batch = exec.fold_indexed(
            target - done,
            Ok(Tally::default()),
            |t| run_trial(config, &scheme, adversary, done + t),
            |a: Result<Tally>, b: Result<Tally>| Ok(a?.merge(b?)),
        )?;
        total = total.merge(batch);
        let enough = (total.successes >= config.min_successes && total.simulator_successes >= config.min_successes)
            || total.rejected >= config.min_successes
            || total.aborted >= config.min_successes;
        if enough || total.trials >= config.max_trials {
            break;
        }
        target = (target * 2).min(config.max_trials);
    }

    Ok(ExperimentResult {
        scheme: kind,
        adversary,
        r: config.r,
        beta: config.beta,
        trials: total.trials,
        successes: total.successes,
        rejected: total.rejected,
        aborted: total.aborted,
        empirical_epsilon: total.successes as f64 / total.trials as f64,
        predicted_epsilon: predicted_epsilon(kind, &config.mac, config.r, config.beta),
        simulator_successes: total.simulator_successes,
        measured_ratio: (total.simulator_successes > 0)
            .then(|| total.successes as f64 / total.simulator_successes as f64),
        predicted_ratio: predicted_ratio(kind, &config.mac, config.r, config.beta),
        oracle_queries: total.oracle_queries,
        macgen_calls: total.macgen_calls,
        wall_time: start.elapsed(),
    })
}

fn byte_message(v: i8) -> Message {
    Message::from_value_width(v as i64, 1).expect("width 1")
}

fn nonzero(rng: &mut ChaCha8Rng) -> i8 {
    loop {
        let v: i8 = rng.gen();
        if v != 0 {
            return v;
        }
    }
}

fn run_trial(config: &ExperimentConfig, scheme: &SchemeParams, adversary: Adversary, trial: u64) -> Result<Tally> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    rng.set_stream(trial);
    let key = key_from_rng(config.lambda_bits, &mut rng);
    let mac = Mac::new(&key, config.mac)?;
    let params = config.mac;
    let l = params.segment_bits();
    let spec = scheme.speculation();
    let (len, i_star) = config.layout(scheme.kind());
    let mut tally = Tally {
        trials: 1,
        ..Tally::default()
    };

    // the messages the adversary will claim; CuMAC/S targets match the
    // zero speculation with probability 1-β
    let mut values: Vec<i8> = (0..len).map(|_| nonzero(&mut rng)).collect();
    if spec.is_some() && rng.gen::<f64>() >= config.beta {
        values[i_star as usize - 1] = 0;
    }
    let messages: Vec<Message> = values.iter().map(|&v| byte_message(v)).collect();

    // oracle queries: the prefix, or the whole transcript for Replay
    let asked = match adversary {
        Adversary::Replay => len,
        _ => i_star - 1,
    };
    let budget = config.query_budget.unwrap_or(2 * len);
    if asked > budget {
        tally.aborted = 1;
        return Ok(tally);
    }
    let mut oracle = CumulativeState::new(params, MatrixRole::SegTx, spec.cloned());
    let mut queried = BTreeSet::new();
    let mut tags = Vec::with_capacity(len as usize);
    for c in 1..=asked {
        let out = oracle.step(&mac, c, &messages[c as usize - 1])?;
        tally.macgen_calls += out.macs_computed as u64;
        queried.insert((c, values[c as usize - 1]));
        tags.push(out.tag);
    }
    tally.oracle_queries = asked as u64;

    match adversary {
        Adversary::Replay => {}
        Adversary::RandomGuess => {
            for _ in i_star..=len {
                tags.push(Tag::new(rng.gen::<u128>() & low_mask(l), l)?);
            }
        }
        Adversary::RecoveryAssisted => {
            // pad with zero tags: recovery then returns the mask itself
            tags.resize(len as usize, Tag::new(0, l)?);
            let (view, calls) = build_view(&mac, spec, &messages, &tags, i_star)?;
            tally.macgen_calls += calls;
            for c in i_star..=len {
                let k = c - i_star + 1;
                let mask = match spec {
                    None => recover_segment_cumac(&view, &params, i_star, k)?.value,
                    Some(_) => match recover_segment_cumacs(&view, &params, i_star, k)? {
                        Recovered::Segment(s) => s.value,
                        Recovered::Miss => unreachable!("forward tags exist"),
                    },
                };
                let guess = rng.gen::<u128>() & low_mask(l);
                tags[c as usize - 1] = Tag::new(mask ^ guess, l)?;
            }
        }
    }

    // challenger: TagVerify every pair, then check freshness
    let mut rx = Receiver::new(scheme.clone(), &key)?;
    let mut valid = true;
    for (c, (m, t)) in (1..).zip(messages.iter().zip(&tags)) {
        let pkt = Packet {
            counter: c,
            message: m.clone(),
            tag: *t,
            is_trailing_tag: false,
        };
        valid &= rx.verify(&pkt)?.verdict == Verdict::Valid;
    }
    if !valid {
        return Ok(tally);
    }
    if queried.contains(&(i_star, values[i_star as usize - 1])) {
        tally.rejected = 1;
        return Ok(tally);
    }
    tally.successes = 1;

    // simulator: turn the forgery into a MacGen forgery on the target
    let (view, calls) = build_view(&mac, spec, &messages, &tags, i_star)?;
    tally.macgen_calls += calls;
    let target = match spec {
        None => message_mac(&mac, i_star, &messages[i_star as usize - 1]),
        Some(cfg) => mac.compute(i_star, &value_input(1, cfg.masked(values[i_star as usize - 1] as i64))),
    };
    let recovered = simulate(&view, &params, i_star, spec.is_some(), &mut rng)?;
    if recovered == target.value() {
        tally.simulator_successes = 1;
    }
    Ok(tally)
}

/// The proof's simulator: recover what the tags reveal, guess the rest.
fn simulate(
    view: &RecoveryView,
    params: &MacParams,
    i_star: u32,
    speculative: bool,
    rng: &mut ChaCha8Rng,
) -> Result<u128> {
    let l = params.segment_bits();
    let mut sigma = 0u128;
    for k in 1..=params.segments() {
        let seg = if speculative {
            match recover_segment_cumacs(view, params, i_star, k)? {
                Recovered::Segment(s) => s.value,
                Recovered::Miss => rng.gen::<u128>() & low_mask(l),
            }
        } else if view.tags.contains_key(&(i_star + k - 1)) {
            recover_segment_cumac(view, params, i_star, k)?.value
        } else {
            rng.gen::<u128>() & low_mask(l)
        };
        sigma = (sigma << l) | seg;
    }
    Ok(sigma)
}
