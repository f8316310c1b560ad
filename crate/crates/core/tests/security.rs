use std::time::Duration;

use cumac::mac::{key_gen, mac_gen, Mac, MacParams, SecretKey, Tag};
use cumac::parallel::Exec;
use cumac::schemes::{Delivery, Message, SchemeKind, SchemeParams, Sender};
use cumac::security::{
    build_view, recover_segment_cumac, recover_segment_cumacs, run_ufcma_r, zero_speculator, Adversary,
    ExperimentConfig, ExperimentResult, Recovered,
};
use cumac::speculation::SpeculationConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn toy() -> MacParams {
    MacParams::new(8, 4, 2).unwrap()
}

/// Honest sender transcript: one tag per message, counters 1..
fn transcript(params: SchemeParams, key: &SecretKey, messages: &[Message]) -> Vec<Tag> {
    let mut tx = Sender::new(params, key, Delivery::NoRetransmit).unwrap();
    messages
        .iter()
        .map(|m| {
            let pkt = tx.tag_gen(m).unwrap().remove(0);
            tx.ack(pkt.counter, true).unwrap();
            pkt.tag
        })
        .collect()
}

// Ground truth computed straight from MacGen with the documented framing.
fn sigma(key: &SecretKey, params: &MacParams, c: u32, m: &Message) -> u128 {
    let mut input = { m.bit_len() }.to_be_bytes().to_vec();
    input.extend_from_slice(m.data());
    mac_gen(key, c, &input, params).unwrap().value()
}

fn sigma_value(key: &SecretKey, params: &MacParams, c: u32, v: i64) -> u128 {
    let mut input = vec![1u8];
    input.extend_from_slice(&v.to_be_bytes());
    mac_gen(key, c, &input, params).unwrap().value()
}

fn segment(sigma: u128, params: &MacParams, k: u32) -> u128 {
    let l = params.segment_bits();
    (sigma >> (params.total_bits() - k * l)) & ((1 << l) - 1)
}

fn bytes(rng: &mut ChaCha8Rng, len: usize) -> Vec<Message> {
    (0..len)
        .map(|_| Message::from_value_width(rng.gen::<i8>() as i64, 1).unwrap())
        .collect()
}

#[test]
fn cumac_recovery_is_sound_on_every_segment_of_a_full_transcript() {
    for params in [MacParams::new(128, 8, 16).unwrap(), toy()] {
        let n = params.segments();
        let key = key_gen(128, Some(21)).unwrap();
        let mac = Mac::new(&key, params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let msgs = bytes(&mut rng, 3 * n as usize);
        let tags = transcript(SchemeParams::new(SchemeKind::CuMac, params).unwrap(), &key, &msgs);
        for i_star in 1..=3 * n {
            let (view, _) = build_view(&mac, None, &msgs, &tags, i_star).unwrap();
            assert!(!view.macs.contains_key(&i_star));
            let truth = sigma(&key, &params, i_star, &msgs[i_star as usize - 1]);
            for k in 1..=n {
                let got = recover_segment_cumac(&view, &params, i_star, k);
                if i_star + k - 1 <= 3 * n {
                    assert_eq!(got.unwrap().value, segment(truth, &params, k), "i*={i_star} k={k}");
                } else {
                    assert!(got.is_err());
                }
            }
        }
    }
}

#[test]
fn cumac_recovery_never_needs_the_target_mac() {
    let params = toy();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let key = key_gen(128, Some(rng.gen())).unwrap();
        let mac = Mac::new(&key, params).unwrap();
        let msgs = bytes(&mut rng, 8);
        let tags = transcript(SchemeParams::new(SchemeKind::CuMac, params).unwrap(), &key, &msgs);
        let i_star = rng.gen_range(1..=5);
        let k = rng.gen_range(1..=4);
        let (view, _) = build_view(&mac, None, &msgs, &tags, i_star).unwrap();
        let got = recover_segment_cumac(&view, &params, i_star, k).unwrap();
        assert_eq!(
            got.value,
            segment(sigma(&key, &params, i_star, &msgs[i_star as usize - 1]), &params, k)
        );
    }
}

#[test]
fn single_segment_recovery_is_the_tag() {
    let params = MacParams::new(16, 1, 16).unwrap();
    let key = key_gen(128, Some(3)).unwrap();
    let mac = Mac::new(&key, params).unwrap();
    let msgs = bytes(&mut ChaCha8Rng::seed_from_u64(3), 5);
    let tags = transcript(SchemeParams::new(SchemeKind::CuMac, params).unwrap(), &key, &msgs);
    for i in 1..=5u32 {
        let (view, _) = build_view(&mac, None, &msgs, &tags, i).unwrap();
        assert_eq!(
            recover_segment_cumac(&view, &params, i, 1).unwrap().value,
            tags[i as usize - 1].value
        );
    }
}

#[test]
fn missing_oracle_data_is_an_error() {
    let params = toy();
    let key = key_gen(128, Some(4)).unwrap();
    let mac = Mac::new(&key, params).unwrap();
    let msgs = bytes(&mut ChaCha8Rng::seed_from_u64(4), 8);
    let tags = transcript(SchemeParams::new(SchemeKind::CuMac, params).unwrap(), &key, &msgs);
    let (mut view, _) = build_view(&mac, None, &msgs, &tags, 4).unwrap();
    view.macs.remove(&3);
    assert!(recover_segment_cumac(&view, &params, 4, 2).is_err());
    view.tags.remove(&4);
    assert!(recover_segment_cumac(&view, &params, 4, 1).is_err());
}

fn check_cumacs_transcript(spec: SpeculationConfig, values: &[i64], seed: u64) -> (u32, u32) {
    let params = toy();
    let n = params.segments();
    let key = key_gen(128, Some(seed)).unwrap();
    let mac = Mac::new(&key, params).unwrap();
    let msgs: Vec<Message> = values
        .iter()
        .map(|&v| Message::from_value_width(v, 1).unwrap())
        .collect();
    let tags = transcript(SchemeParams::cumacs(params, spec.clone()).unwrap(), &key, &msgs);
    let len = msgs.len() as u32;
    let (mut hits, mut misses) = (0, 0);
    for i_star in 2..=len {
        let (view, _) = build_view(&mac, Some(&spec), &msgs, &tags, i_star).unwrap();
        assert!(!view.macs.contains_key(&i_star) && !view.spec_macs.contains_key(&i_star));
        let truth = sigma_value(&key, &params, i_star, values[i_star as usize - 1]);
        for k in 1..=n {
            let forward = i_star + k - 1 <= len;
            match recover_segment_cumacs(&view, &params, i_star, k) {
                Ok(Recovered::Segment(s)) => {
                    assert_eq!(s.value, segment(truth, &params, k), "i*={i_star} k={k}");
                    hits += u32::from(!forward);
                }
                Ok(Recovered::Miss) => {
                    assert!(!forward);
                    misses += 1;
                }
                Err(_) => assert!(!forward && i_star < k),
            }
        }
    }
    (hits, misses)
}

#[test]
fn cumacs_recovery_exact_when_speculation_is_perfect() {
    // drift speculation on a ramp is exact once two values are known
    let ramp: Vec<i64> = (0..12).map(|i| 3 * i - 20).collect();
    let (hits, misses) = check_cumacs_transcript(SpeculationConfig::drift(), &ramp, 5);
    assert!(hits > 0);
    assert_eq!(misses, 0);
    let zeros = vec![0; 12];
    let (hits, misses) = check_cumacs_transcript(zero_speculator(), &zeros, 6);
    assert!(hits > 0);
    assert_eq!(misses, 0);
}

#[test]
fn cumacs_backward_recovery_misses_when_every_speculation_fails() {
    let values: Vec<i64> = (1..=12).map(|i| if i % 2 == 0 { i } else { -i }).collect();
    let (hits, misses) = check_cumacs_transcript(zero_speculator(), &values, 7);
    assert_eq!(hits, 0);
    assert!(misses > 0);
}

#[test]
fn cumacs_backward_recovery_tracks_speculation_error_rate() {
    let params = toy();
    let n = params.segments();
    let len = 2 * n - 1;
    let i_star = len;
    let spec = zero_speculator();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let trials = 10_000;
    let mut recovered = vec![0u32; n as usize + 1];
    for _ in 0..trials {
        let key = key_gen(128, Some(rng.gen())).unwrap();
        let mac = Mac::new(&key, params).unwrap();
        let mut values: Vec<i64> = (0..len).map(|_| rng.gen_range(1..=100)).collect();
        if rng.gen::<bool>() {
            values[i_star as usize - 1] = 0;
        }
        let msgs: Vec<Message> = values
            .iter()
            .map(|&v| Message::from_value_width(v, 1).unwrap())
            .collect();
        let tags = transcript(SchemeParams::cumacs(params, spec.clone()).unwrap(), &key, &msgs);
        let (view, _) = build_view(&mac, Some(&spec), &msgs, &tags, i_star).unwrap();
        let truth = sigma_value(&key, &params, i_star, values[i_star as usize - 1]);
        for k in 2..=n {
            if let Recovered::Segment(s) = recover_segment_cumacs(&view, &params, i_star, k).unwrap() {
                assert_eq!(s.value, segment(truth, &params, k));
                recovered[k as usize] += 1;
            }
        }
    }
    for (k, &hits) in recovered.iter().enumerate().skip(2) {
        let rate = hits as f64 / trials as f64;
        assert!((rate - 0.5).abs() <= 0.02, "k={k} rate {rate}");
    }
}

fn experiment(r: u32, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        min_successes: 200,
        ..ExperimentConfig::new(toy(), r, 4096, seed)
    }
}

fn without_time(mut r: ExperimentResult) -> ExperimentResult {
    r.wall_time = Duration::ZERO;
    r
}

fn three_sigma(p: f64, trials: u64) -> f64 {
    3.0 * (p * (1.0 - p) / trials as f64).sqrt()
}

#[test]
fn random_guess_real_time_rate_is_one_segment() {
    let res = run_ufcma_r(
        &experiment(1, 30),
        SchemeKind::CuMac,
        Adversary::RandomGuess,
        Exec::Parallel,
    )
    .unwrap();
    assert!(
        (res.empirical_epsilon - 0.25).abs() <= three_sigma(0.25, res.trials),
        "{res:?}"
    );
    assert_eq!(res.empirical_epsilon, res.successes as f64 / res.trials as f64);
}

#[test]
fn recovery_assisted_rate_falls_with_r() {
    let mut last = 1.0;
    for r in 1..=4 {
        let res = run_ufcma_r(
            &experiment(r, 31),
            SchemeKind::CuMac,
            Adversary::RecoveryAssisted,
            Exec::Parallel,
        )
        .unwrap();
        let want = 2f64.powi(-2 * r as i32);
        assert!(
            (res.empirical_epsilon - want).abs() <= three_sigma(want, res.trials),
            "r={r} {res:?}"
        );
        assert!(res.empirical_epsilon <= last);
        last = res.empirical_epsilon;
    }
}

#[test]
fn full_accumulation_simulator_converts_every_forgery() {
    let res = run_ufcma_r(
        &experiment(4, 32),
        SchemeKind::CuMac,
        Adversary::RecoveryAssisted,
        Exec::Parallel,
    )
    .unwrap();
    assert!(res.successes >= 200);
    assert_eq!(res.simulator_successes, res.successes);
    assert_eq!(res.predicted_ratio, 1.0);
}

#[test]
fn cumac_simulator_loses_the_unrecoverable_segments() {
    let res = run_ufcma_r(
        &experiment(2, 33),
        SchemeKind::CuMac,
        Adversary::RecoveryAssisted,
        Exec::Parallel,
    )
    .unwrap();
    assert_eq!(res.predicted_ratio, 16.0);
    let ratio = res.measured_ratio.unwrap();
    assert!((ratio / 16.0 - 1.0).abs() <= 0.25, "{res:?}");
}

#[test]
fn cumacs_ratio_follows_speculation_error_rate() {
    for (beta, want) in [(0.0, 1.0), (0.5, 1.0 / (0.5 + 0.5 / 64.0)), (1.0, 64.0)] {
        let cfg = ExperimentConfig {
            beta,
            min_successes: 400,
            ..ExperimentConfig::new(toy(), 1, 4096, 34)
        };
        let res = run_ufcma_r(&cfg, SchemeKind::CuMacS, Adversary::RecoveryAssisted, Exec::Parallel).unwrap();
        assert!((res.predicted_ratio - want).abs() < 1e-9);
        let ratio = res.measured_ratio.unwrap();
        assert!((ratio / want - 1.0).abs() <= 0.15, "β={beta} {res:?}");
    }
}

#[test]
fn replayed_targets_are_rejected() {
    for kind in [SchemeKind::CuMac, SchemeKind::CuMacS] {
        let cfg = ExperimentConfig {
            min_successes: 50,
            ..ExperimentConfig::new(toy(), 2, 100, 35)
        };
        let res = run_ufcma_r(&cfg, kind, Adversary::Replay, Exec::Parallel).unwrap();
        assert_eq!(res.successes, 0);
        assert_eq!(res.rejected, res.trials);
    }
}

#[test]
fn exhausted_query_budget_aborts() {
    let cfg = ExperimentConfig {
        query_budget: Some(1),
        min_successes: 0,
        ..ExperimentConfig::new(toy(), 1, 100, 36)
    };
    let res = run_ufcma_r(&cfg, SchemeKind::CuMac, Adversary::RandomGuess, Exec::Parallel).unwrap();
    assert_eq!((res.aborted, res.successes), (100, 0));
}

#[test]
fn experiments_are_seeded_and_mode_independent() {
    let cfg = ExperimentConfig {
        beta: 0.5,
        ..experiment(2, 37)
    };
    for kind in [SchemeKind::CuMac, SchemeKind::CuMacS] {
        let a = run_ufcma_r(&cfg, kind, Adversary::RecoveryAssisted, Exec::Sequential).unwrap();
        let b = run_ufcma_r(&cfg, kind, Adversary::RecoveryAssisted, Exec::Parallel).unwrap();
        assert_eq!(without_time(a), without_time(b));
    }
}

#[test]
fn rejects_non_toy_and_unsupported_setups() {
    let big = ExperimentConfig::new(MacParams::new(128, 8, 16).unwrap(), 1, 10, 0);
    assert!(run_ufcma_r(&big, SchemeKind::CuMac, Adversary::RandomGuess, Exec::Parallel).is_err());
    let bad_r = ExperimentConfig::new(toy(), 5, 10, 0);
    assert!(run_ufcma_r(&bad_r, SchemeKind::CuMac, Adversary::RandomGuess, Exec::Parallel).is_err());
    let ok = ExperimentConfig::new(toy(), 1, 10, 0);
    assert!(run_ufcma_r(&ok, SchemeKind::Aggregate, Adversary::RandomGuess, Exec::Parallel).is_err());
}
