use cumac::parallel::Exec;
use cumac::schemes::{expected_strength_curve, strength_delay_curve, strength_profile, SchemeKind, SpeculationCase};
use cumac::security::{run_ufcma_r, ExperimentConfig};
use cumac::simkit::{
    analytic_processing_rate, bus_load, service_life_days, supported_messages, sweep_drop_rates, ChannelConfig,
};
use cumac::speculation::{acf, fit_ar, pacf, speculation_error_rate, SpeculationConfig, Trace};
use serde::Serialize;

use crate::config::RunConfig;
use crate::report::{Cell, Table};
use crate::CliError;

fn runtime(e: cumac::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

/// The serde name of a unit enum variant.
fn label<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

pub fn simulate(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let (c, schemes) = cfg.simulate()?;
    let source = c.source.message_source(cfg.seed)?;
    let base = ChannelConfig {
        drop_rate: 0.0,
        retransmit: c.retransmit,
        rng_seed: cfg.seed,
        num_messages: c.num_messages,
    };
    let reports = sweep_drop_rates(&schemes, &c.drop_rates, &base, &source, Exec::Parallel).map_err(runtime)?;

    let mut runs = Table::new(
        "simulate",
        &[
            "scheme",
            "drop_rate",
            "retransmit",
            "num_messages",
            "delivered_messages",
            "authenticated_messages",
            "processing_rate",
            "analytic_rate",
        ],
    );
    let mut curves = Table::new(
        "simulate_strength",
        &["scheme", "drop_rate", "delay_packets", "mean_bits"],
    );
    for (r, params) in reports
        .iter()
        .zip(schemes.iter().flat_map(|s| c.drop_rates.iter().map(move |_| s)))
    {
        runs.push(vec![
            r.scheme.name().into(),
            r.drop_rate.into(),
            u32::from(c.retransmit).into(),
            r.num_messages.into(),
            r.delivered_messages.into(),
            r.authenticated_messages.into(),
            r.processing_rate.into(),
            analytic_processing_rate(params, r.drop_rate, c.retransmit).into(),
        ]);
        for &(delay, bits) in &r.strength_vs_delay {
            curves.push(vec![
                r.scheme.name().into(),
                r.drop_rate.into(),
                delay.into(),
                bits.into(),
            ]);
        }
    }
    Ok(vec![runs, curves])
}

pub fn compare(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let (c, schemes) = cfg.compare()?;

    let mut curves = Table::new("strength_delay", &["scheme", "beta", "delay_packets", "bits"]);
    let mut summary = Table::new(
        "comparison",
        &[
            "scheme",
            "beta",
            "tag_bits",
            "extra_packets",
            "real_time_bits",
            "partial_bits",
            "full_bits",
            "full_delay_packets",
        ],
    );
    for p in &schemes {
        let n = p.mac().segments();
        let strength = |r| strength_profile(p, r, SpeculationCase::Correct).map_err(runtime);
        let curve = strength_delay_curve(p, SpeculationCase::Correct);
        let full_delay = curve.iter().find(|(_, b)| *b == p.max_bits()).map(|(d, _)| *d);
        let beta = (p.kind() == SchemeKind::CuMacS).then_some(0.0);
        summary.push(vec![
            p.kind().name().into(),
            beta.into(),
            p.tag_bits().into(),
            p.extra_packets().into(),
            strength(1)?.into(),
            strength(c.partial_r)?.into(),
            strength(n)?.into(),
            full_delay.into(),
        ]);
        if p.kind() == SchemeKind::CuMacS {
            for &beta in &c.cumacs_betas {
                for (delay, bits) in expected_strength_curve(p, beta).map_err(runtime)? {
                    curves.push(vec![p.kind().name().into(), beta.into(), delay.into(), bits.into()]);
                }
            }
        } else {
            for (delay, bits) in curve {
                curves.push(vec![p.kind().name().into(), Cell::Empty, delay.into(), bits.into()]);
            }
        }
    }

    let reports = if c.drop_rates.is_empty() {
        Vec::new()
    } else {
        let source = c.source.message_source(cfg.seed)?;
        let base = ChannelConfig {
            drop_rate: 0.0,
            retransmit: false,
            rng_seed: cfg.seed,
            num_messages: c.num_messages,
        };
        sweep_drop_rates(&schemes, &c.drop_rates, &base, &source, Exec::Parallel).map_err(runtime)?
    };
    let mut rates = Table::new(
        "processing_rate",
        &["scheme", "drop_rate", "processing_rate", "analytic_rate"],
    );
    for (r, p) in reports
        .iter()
        .zip(schemes.iter().flat_map(|s| c.drop_rates.iter().map(move |_| s)))
    {
        rates.push(vec![
            r.scheme.name().into(),
            r.drop_rate.into(),
            r.processing_rate.into(),
            analytic_processing_rate(p, r.drop_rate, false).into(),
        ]);
    }
    Ok(vec![curves, rates, summary])
}

pub fn busload(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let c = cfg.busload()?;
    let mut curve = Table::new(
        "busload_curve",
        &["configuration", "tag_bits", "extra_packets", "num_messages", "load"],
    );
    let mut supported = Table::new(
        "busload_supported",
        &[
            "configuration",
            "tag_bits",
            "extra_packets",
            "load_cap",
            "supported_messages",
        ],
    );
    for b in &c.configurations {
        for n in 0..=c.max_messages {
            let load = bus_load(&c.workload, b.tag_bits, b.extra_packets, n).map_err(runtime)?;
            curve.push(vec![
                b.name.as_str().into(),
                b.tag_bits.into(),
                b.extra_packets.into(),
                n.into(),
                load.into(),
            ]);
        }
        for &cap in &c.load_caps {
            let k = supported_messages(&c.workload, b.tag_bits, b.extra_packets, cap).map_err(runtime)?;
            supported.push(vec![
                b.name.as_str().into(),
                b.tag_bits.into(),
                b.extra_packets.into(),
                cap.into(),
                k.into(),
            ]);
        }
    }
    Ok(vec![curve, supported])
}

pub fn energy(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let c = cfg.energy()?;
    let mut t = Table::new(
        "energy",
        &["message_bits", "tag_bits", "days", "years", "reduction_pct"],
    );
    for &m in &c.message_bits {
        let bench = service_life_days(m, 0, &c.params).map_err(runtime)?;
        for &tag in &c.tag_bits {
            let days = service_life_days(m, tag, &c.params).map_err(runtime)?;
            t.push(vec![
                m.into(),
                tag.into(),
                days.into(),
                (days / 365.25).into(),
                (100.0 * (1.0 - days / bench)).into(),
            ]);
        }
    }
    Ok(vec![t])
}

fn differenced(trace: &Trace, d: u32) -> Result<Trace, CliError> {
    let mut v = trace.values.clone();
    for _ in 0..d {
        v = v.windows(2).map(|w| w[1].wrapping_sub(w[0])).collect();
    }
    Trace::new(format!("{}_diff{d}", trace.name), v, trace.period_ms).map_err(runtime)
}

pub fn speculate(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let c = cfg.speculate()?;
    let trace = c.source.trace(cfg.seed)?;
    let fit = fit_ar(&trace, c.p, c.d, c.train_fraction).map_err(runtime)?;

    let mut model = Table::new(
        "speculate_model",
        &[
            "trace",
            "samples",
            "p",
            "d",
            "persistence_fallback",
            "lag",
            "coefficient",
            "coefficient_q16",
        ],
    );
    for (i, (&q, f)) in fit.config.coeffs.iter().zip(fit.config.coeffs_f64()).enumerate() {
        model.push(vec![
            trace.name.as_str().into(),
            trace.len().into(),
            fit.config.p.into(),
            fit.config.d.into(),
            u32::from(fit.persistence_fallback).into(),
            (i + 1).into(),
            f.into(),
            q.into(),
        ]);
    }

    let mut ser = Table::new("speculate_ser", &["model", "lsb_ignore", "ser"]);
    let candidates = [
        ("fitted", fit.config.clone()),
        ("persistence", SpeculationConfig::persistence()),
    ];
    for (name, base) in &candidates {
        for &k in &c.lsb_ignore {
            let cfg_k = SpeculationConfig {
                lsb_ignore: k,
                ..base.clone()
            };
            let rate = speculation_error_rate(&trace, &cfg_k, c.train_fraction).map_err(runtime)?;
            ser.push(vec![(*name).into(), k.into(), rate.into()]);
        }
    }

    let series = differenced(&trace, c.d)?;
    let a = acf(&series, c.max_lag).map_err(runtime)?;
    let p = pacf(&series, c.max_lag).map_err(runtime)?;
    let band = 2.0 / (series.len() as f64).sqrt();
    let mut diag = Table::new("speculate_acf", &["series", "lag", "acf", "pacf", "band"]);
    for lag in 1..=c.max_lag {
        diag.push(vec![
            series.name.as_str().into(),
            lag.into(),
            a[lag].into(),
            p[lag - 1].into(),
            band.into(),
        ]);
    }
    Ok(vec![model, ser, diag])
}

pub fn attack(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let c = cfg.attack()?;
    let mut t = Table::new(
        "attack",
        &[
            "scheme",
            "adversary",
            "r",
            "beta",
            "trials",
            "successes",
            "rejected",
            "aborted",
            "empirical_epsilon",
            "predicted_epsilon",
            "simulator_successes",
            "simulator_epsilon",
            "measured_ratio",
            "predicted_ratio",
            "oracle_queries",
            "macgen_calls",
        ],
    );
    for &kind in &c.schemes {
        // β only shapes CuMAC/S experiments
        let betas: &[f64] = if kind == SchemeKind::CuMacS {
            &c.beta_values
        } else {
            &[0.0]
        };
        for &adversary in &c.adversaries {
            for &r in &c.r_values {
                for &beta in betas {
                    let e = ExperimentConfig {
                        lambda_bits: c.lambda_bits,
                        mac: c.mac,
                        r,
                        trials: c.trials,
                        min_successes: c.min_successes,
                        max_trials: c.max_trials,
                        query_budget: c.query_budget,
                        beta,
                        rng_seed: cfg.seed,
                    };
                    e.validate().map_err(|err| CliError::Config(format!("attack: {err}")))?;
                    let res = run_ufcma_r(&e, kind, adversary, Exec::Parallel).map_err(runtime)?;
                    t.push(vec![
                        kind.name().into(),
                        label(&adversary).into(),
                        r.into(),
                        beta.into(),
                        res.trials.into(),
                        res.successes.into(),
                        res.rejected.into(),
                        res.aborted.into(),
                        res.empirical_epsilon.into(),
                        res.predicted_epsilon.into(),
                        res.simulator_successes.into(),
                        res.simulator_epsilon().into(),
                        res.measured_ratio.into(),
                        res.predicted_ratio.into(),
                        res.oracle_queries.into(),
                        res.macgen_calls.into(),
                    ]);
                }
            }
        }
    }
    Ok(vec![t])
}
