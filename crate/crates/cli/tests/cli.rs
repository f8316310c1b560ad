mod common;

use common::cumac;
use serde_json::json;
use tempfile::tempdir;

#[test]
fn every_command_runs_on_defaults_with_small_overrides() {
    let cfg = json!({
        "simulate": { "num_messages": 2000 },
        "compare": { "num_messages": 500, "drop_rates": [0.0, 0.3] },
        "speculate": { "source": { "torque": { "length": 2000 } } },
        "attack": { "trials": 2000, "min_successes": 0 }
    });
    for command in ["simulate", "compare", "busload", "energy", "speculate", "attack"] {
        let dir = tempdir().unwrap();
        let run = cumac(dir.path(), command, Some(&cfg), &[]);
        assert_eq!(run.code(), Some(0), "{command}: {}", run.stderr());
        assert!(run.out_dir.join(format!("{command}.json")).is_file());
    }
}

#[test]
fn json_format_writes_only_the_summary() {
    let dir = tempdir().unwrap();
    let run = cumac(dir.path(), "energy", None, &["--format", "json", "--seed", "9"]);
    assert_eq!(run.code(), Some(0));
    let files: Vec<_> = std::fs::read_dir(&run.out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(files, ["energy.json"]);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run.out_dir.join("energy.json")).unwrap()).unwrap();
    assert_eq!(v["seed"], 9);
    assert_eq!(v["config_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn csv_tables_match_the_summary_rows() {
    let dir = tempdir().unwrap();
    let run = cumac(dir.path(), "busload", None, &[]);
    assert_eq!(run.code(), Some(0));
    let text = std::fs::read_to_string(run.out_dir.join("busload_supported.csv")).unwrap();
    let rows = run.rows("busload", "busload_supported");
    assert_eq!(text.lines().count(), rows.len() + 1);
    assert!(text.starts_with("configuration,tag_bits,extra_packets,load_cap,supported_messages\n"));
}

#[test]
fn digest_tracks_the_command_section_and_seed() {
    let digest = |cfg: serde_json::Value, seed: &str| {
        let dir = tempdir().unwrap();
        let run = cumac(dir.path(), "energy", Some(&cfg), &["--format", "json", "--seed", seed]);
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(run.out_dir.join("energy.json")).unwrap()).unwrap();
        v["config_digest"].as_str().unwrap().to_owned()
    };
    let base = digest(json!({}), "1");
    // other sections do not move the energy digest
    assert_eq!(base, digest(json!({ "busload": { "max_messages": 5 } }), "1"));
    assert_ne!(base, digest(json!({ "energy": { "message_bits": [64] } }), "1"));
    assert_ne!(base, digest(json!({}), "2"));
}

#[test]
fn config_errors_exit_with_two() {
    let cases = [
        ("energy", json!({ "energy": { "tag_bits": [] } })),
        ("compare", json!({ "compare": { "schemes": ["cumac"] } })),
        ("compare", json!({ "compare": { "schemes": ["cumac", "cumac"] } })),
        ("compare", json!({ "compare": { "partial_r": 9 } })),
        ("simulate", json!({ "simulate": { "drop_rates": [1.5] } })),
        ("simulate", json!({ "simulate": { "schemes": ["sha1"] } })),
        (
            "simulate",
            json!({ "simulate": { "retransmit": true, "drop_rates": [1.0] } }),
        ),
        ("simulate", json!({ "simulate": { "turbo": true } })),
        ("busload", json!({ "busload": { "load_caps": [0.0] } })),
        (
            "attack",
            json!({ "attack": { "mac": { "total_bits": 128, "segments": 8, "segment_bits": 16 } } }),
        ),
        (
            "speculate",
            json!({ "speculate": { "source": { "csv": { "path": "/nonexistent/trace.csv" } } } }),
        ),
        ("energy", json!({ "nonsense": 1 })),
    ];
    for (command, cfg) in cases {
        let dir = tempdir().unwrap();
        let run = cumac(dir.path(), command, Some(&cfg), &[]);
        assert_eq!(run.code(), Some(2), "{command} {cfg}: {}", run.stderr());
        assert!(run.stderr().contains("config error"), "{}", run.stderr());
    }
}

#[test]
fn unreadable_config_file_is_a_config_error() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ not json").unwrap();
    let run = cumac(dir.path(), "energy", None, &["--config", path.to_str().unwrap()]);
    assert_eq!(run.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_three() {
    let dir = tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    std::fs::write(&csv, "this is not a trace\n").unwrap();
    let cfg = json!({ "speculate": { "source": { "csv": { "path": csv } } } });
    let run = cumac(dir.path(), "speculate", Some(&cfg), &[]);
    assert_eq!(run.code(), Some(3), "{}", run.stderr());

    // a flat trace has no autocorrelation to report
    let cfg = json!({ "speculate": { "source": { "constant": { "value": 5, "length": 500 } } } });
    let run = cumac(dir.path(), "speculate", Some(&cfg), &[]);
    assert_eq!(run.code(), Some(3), "{}", run.stderr());
}

#[test]
fn defaults_subcommand_prints_a_loadable_config() {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_cumac"))
        .arg("defaults")
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"], 1);
}
