#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use serde_json::Value;

pub struct Run {
    pub output: Output,
    pub elapsed: Duration,
    pub out_dir: PathBuf,
}

impl Run {
    pub fn code(&self) -> Option<i32> {
        self.output.status.code()
    }

    pub fn stderr(&self) -> String {
        String::from_utf8_lossy(&self.output.stderr).into_owned()
    }

    /// Rows of `table` from the JSON summary of `command`.
    pub fn rows(&self, command: &str, table: &str) -> Vec<Value> {
        let text = fs::read_to_string(self.out_dir.join(format!("{command}.json"))).expect("summary written");
        let v: Value = serde_json::from_str(&text).unwrap();
        v["rows"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|r| r["table"] == table)
            .cloned()
            .collect()
    }
}

/// Runs `cumac <command>` with `config` (if any) written next to the
/// report directory.
pub fn cumac(dir: &Path, command: &str, config: Option<&Value>, extra: &[&str]) -> Run {
    let out_dir = dir.join("reports");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cumac"));
    cmd.arg(command).arg("--out").arg(&out_dir).args(extra);
    if let Some(c) = config {
        let path = dir.join("config.json");
        fs::write(&path, serde_json::to_vec(c).unwrap()).unwrap();
        cmd.arg("--config").arg(path);
    }
    let start = Instant::now();
    let output = cmd.output().expect("binary runs");
    Run {
        output,
        elapsed: start.elapsed(),
        out_dir,
    }
}

pub fn num(row: &Value, key: &str) -> f64 {
    row[key].as_f64().unwrap_or_else(|| panic!("{key} missing in {row}"))
}
