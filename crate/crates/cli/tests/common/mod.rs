#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

pub fn wdiff() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wdiff"))
}

pub fn exec_path() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_wdiff-exec"))
}

pub fn self_dir() -> PathBuf {
    exec_path().parent().unwrap().to_path_buf()
}

pub fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn seed_dir() -> PathBuf {
    repo().join("seeds/bin")
}

pub fn panel(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/panels").join(name)
}

pub fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "{:?} failed: {}\n{}",
        cmd,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn results(out: &Path) -> Vec<Value> {
    std::fs::read_to_string(out.join("results.log"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

/// The deterministic part of a result line: raw process text can carry
/// thread ids and is left out.
pub fn essence(v: &Value) -> Value {
    let outcomes: Vec<Value> = v["outcomes"]
        .as_array()
        .map(|a| {
            a.iter()
                .map(|o| serde_json::json!([o["runtime"], o["phase"], o["trap"], o["rendered"]]))
                .collect()
        })
        .unwrap_or_default();
    serde_json::json!([v["seq"], v["seed"], v["binary_id"], v["verdict"], v["suspects"], v["tie"], outcomes])
}
