//! Runs binaries on a panel of runtimes and classifies disagreements.

pub mod adapter;
pub mod render;

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use wait_timeout::ChildExt;

use crate::par;
use crate::wasm::ValType;

pub use adapter::{load_panel, parse_panel, self_dir, Adapter, AdapterSpec, PanelFile, TrapClass, TrapRule};
pub use render::{render_results, IntRendering, Signedness};

/// Prefix of probe lines written by instrumented binaries.
pub const PROBE_PREFIX: &str = "##WRT|";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HarnessError {
    #[error("adapter misconfigured: {0}")]
    AdapterMisconfigured(String),
    #[error("{runtime}: {message}")]
    Io { runtime: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Phase {
    CompileOk,
    CompileFail,
    RunOk,
    RunTrap,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuntimeOutcome {
    pub runtime: String,
    pub phase: Phase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trap: Option<TrapClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rendered: Option<String>,
    #[serde(default)]
    pub stdout: String,
    #[serde(default)]
    pub stderr: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exit_code: Option<i32>,
}

impl RuntimeOutcome {
    /// Comparison key for the compile stage.
    fn compile_key(&self) -> String {
        if self.phase == Phase::CompileFail { "compile-fail" } else { "compile-ok" }.into()
    }

    fn run_key(&self) -> String {
        match self.phase {
            Phase::RunTrap => format!("trap:{}", self.trap.unwrap_or(TrapClass::Unknown).name()),
            Phase::CompileFail => "compile-fail".into(),
            _ => "ok".into(),
        }
    }

    fn output_key(&self) -> String {
        self.rendered.clone().unwrap_or_default()
    }
}

/// Captured output of one child process.
pub struct Captured {
    pub stdout: String,
    pub stderr: String,
    pub exit_code: Option<i32>,
    pub timed_out: bool,
}

/// Runs `argv` with a wall-clock limit; the child is killed on timeout.
pub fn run_command(argv: &[String], timeout: Duration) -> std::io::Result<Captured> {
    let mut child = Command::new(&argv[0])
        .args(&argv[1..])
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()?;
    let mut out_pipe = child.stdout.take().unwrap();
    let mut err_pipe = child.stderr.take().unwrap();
    let out_t = std::thread::spawn(move || {
        let mut b = Vec::new();
        let _ = out_pipe.read_to_end(&mut b);
        b
    });
    let err_t = std::thread::spawn(move || {
        let mut b = Vec::new();
        let _ = err_pipe.read_to_end(&mut b);
        b
    });
    let (status, timed_out) = match child.wait_timeout(timeout)? {
        Some(s) => (Some(s), false),
        None => {
            let _ = child.kill();
            (child.wait().ok(), true)
        }
    };
    let stdout = String::from_utf8_lossy(&out_t.join().unwrap_or_default()).into_owned();
    let stderr = String::from_utf8_lossy(&err_t.join().unwrap_or_default()).into_owned();
    Ok(Captured {
        stdout,
        stderr,
        exit_code: status.and_then(|s| s.code()),
        timed_out,
    })
}

/// Stdout with probe lines removed.
pub fn program_output(stdout: &str) -> impl Iterator<Item = &str> {
    stdout.lines().filter(|l| !l.starts_with(PROBE_PREFIX))
}

/// Turns captured process output into an outcome using the adapter's rules.
pub fn interpret(adapter: &Adapter, results: &[ValType], c: Captured) -> RuntimeOutcome {
    let mut o = RuntimeOutcome {
        runtime: adapter.name().to_string(),
        phase: Phase::RunOk,
        trap: None,
        rendered: None,
        exit_code: c.exit_code,
        stdout: String::new(),
        stderr: String::new(),
    };
    if c.timed_out {
        o.phase = Phase::Timeout;
    } else if adapter.is_compile_failure(&c.stderr, &c.stdout) {
        o.phase = Phase::CompileFail;
    } else if c.exit_code == Some(0) {
        let texts: Vec<String> = program_output(&c.stdout)
            .filter_map(|l| adapter.result_re.captures(l).and_then(|m| m.get(1)).map(|m| m.as_str().to_string()))
            .collect();
        match render_results(results, &texts, adapter.spec.signedness) {
            Ok(r) => o.rendered = Some(r),
            Err(e) => {
                // Exit 0 without parseable results: the runtime misbehaved.
                o.phase = Phase::RunTrap;
                o.trap = Some(TrapClass::Unknown);
                o.stderr = format!("result parse: {e}\n");
            }
        }
    } else {
        o.phase = Phase::RunTrap;
        o.trap = Some(adapter.trap_class(&c.stderr, &c.stdout));
    }
    o.stdout = c.stdout;
    o.stderr.push_str(&c.stderr);
    o
}

pub fn run_on_runtime(
    binary: &Path,
    invoke: &str,
    results: &[ValType],
    adapter: &Adapter,
) -> Result<RuntimeOutcome, HarnessError> {
    let argv = adapter.argv_for(binary, invoke);
    let c = run_command(&argv, adapter.timeout).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound || e.kind() == std::io::ErrorKind::PermissionDenied {
            HarnessError::AdapterMisconfigured(format!("{}: {e}", adapter.name()))
        } else {
            HarnessError::Io {
                runtime: adapter.name().into(),
                message: e.to_string(),
            }
        }
    })?;
    Ok(interpret(adapter, results, c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InconsistencyType {
    CF,
    RF,
    UO,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InconsistencyRecord {
    pub binary_id: String,
    #[serde(rename = "type")]
    pub kind: InconsistencyType,
    pub suspects: Vec<String>,
    #[serde(default)]
    pub tie: bool,
    pub outcomes: Vec<RuntimeOutcome>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    Consistent,
    Inconsistent(InconsistencyRecord),
    InsufficientPanel,
}

/// Splits runtimes by behaviour key. Returns (suspects, tie) when more than
/// one behaviour is present. The majority is the largest group, ties broken
/// by the smaller key, so the result does not depend on outcome order.
fn split(outcomes: &[&RuntimeOutcome], key: impl Fn(&RuntimeOutcome) -> String) -> Option<(Vec<String>, bool)> {
    let mut groups: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for o in outcomes {
        groups.entry(key(o)).or_default().push(o.runtime.clone());
    }
    if groups.len() < 2 {
        return None;
    }
    let mut ranked: Vec<(String, Vec<String>)> = groups.into_iter().collect();
    ranked.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(&b.0)));
    let tie = ranked[0].1.len() == ranked[1].1.len();
    let mut suspects: Vec<String> = ranked[1..].iter().flat_map(|(_, v)| v.clone()).collect();
    suspects.sort();
    Some((suspects, tie))
}

/// CF, then RF, then UO; timeouts are excluded from the vote.
pub fn classify(binary_id: &str, outcomes: &[RuntimeOutcome]) -> Verdict {
    let usable: Vec<&RuntimeOutcome> = outcomes.iter().filter(|o| o.phase != Phase::Timeout).collect();
    if usable.len() < 3 {
        return Verdict::InsufficientPanel;
    }
    let record = |kind, (suspects, tie): (Vec<String>, bool)| {
        Verdict::Inconsistent(InconsistencyRecord {
            binary_id: binary_id.to_string(),
            kind,
            suspects,
            tie,
            outcomes: outcomes.to_vec(),
        })
    };
    if let Some(s) = split(&usable, RuntimeOutcome::compile_key) {
        return record(InconsistencyType::CF, s);
    }
    if let Some(s) = split(&usable, RuntimeOutcome::run_key) {
        return record(InconsistencyType::RF, s);
    }
    if let Some(s) = split(&usable, RuntimeOutcome::output_key) {
        return record(InconsistencyType::UO, s);
    }
    Verdict::Consistent
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelResult {
    pub outcomes: Vec<RuntimeOutcome>,
    pub verdict: Verdict,
}

/// Runs every adapter on one binary (in parallel when enabled) and
/// classifies the outcomes.
pub fn run_panel(
    binary_id: &str,
    binary: &Path,
    invoke: &str,
    results: &[ValType],
    adapters: &[Adapter],
) -> Result<PanelResult, HarnessError> {
    let outcomes = par::map(adapters, |a| run_on_runtime(binary, invoke, results, a))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let verdict = classify(binary_id, &outcomes);
    Ok(PanelResult { outcomes, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(rt: &str, r: &str) -> RuntimeOutcome {
        RuntimeOutcome {
            runtime: rt.into(),
            phase: Phase::RunOk,
            trap: None,
            rendered: Some(r.into()),
            stdout: String::new(),
            stderr: String::new(),
            exit_code: Some(0),
        }
    }

    fn with(rt: &str, phase: Phase, trap: Option<TrapClass>) -> RuntimeOutcome {
        RuntimeOutcome {
            phase,
            trap,
            rendered: None,
            ..ok(rt, "")
        }
    }

    fn inconsistent(v: Verdict) -> InconsistencyRecord {
        match v {
            Verdict::Inconsistent(r) => r,
            other => panic!("expected inconsistency, got {other:?}"),
        }
    }

    #[test]
    fn rf_minority_trap_class() {
        let o = vec![
            with("a", Phase::RunTrap, Some(TrapClass::OobMemory)),
            with("b", Phase::RunTrap, Some(TrapClass::OobMemory)),
            with("c", Phase::RunTrap, Some(TrapClass::OobTable)),
            with("d", Phase::RunTrap, Some(TrapClass::OobMemory)),
        ];
        let r = inconsistent(classify("x", &o));
        assert_eq!(r.kind, InconsistencyType::RF);
        assert_eq!(r.suspects, ["c"]);
        assert!(!r.tie);
    }

    #[test]
    fn identical_results_are_consistent() {
        let o: Vec<_> = ["a", "b", "c", "d"].iter().map(|n| ok(n, "00000001")).collect();
        assert_eq!(classify("x", &o), Verdict::Consistent);
    }

    #[test]
    fn one_compile_failure_is_cf() {
        let mut o: Vec<_> = ["a", "b", "c"].iter().map(|n| ok(n, "")).collect();
        o.push(with("d", Phase::CompileFail, None));
        let r = inconsistent(classify("x", &o));
        assert_eq!(r.kind, InconsistencyType::CF);
        assert_eq!(r.suspects, ["d"]);
    }

    #[test]
    fn ties_are_flagged_and_order_free() {
        let o = vec![ok("a", "1"), ok("b", "1"), ok("c", "2"), ok("d", "2")];
        let r = inconsistent(classify("x", &o));
        assert!(r.tie);
        let mut rev = o.clone();
        rev.reverse();
        assert_eq!(inconsistent(classify("x", &rev)).suspects, r.suspects);
    }

    #[test]
    fn timeouts_do_not_vote() {
        let o = vec![
            ok("a", "1"),
            ok("b", "1"),
            with("c", Phase::Timeout, None),
            with("d", Phase::Timeout, None),
        ];
        assert_eq!(classify("x", &o), Verdict::InsufficientPanel);
        let all: Vec<_> = ["a", "b", "c"].iter().map(|n| with(n, Phase::Timeout, None)).collect();
        assert_eq!(classify("x", &all), Verdict::InsufficientPanel);
    }

    #[test]
    fn command_timeout_kills() {
        let t = std::time::Instant::now();
        let c = run_command(&["sleep".into(), "5".into()], Duration::from_millis(200)).unwrap();
        assert!(c.timed_out);
        assert!(t.elapsed() < Duration::from_secs(3));
    }
}
