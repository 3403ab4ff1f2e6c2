use std::path::{Path, PathBuf};
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::render::IntRendering;
use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TrapClass {
    OobMemory,
    /// Also covers "undefined element" / uninitialized slots.
    #[serde(alias = "UndefinedElement")]
    OobTable,
    IndirectCallTypeMismatch,
    IntegerDivideByZero,
    /// Also covers invalid float-to-int conversions.
    #[serde(alias = "InvalidConversion")]
    IntegerOverflow,
    Unreachable,
    StackExhaustion,
    Unknown,
}

impl TrapClass {
    pub fn name(self) -> &'static str {
        match self {
            TrapClass::OobMemory => "OobMemory",
            TrapClass::OobTable => "OobTable",
            TrapClass::IndirectCallTypeMismatch => "IndirectCallTypeMismatch",
            TrapClass::IntegerDivideByZero => "IntegerDivideByZero",
            TrapClass::IntegerOverflow => "IntegerOverflow",
            TrapClass::Unreachable => "Unreachable",
            TrapClass::StackExhaustion => "StackExhaustion",
            TrapClass::Unknown => "Unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrapRule {
    pub pattern: String,
    pub class: TrapClass,
}

/// One runtime as written in the adapter file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdapterSpec {
    pub name: String,
    /// Whitespace-separated argv. `{binary}` and `{invoke}` are substituted
    /// per run; `{self_dir}` is the directory of the running executable.
    pub command: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    /// Regex with one capture group, applied to each non-probe stdout line.
    pub result_pattern: String,
    #[serde(default)]
    pub compile_fail_patterns: Vec<String>,
    #[serde(default)]
    pub trap_rules: Vec<TrapRule>,
    #[serde(default)]
    pub signedness: IntRendering,
}

fn default_timeout_ms() -> u64 {
    10_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PanelFile {
    #[serde(rename = "adapter")]
    pub adapters: Vec<AdapterSpec>,
}

/// An adapter with its patterns compiled and its command resolved.
#[derive(Debug, Clone)]
pub struct Adapter {
    pub spec: AdapterSpec,
    pub argv: Vec<String>,
    pub timeout: Duration,
    pub result_re: Regex,
    pub compile_fail: Vec<Regex>,
    pub traps: Vec<(Regex, TrapClass)>,
}

fn misconfig(name: &str, msg: impl std::fmt::Display) -> HarnessError {
    HarnessError::AdapterMisconfigured(format!("{name}: {msg}"))
}

fn on_path(exe: &str) -> bool {
    std::env::var_os("PATH")
        .map(|p| std::env::split_paths(&p).any(|d| d.join(exe).is_file()))
        .unwrap_or(false)
}

impl Adapter {
    pub fn compile(spec: AdapterSpec, self_dir: &Path) -> Result<Adapter, HarnessError> {
        let name = spec.name.clone();
        if name.is_empty() {
            return Err(misconfig("<unnamed>", "empty name"));
        }
        if !spec.command.contains("{binary}") {
            return Err(misconfig(&name, "command lacks {binary}"));
        }
        let sd = self_dir.to_string_lossy();
        let argv: Vec<String> = spec
            .command
            .split_whitespace()
            .map(|a| a.replace("{self_dir}", &sd))
            .collect();
        let exe = &argv[0];
        let found = if exe.contains('/') { Path::new(exe).is_file() } else { on_path(exe) };
        if !found {
            return Err(misconfig(&name, format!("executable {exe} not found")));
        }
        Self::build(spec, argv)
    }

    /// Compiles the rules without resolving the executable, for replaying
    /// recorded output of runtimes that are not installed.
    pub fn for_replay(spec: AdapterSpec) -> Result<Adapter, HarnessError> {
        if spec.name.is_empty() {
            return Err(misconfig("<unnamed>", "empty name"));
        }
        let argv = spec.command.split_whitespace().map(str::to_string).collect();
        Self::build(spec, argv)
    }

    fn build(spec: AdapterSpec, argv: Vec<String>) -> Result<Adapter, HarnessError> {
        let name = spec.name.clone();
        if spec.timeout_ms == 0 {
            return Err(misconfig(&name, "timeout must be positive"));
        }
        let re = |p: &str| Regex::new(p).map_err(|e| misconfig(&name, e));
        let result_re = re(&spec.result_pattern)?;
        if result_re.captures_len() < 2 {
            return Err(misconfig(&name, "result_pattern needs a capture group"));
        }
        let compile_fail = spec.compile_fail_patterns.iter().map(|p| re(p)).collect::<Result<_, _>>()?;
        let traps = spec
            .trap_rules
            .iter()
            .map(|r| Ok((re(&r.pattern)?, r.class)))
            .collect::<Result<_, HarnessError>>()?;
        Ok(Adapter {
            timeout: Duration::from_millis(spec.timeout_ms),
            argv,
            result_re,
            compile_fail,
            traps,
            spec,
        })
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn argv_for(&self, binary: &Path, invoke: &str) -> Vec<String> {
        let b = binary.to_string_lossy();
        self.argv
            .iter()
            .map(|a| a.replace("{binary}", &b).replace("{invoke}", invoke))
            .collect()
    }

    /// First matching trap rule over stderr then stdout.
    pub fn trap_class(&self, stderr: &str, stdout: &str) -> TrapClass {
        for (re, class) in &self.traps {
            if re.is_match(stderr) || re.is_match(stdout) {
                return *class;
            }
        }
        TrapClass::Unknown
    }

    pub fn is_compile_failure(&self, stderr: &str, stdout: &str) -> bool {
        self.compile_fail.iter().any(|re| re.is_match(stderr) || re.is_match(stdout))
    }
}

/// Directory holding the current executable; `{self_dir}` in commands.
pub fn self_dir() -> PathBuf {
    std::env::current_exe()
        .ok()
        .and_then(|p| p.parent().map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."))
}

pub fn parse_panel(text: &str, self_dir: &Path) -> Result<Vec<Adapter>, HarnessError> {
    let file: PanelFile = toml::from_str(text).map_err(|e| HarnessError::AdapterMisconfigured(e.to_string()))?;
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for spec in file.adapters {
        if !seen.insert(spec.name.clone()) {
            return Err(misconfig(&spec.name, "duplicate adapter name"));
        }
        out.push(Adapter::compile(spec, self_dir)?);
    }
    Ok(out)
}

pub fn load_panel(path: &Path, self_dir: &Path) -> Result<Vec<Adapter>, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::AdapterMisconfigured(format!("{}: {e}", path.display())))?;
    parse_panel(&text, self_dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PANEL: &str = r#"
[[adapter]]
name = "a"
command = "sh -c true {binary} {invoke}"
result_pattern = '^(\S+)$'
trap_rules = [
  { pattern = "undefined element", class = "UndefinedElement" },
  { pattern = "out of bounds table", class = "OobTable" },
  { pattern = "out of bounds", class = "OobMemory" },
]
"#;

    #[test]
    fn aliases_collapse_and_first_rule_wins() {
        let p = parse_panel(PANEL, Path::new("/")).unwrap();
        let a = &p[0];
        assert_eq!(a.trap_class("undefined element", ""), TrapClass::OobTable);
        assert_eq!(a.trap_class("out of bounds table access", ""), TrapClass::OobTable);
        assert_eq!(a.trap_class("", "out of bounds memory access"), TrapClass::OobMemory);
        assert_eq!(a.trap_class("weird", ""), TrapClass::Unknown);
        assert_eq!(a.spec.timeout_ms, 10_000);
    }

    #[test]
    fn missing_executable_is_misconfiguration() {
        let bad = PANEL.replace("sh -c true", "/nonexistent/runtime");
        assert!(matches!(parse_panel(&bad, Path::new("/")), Err(HarnessError::AdapterMisconfigured(_))));
        let no_bin = PANEL.replace("{binary} ", "");
        assert!(parse_panel(&no_bin, Path::new("/")).is_err());
        let bad_re = PANEL.replace(r"'^(\S+)$'", "'('");
        assert!(parse_panel(&bad_re, Path::new("/")).is_err());
    }
}
