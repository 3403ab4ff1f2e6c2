//! Probe line parsing and comparison.

use std::collections::HashMap;

use crate::harness::render::hex_bits;
use crate::harness::PROBE_PREFIX;
use crate::wasm::{ValType, WasmModule};

use super::instrument::ProbeSite;

pub const UNKNOWN_FUNC: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbeEntry {
    Call { func: u32, vals: Vec<String> },
    Ret { func: u32, vals: Vec<String> },
    Step { offset: u32, opcode: String, bits: String },
}

fn values(s: &str) -> Vec<String> {
    if s.is_empty() {
        vec![]
    } else {
        s.split(',').map(str::to_string).collect()
    }
}

/// Parses one probe line; `None` for anything else.
pub fn parse_line(line: &str) -> Option<ProbeEntry> {
    let rest = line.trim_end().strip_prefix(PROBE_PREFIX)?;
    let parts: Vec<&str> = rest.split('|').collect();
    match parts.as_slice() {
        ["CALL", idx, vals] => Some(ProbeEntry::Call {
            func: idx.parse().ok()?,
            vals: values(vals),
        }),
        ["RET", idx, vals] => Some(ProbeEntry::Ret {
            func: idx.parse().ok()?,
            vals: values(vals),
        }),
        ["STEP", off, opcode, bits] => Some(ProbeEntry::Step {
            offset: off.parse().ok()?,
            opcode: opcode.to_string(),
            bits: bits.to_string(),
        }),
        _ => None,
    }
}

/// Value types known for each probe, used to canonicalize NaNs.
pub struct ProbeTypes<'a> {
    module: &'a WasmModule,
    steps: HashMap<u32, ValType>,
}

impl<'a> ProbeTypes<'a> {
    /// `module` is the uninstrumented module; function indices in probe
    /// lines refer to it.
    pub fn new(module: &'a WasmModule, probes: &[ProbeSite]) -> Self {
        let steps = probes
            .iter()
            .filter_map(|p| match p {
                ProbeSite::Step { offset, ty: Some(t), .. } => Some((*offset, *t)),
                _ => None,
            })
            .collect();
        ProbeTypes { module, steps }
    }

    fn canon_list(&self, func: u32, vals: &[String], results: bool) -> Vec<String> {
        let sig = self.module.func_type(func).filter(|_| func != UNKNOWN_FUNC);
        let types = sig.map(|s| if results { &s.results } else { &s.params });
        vals.iter()
            .enumerate()
            .map(|(i, v)| match types.and_then(|t| t.get(i)) {
                Some(t) => canon(*t, v),
                None => v.clone(),
            })
            .collect()
    }

    pub fn canonical(&self, e: &ProbeEntry) -> ProbeEntry {
        match e {
            ProbeEntry::Call { func, vals } => ProbeEntry::Call {
                func: *func,
                vals: self.canon_list(*func, vals, false),
            },
            ProbeEntry::Ret { func, vals } => ProbeEntry::Ret {
                func: *func,
                vals: self.canon_list(*func, vals, true),
            },
            ProbeEntry::Step { offset, opcode, bits } => ProbeEntry::Step {
                offset: *offset,
                opcode: opcode.clone(),
                bits: match self.steps.get(offset) {
                    Some(t) => canon(*t, bits),
                    None => bits.clone(),
                },
            },
        }
    }
}

fn canon(t: ValType, v: &str) -> String {
    if matches!(t, ValType::F32 | ValType::F64) {
        if let Ok(b) = u128::from_str_radix(v, 16) {
            return hex_bits(t, b);
        }
    }
    v.to_string()
}

/// Probe entries of a run, in order.
pub fn parse_log(stdout: &str) -> Vec<ProbeEntry> {
    stdout.lines().filter_map(parse_line).collect()
}
