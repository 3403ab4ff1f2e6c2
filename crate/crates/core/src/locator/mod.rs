//! Root-cause localization: function-level blame from call/return probes,
//! then instruction-level blame inside the blamed function.

pub mod instrument;
pub mod probe;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::harness::adapter::Adapter;
use crate::harness::{run_on_runtime, HarnessError, InconsistencyRecord, InconsistencyType, Phase, RuntimeOutcome};
use crate::wasm::validate::{declared_refs, FuncTyper};
use crate::wasm::{decode_module, ExportKind, Group, StackType, ValType, WasmModule};

pub use instrument::{instrument_functions, instrument_instructions, InstrumentedBinary, ProbeSite};
pub use probe::{parse_log, ProbeEntry, ProbeTypes};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LocError {
    #[error("instrumentation failed: {0}")]
    Instrumentation(String),
    #[error("instrumentation overflow: {0}")]
    Overflow(String),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("{0}")]
    Input(String),
}

/// Grouping key for deduplication.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlameKey {
    pub suspect: String,
    #[serde(rename = "type")]
    pub kind: InconsistencyType,
    /// Opcode for UO, trap class for RF, empty for CF.
    pub detail: String,
    /// Instruction stack type for UO, empty otherwise.
    pub stack_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlameReport {
    pub binary_id: String,
    #[serde(rename = "type")]
    pub kind: InconsistencyType,
    pub suspect: String,
    pub reference: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub func: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opcode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stack_type: Option<StackType>,
    /// The instrumented runs agreed although the originals did not.
    #[serde(default)]
    pub heisenbug: bool,
    pub key: BlameKey,
}

/// Function blamed for the first divergence between two call/return logs.
///
/// Walks both logs with a shadow call stack rooted at `entry`. A differing
/// call (same callee, different arguments) blames the caller; a differing
/// return blames the callee; any other divergence, including one log ending
/// early, blames the function on top of the stack. When the logs agree the
/// top of the stack is blamed if the final outcomes still differ, otherwise
/// `None` (no reproducible divergence).
pub fn func_locating(
    suspect: &[ProbeEntry],
    reference: &[ProbeEntry],
    entry: u32,
    types: &ProbeTypes,
    outcomes_differ: bool,
) -> Option<u32> {
    let mut stack = vec![entry];
    let top = |s: &Vec<u32>| *s.last().unwrap_or(&entry);
    for i in 0.. {
        let (a, b) = match (suspect.get(i), reference.get(i)) {
            (None, None) => break,
            (Some(_), None) | (None, Some(_)) => return Some(top(&stack)),
            (Some(a), Some(b)) => (types.canonical(a), types.canonical(b)),
        };
        if a == b {
            match a {
                ProbeEntry::Call { func, .. } => stack.push(func),
                ProbeEntry::Ret { .. } if stack.len() > 1 => {
                    stack.pop();
                }
                _ => {}
            }
            continue;
        }
        return Some(match (&a, &b) {
            (ProbeEntry::Ret { func: f, .. }, ProbeEntry::Ret { func: g, .. })
                if f == g && *f != probe::UNKNOWN_FUNC =>
            {
                *f
            }
            _ => top(&stack),
        });
    }
    outcomes_differ.then(|| top(&stack))
}

/// First step probe that differs, or that only one log reached.
pub fn instr_locating(suspect: &[ProbeEntry], reference: &[ProbeEntry], types: &ProbeTypes) -> Option<(u32, String)> {
    let steps = |log: &[ProbeEntry]| -> Vec<ProbeEntry> {
        log.iter()
            .filter(|e| matches!(e, ProbeEntry::Step { .. }))
            .map(|e| types.canonical(e))
            .collect()
    };
    let (s, r) = (steps(suspect), steps(reference));
    let at = |e: &ProbeEntry| match e {
        ProbeEntry::Step { offset, opcode, .. } => Some((*offset, opcode.clone())),
        _ => None,
    };
    for i in 0..s.len().max(r.len()) {
        match (s.get(i), r.get(i)) {
            (Some(a), Some(b)) if a == b => continue,
            // Differing values, or a different instruction after an earlier
            // control decision went the other way: the suspect's side wins.
            (Some(a), _) => return at(a),
            (None, Some(b)) => return at(b),
            (None, None) => break,
        }
    }
    None
}

/// Concrete stack type of the instruction at `offset` in `func`.
pub fn instr_stack_type(m: &WasmModule, func: u32, offset: u32) -> Option<StackType> {
    let ty = m.func_type(func)?.clone();
    let body = m.body(func)?;
    let refs = declared_refs(m);
    let mut typer = FuncTyper::new(m, &ty, body, &refs);
    for ins in &body.instrs {
        let st = typer.step(ins).ok()?;
        if ins.offset == offset {
            let flat = |v: Vec<Option<ValType>>| v.into_iter().map(|t| t.unwrap_or(ValType::Wildcard)).collect();
            return Some(StackType::new(flat(st.popped), flat(st.pushed)));
        }
    }
    None
}

fn behaviour(o: &RuntimeOutcome) -> (Phase, Option<String>, Option<String>) {
    let trap = (o.phase == Phase::RunTrap).then(|| o.trap.map(|t| t.name().to_string()).unwrap_or_default());
    (o.phase, trap, o.rendered.clone())
}

fn run_pair(
    path: &Path,
    entry: &str,
    results: &[ValType],
    suspect: &Adapter,
    reference: &Adapter,
) -> Result<(RuntimeOutcome, RuntimeOutcome), LocError> {
    Ok((
        run_on_runtime(path, entry, results, suspect)?,
        run_on_runtime(path, entry, results, reference)?,
    ))
}

/// Localizes one inconsistency. `workdir` receives the instrumented
/// binaries. The first suspect is compared against the first non-suspect
/// runtime that did not time out.
pub fn locate(
    record: &InconsistencyRecord,
    bytes: &[u8],
    entry: &str,
    adapters: &[Adapter],
    workdir: &Path,
) -> Result<BlameReport, LocError> {
    let suspect_name = record
        .suspects
        .first()
        .ok_or_else(|| LocError::Input("record has no suspect".into()))?
        .clone();
    let reference_name = record
        .outcomes
        .iter()
        .find(|o| !record.suspects.contains(&o.runtime) && o.phase != Phase::Timeout)
        .map(|o| o.runtime.clone())
        .ok_or_else(|| LocError::Input("no reference runtime".into()))?;
    let find = |n: &str| {
        adapters
            .iter()
            .find(|a| a.name() == n)
            .ok_or_else(|| LocError::Harness(HarnessError::AdapterMisconfigured(format!("{n}: not in panel"))))
    };
    let (sa, ra) = (find(&suspect_name)?, find(&reference_name)?);
    let mut report = BlameReport {
        binary_id: record.binary_id.clone(),
        kind: record.kind,
        suspect: suspect_name.clone(),
        reference: reference_name.clone(),
        func: None,
        offset: None,
        opcode: None,
        stack_type: None,
        heisenbug: false,
        key: BlameKey {
            suspect: suspect_name.clone(),
            kind: record.kind,
            detail: String::new(),
            stack_type: String::new(),
        },
    };
    if record.kind == InconsistencyType::RF {
        let trap_of = |n: &str| {
            record
                .outcomes
                .iter()
                .find(|o| o.runtime == n)
                .and_then(|o| (o.phase == Phase::RunTrap).then(|| o.trap.map(|t| t.name()).unwrap_or("Unknown")))
        };
        report.key.detail = trap_of(&suspect_name).or(trap_of(&reference_name)).unwrap_or("").to_string();
    }
    if record.kind == InconsistencyType::CF {
        return Ok(report);
    }

    let module = decode_module(bytes).map_err(|e| LocError::Input(e.to_string()))?;
    let entry_idx = module
        .export_index(entry, ExportKind::Func)
        .ok_or_else(|| LocError::Input(format!("no export {entry}")))?;
    let results = module.func_type(entry_idx).map(|t| t.results.clone()).unwrap_or_default();
    std::fs::create_dir_all(workdir).map_err(|e| LocError::Input(e.to_string()))?;

    let calls = instrument_functions(bytes)?;
    let path = workdir.join(format!("{}.calls.wasm", record.binary_id));
    std::fs::write(&path, &calls.bytes).map_err(|e| LocError::Input(e.to_string()))?;
    let (so, ro) = run_pair(&path, entry, &results, sa, ra)?;
    let types = ProbeTypes::new(&module, &calls.probes);
    let differ = behaviour(&so) != behaviour(&ro);
    let Some(func) = func_locating(&parse_log(&so.stdout), &parse_log(&ro.stdout), entry_idx, &types, differ) else {
        report.heisenbug = true;
        report.key.detail = "heisenbug".into();
        return Ok(report);
    };
    report.func = Some(func);
    if func < module.num_imported_funcs() || func == probe::UNKNOWN_FUNC {
        return Ok(report);
    }

    let steps = instrument_instructions(bytes, func)?;
    let path = workdir.join(format!("{}.f{func}.wasm", record.binary_id));
    std::fs::write(&path, &steps.bytes).map_err(|e| LocError::Input(e.to_string()))?;
    let (so, ro) = run_pair(&path, entry, &results, sa, ra)?;
    let types = ProbeTypes::new(&module, &steps.probes);
    if let Some((offset, opcode)) = instr_locating(&parse_log(&so.stdout), &parse_log(&ro.stdout), &types) {
        let st = instr_stack_type(&module, func, offset);
        if record.kind == InconsistencyType::UO {
            report.key.detail = opcode.clone();
            report.key.stack_type = st.as_ref().map(|s| s.to_string()).unwrap_or_default();
        }
        report.offset = Some(offset);
        report.opcode = Some(opcode);
        report.stack_type = st;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DedupGroup {
    pub key: BlameKey,
    /// Smallest member binary (ties by id).
    pub representative: String,
    pub representative_size: usize,
    pub count: usize,
    pub members: Vec<String>,
}

/// Groups reports by key; `size` gives each report's binary size in bytes.
pub fn dedup_reports(reports: &[(BlameReport, usize)]) -> Vec<DedupGroup> {
    let mut groups: BTreeMap<BlameKey, Vec<(usize, String)>> = BTreeMap::new();
    for (r, size) in reports {
        groups.entry(r.key.clone()).or_default().push((*size, r.binary_id.clone()));
    }
    groups
        .into_iter()
        .map(|(key, mut members)| {
            members.sort();
            members.dedup();
            let (representative_size, representative) = members[0].clone();
            DedupGroup {
                key,
                representative,
                representative_size,
                count: members.len(),
                members: members.into_iter().map(|(_, id)| id).collect(),
            }
        })
        .collect()
}

/// True for opcodes that can carry a step probe.
pub fn steppable(name: &str) -> bool {
    crate::wasm::instruction_meta(name).map(|m| m.group != Group::Control).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::probe::parse_line;
    use super::*;
    use crate::fixtures::factorial_module;
    use crate::wasm::{encode_module, validate_module, FuncType, FunctionBody, Instruction as I};

    fn log(lines: &[&str]) -> Vec<ProbeEntry> {
        lines.iter().map(|l| parse_line(l).unwrap()).collect()
    }

    fn two_funcs() -> WasmModule {
        let mut m = WasmModule::default();
        m.add_function(FuncType::new(vec![], vec![ValType::I32]), FunctionBody::new(vec![], vec![I::with_idx("call", 1)]));
        m.add_function(
            FuncType::new(vec![], vec![ValType::I32]),
            FunctionBody::new(vec![], vec![I::i32_const(1), I::i32_const(2), I::simple("i32.add")]),
        );
        m
    }

    #[test]
    fn call_args_blame_caller_ret_blames_callee() {
        let m = two_funcs();
        let t = ProbeTypes::new(&m, &[]);
        let s = log(&["##WRT|CALL|1|", "##WRT|RET|1|00000004"]);
        let r = log(&["##WRT|CALL|1|", "##WRT|RET|1|00000003"]);
        assert_eq!(func_locating(&s, &r, 0, &t, true), Some(1));
        let s = log(&["##WRT|CALL|1|00000001"]);
        let r = log(&["##WRT|CALL|1|00000002"]);
        assert_eq!(func_locating(&s, &r, 0, &t, true), Some(0));
        // suspect trapped inside callee 1
        let s = log(&["##WRT|CALL|1|"]);
        let r = log(&["##WRT|CALL|1|", "##WRT|RET|1|00000003"]);
        assert_eq!(func_locating(&s, &r, 0, &t, true), Some(1));
        let same = log(&["##WRT|CALL|1|", "##WRT|RET|1|00000003"]);
        assert_eq!(func_locating(&same, &same, 0, &t, true), Some(0));
        assert_eq!(func_locating(&same, &same, 0, &t, false), None);
    }

    #[test]
    fn first_differing_step() {
        let m = two_funcs();
        let t = ProbeTypes::new(&m, &[]);
        let s = log(&["##WRT|STEP|1|i32.const|00000001", "##WRT|STEP|3|i32.const|00000002", "##WRT|STEP|5|i32.add|00000004"]);
        let r = log(&["##WRT|STEP|1|i32.const|00000001", "##WRT|STEP|3|i32.const|00000002", "##WRT|STEP|5|i32.add|00000003"]);
        assert_eq!(instr_locating(&s, &r, &t), Some((5, "i32.add".into())));
        assert_eq!(instr_locating(&s[..2], &r, &t), Some((5, "i32.add".into())));
        assert_eq!(instr_locating(&r, &r, &t), None);
    }

    #[test]
    fn instrumented_factorial_validates_and_maps_probes() {
        let bytes = encode_module(&factorial_module()).unwrap();
        let calls = instrument_functions(&bytes).unwrap();
        assert!(calls.probes.is_empty());
        assert!(validate_module(&calls.module).is_ok());
        let steps = instrument_instructions(&bytes, 0).unwrap();
        assert!(validate_module(&steps.module).is_ok());
        let m = decode_module(&bytes).unwrap();
        let stepped = m.body(0).unwrap().instrs.iter().filter(|i| steppable(i.name())).count();
        assert_eq!(steps.probes.len(), stepped);
        assert!(!steps.module.code.iter().flat_map(|b| &b.instrs).any(|i| i.is("i32.add")));
    }

    #[test]
    fn stack_type_of_store() {
        let mut m = WasmModule::default();
        m.memories.push(crate::wasm::Limits::new(1, None));
        m.add_function(
            FuncType::new(vec![], vec![]),
            FunctionBody::new(vec![], vec![I::i32_const(0), I::i64_const(1), I::mem("i64.store", 3, 0)]),
        );
        let bytes = encode_module(&m).unwrap();
        let m = decode_module(&bytes).unwrap();
        let off = m.body(0).unwrap().instrs[2].offset;
        assert_eq!(instr_stack_type(&m, 0, off), Some(StackType::new(vec![ValType::I32, ValType::I64], vec![])));
    }

    #[test]
    fn dedup_keeps_smallest() {
        let mk = |id: &str, op: &str| BlameReport {
            binary_id: id.into(),
            kind: InconsistencyType::UO,
            suspect: "x".into(),
            reference: "y".into(),
            func: Some(0),
            offset: None,
            opcode: None,
            stack_type: None,
            heisenbug: false,
            key: BlameKey {
                suspect: "x".into(),
                kind: InconsistencyType::UO,
                detail: op.into(),
                stack_type: "[i32,i32]->[i32]".into(),
            },
        };
        let g = dedup_reports(&[(mk("b", "i32.add"), 90), (mk("a", "i32.add"), 120), (mk("c", "i32.sub"), 10)]);
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].representative, "b");
        assert_eq!(g[0].count, 2);
        assert_eq!(g[1].count, 1);
    }
}
