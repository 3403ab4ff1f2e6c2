//! Static instrumentation: probe lines written through an imported
//! `fd_write` from a log page inserted into linear memory.
//!
//! The inserted code never uses `i32.add` (increments are `i32.sub` of a
//! negative constant), so a runtime that misimplements that opcode still
//! prints well-formed probe lines.
//!
//! The log page sits at the program memory's old minimum size. Program
//! addresses whose access reaches past that point are shifted up by one
//! page, and `memory.size`/`memory.grow` report one page less, so the
//! program sees its original address space and out-of-bounds accesses trap
//! exactly where they did before.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::wasm::validate::{declared_refs, FuncTyper, MAX_PAGES};
use crate::wasm::{
    decode_module, encode_module, op, BlockType, DataSegment, ElemItems, Export, ExportKind, FuncType, FunctionBody,
    Global, GlobalType, Group, ImportDesc, Immediate, Instruction as I, Limits, MemArg, SegmentMode, ValType,
    WasmModule,
};

use super::LocError;

pub const WASI_MODULE: &str = "wasi_snapshot_preview1";
pub const FD_WRITE: &str = "fd_write";
/// Probe lines written per run before logging goes quiet.
pub const DEFAULT_LINE_BUDGET: u32 = 200_000;

const PAGE: u32 = 65536;
const DIGITS: &[u8; 16] = b"0123456789abcdef";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeSite {
    /// Before a call; `callee` is the original index, unknown for indirect
    /// calls through slots that are not statically filled.
    Call { caller: u32, callee: Option<u32>, offset: u32 },
    Ret { caller: u32, callee: Option<u32>, offset: u32 },
    Step {
        func: u32,
        offset: u32,
        opcode: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ty: Option<ValType>,
    },
}

#[derive(Debug, Clone)]
pub struct InstrumentedBinary {
    pub bytes: Vec<u8>,
    pub module: WasmModule,
    pub probes: Vec<ProbeSite>,
    /// Byte address of the log page.
    pub log_base: u32,
}

/// Addresses inside the log page.
struct Page {
    base: u32,
    iov: u32,
    nwritten: u32,
    line: u32,
    strings: HashMap<String, (u32, u32)>,
    /// Slot -> original function index, one i32 per slot.
    slot_table: u32,
    slots: u32,
    data: Vec<u8>,
}

impl Page {
    fn new(base: u32, slot_funcs: &[u32], strings: &[String]) -> Page {
        let mut data = DIGITS.to_vec();
        data.resize(32, 0);
        let slot_table = base + data.len() as u32;
        for f in slot_funcs {
            data.extend_from_slice(&f.to_le_bytes());
        }
        let mut map = HashMap::new();
        for s in strings {
            if !map.contains_key(s) {
                map.insert(s.clone(), (base + data.len() as u32, s.len() as u32));
                data.extend_from_slice(s.as_bytes());
            }
        }
        while data.len() % 16 != 0 {
            data.push(0);
        }
        Page {
            base,
            iov: base + 16,
            nwritten: base + 24,
            line: base + data.len() as u32,
            strings: map,
            slot_table,
            slots: slot_funcs.len() as u32,
            data,
        }
    }

    fn str(&self, s: &str) -> (u32, u32) {
        self.strings[s]
    }
}

fn c(v: u32) -> I {
    I::i32_const(v as i32)
}

fn mem(name: &str, offset: u32) -> I {
    I::new(
        op(name),
        vec![Immediate::MemArg(MemArg {
            align: 0,
            offset: u64::from(offset),
        })],
    )
}

struct Helpers {
    emit: u32,
    hex: u32,
    dec: u32,
    flush: u32,
    budget: u32,
}

fn add_helpers(m: &mut WasmModule, page: &Page, fd_write: u32, budget: u32) -> Helpers {
    use ValType::*;
    // emit(p, src, len) -> p + len
    let emit = m.add_function(
        FuncType::new(vec![I32, I32, I32], vec![I32]),
        FunctionBody::new(
            vec![],
            vec![
                I::with_idx("local.get", 0),
                I::with_idx("local.get", 1),
                I::with_idx("local.get", 2),
                I::simple("memory.copy"),
                I::with_idx("local.get", 0),
                c(0),
                I::with_idx("local.get", 2),
                I::simple("i32.sub"),
                I::simple("i32.sub"),
            ],
        ),
    );
    // hex(p, v, n) -> p + n; n nibbles of v, most significant first.
    let hex = m.add_function(
        FuncType::new(vec![I32, I64, I32], vec![I32]),
        FunctionBody::new(
            vec![],
            vec![
                I::block("block", BlockType::Empty),
                I::with_idx("local.get", 2),
                I::simple("i32.eqz"),
                I::with_idx("br_if", 0),
                I::block("loop", BlockType::Empty),
                I::with_idx("local.get", 2),
                c(1),
                I::simple("i32.sub"),
                I::with_idx("local.set", 2),
                I::with_idx("local.get", 0),
                I::with_idx("local.get", 1),
                I::with_idx("local.get", 2),
                c(2),
                I::simple("i32.shl"),
                I::simple("i64.extend_i32_u"),
                I::simple("i64.shr_u"),
                I::simple("i32.wrap_i64"),
                c(15),
                I::simple("i32.and"),
                mem("i32.load8_u", page.base),
                mem("i32.store8", 0),
                I::with_idx("local.get", 0),
                I::i32_const(-1),
                I::simple("i32.sub"),
                I::with_idx("local.set", 0),
                I::with_idx("local.get", 2),
                I::with_idx("br_if", 0),
                I::simple("end"),
                I::simple("end"),
                I::with_idx("local.get", 0),
            ],
        ),
    );
    // dec(p, v) -> p + digits; unsigned decimal.
    let dec = m.add_function(
        FuncType::new(vec![I32, I32], vec![I32]),
        FunctionBody::new(
            vec![(2, I32)],
            vec![
                I::with_idx("local.get", 1),
                I::with_idx("local.set", 2),
                c(0),
                I::with_idx("local.set", 3),
                I::block("loop", BlockType::Empty),
                I::with_idx("local.get", 3),
                I::i32_const(-1),
                I::simple("i32.sub"),
                I::with_idx("local.set", 3),
                I::with_idx("local.get", 2),
                c(10),
                I::simple("i32.div_u"),
                I::with_idx("local.tee", 2),
                I::with_idx("br_if", 0),
                I::simple("end"),
                I::with_idx("local.get", 0),
                c(0),
                I::with_idx("local.get", 3),
                I::simple("i32.sub"),
                I::simple("i32.sub"),
                I::with_idx("local.tee", 0),
                I::with_idx("local.set", 2),
                I::block("loop", BlockType::Empty),
                I::with_idx("local.get", 2),
                c(1),
                I::simple("i32.sub"),
                I::with_idx("local.tee", 2),
                I::with_idx("local.get", 1),
                c(10),
                I::simple("i32.rem_u"),
                c(48),
                I::simple("i32.or"),
                mem("i32.store8", 0),
                I::with_idx("local.get", 1),
                c(10),
                I::simple("i32.div_u"),
                I::with_idx("local.tee", 1),
                I::with_idx("br_if", 0),
                I::simple("end"),
                I::with_idx("local.get", 0),
            ],
        ),
    );
    // flush(p): newline at p, write [line, p] to fd 1.
    let flush = m.add_function(
        FuncType::new(vec![I32], vec![]),
        FunctionBody::new(
            vec![],
            vec![
                c(page.iov),
                c(page.line),
                mem("i32.store", 0),
                I::with_idx("local.get", 0),
                c(10),
                mem("i32.store8", 0),
                c(page.iov),
                I::with_idx("local.get", 0),
                c(page.line),
                I::simple("i32.sub"),
                I::i32_const(-1),
                I::simple("i32.sub"),
                mem("i32.store", 4),
                c(1),
                c(page.iov),
                c(1),
                c(page.nwritten),
                I::with_idx("call", fd_write),
                I::simple("drop"),
            ],
        ),
    );
    Helpers {
        emit,
        hex,
        dec,
        flush,
        budget,
    }
}

/// Per-function scratch locals, appended after the existing ones.
struct Scratch {
    next: u32,
    by_type: BTreeMap<ValType, Vec<u32>>,
    added: Vec<(u32, ValType)>,
}

impl Scratch {
    fn new(param_count: usize, body: &FunctionBody) -> Scratch {
        Scratch {
            next: param_count as u32 + body.local_count() as u32,
            by_type: BTreeMap::new(),
            added: vec![],
        }
    }

    fn get(&mut self, t: ValType, k: usize) -> u32 {
        let v = self.by_type.entry(t).or_default();
        while v.len() <= k {
            v.push(self.next);
            self.added.push((1, t));
            self.next += 1;
        }
        v[k]
    }
}

/// Line-building code generator.
struct Emitter<'a> {
    page: &'a Page,
    h: &'a Helpers,
}

impl Emitter<'_> {
    fn text(&self, out: &mut Vec<I>, s: &str) {
        let (addr, len) = self.page.str(s);
        out.extend([c(addr), c(len), I::with_idx("call", self.h.emit)]);
    }

    fn value(&self, out: &mut Vec<I>, t: ValType, local: u32) {
        let hex = I::with_idx("call", self.h.hex);
        let get = I::with_idx("local.get", local);
        match t {
            ValType::I32 => out.extend([get, I::simple("i64.extend_i32_u"), c(8), hex]),
            ValType::F32 => out.extend([get, I::simple("i32.reinterpret_f32"), I::simple("i64.extend_i32_u"), c(8), hex]),
            ValType::I64 => out.extend([get, c(16), hex]),
            ValType::F64 => out.extend([get, I::simple("i64.reinterpret_f64"), c(16), hex]),
            ValType::V128 => out.extend([
                get.clone(),
                I::lane("i64x2.extract_lane", 1),
                c(16),
                hex.clone(),
                get,
                I::lane("i64x2.extract_lane", 0),
                c(16),
                hex,
            ]),
            _ => {}
        }
    }

    /// Wraps `body` (which must leave `p` on the stack) in the budget check,
    /// flush and budget decrement.
    fn line(&self, out: &mut Vec<I>, body: Vec<I>) {
        let g = self.h.budget;
        out.extend([
            I::block("block", BlockType::Empty),
            I::with_idx("global.get", g),
            I::simple("i32.eqz"),
            I::with_idx("br_if", 0),
            c(self.page.line),
        ]);
        out.extend(body);
        out.extend([
            I::with_idx("call", self.h.flush),
            I::with_idx("global.get", g),
            c(1),
            I::simple("i32.sub"),
            I::with_idx("global.set", g),
            I::simple("end"),
        ]);
    }

    /// `p` on the stack, then the callee index (static or via slot lookup).
    fn callee(&self, out: &mut Vec<I>, callee: Option<u32>, slot_local: Option<u32>) {
        match (callee, slot_local) {
            (Some(f), _) => out.push(c(f)),
            (None, Some(s)) => out.extend([
                I::with_idx("local.get", s),
                c(self.page.slots),
                I::simple("i32.lt_u"),
                I::block("if", BlockType::Value(ValType::I32)),
                I::with_idx("local.get", s),
                c(2),
                I::simple("i32.shl"),
                mem("i32.load", self.page.slot_table),
                I::simple("else"),
                I::i32_const(-1),
                I::simple("end"),
            ]),
            (None, None) => out.push(I::i32_const(-1)),
        }
        out.push(I::with_idx("call", self.h.dec));
    }

    fn values_line(&self, out: &mut Vec<I>, tag: &str, callee: Option<u32>, slot: Option<u32>, vals: &[(ValType, u32)]) {
        let mut b = Vec::new();
        self.text(&mut b, tag);
        self.callee(&mut b, callee, slot);
        self.text(&mut b, "|");
        for (k, (t, l)) in vals.iter().enumerate() {
            if k > 0 {
                self.text(&mut b, ",");
            }
            self.value(&mut b, *t, *l);
        }
        self.line(out, b);
    }
}

const CALL_TAG: &str = "##WRT|CALL|";
const RET_TAG: &str = "##WRT|RET|";
const STEP_TAG: &str = "##WRT|STEP|";

/// Assigns scratch locals to a value list (k-th value of a type gets the
/// k-th scratch of that type, offset by `skip` for that type).
fn spill_slots(types: &[ValType], scratch: &mut Scratch, skip: &BTreeMap<ValType, usize>) -> Vec<(ValType, u32)> {
    let mut seen: BTreeMap<ValType, usize> = BTreeMap::new();
    types
        .iter()
        .map(|t| {
            let k = seen.entry(*t).or_insert(0);
            let idx = scratch.get(*t, *k + skip.get(t).copied().unwrap_or(0));
            *k += 1;
            (*t, idx)
        })
        .collect()
}

fn spill(out: &mut Vec<I>, slots: &[(ValType, u32)]) {
    for (_, l) in slots.iter().rev() {
        out.push(I::with_idx("local.set", *l));
    }
}

fn reload(out: &mut Vec<I>, slots: &[(ValType, u32)]) {
    for (_, l) in slots {
        out.push(I::with_idx("local.get", *l));
    }
}

/// Original function index of a post-import index.
fn original(idx: u32, import_at: u32, added: bool) -> u32 {
    if added && idx > import_at {
        idx - 1
    } else {
        idx
    }
}

/// Slot -> original function index for table 0, from constant-offset
/// active segments.
fn slot_functions(m: &WasmModule) -> Vec<u32> {
    let Some(t) = m.all_tables().first().copied() else { return vec![] };
    let n = t.limits.min.min(1 << 14) as usize;
    let mut slots = vec![u32::MAX; n];
    for e in &m.elements {
        if let (SegmentMode::Active { index: 0, offset }, ElemItems::Funcs(fs)) = (&e.mode, &e.items) {
            if let [o] = offset.as_slice() {
                if let Some(Immediate::I32(base)) = o.imms.first().filter(|_| o.is("i32.const")) {
                    for (i, f) in fs.iter().enumerate() {
                        if let Some(s) = slots.get_mut(*base as u32 as usize + i) {
                            *s = *f;
                        }
                    }
                }
            }
        }
    }
    slots
}

/// Address remapping around the log page hole at `base`.
struct Hole {
    base: u32,
}

impl Hole {
    /// Pushes the physical address for logical address `a`, given code that
    /// pushes the (exclusive, i64) end of the access.
    fn remap(&self, out: &mut Vec<I>, a: u32, end: Vec<I>) {
        let get = || I::with_idx("local.get", a);
        out.extend([get(), I::i32_const(-(PAGE as i32)), I::simple("i32.sub")]);
        // a + PAGE would wrap: fall back to an address that is out of bounds anyway
        out.extend([I::i32_const(-1), get(), I::i32_const(-(PAGE as i32)), I::simple("i32.lt_u"), I::simple("select")]);
        out.push(get());
        out.extend(end);
        out.extend([I::i64_const(i64::from(self.base)), I::simple("i64.gt_u"), I::simple("select")]);
    }

    fn end_const(a: u32, len: u64) -> Vec<I> {
        vec![
            I::with_idx("local.get", a),
            I::simple("i64.extend_i32_u"),
            I::i64_const(len as i64),
            I::simple("i64.add"),
        ]
    }

    fn end_local(a: u32, n: u32) -> Vec<I> {
        vec![
            I::with_idx("local.get", a),
            I::simple("i64.extend_i32_u"),
            I::with_idx("local.get", n),
            I::simple("i64.extend_i32_u"),
            I::simple("i64.add"),
        ]
    }

    /// Code placed before `ins`, and after it for size queries.
    fn wrap(&self, ins: &I, scratch: &mut Scratch, before: &mut Vec<I>, after: &mut Vec<I>) {
        let meta = ins.op.meta();
        if meta.group != Group::Memory {
            return;
        }
        match ins.name() {
            "memory.size" => after.extend([c(1), I::simple("i32.sub")]),
            "memory.grow" => {
                // -1 stays -1
                let t = scratch.get(ValType::I32, 0);
                after.extend([
                    I::with_idx("local.tee", t),
                    I::with_idx("local.get", t),
                    I::i32_const(-1),
                    I::simple("i32.ne"),
                    I::simple("i32.sub"),
                ]);
            }
            "memory.copy" | "memory.fill" | "memory.init" => {
                let (d, x, n) = (scratch.get(ValType::I32, 0), scratch.get(ValType::I32, 1), scratch.get(ValType::I32, 2));
                before.extend([I::with_idx("local.set", n), I::with_idx("local.set", x), I::with_idx("local.set", d)]);
                self.remap(before, d, Self::end_local(d, n));
                if ins.is("memory.copy") {
                    self.remap(before, x, Self::end_local(x, n));
                } else {
                    before.push(I::with_idx("local.get", x));
                }
                before.push(I::with_idx("local.get", n));
            }
            _ => {
                let (Some(width), Some(ma)) = (meta.access_bytes(), ins.memarg()) else { return };
                let a = scratch.get(ValType::I32, 0);
                // stores and lane accesses carry one value above the address
                let value = match meta.stack_template.params.as_slice() {
                    [_, v] => Some(*v),
                    _ => None,
                };
                let v = value.map(|t| (t, scratch.get(t, usize::from(t == ValType::I32))));
                if let Some((_, l)) = v {
                    before.push(I::with_idx("local.set", l));
                }
                before.push(I::with_idx("local.set", a));
                self.remap(before, a, Self::end_const(a, ma.offset + width));
                if let Some((_, l)) = v {
                    before.push(I::with_idx("local.get", l));
                }
            }
        }
    }
}

enum Mode {
    Calls,
    Steps(u32),
}

fn instrument(bytes: &[u8], mode: Mode, budget: u32) -> Result<InstrumentedBinary, LocError> {
    let orig = decode_module(bytes).map_err(|e| LocError::Instrumentation(e.to_string()))?;
    let mut m = orig.clone();
    let fd_ty = FuncType::new(vec![ValType::I32; 4], vec![ValType::I32]);

    // fd_write import (reused when the module already has it).
    let existing = m.imports.iter().filter(|i| matches!(i.desc, ImportDesc::Func(_))).position(|i| {
        i.module == WASI_MODULE
            && i.name == FD_WRITE
            && matches!(i.desc, ImportDesc::Func(t) if orig.types.get(t as usize) == Some(&fd_ty))
    });
    let (fd_write, added) = match existing {
        Some(i) => (i as u32, false),
        None => (m.add_func_import(WASI_MODULE, FD_WRITE, fd_ty), true),
    };
    let slots: Vec<u32> = slot_functions(&orig);

    // Log page.
    let imported_memory = m.all_memories().len() > m.memories.len();
    let log_page = match m.memories.first_mut() {
        Some(l) => {
            let page = l.min;
            if page >= MAX_PAGES || l.max.is_some_and(|x| x >= MAX_PAGES) {
                return Err(LocError::Overflow("no room for a log page".into()));
            }
            l.min += 1;
            l.max = l.max.map(|x| x + 1);
            page
        }
        None if !imported_memory => {
            m.memories.push(Limits::new(1, Some(1)));
            0
        }
        None => return Err(LocError::Instrumentation("imported memory is not supported".into())),
    };
    if !m.exports.iter().any(|e| e.kind == ExportKind::Memory) {
        let mut name = "memory".to_string();
        while m.exports.iter().any(|e| e.name == name) {
            name.push('_');
        }
        m.exports.push(Export {
            name,
            kind: ExportKind::Memory,
            index: 0,
        });
    }
    let base = log_page * PAGE;
    let hole = orig.memories.first().map(|_| Hole { base });

    let mut strings: Vec<String> = [CALL_TAG, RET_TAG, STEP_TAG, "|", ","].iter().map(|s| s.to_string()).collect();
    if let Mode::Steps(f) = mode {
        let body = orig
            .body(f)
            .ok_or_else(|| LocError::Instrumentation(format!("function {f} has no body")))?;
        for ins in &body.instrs {
            strings.push(ins.name().to_string());
        }
    }
    let slot_orig: Vec<u32> = slots.clone();
    let page = Page::new(base, &slot_orig, &strings);
    if page.data.len() as u32 > PAGE / 2 {
        return Err(LocError::Overflow("log page tables too large".into()));
    }
    m.data.push(DataSegment {
        mode: SegmentMode::Active {
            index: 0,
            offset: vec![c(base)],
        },
        bytes: page.data.clone(),
    });
    if let Some(n) = &mut m.data_count {
        *n += 1;
    }
    let budget_g = m.num_globals();
    m.globals.push(Global {
        ty: GlobalType {
            ty: ValType::I32,
            mutable: true,
        },
        init: vec![c(budget)],
    });

    let first_defined = m.num_imported_funcs();
    let defined = m.total_funcs();
    let h = add_helpers(&mut m, &page, fd_write, budget_g);
    let em = Emitter { page: &page, h: &h };
    let refs = declared_refs(&m);
    let mut probes = Vec::new();

    for f in first_defined..defined {
        let orig_f = original(f, fd_write, added);
        let stepped = matches!(mode, Mode::Steps(t) if t == orig_f);
        if !stepped && matches!(mode, Mode::Steps(_)) && hole.is_none() {
            continue;
        }
        let ty = m.func_type(f).cloned().unwrap();
        let body = m.body(f).unwrap().clone();
        let mut scratch = Scratch::new(ty.params.len(), &body);
        let mut typer = FuncTyper::new(&m, &ty, &body, &refs);
        let mut out = Vec::with_capacity(body.instrs.len() * 4);
        for ins in &body.instrs {
            let live = !typer.is_unreachable();
            let step = typer
                .step(ins)
                .map_err(|e| LocError::Instrumentation(format!("func {orig_f}: {e}")))?;
            let meta = ins.op.meta();
            let mut after = Vec::new();
            if let Some(h) = hole.as_ref().filter(|_| live) {
                h.wrap(ins, &mut scratch, &mut out, &mut after);
            }
            match mode {
                Mode::Calls if live && (ins.is("call") || ins.is("call_indirect")) => {
                    let (sig, callee, indirect) = if ins.is("call") {
                        let callee = ins.idx().unwrap();
                        (m.func_type(callee).cloned().unwrap(), Some(original(callee, fd_write, added)), false)
                    } else {
                        (m.types[ins.idx().unwrap() as usize].clone(), None, true)
                    };
                    let mut skip = BTreeMap::new();
                    let slot = if indirect {
                        let s = scratch.get(ValType::I32, 0);
                        skip.insert(ValType::I32, 1);
                        out.push(I::with_idx("local.set", s));
                        Some(s)
                    } else {
                        None
                    };
                    let args = spill_slots(&sig.params, &mut scratch, &skip);
                    spill(&mut out, &args);
                    em.values_line(&mut out, CALL_TAG, callee, slot, &args);
                    reload(&mut out, &args);
                    if let Some(s) = slot {
                        out.push(I::with_idx("local.get", s));
                    }
                    out.push(ins.clone());
                    let rets = spill_slots(&sig.results, &mut scratch, &skip);
                    spill(&mut out, &rets);
                    em.values_line(&mut out, RET_TAG, callee, slot, &rets);
                    reload(&mut out, &rets);
                    probes.push(ProbeSite::Call {
                        caller: orig_f,
                        callee,
                        offset: ins.offset,
                    });
                    probes.push(ProbeSite::Ret {
                        caller: orig_f,
                        callee,
                        offset: ins.offset,
                    });
                }
                Mode::Steps(_) if stepped && live && meta.group != Group::Control => {
                    out.push(ins.clone());
                    out.append(&mut after);
                    let top = step.pushed.last().copied().flatten().filter(|t| t.is_numeric());
                    let mut b = Vec::new();
                    em.text(&mut b, STEP_TAG);
                    b.extend([c(ins.offset), I::with_idx("call", h.dec)]);
                    em.text(&mut b, "|");
                    em.text(&mut b, ins.name());
                    em.text(&mut b, "|");
                    if let Some(t) = top {
                        let l = scratch.get(t, 0);
                        out.push(I::with_idx("local.tee", l));
                        em.value(&mut b, t, l);
                    }
                    em.line(&mut out, b);
                    probes.push(ProbeSite::Step {
                        func: orig_f,
                        offset: ins.offset,
                        opcode: ins.name().to_string(),
                        ty: top,
                    });
                }
                _ => {
                    out.push(ins.clone());
                    out.append(&mut after);
                }
            }
        }
        let b = m.body_mut(f).unwrap();
        b.instrs = out;
        b.locals.extend(scratch.added);
    }
    let verdict = crate::wasm::validate_module(&m);
    if let Some(v) = verdict.violations().first() {
        return Err(LocError::Instrumentation(format!("instrumented module invalid: {v}")));
    }
    let bytes = encode_module(&m).map_err(|e| LocError::Instrumentation(e.to_string()))?;
    Ok(InstrumentedBinary {
        bytes,
        module: m,
        probes,
        log_base: base,
    })
}

/// Call/return probes around every reachable call site.
pub fn instrument_functions(bytes: &[u8]) -> Result<InstrumentedBinary, LocError> {
    instrument(bytes, Mode::Calls, DEFAULT_LINE_BUDGET)
}

/// Step probes after every reachable non-control instruction of `func`
/// (original index).
pub fn instrument_instructions(bytes: &[u8], func: u32) -> Result<InstrumentedBinary, LocError> {
    instrument(bytes, Mode::Steps(func), DEFAULT_LINE_BUDGET)
}

pub fn instrument_with_budget(bytes: &[u8], func: Option<u32>, budget: u32) -> Result<InstrumentedBinary, LocError> {
    let mode = match func {
        Some(f) => Mode::Steps(f),
        None => Mode::Calls,
    };
    instrument(bytes, mode, budget)
}
