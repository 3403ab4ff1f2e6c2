//! Structural validation: stack balance of every body against its
//! signature plus cross-section index resolution.
//!
//! The function-level typer is also used outside validation to recover the
//! concrete operand types each instruction consumes and produces.

use std::collections::HashSet;

use super::module::*;
use super::opcodes::{Group, ImmKind};
use super::types::{BlockType, FuncType, ValType};

pub const MAX_PAGES: u32 = 65536;

/// A single validation failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Function index (joint index space) when the violation is inside a body.
    pub func: Option<u32>,
    pub offset: Option<u32>,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.func, self.offset) {
            (Some(func), Some(off)) => write!(f, "func {func} @{off:#x}: {}", self.message),
            (Some(func), None) => write!(f, "func {func}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    Invalid(Vec<Violation>),
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, Verdict::Ok)
    }

    pub fn violations(&self) -> &[Violation] {
        match self {
            Verdict::Ok => &[],
            Verdict::Invalid(v) => v,
        }
    }
}

/// Operand types one instruction consumed and produced. `None` marks a
/// value of unknown type (only possible in unreachable code).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StepTypes {
    pub popped: Vec<Option<ValType>>,
    pub pushed: Vec<Option<ValType>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FrameKind {
    Func,
    Block,
    Loop,
    If,
    Else,
}

#[derive(Debug, Clone)]
struct Frame {
    kind: FrameKind,
    params: Vec<ValType>,
    results: Vec<ValType>,
    height: usize,
    unreachable: bool,
}

impl Frame {
    fn label_types(&self) -> &[ValType] {
        if self.kind == FrameKind::Loop {
            &self.params
        } else {
            &self.results
        }
    }
}

/// Incremental typer for one function body.
pub struct FuncTyper<'m> {
    module: &'m WasmModule,
    locals: Vec<ValType>,
    results: Vec<ValType>,
    stack: Vec<Option<ValType>>,
    frames: Vec<Frame>,
    refs: &'m HashSet<u32>,
    step: StepTypes,
}

type StepResult = Result<(), String>;

fn same(a: Option<ValType>, b: ValType) -> bool {
    match a {
        None => true,
        Some(t) => t == b,
    }
}

impl<'m> FuncTyper<'m> {
    pub fn new(
        module: &'m WasmModule,
        ty: &FuncType,
        body: &FunctionBody,
        declared_refs: &'m HashSet<u32>,
    ) -> Self {
        let mut locals = ty.params.clone();
        for (n, t) in &body.locals {
            locals.extend(std::iter::repeat_n(*t, *n as usize));
        }
        FuncTyper {
            module,
            locals,
            results: ty.results.clone(),
            stack: Vec::new(),
            frames: vec![Frame {
                kind: FrameKind::Func,
                params: vec![],
                results: ty.results.clone(),
                height: 0,
                unreachable: false,
            }],
            refs: declared_refs,
            step: StepTypes::default(),
        }
    }

    pub fn local_types(&self) -> &[ValType] {
        &self.locals
    }

    /// Current control nesting depth (0 = function level).
    pub fn depth(&self) -> usize {
        self.frames.len() - 1
    }

    /// Types on the operand stack within the innermost frame.
    pub fn operand_stack(&self) -> &[Option<ValType>] {
        &self.stack
    }

    pub fn is_unreachable(&self) -> bool {
        self.frames.last().map(|f| f.unreachable).unwrap_or(false)
    }

    /// Label types for a branch of relative depth `label`.
    pub fn label_types(&self, label: u32) -> Option<Vec<ValType>> {
        let n = self.frames.len();
        let i = n.checked_sub(1 + label as usize)?;
        Some(self.frames[i].label_types().to_vec())
    }

    fn push(&mut self, t: Option<ValType>) {
        self.stack.push(t);
        self.step.pushed.push(t);
    }

    fn pop_any(&mut self) -> Result<Option<ValType>, String> {
        let frame = self.frames.last().expect("frame");
        if self.stack.len() == frame.height {
            if frame.unreachable {
                self.step.popped.insert(0, None);
                return Ok(None);
            }
            return Err("type mismatch: operand stack underflow".into());
        }
        let t = self.stack.pop().unwrap();
        self.step.popped.insert(0, t);
        Ok(t)
    }

    fn pop(&mut self, want: ValType) -> Result<Option<ValType>, String> {
        let got = self.pop_any()?;
        match got {
            Some(t) if want != ValType::Wildcard && t != want => Err(format!(
                "type mismatch: expected {want}, found {t}"
            )),
            _ => Ok(got.or(if want == ValType::Wildcard { None } else { Some(want) })),
        }
    }

    fn pop_all(&mut self, types: &[ValType]) -> StepResult {
        for t in types.iter().rev() {
            self.pop(*t)?;
        }
        Ok(())
    }

    fn push_all(&mut self, types: &[ValType]) {
        for t in types {
            self.push(Some(*t));
        }
    }

    fn set_unreachable(&mut self) {
        let f = self.frames.last_mut().unwrap();
        self.stack.truncate(f.height);
        f.unreachable = true;
    }

    fn block_sig(&self, bt: BlockType) -> Result<FuncType, String> {
        self.module
            .block_signature(bt)
            .ok_or_else(|| "unresolved type index in block type".to_string())
    }

    fn push_frame(&mut self, kind: FrameKind, sig: FuncType) {
        let height = self.stack.len();
        self.frames.push(Frame {
            kind,
            params: sig.params.clone(),
            results: sig.results,
            height,
            unreachable: false,
        });
        // params were popped by the caller; re-push them inside the frame
        for t in sig.params {
            self.stack.push(Some(t));
        }
    }

    fn pop_frame(&mut self) -> Result<Frame, String> {
        let f = self.frames.last().cloned().expect("frame");
        for t in f.results.iter().rev() {
            if self.stack.len() == f.height {
                if f.unreachable {
                    continue;
                }
                return Err(format!("type mismatch: missing result of type {t} at end of block"));
            }
            let got = self.stack.pop().unwrap();
            if !same(got, *t) {
                return Err(format!(
                    "type mismatch: expected {t} at end of block, found {}",
                    got.unwrap()
                ));
            }
        }
        if self.stack.len() != f.height {
            return Err("type mismatch: values remaining on stack at end of block".into());
        }
        self.frames.pop();
        Ok(f)
    }

    fn need_memory(&self) -> StepResult {
        if self.module.all_memories().is_empty() {
            return Err("unknown memory 0".into());
        }
        Ok(())
    }

    fn table(&self, idx: u32) -> Result<ValType, String> {
        self.module
            .all_tables()
            .get(idx as usize)
            .map(|t| t.elem)
            .ok_or_else(|| format!("unknown table {idx}"))
    }

    fn check_lane(name: &str, lane: u8) -> StepResult {
        let lanes = if name.starts_with("i8x16") || name.contains("load8_lane") || name.contains("store8_lane") {
            16
        } else if name.starts_with("i16x8") || name.contains("16_lane") {
            8
        } else if name.starts_with("i32x4") || name.starts_with("f32x4") || name.contains("32_lane") {
            4
        } else {
            2
        };
        if u32::from(lane) >= lanes {
            return Err(format!("invalid lane index {lane}"));
        }
        Ok(())
    }

    /// Types one instruction and returns the operand types it consumed and
    /// produced.
    pub fn step(&mut self, ins: &Instruction) -> Result<StepTypes, String> {
        self.step = StepTypes::default();
        self.step_inner(ins)?;
        Ok(std::mem::take(&mut self.step))
    }

    fn step_inner(&mut self, ins: &Instruction) -> StepResult {
        let meta = ins.op.meta();
        let name = meta.name;

        if let Some(natural) = meta.natural_align() {
            let ma = ins.memarg().ok_or("missing memarg")?;
            if ma.align > natural {
                return Err("alignment must not be larger than natural".into());
            }
        }
        if matches!(meta.imm, ImmKind::Lane | ImmKind::MemArgLane) {
            let lane = ins
                .imms
                .iter()
                .find_map(|i| match i {
                    Immediate::Lane(l) => Some(*l),
                    _ => None,
                })
                .ok_or("missing lane")?;
            Self::check_lane(name, lane)?;
        }
        if meta.group == Group::Memory
            && !matches!(name, "data.drop")
        {
            self.need_memory()?;
        }

        match name {
            "unreachable" => self.set_unreachable(),
            "nop" => {}
            "block" | "loop" | "if" => {
                let sig = self.block_sig(ins.block_type().ok_or("missing block type")?)?;
                if name == "if" {
                    self.pop(ValType::I32)?;
                }
                self.pop_all(&sig.params)?;
                let kind = match name {
                    "block" => FrameKind::Block,
                    "loop" => FrameKind::Loop,
                    _ => FrameKind::If,
                };
                self.push_frame(kind, sig);
            }
            "else" => {
                let f = self.frames.last().cloned().ok_or("else without if")?;
                if f.kind != FrameKind::If {
                    return Err("else found outside an if block".into());
                }
                self.pop_frame()?;
                self.push_frame(FrameKind::Else, FuncType::new(f.params, f.results));
            }
            "end" => {
                if self.frames.len() == 1 {
                    return Err("end closes the function body".into());
                }
                let f = self.pop_frame()?;
                if f.kind == FrameKind::If && f.params != f.results {
                    return Err("type mismatch: if without else must leave its params".into());
                }
                self.push_all(&f.results);
            }
            "br" => {
                let l = ins.idx().unwrap();
                let types = self.label_types(l).ok_or_else(|| format!("unknown label {l}"))?;
                self.pop_all(&types)?;
                self.set_unreachable();
            }
            "br_if" => {
                let l = ins.idx().unwrap();
                let types = self.label_types(l).ok_or_else(|| format!("unknown label {l}"))?;
                self.pop(ValType::I32)?;
                self.pop_all(&types)?;
                self.push_all(&types);
            }
            "br_table" => {
                let (labels, default) = match ins.imms.as_slice() {
                    [Immediate::Labels(ls), Immediate::Idx(d)] => (ls.clone(), *d),
                    _ => return Err("malformed br_table".into()),
                };
                self.pop(ValType::I32)?;
                let dtypes = self
                    .label_types(default)
                    .ok_or_else(|| format!("unknown label {default}"))?;
                for l in &labels {
                    let t = self.label_types(*l).ok_or_else(|| format!("unknown label {l}"))?;
                    if t.len() != dtypes.len() {
                        return Err("type mismatch: br_table target arity differs".into());
                    }
                    // each target must accept the operands; check against a copy
                    let saved = (self.stack.clone(), self.step.clone());
                    self.pop_all(&t)?;
                    self.stack = saved.0;
                    self.step = saved.1;
                }
                self.pop_all(&dtypes)?;
                self.set_unreachable();
            }
            "return" => {
                let r = self.results.clone();
                self.pop_all(&r)?;
                self.set_unreachable();
            }
            "call" => {
                let f = ins.idx().unwrap();
                let ty = self
                    .module
                    .func_type(f)
                    .cloned()
                    .ok_or_else(|| format!("unresolved function index {f}"))?;
                self.pop_all(&ty.params)?;
                self.push_all(&ty.results);
            }
            "call_indirect" => {
                let (ty_idx, table) = match ins.imms.as_slice() {
                    [Immediate::Idx(t), Immediate::Idx(tb)] => (*t, *tb),
                    _ => return Err("malformed call_indirect".into()),
                };
                if self.table(table)? != ValType::FuncRef {
                    return Err("call_indirect on a non-funcref table".into());
                }
                let ty = self
                    .module
                    .types
                    .get(ty_idx as usize)
                    .cloned()
                    .ok_or_else(|| format!("unresolved type index {ty_idx}"))?;
                self.pop(ValType::I32)?;
                self.pop_all(&ty.params)?;
                self.push_all(&ty.results);
            }
            "drop" => {
                self.pop_any()?;
            }
            "select" => {
                self.pop(ValType::I32)?;
                let a = self.pop_any()?;
                let b = self.pop_any()?;
                let t = match (a, b) {
                    (Some(x), Some(y)) if x != y => {
                        return Err("type mismatch: select operands differ".into())
                    }
                    (Some(x), _) | (_, Some(x)) => Some(x),
                    _ => None,
                };
                if t.map(|t| t.is_ref()).unwrap_or(false) {
                    return Err("type mismatch: untyped select on reference types".into());
                }
                self.push(t);
            }
            "select_t" => {
                let ts = match ins.imms.as_slice() {
                    [Immediate::ValTypes(ts)] if ts.len() == 1 => ts.clone(),
                    _ => return Err("invalid result arity for typed select".into()),
                };
                self.pop(ValType::I32)?;
                self.pop(ts[0])?;
                self.pop(ts[0])?;
                self.push(Some(ts[0]));
            }
            "local.get" | "local.set" | "local.tee" => {
                let i = ins.idx().unwrap();
                let t = *self
                    .locals
                    .get(i as usize)
                    .ok_or_else(|| format!("unresolved local index {i}"))?;
                match name {
                    "local.get" => self.push(Some(t)),
                    "local.set" => {
                        self.pop(t)?;
                    }
                    _ => {
                        self.pop(t)?;
                        self.push(Some(t));
                    }
                }
            }
            "global.get" | "global.set" => {
                let i = ins.idx().unwrap();
                let g = self
                    .module
                    .global_type(i)
                    .ok_or_else(|| format!("unresolved global index {i}"))?;
                if name == "global.get" {
                    self.push(Some(g.ty));
                } else {
                    if !g.mutable {
                        return Err(format!("global {i} is immutable"));
                    }
                    self.pop(g.ty)?;
                }
            }
            "table.get" | "table.set" | "table.grow" | "table.size" | "table.fill" => {
                let t = self.table(ins.idx().unwrap())?;
                match name {
                    "table.get" => {
                        self.pop(ValType::I32)?;
                        self.push(Some(t));
                    }
                    "table.set" => {
                        self.pop(t)?;
                        self.pop(ValType::I32)?;
                    }
                    "table.grow" => {
                        self.pop(ValType::I32)?;
                        self.pop(t)?;
                        self.push(Some(ValType::I32));
                    }
                    "table.size" => self.push(Some(ValType::I32)),
                    _ => {
                        self.pop(ValType::I32)?;
                        self.pop(t)?;
                        self.pop(ValType::I32)?;
                    }
                }
            }
            "table.init" => {
                let (e, tb) = match ins.imms.as_slice() {
                    [Immediate::Idx(e), Immediate::Idx(t)] => (*e, *t),
                    _ => return Err("malformed table.init".into()),
                };
                let tt = self.table(tb)?;
                let seg = self
                    .module
                    .elements
                    .get(e as usize)
                    .ok_or_else(|| format!("unresolved element segment {e}"))?;
                if seg.elem_type != tt {
                    return Err("type mismatch: table.init element type".into());
                }
                self.pop_all(&[ValType::I32, ValType::I32, ValType::I32])?;
            }
            "elem.drop" => {
                let e = ins.idx().unwrap();
                if self.module.elements.len() <= e as usize {
                    return Err(format!("unresolved element segment {e}"));
                }
            }
            "table.copy" => {
                let (d, s) = match ins.imms.as_slice() {
                    [Immediate::Idx(d), Immediate::Idx(s)] => (*d, *s),
                    _ => return Err("malformed table.copy".into()),
                };
                if self.table(d)? != self.table(s)? {
                    return Err("type mismatch: table.copy element types".into());
                }
                self.pop_all(&[ValType::I32, ValType::I32, ValType::I32])?;
            }
            "memory.init" | "data.drop" => {
                let d = ins.idx().unwrap();
                match self.module.data_count {
                    None => return Err("data count section required".into()),
                    Some(n) if d >= n => return Err(format!("unresolved data segment {d}")),
                    _ => {}
                }
                if name == "memory.init" {
                    self.pop_all(&[ValType::I32, ValType::I32, ValType::I32])?;
                }
            }
            "ref.null" => match ins.imms.as_slice() {
                [Immediate::RefType(t)] => self.push(Some(*t)),
                _ => return Err("malformed ref.null".into()),
            },
            "ref.is_null" => {
                let t = self.pop_any()?;
                if let Some(t) = t {
                    if !t.is_ref() {
                        return Err("type mismatch: ref.is_null on non-reference".into());
                    }
                }
                self.push(Some(ValType::I32));
            }
            "ref.func" => {
                let f = ins.idx().unwrap();
                if f >= self.module.total_funcs() {
                    return Err(format!("unresolved function index {f}"));
                }
                if !self.refs.contains(&f) {
                    return Err(format!("undeclared function reference {f}"));
                }
                self.push(Some(ValType::FuncRef));
            }
            _ => {
                debug_assert!(!meta.variadic, "{name} should be handled above");
                let tmpl = &meta.stack_template;
                self.pop_all(&tmpl.params)?;
                self.push_all(&tmpl.results);
            }
        }
        Ok(())
    }

    /// Closes the implicit function block.
    pub fn finish(&mut self) -> StepResult {
        if self.frames.len() != 1 {
            return Err("unclosed block at end of function".into());
        }
        let results = self.results.clone();
        let f = &self.frames[0];
        for (i, t) in results.iter().enumerate().rev() {
            if self.stack.len() == f.height {
                if f.unreachable {
                    continue;
                }
                return Err(format!(
                    "type mismatch: missing result {i} of type {t} at end of function"
                ));
            }
            let got = self.stack.pop().unwrap();
            if !same(got, *t) {
                return Err(format!(
                    "type mismatch: expected {t} at end of function, found {}",
                    got.unwrap()
                ));
            }
        }
        if !self.stack.is_empty() {
            return Err("type mismatch: values remaining on stack at end of function".into());
        }
        Ok(())
    }
}

/// Function indices that may appear in `ref.func` inside bodies.
pub fn declared_refs(m: &WasmModule) -> HashSet<u32> {
    let mut refs = HashSet::new();
    let scan = |e: &ConstExpr, refs: &mut HashSet<u32>| {
        for i in e {
            if i.is("ref.func") {
                refs.insert(i.idx().unwrap());
            }
        }
    };
    for e in &m.elements {
        match &e.items {
            ElemItems::Funcs(fs) => refs.extend(fs.iter().copied()),
            ElemItems::Exprs(es) => es.iter().for_each(|x| scan(x, &mut refs)),
        }
    }
    for g in &m.globals {
        scan(&g.init, &mut refs);
    }
    for e in &m.exports {
        if e.kind == ExportKind::Func {
            refs.insert(e.index);
        }
    }
    refs
}

struct Checker<'m> {
    m: &'m WasmModule,
    out: Vec<Violation>,
}

impl Checker<'_> {
    fn fail(&mut self, msg: impl Into<String>) {
        self.out.push(Violation {
            func: None,
            offset: None,
            message: msg.into(),
        });
    }

    /// Returns the produced type of a constant expression.
    fn const_expr(&mut self, e: &ConstExpr, want: ValType, what: &str) {
        let m = self.m;
        let mut stack: Vec<ValType> = Vec::new();
        for ins in e {
            match ins.name() {
                "i32.const" => stack.push(ValType::I32),
                "i64.const" => stack.push(ValType::I64),
                "f32.const" => stack.push(ValType::F32),
                "f64.const" => stack.push(ValType::F64),
                "v128.const" => stack.push(ValType::V128),
                "ref.null" => match ins.imms.as_slice() {
                    [Immediate::RefType(t)] => stack.push(*t),
                    _ => return self.fail(format!("{what}: malformed ref.null")),
                },
                "ref.func" => {
                    let f = ins.idx().unwrap();
                    if f >= m.total_funcs() {
                        return self.fail(format!("{what}: unresolved function index {f}"));
                    }
                    stack.push(ValType::FuncRef);
                }
                "global.get" => {
                    let g = ins.idx().unwrap();
                    if g >= m.num_imported_globals() {
                        return self.fail(format!(
                            "{what}: constant expression refers to non-imported global {g}"
                        ));
                    }
                    let gt = m.global_type(g).unwrap();
                    if gt.mutable {
                        return self.fail(format!("{what}: constant expression refers to mutable global {g}"));
                    }
                    stack.push(gt.ty);
                }
                other => return self.fail(format!("{what}: constant expression required, found {other}")),
            }
        }
        if stack != [want] {
            self.fail(format!("{what}: type mismatch in constant expression"));
        }
    }
}

/// Checks stack balance of every body and resolution of every index.
pub fn validate_module(m: &WasmModule) -> Verdict {
    let mut c = Checker { m, out: Vec::new() };
    let ntypes = m.types.len() as u32;

    for imp in &m.imports {
        match &imp.desc {
            ImportDesc::Func(t) if *t >= ntypes => {
                c.fail(format!("import {}.{}: unresolved type index {t}", imp.module, imp.name))
            }
            ImportDesc::Table(t) => check_limits(&mut c, &t.limits, u32::MAX, "table"),
            ImportDesc::Memory(l) => check_limits(&mut c, l, MAX_PAGES, "memory"),
            _ => {}
        }
    }
    for (i, t) in m.functions.iter().enumerate() {
        if *t >= ntypes {
            c.fail(format!("function {i}: unresolved type index {t}"));
        }
    }
    for t in &m.tables {
        check_limits(&mut c, &t.limits, u32::MAX, "table");
    }
    let mems = m.all_memories();
    if mems.len() > 1 {
        c.fail("multiple memories");
    }
    for l in &m.memories {
        check_limits(&mut c, l, MAX_PAGES, "memory");
    }
    for (i, g) in m.globals.iter().enumerate() {
        c.const_expr(&g.init, g.ty.ty, &format!("global {i}"));
    }
    let mut names = HashSet::new();
    for e in &m.exports {
        if !names.insert(e.name.as_str()) {
            c.fail(format!("duplicate export name {:?}", e.name));
        }
        let ok = match e.kind {
            ExportKind::Func => e.index < m.total_funcs(),
            ExportKind::Table => (e.index as usize) < m.all_tables().len(),
            ExportKind::Memory => (e.index as usize) < mems.len(),
            ExportKind::Global => e.index < m.num_globals(),
        };
        if !ok {
            c.fail(format!("export {:?}: unresolved {:?} index {}", e.name, e.kind, e.index));
        }
    }
    if let Some(s) = m.start {
        match m.func_type(s) {
            None => c.fail(format!("start: unresolved function index {s}")),
            Some(t) if !t.params.is_empty() || !t.results.is_empty() => {
                c.fail("start function must have type [] -> []")
            }
            _ => {}
        }
    }
    let tables = m.all_tables();
    for (i, e) in m.elements.iter().enumerate() {
        if let SegmentMode::Active { index, offset } = &e.mode {
            match tables.get(*index as usize) {
                None => c.fail(format!("element {i}: unknown table {index}")),
                Some(t) if t.elem != e.elem_type => {
                    c.fail(format!("element {i}: type mismatch with table {index}"))
                }
                _ => {}
            }
            c.const_expr(offset, ValType::I32, &format!("element {i} offset"));
        }
        match &e.items {
            ElemItems::Funcs(fs) => {
                for f in fs {
                    if *f >= m.total_funcs() {
                        c.fail(format!("element {i}: unresolved function index {f}"));
                    }
                }
            }
            ElemItems::Exprs(es) => {
                for x in es {
                    c.const_expr(x, e.elem_type, &format!("element {i} item"));
                }
            }
        }
    }
    for (i, d) in m.data.iter().enumerate() {
        if let SegmentMode::Active { index, offset } = &d.mode {
            if *index as usize >= mems.len() {
                c.fail(format!("data {i}: unknown memory {index}"));
            }
            c.const_expr(offset, ValType::I32, &format!("data {i} offset"));
        }
    }
    if let Some(n) = m.data_count {
        if n as usize != m.data.len() {
            c.fail("data count does not match data section");
        }
    }
    if m.functions.len() != m.code.len() {
        c.fail("function and code section have inconsistent lengths");
    }

    let refs = declared_refs(m);
    let nimp = m.num_imported_funcs();
    for (i, (t, body)) in m.functions.iter().zip(&m.code).enumerate() {
        let Some(ty) = m.types.get(*t as usize) else {
            continue;
        };
        let func = nimp + i as u32;
        if let Err((offset, message)) = check_body(m, ty, body, &refs) {
            c.out.push(Violation {
                func: Some(func),
                offset,
                message,
            });
        }
    }

    if c.out.is_empty() {
        Verdict::Ok
    } else {
        Verdict::Invalid(c.out)
    }
}

fn check_limits(c: &mut Checker<'_>, l: &super::types::Limits, cap: u32, what: &str) {
    if l.min > cap || l.max.map(|m| m > cap).unwrap_or(false) {
        c.fail(format!("{what} size must be at most {cap}"));
    }
    if let Some(max) = l.max {
        if l.min > max {
            c.fail(format!("{what} size minimum must not be greater than maximum"));
        }
    }
}

fn check_body(
    m: &WasmModule,
    ty: &FuncType,
    body: &FunctionBody,
    refs: &HashSet<u32>,
) -> Result<(), (Option<u32>, String)> {
    let mut typer = FuncTyper::new(m, ty, body, refs);
    for ins in &body.instrs {
        typer.step(ins).map_err(|e| (Some(ins.offset), e))?;
    }
    typer.finish().map_err(|e| (None, e))
}

/// Runs the typer over a body and returns per-instruction operand types.
pub fn type_body(
    m: &WasmModule,
    ty: &FuncType,
    body: &FunctionBody,
) -> Result<Vec<StepTypes>, String> {
    let refs = declared_refs(m);
    let mut typer = FuncTyper::new(m, ty, body, &refs);
    let mut out = Vec::with_capacity(body.instrs.len());
    for ins in &body.instrs {
        out.push(typer.step(ins)?);
    }
    typer.finish()?;
    Ok(out)
}
