//! Intermediate representation of a decoded module.

use serde::{Deserialize, Serialize};

use super::opcodes::{op, Opcode};
use super::types::{BlockType, FuncType, Limits, ValType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MemArg {
    /// Alignment exponent.
    pub align: u32,
    pub offset: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Immediate {
    /// Index or label.
    Idx(u32),
    I32(i32),
    I64(i64),
    /// f32 as raw bits.
    F32(u32),
    /// f64 as raw bits.
    F64(u64),
    V128(u128),
    MemArg(MemArg),
    BlockType(BlockType),
    Lane(u8),
    Shuffle([u8; 16]),
    Labels(Vec<u32>),
    ValTypes(Vec<ValType>),
    RefType(ValType),
}

/// One instruction. Equality ignores `offset`, so structurally identical
/// bodies compare equal regardless of LEB padding in the source binary.
#[derive(Debug, Clone, Eq, Serialize, Deserialize)]
pub struct Instruction {
    pub op: Opcode,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub imms: Vec<Immediate>,
    /// Byte offset of the opcode relative to the start of the function body.
    #[serde(default)]
    pub offset: u32,
}

impl PartialEq for Instruction {
    fn eq(&self, other: &Self) -> bool {
        self.op == other.op && self.imms == other.imms
    }
}

impl std::hash::Hash for Instruction {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.op.hash(state);
        self.imms.hash(state);
    }
}

impl Instruction {
    pub fn new(op: Opcode, imms: Vec<Immediate>) -> Self {
        Instruction { op, imms, offset: 0 }
    }

    pub fn simple(name: &str) -> Self {
        Instruction::new(op(name), Vec::new())
    }

    pub fn with_idx(name: &str, idx: u32) -> Self {
        Instruction::new(op(name), vec![Immediate::Idx(idx)])
    }

    pub fn i32_const(v: i32) -> Self {
        Instruction::new(op("i32.const"), vec![Immediate::I32(v)])
    }

    pub fn i64_const(v: i64) -> Self {
        Instruction::new(op("i64.const"), vec![Immediate::I64(v)])
    }

    pub fn f32_const(bits: u32) -> Self {
        Instruction::new(op("f32.const"), vec![Immediate::F32(bits)])
    }

    pub fn f64_const(bits: u64) -> Self {
        Instruction::new(op("f64.const"), vec![Immediate::F64(bits)])
    }

    pub fn v128_const(bits: u128) -> Self {
        Instruction::new(op("v128.const"), vec![Immediate::V128(bits)])
    }

    pub fn mem(name: &str, align: u32, offset: u64) -> Self {
        Instruction::new(op(name), vec![Immediate::MemArg(MemArg { align, offset })])
    }

    pub fn lane(name: &str, lane: u8) -> Self {
        Instruction::new(op(name), vec![Immediate::Lane(lane)])
    }

    pub fn block(name: &str, bt: BlockType) -> Self {
        Instruction::new(op(name), vec![Immediate::BlockType(bt)])
    }

    /// Zero-valued constant of a numeric type.
    pub fn zero_of(t: ValType) -> Self {
        match t {
            ValType::I32 => Self::i32_const(0),
            ValType::I64 => Self::i64_const(0),
            ValType::F32 => Self::f32_const(0),
            ValType::F64 => Self::f64_const(0),
            ValType::V128 => Self::v128_const(0),
            ValType::FuncRef | ValType::ExternRef => {
                Instruction::new(op("ref.null"), vec![Immediate::RefType(t)])
            }
            ValType::Wildcard => panic!("no constant of wildcard type"),
        }
    }

    pub fn name(&self) -> &'static str {
        self.op.name()
    }

    /// An instance of `op` with zero/empty immediates of the right shape.
    pub fn placeholder(op: Opcode) -> Self {
        use super::opcodes::ImmKind as K;
        use Immediate as M;
        let imms = match op.meta().imm {
            K::None | K::MemZero | K::MemCopy => vec![],
            K::BlockType => vec![M::BlockType(BlockType::Empty)],
            K::Label | K::Func | K::Local | K::Global | K::Table | K::Data | K::Elem | K::MemInit => {
                vec![M::Idx(0)]
            }
            K::BrTable => vec![M::Labels(vec![]), M::Idx(0)],
            K::CallIndirect | K::TableInit | K::TableCopy => vec![M::Idx(0), M::Idx(0)],
            K::MemArg => vec![M::MemArg(MemArg { align: 0, offset: 0 })],
            K::I32 => vec![M::I32(0)],
            K::I64 => vec![M::I64(0)],
            K::F32 => vec![M::F32(0)],
            K::F64 => vec![M::F64(0)],
            K::V128 => vec![M::V128(0)],
            K::Shuffle => vec![M::Shuffle([0; 16])],
            K::Lane => vec![M::Lane(0)],
            K::MemArgLane => vec![M::MemArg(MemArg { align: 0, offset: 0 }), M::Lane(0)],
            K::RefType => vec![M::RefType(ValType::FuncRef)],
            K::SelectTypes => vec![M::ValTypes(vec![ValType::I32])],
        };
        Instruction::new(op, imms)
    }

    /// First index-like immediate (local, global, function, label, type ...).
    pub fn idx(&self) -> Option<u32> {
        self.imms.iter().find_map(|i| match i {
            Immediate::Idx(x) => Some(*x),
            _ => None,
        })
    }

    pub fn set_idx(&mut self, value: u32) {
        if let Some(Immediate::Idx(x)) = self.imms.iter_mut().find(|i| matches!(i, Immediate::Idx(_))) {
            *x = value;
        }
    }

    pub fn memarg(&self) -> Option<MemArg> {
        self.imms.iter().find_map(|i| match i {
            Immediate::MemArg(m) => Some(*m),
            _ => None,
        })
    }

    pub fn memarg_mut(&mut self) -> Option<&mut MemArg> {
        self.imms.iter_mut().find_map(|i| match i {
            Immediate::MemArg(m) => Some(m),
            _ => None,
        })
    }

    pub fn block_type(&self) -> Option<BlockType> {
        self.imms.iter().find_map(|i| match i {
            Immediate::BlockType(b) => Some(*b),
            _ => None,
        })
    }

    pub fn is(&self, name: &str) -> bool {
        self.op.name() == name
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ImportDesc {
    Func(u32),
    Table(TableType),
    Memory(Limits),
    Global(GlobalType),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Import {
    pub module: String,
    pub name: String,
    pub desc: ImportDesc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TableType {
    pub elem: ValType,
    pub limits: Limits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GlobalType {
    pub ty: ValType,
    pub mutable: bool,
}

/// A constant expression, stored without its terminating `end`.
pub type ConstExpr = Vec<Instruction>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Global {
    pub ty: GlobalType,
    pub init: ConstExpr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExportKind {
    Func,
    Table,
    Memory,
    Global,
}

/// Names may contain any UTF-8, including NUL.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Export {
    pub name: String,
    pub kind: ExportKind,
    pub index: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentMode {
    Passive,
    Active { index: u32, offset: ConstExpr },
    Declared,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElemItems {
    Funcs(Vec<u32>),
    Exprs(Vec<ConstExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementSegment {
    pub mode: SegmentMode,
    pub elem_type: ValType,
    pub items: ElemItems,
    /// Binary flag byte (0..=7); kept so re-encoding picks the same form.
    pub flags: u8,
}

impl ElementSegment {
    pub fn len(&self) -> usize {
        match &self.items {
            ElemItems::Funcs(v) => v.len(),
            ElemItems::Exprs(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataSegment {
    pub mode: SegmentMode,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionBody {
    /// Local declarations as (count, type) runs, excluding parameters.
    pub locals: Vec<(u32, ValType)>,
    /// Body instructions without the terminating `end`.
    pub instrs: Vec<Instruction>,
}

impl FunctionBody {
    pub fn new(locals: Vec<(u32, ValType)>, instrs: Vec<Instruction>) -> Self {
        FunctionBody { locals, instrs }
    }

    pub fn local_count(&self) -> u64 {
        self.locals.iter().map(|(n, _)| u64::from(*n)).sum()
    }

    /// Type of local `idx` counting parameters first.
    pub fn local_type(&self, params: &[ValType], idx: u32) -> Option<ValType> {
        let idx = idx as u64;
        if idx < params.len() as u64 {
            return Some(params[idx as usize]);
        }
        let mut base = params.len() as u64;
        for (n, t) in &self.locals {
            if idx < base + u64::from(*n) {
                return Some(*t);
            }
            base += u64::from(*n);
        }
        None
    }
}

/// Where a custom section sat relative to the known sections.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CustomSection {
    pub name: String,
    pub data: Vec<u8>,
    /// Id of the last non-custom section preceding it (0 = none).
    pub after: u8,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WasmModule {
    pub types: Vec<FuncType>,
    pub imports: Vec<Import>,
    /// Type index for each defined function.
    pub functions: Vec<u32>,
    pub tables: Vec<TableType>,
    pub memories: Vec<Limits>,
    pub globals: Vec<Global>,
    pub exports: Vec<Export>,
    pub start: Option<u32>,
    pub elements: Vec<ElementSegment>,
    pub code: Vec<FunctionBody>,
    pub data: Vec<DataSegment>,
    pub data_count: Option<u32>,
    pub customs: Vec<CustomSection>,
}

impl WasmModule {
    pub fn num_imported_funcs(&self) -> u32 {
        self.imports
            .iter()
            .filter(|i| matches!(i.desc, ImportDesc::Func(_)))
            .count() as u32
    }

    pub fn num_imported_globals(&self) -> u32 {
        self.imports
            .iter()
            .filter(|i| matches!(i.desc, ImportDesc::Global(_)))
            .count() as u32
    }

    pub fn total_funcs(&self) -> u32 {
        self.num_imported_funcs() + self.functions.len() as u32
    }

    /// Type index of function `idx` in the joint (imports first) index space.
    pub fn func_type_idx(&self, idx: u32) -> Option<u32> {
        let mut n = 0;
        for imp in &self.imports {
            if let ImportDesc::Func(t) = imp.desc {
                if n == idx {
                    return Some(t);
                }
                n += 1;
            }
        }
        self.functions.get((idx - n) as usize).copied()
    }

    pub fn func_type(&self, idx: u32) -> Option<&FuncType> {
        self.func_type_idx(idx)
            .and_then(|t| self.types.get(t as usize))
    }

    pub fn global_type(&self, idx: u32) -> Option<GlobalType> {
        let mut n = 0;
        for imp in &self.imports {
            if let ImportDesc::Global(g) = imp.desc {
                if n == idx {
                    return Some(g);
                }
                n += 1;
            }
        }
        self.globals.get((idx - n) as usize).map(|g| g.ty)
    }

    pub fn all_tables(&self) -> Vec<TableType> {
        let mut out: Vec<TableType> = self
            .imports
            .iter()
            .filter_map(|i| match i.desc {
                ImportDesc::Table(t) => Some(t),
                _ => None,
            })
            .collect();
        out.extend(self.tables.iter().copied());
        out
    }

    pub fn all_memories(&self) -> Vec<Limits> {
        let mut out: Vec<Limits> = self
            .imports
            .iter()
            .filter_map(|i| match i.desc {
                ImportDesc::Memory(m) => Some(m),
                _ => None,
            })
            .collect();
        out.extend(self.memories.iter().copied());
        out
    }

    pub fn num_globals(&self) -> u32 {
        self.num_imported_globals() + self.globals.len() as u32
    }

    /// Body of a defined function given its joint index.
    pub fn body(&self, func_idx: u32) -> Option<&FunctionBody> {
        let n = self.num_imported_funcs();
        func_idx
            .checked_sub(n)
            .and_then(|i| self.code.get(i as usize))
    }

    pub fn body_mut(&mut self, func_idx: u32) -> Option<&mut FunctionBody> {
        let n = self.num_imported_funcs();
        func_idx
            .checked_sub(n)
            .and_then(move |i| self.code.get_mut(i as usize))
    }

    /// Index of an existing identical type, or a freshly appended one.
    pub fn intern_type(&mut self, ty: FuncType) -> u32 {
        if let Some(i) = self.types.iter().position(|t| *t == ty) {
            return i as u32;
        }
        self.types.push(ty);
        (self.types.len() - 1) as u32
    }

    /// Appends a defined function and returns its joint index.
    pub fn add_function(&mut self, ty: FuncType, body: FunctionBody) -> u32 {
        let t = self.intern_type(ty);
        self.functions.push(t);
        self.code.push(body);
        self.total_funcs() - 1
    }

    pub fn export_index(&self, name: &str, kind: ExportKind) -> Option<u32> {
        self.exports
            .iter()
            .find(|e| e.name == name && e.kind == kind)
            .map(|e| e.index)
    }

    /// Resolves a block type to its `[params] -> [results]`.
    pub fn block_signature(&self, bt: BlockType) -> Option<FuncType> {
        match bt {
            BlockType::Empty => Some(FuncType::empty()),
            BlockType::Value(t) => Some(FuncType::new(vec![], vec![t])),
            BlockType::Type(i) => self.types.get(i as usize).cloned(),
        }
    }

    /// Adds a function import after the existing function imports and shifts
    /// every reference to a defined function. Returns the import's index.
    pub fn add_func_import(&mut self, module: &str, name: &str, ty: FuncType) -> u32 {
        let at = self.num_imported_funcs();
        let t = self.intern_type(ty);
        let pos = self
            .imports
            .iter()
            .rposition(|i| matches!(i.desc, ImportDesc::Func(_)))
            .map(|p| p + 1)
            .unwrap_or(0);
        self.imports.insert(
            pos,
            Import {
                module: module.into(),
                name: name.into(),
                desc: ImportDesc::Func(t),
            },
        );
        let shift = |i: &mut u32| {
            if *i >= at {
                *i += 1;
            }
        };
        self.for_each_instr_mut(|ins| {
            if ins.is("call") || ins.is("ref.func") {
                if let Some(Immediate::Idx(i)) = ins.imms.first_mut() {
                    shift(i);
                }
            }
        });
        for e in &mut self.elements {
            if let ElemItems::Funcs(fs) = &mut e.items {
                fs.iter_mut().for_each(shift);
            }
        }
        for e in &mut self.exports {
            if e.kind == ExportKind::Func {
                shift(&mut e.index);
            }
        }
        if let Some(s) = &mut self.start {
            shift(s);
        }
        at
    }

    /// Calls `f` on every instruction of every function body and constant
    /// expression, in section order.
    pub fn for_each_instr_mut(&mut self, mut f: impl FnMut(&mut Instruction)) {
        for g in &mut self.globals {
            g.init.iter_mut().for_each(&mut f);
        }
        for e in &mut self.elements {
            if let SegmentMode::Active { offset, .. } = &mut e.mode {
                offset.iter_mut().for_each(&mut f);
            }
            if let ElemItems::Exprs(es) = &mut e.items {
                es.iter_mut().flatten().for_each(&mut f);
            }
        }
        for body in &mut self.code {
            body.instrs.iter_mut().for_each(&mut f);
        }
        for d in &mut self.data {
            if let SegmentMode::Active { offset, .. } = &mut d.mode {
                offset.iter_mut().for_each(&mut f);
            }
        }
    }
}
