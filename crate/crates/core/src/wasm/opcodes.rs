//! Static opcode table for Wasm 2.0 plus fixed-width SIMD.
//!
//! Every opcode carries its binary encoding, immediate layout, instruction
//! group, stack-type template and semantic-constraint kind. Decoding,
//! encoding, validation and the AST context extraction are all driven from
//! this one table.

use std::collections::HashMap;
use std::fmt;
use std::sync::LazyLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::types::{StackType, ValType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    Numeric,
    Vector,
    Parametric,
    Variable,
    Memory,
    Table,
    Control,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstraintKind {
    None,
    LocalRef,
    GlobalRef,
    MemoryRange,
    TableRef,
    DirectCall,
    IndirectCall,
    BlockSig,
}

/// Immediate layout of an opcode in the binary format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImmKind {
    None,
    BlockType,
    Label,
    BrTable,
    Func,
    CallIndirect,
    Local,
    Global,
    Table,
    MemArg,
    /// A single reserved zero byte (memory index in MVP encoding).
    MemZero,
    I32,
    I64,
    F32,
    F64,
    V128,
    Shuffle,
    Lane,
    MemArgLane,
    RefType,
    SelectTypes,
    /// data index followed by a zero memory byte.
    MemInit,
    Data,
    /// two zero memory bytes.
    MemCopy,
    /// element index then table index.
    TableInit,
    Elem,
    /// destination table then source table.
    TableCopy,
}

/// Compact handle into the opcode table.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Opcode(u16);

/// One row of the opcode table.
#[derive(Debug, Clone)]
pub struct InstructionMeta {
    pub opcode: Opcode,
    pub name: &'static str,
    /// 0 for single-byte opcodes, otherwise 0xFC or 0xFD.
    pub prefix: u8,
    pub code: u32,
    pub group: Group,
    pub stack_template: StackType,
    /// Arity depends on module context (calls, blocks, branches).
    pub variadic: bool,
    pub constraint: ConstraintKind,
    pub imm: ImmKind,
    /// log2 of the accessed byte width for memory accesses.
    pub access_log2: Option<u8>,
}

impl InstructionMeta {
    pub fn is_simd(&self) -> bool {
        self.prefix == 0xfd
    }

    pub fn natural_align(&self) -> Option<u32> {
        self.access_log2.map(u32::from)
    }

    pub fn access_bytes(&self) -> Option<u64> {
        self.access_log2.map(|l| 1u64 << l)
    }

    /// block, loop, if: opens a nested instruction sequence.
    pub fn is_nesting(&self) -> bool {
        matches!(self.name, "block" | "loop" | "if")
    }

    /// Unconditional transfer; the rest of the block is unreachable.
    pub fn is_terminal(&self) -> bool {
        matches!(self.name, "unreachable" | "br" | "br_table" | "return")
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown opcode `{0}`")]
pub struct UnknownOpcode(pub String);

use ConstraintKind as C;
use Group::*;
use ImmKind as I;

// (name, prefix, code, group, stack, imm, access_log2)
// Stack notation: `params:results`, one char per type:
// i=i32 l=i64 f=f32 d=f64 v=v128 r=funcref t=wildcard, `*` marks variadic.
type Row = (&'static str, u8, u32, Group, &'static str, ImmKind, i8);

#[rustfmt::skip]
const ROWS: &[Row] = &[
    ("unreachable", 0, 0x00, Control, ":", I::None, -1),
    ("nop", 0, 0x01, Control, ":", I::None, -1),
    ("block", 0, 0x02, Control, "*:*", I::BlockType, -1),
    ("loop", 0, 0x03, Control, "*:*", I::BlockType, -1),
    ("if", 0, 0x04, Control, "*i:*", I::BlockType, -1),
    ("else", 0, 0x05, Control, ":", I::None, -1),
    ("end", 0, 0x0b, Control, ":", I::None, -1),
    ("br", 0, 0x0c, Control, "*:", I::Label, -1),
    ("br_if", 0, 0x0d, Control, "*i:*", I::Label, -1),
    ("br_table", 0, 0x0e, Control, "*i:", I::BrTable, -1),
    ("return", 0, 0x0f, Control, "*:", I::None, -1),
    ("call", 0, 0x10, Control, "*:*", I::Func, -1),
    ("call_indirect", 0, 0x11, Control, "*i:*", I::CallIndirect, -1),
    ("drop", 0, 0x1a, Parametric, "t:", I::None, -1),
    ("select", 0, 0x1b, Parametric, "tti:t", I::None, -1),
    ("select_t", 0, 0x1c, Parametric, "tti:t", I::SelectTypes, -1),
    ("local.get", 0, 0x20, Variable, ":t", I::Local, -1),
    ("local.set", 0, 0x21, Variable, "t:", I::Local, -1),
    ("local.tee", 0, 0x22, Variable, "t:t", I::Local, -1),
    ("global.get", 0, 0x23, Variable, ":t", I::Global, -1),
    ("global.set", 0, 0x24, Variable, "t:", I::Global, -1),
    ("table.get", 0, 0x25, Table, "i:t", I::Table, -1),
    ("table.set", 0, 0x26, Table, "it:", I::Table, -1),
    ("i32.load", 0, 0x28, Memory, "i:i", I::MemArg, 2),
    ("i64.load", 0, 0x29, Memory, "i:l", I::MemArg, 3),
    ("f32.load", 0, 0x2a, Memory, "i:f", I::MemArg, 2),
    ("f64.load", 0, 0x2b, Memory, "i:d", I::MemArg, 3),
    ("i32.load8_s", 0, 0x2c, Memory, "i:i", I::MemArg, 0),
    ("i32.load8_u", 0, 0x2d, Memory, "i:i", I::MemArg, 0),
    ("i32.load16_s", 0, 0x2e, Memory, "i:i", I::MemArg, 1),
    ("i32.load16_u", 0, 0x2f, Memory, "i:i", I::MemArg, 1),
    ("i64.load8_s", 0, 0x30, Memory, "i:l", I::MemArg, 0),
    ("i64.load8_u", 0, 0x31, Memory, "i:l", I::MemArg, 0),
    ("i64.load16_s", 0, 0x32, Memory, "i:l", I::MemArg, 1),
    ("i64.load16_u", 0, 0x33, Memory, "i:l", I::MemArg, 1),
    ("i64.load32_s", 0, 0x34, Memory, "i:l", I::MemArg, 2),
    ("i64.load32_u", 0, 0x35, Memory, "i:l", I::MemArg, 2),
    ("i32.store", 0, 0x36, Memory, "ii:", I::MemArg, 2),
    ("i64.store", 0, 0x37, Memory, "il:", I::MemArg, 3),
    ("f32.store", 0, 0x38, Memory, "if:", I::MemArg, 2),
    ("f64.store", 0, 0x39, Memory, "id:", I::MemArg, 3),
    ("i32.store8", 0, 0x3a, Memory, "ii:", I::MemArg, 0),
    ("i32.store16", 0, 0x3b, Memory, "ii:", I::MemArg, 1),
    ("i64.store8", 0, 0x3c, Memory, "il:", I::MemArg, 0),
    ("i64.store16", 0, 0x3d, Memory, "il:", I::MemArg, 1),
    ("i64.store32", 0, 0x3e, Memory, "il:", I::MemArg, 2),
    ("memory.size", 0, 0x3f, Memory, ":i", I::MemZero, -1),
    ("memory.grow", 0, 0x40, Memory, "i:i", I::MemZero, -1),
    ("i32.const", 0, 0x41, Numeric, ":i", I::I32, -1),
    ("i64.const", 0, 0x42, Numeric, ":l", I::I64, -1),
    ("f32.const", 0, 0x43, Numeric, ":f", I::F32, -1),
    ("f64.const", 0, 0x44, Numeric, ":d", I::F64, -1),
    ("i32.eqz", 0, 0x45, Numeric, "i:i", I::None, -1),
    ("i32.eq", 0, 0x46, Numeric, "ii:i", I::None, -1),
    ("i32.ne", 0, 0x47, Numeric, "ii:i", I::None, -1),
    ("i32.lt_s", 0, 0x48, Numeric, "ii:i", I::None, -1),
    ("i32.lt_u", 0, 0x49, Numeric, "ii:i", I::None, -1),
    ("i32.gt_s", 0, 0x4a, Numeric, "ii:i", I::None, -1),
    ("i32.gt_u", 0, 0x4b, Numeric, "ii:i", I::None, -1),
    ("i32.le_s", 0, 0x4c, Numeric, "ii:i", I::None, -1),
    ("i32.le_u", 0, 0x4d, Numeric, "ii:i", I::None, -1),
    ("i32.ge_s", 0, 0x4e, Numeric, "ii:i", I::None, -1),
    ("i32.ge_u", 0, 0x4f, Numeric, "ii:i", I::None, -1),
    ("i64.eqz", 0, 0x50, Numeric, "l:i", I::None, -1),
    ("i64.eq", 0, 0x51, Numeric, "ll:i", I::None, -1),
    ("i64.ne", 0, 0x52, Numeric, "ll:i", I::None, -1),
    ("i64.lt_s", 0, 0x53, Numeric, "ll:i", I::None, -1),
    ("i64.lt_u", 0, 0x54, Numeric, "ll:i", I::None, -1),
    ("i64.gt_s", 0, 0x55, Numeric, "ll:i", I::None, -1),
    ("i64.gt_u", 0, 0x56, Numeric, "ll:i", I::None, -1),
    ("i64.le_s", 0, 0x57, Numeric, "ll:i", I::None, -1),
    ("i64.le_u", 0, 0x58, Numeric, "ll:i", I::None, -1),
    ("i64.ge_s", 0, 0x59, Numeric, "ll:i", I::None, -1),
    ("i64.ge_u", 0, 0x5a, Numeric, "ll:i", I::None, -1),
    ("f32.eq", 0, 0x5b, Numeric, "ff:i", I::None, -1),
    ("f32.ne", 0, 0x5c, Numeric, "ff:i", I::None, -1),
    ("f32.lt", 0, 0x5d, Numeric, "ff:i", I::None, -1),
    ("f32.gt", 0, 0x5e, Numeric, "ff:i", I::None, -1),
    ("f32.le", 0, 0x5f, Numeric, "ff:i", I::None, -1),
    ("f32.ge", 0, 0x60, Numeric, "ff:i", I::None, -1),
    ("f64.eq", 0, 0x61, Numeric, "dd:i", I::None, -1),
    ("f64.ne", 0, 0x62, Numeric, "dd:i", I::None, -1),
    ("f64.lt", 0, 0x63, Numeric, "dd:i", I::None, -1),
    ("f64.gt", 0, 0x64, Numeric, "dd:i", I::None, -1),
    ("f64.le", 0, 0x65, Numeric, "dd:i", I::None, -1),
    ("f64.ge", 0, 0x66, Numeric, "dd:i", I::None, -1),
    ("i32.clz", 0, 0x67, Numeric, "i:i", I::None, -1),
    ("i32.ctz", 0, 0x68, Numeric, "i:i", I::None, -1),
    ("i32.popcnt", 0, 0x69, Numeric, "i:i", I::None, -1),
    ("i32.add", 0, 0x6a, Numeric, "ii:i", I::None, -1),
    ("i32.sub", 0, 0x6b, Numeric, "ii:i", I::None, -1),
    ("i32.mul", 0, 0x6c, Numeric, "ii:i", I::None, -1),
    ("i32.div_s", 0, 0x6d, Numeric, "ii:i", I::None, -1),
    ("i32.div_u", 0, 0x6e, Numeric, "ii:i", I::None, -1),
    ("i32.rem_s", 0, 0x6f, Numeric, "ii:i", I::None, -1),
    ("i32.rem_u", 0, 0x70, Numeric, "ii:i", I::None, -1),
    ("i32.and", 0, 0x71, Numeric, "ii:i", I::None, -1),
    ("i32.or", 0, 0x72, Numeric, "ii:i", I::None, -1),
    ("i32.xor", 0, 0x73, Numeric, "ii:i", I::None, -1),
    ("i32.shl", 0, 0x74, Numeric, "ii:i", I::None, -1),
    ("i32.shr_s", 0, 0x75, Numeric, "ii:i", I::None, -1),
    ("i32.shr_u", 0, 0x76, Numeric, "ii:i", I::None, -1),
    ("i32.rotl", 0, 0x77, Numeric, "ii:i", I::None, -1),
    ("i32.rotr", 0, 0x78, Numeric, "ii:i", I::None, -1),
    ("i64.clz", 0, 0x79, Numeric, "l:l", I::None, -1),
    ("i64.ctz", 0, 0x7a, Numeric, "l:l", I::None, -1),
    ("i64.popcnt", 0, 0x7b, Numeric, "l:l", I::None, -1),
    ("i64.add", 0, 0x7c, Numeric, "ll:l", I::None, -1),
    ("i64.sub", 0, 0x7d, Numeric, "ll:l", I::None, -1),
    ("i64.mul", 0, 0x7e, Numeric, "ll:l", I::None, -1),
    ("i64.div_s", 0, 0x7f, Numeric, "ll:l", I::None, -1),
    ("i64.div_u", 0, 0x80, Numeric, "ll:l", I::None, -1),
    ("i64.rem_s", 0, 0x81, Numeric, "ll:l", I::None, -1),
    ("i64.rem_u", 0, 0x82, Numeric, "ll:l", I::None, -1),
    ("i64.and", 0, 0x83, Numeric, "ll:l", I::None, -1),
    ("i64.or", 0, 0x84, Numeric, "ll:l", I::None, -1),
    ("i64.xor", 0, 0x85, Numeric, "ll:l", I::None, -1),
    ("i64.shl", 0, 0x86, Numeric, "ll:l", I::None, -1),
    ("i64.shr_s", 0, 0x87, Numeric, "ll:l", I::None, -1),
    ("i64.shr_u", 0, 0x88, Numeric, "ll:l", I::None, -1),
    ("i64.rotl", 0, 0x89, Numeric, "ll:l", I::None, -1),
    ("i64.rotr", 0, 0x8a, Numeric, "ll:l", I::None, -1),
    ("f32.abs", 0, 0x8b, Numeric, "f:f", I::None, -1),
    ("f32.neg", 0, 0x8c, Numeric, "f:f", I::None, -1),
    ("f32.ceil", 0, 0x8d, Numeric, "f:f", I::None, -1),
    ("f32.floor", 0, 0x8e, Numeric, "f:f", I::None, -1),
    ("f32.trunc", 0, 0x8f, Numeric, "f:f", I::None, -1),
    ("f32.nearest", 0, 0x90, Numeric, "f:f", I::None, -1),
    ("f32.sqrt", 0, 0x91, Numeric, "f:f", I::None, -1),
    ("f32.add", 0, 0x92, Numeric, "ff:f", I::None, -1),
    ("f32.sub", 0, 0x93, Numeric, "ff:f", I::None, -1),
    ("f32.mul", 0, 0x94, Numeric, "ff:f", I::None, -1),
    ("f32.div", 0, 0x95, Numeric, "ff:f", I::None, -1),
    ("f32.min", 0, 0x96, Numeric, "ff:f", I::None, -1),
    ("f32.max", 0, 0x97, Numeric, "ff:f", I::None, -1),
    ("f32.copysign", 0, 0x98, Numeric, "ff:f", I::None, -1),
    ("f64.abs", 0, 0x99, Numeric, "d:d", I::None, -1),
    ("f64.neg", 0, 0x9a, Numeric, "d:d", I::None, -1),
    ("f64.ceil", 0, 0x9b, Numeric, "d:d", I::None, -1),
    ("f64.floor", 0, 0x9c, Numeric, "d:d", I::None, -1),
    ("f64.trunc", 0, 0x9d, Numeric, "d:d", I::None, -1),
    ("f64.nearest", 0, 0x9e, Numeric, "d:d", I::None, -1),
    ("f64.sqrt", 0, 0x9f, Numeric, "d:d", I::None, -1),
    ("f64.add", 0, 0xa0, Numeric, "dd:d", I::None, -1),
    ("f64.sub", 0, 0xa1, Numeric, "dd:d", I::None, -1),
    ("f64.mul", 0, 0xa2, Numeric, "dd:d", I::None, -1),
    ("f64.div", 0, 0xa3, Numeric, "dd:d", I::None, -1),
    ("f64.min", 0, 0xa4, Numeric, "dd:d", I::None, -1),
    ("f64.max", 0, 0xa5, Numeric, "dd:d", I::None, -1),
    ("f64.copysign", 0, 0xa6, Numeric, "dd:d", I::None, -1),
    ("i32.wrap_i64", 0, 0xa7, Numeric, "l:i", I::None, -1),
    ("i32.trunc_f32_s", 0, 0xa8, Numeric, "f:i", I::None, -1),
    ("i32.trunc_f32_u", 0, 0xa9, Numeric, "f:i", I::None, -1),
    ("i32.trunc_f64_s", 0, 0xaa, Numeric, "d:i", I::None, -1),
    ("i32.trunc_f64_u", 0, 0xab, Numeric, "d:i", I::None, -1),
    ("i64.extend_i32_s", 0, 0xac, Numeric, "i:l", I::None, -1),
    ("i64.extend_i32_u", 0, 0xad, Numeric, "i:l", I::None, -1),
    ("i64.trunc_f32_s", 0, 0xae, Numeric, "f:l", I::None, -1),
    ("i64.trunc_f32_u", 0, 0xaf, Numeric, "f:l", I::None, -1),
    ("i64.trunc_f64_s", 0, 0xb0, Numeric, "d:l", I::None, -1),
    ("i64.trunc_f64_u", 0, 0xb1, Numeric, "d:l", I::None, -1),
    ("f32.convert_i32_s", 0, 0xb2, Numeric, "i:f", I::None, -1),
    ("f32.convert_i32_u", 0, 0xb3, Numeric, "i:f", I::None, -1),
    ("f32.convert_i64_s", 0, 0xb4, Numeric, "l:f", I::None, -1),
    ("f32.convert_i64_u", 0, 0xb5, Numeric, "l:f", I::None, -1),
    ("f32.demote_f64", 0, 0xb6, Numeric, "d:f", I::None, -1),
    ("f64.convert_i32_s", 0, 0xb7, Numeric, "i:d", I::None, -1),
    ("f64.convert_i32_u", 0, 0xb8, Numeric, "i:d", I::None, -1),
    ("f64.convert_i64_s", 0, 0xb9, Numeric, "l:d", I::None, -1),
    ("f64.convert_i64_u", 0, 0xba, Numeric, "l:d", I::None, -1),
    ("f64.promote_f32", 0, 0xbb, Numeric, "f:d", I::None, -1),
    ("i32.reinterpret_f32", 0, 0xbc, Numeric, "f:i", I::None, -1),
    ("i64.reinterpret_f64", 0, 0xbd, Numeric, "d:l", I::None, -1),
    ("f32.reinterpret_i32", 0, 0xbe, Numeric, "i:f", I::None, -1),
    ("f64.reinterpret_i64", 0, 0xbf, Numeric, "l:d", I::None, -1),
    ("i32.extend8_s", 0, 0xc0, Numeric, "i:i", I::None, -1),
    ("i32.extend16_s", 0, 0xc1, Numeric, "i:i", I::None, -1),
    ("i64.extend8_s", 0, 0xc2, Numeric, "l:l", I::None, -1),
    ("i64.extend16_s", 0, 0xc3, Numeric, "l:l", I::None, -1),
    ("i64.extend32_s", 0, 0xc4, Numeric, "l:l", I::None, -1),
    ("ref.null", 0, 0xd0, Table, ":t", I::RefType, -1),
    ("ref.is_null", 0, 0xd1, Table, "t:i", I::None, -1),
    ("ref.func", 0, 0xd2, Table, ":r", I::Func, -1),
    ("i32.trunc_sat_f32_s", 0xfc, 0, Numeric, "f:i", I::None, -1),
    ("i32.trunc_sat_f32_u", 0xfc, 1, Numeric, "f:i", I::None, -1),
    ("i32.trunc_sat_f64_s", 0xfc, 2, Numeric, "d:i", I::None, -1),
    ("i32.trunc_sat_f64_u", 0xfc, 3, Numeric, "d:i", I::None, -1),
    ("i64.trunc_sat_f32_s", 0xfc, 4, Numeric, "f:l", I::None, -1),
    ("i64.trunc_sat_f32_u", 0xfc, 5, Numeric, "f:l", I::None, -1),
    ("i64.trunc_sat_f64_s", 0xfc, 6, Numeric, "d:l", I::None, -1),
    ("i64.trunc_sat_f64_u", 0xfc, 7, Numeric, "d:l", I::None, -1),
    ("memory.init", 0xfc, 8, Memory, "iii:", I::MemInit, -1),
    ("data.drop", 0xfc, 9, Memory, ":", I::Data, -1),
    ("memory.copy", 0xfc, 10, Memory, "iii:", I::MemCopy, -1),
    ("memory.fill", 0xfc, 11, Memory, "iii:", I::MemZero, -1),
    ("table.init", 0xfc, 12, Table, "iii:", I::TableInit, -1),
    ("elem.drop", 0xfc, 13, Table, ":", I::Elem, -1),
    ("table.copy", 0xfc, 14, Table, "iii:", I::TableCopy, -1),
    ("table.grow", 0xfc, 15, Table, "ti:i", I::Table, -1),
    ("table.size", 0xfc, 16, Table, ":i", I::Table, -1),
    ("table.fill", 0xfc, 17, Table, "iti:", I::Table, -1),
    ("v128.load", 0xfd, 0, Memory, "i:v", I::MemArg, 4),
    ("v128.load8x8_s", 0xfd, 1, Memory, "i:v", I::MemArg, 3),
    ("v128.load8x8_u", 0xfd, 2, Memory, "i:v", I::MemArg, 3),
    ("v128.load16x4_s", 0xfd, 3, Memory, "i:v", I::MemArg, 3),
    ("v128.load16x4_u", 0xfd, 4, Memory, "i:v", I::MemArg, 3),
    ("v128.load32x2_s", 0xfd, 5, Memory, "i:v", I::MemArg, 3),
    ("v128.load32x2_u", 0xfd, 6, Memory, "i:v", I::MemArg, 3),
    ("v128.load8_splat", 0xfd, 7, Memory, "i:v", I::MemArg, 0),
    ("v128.load16_splat", 0xfd, 8, Memory, "i:v", I::MemArg, 1),
    ("v128.load32_splat", 0xfd, 9, Memory, "i:v", I::MemArg, 2),
    ("v128.load64_splat", 0xfd, 10, Memory, "i:v", I::MemArg, 3),
    ("v128.store", 0xfd, 11, Memory, "iv:", I::MemArg, 4),
    ("v128.const", 0xfd, 12, Vector, ":v", I::V128, -1),
    ("i8x16.shuffle", 0xfd, 13, Vector, "vv:v", I::Shuffle, -1),
    ("i8x16.swizzle", 0xfd, 14, Vector, "vv:v", I::None, -1),
    ("i8x16.splat", 0xfd, 15, Vector, "i:v", I::None, -1),
    ("i16x8.splat", 0xfd, 16, Vector, "i:v", I::None, -1),
    ("i32x4.splat", 0xfd, 17, Vector, "i:v", I::None, -1),
    ("i64x2.splat", 0xfd, 18, Vector, "l:v", I::None, -1),
    ("f32x4.splat", 0xfd, 19, Vector, "f:v", I::None, -1),
    ("f64x2.splat", 0xfd, 20, Vector, "d:v", I::None, -1),
    ("i8x16.extract_lane_s", 0xfd, 21, Vector, "v:i", I::Lane, -1),
    ("i8x16.extract_lane_u", 0xfd, 22, Vector, "v:i", I::Lane, -1),
    ("i8x16.replace_lane", 0xfd, 23, Vector, "vi:v", I::Lane, -1),
    ("i16x8.extract_lane_s", 0xfd, 24, Vector, "v:i", I::Lane, -1),
    ("i16x8.extract_lane_u", 0xfd, 25, Vector, "v:i", I::Lane, -1),
    ("i16x8.replace_lane", 0xfd, 26, Vector, "vi:v", I::Lane, -1),
    ("i32x4.extract_lane", 0xfd, 27, Vector, "v:i", I::Lane, -1),
    ("i32x4.replace_lane", 0xfd, 28, Vector, "vi:v", I::Lane, -1),
    ("i64x2.extract_lane", 0xfd, 29, Vector, "v:l", I::Lane, -1),
    ("i64x2.replace_lane", 0xfd, 30, Vector, "vl:v", I::Lane, -1),
    ("f32x4.extract_lane", 0xfd, 31, Vector, "v:f", I::Lane, -1),
    ("f32x4.replace_lane", 0xfd, 32, Vector, "vf:v", I::Lane, -1),
    ("f64x2.extract_lane", 0xfd, 33, Vector, "v:d", I::Lane, -1),
    ("f64x2.replace_lane", 0xfd, 34, Vector, "vd:v", I::Lane, -1),
    ("i8x16.eq", 0xfd, 35, Vector, "vv:v", I::None, -1),
    ("i8x16.ne", 0xfd, 36, Vector, "vv:v", I::None, -1),
    ("i8x16.lt_s", 0xfd, 37, Vector, "vv:v", I::None, -1),
    ("i8x16.lt_u", 0xfd, 38, Vector, "vv:v", I::None, -1),
    ("i8x16.gt_s", 0xfd, 39, Vector, "vv:v", I::None, -1),
    ("i8x16.gt_u", 0xfd, 40, Vector, "vv:v", I::None, -1),
    ("i8x16.le_s", 0xfd, 41, Vector, "vv:v", I::None, -1),
    ("i8x16.le_u", 0xfd, 42, Vector, "vv:v", I::None, -1),
    ("i8x16.ge_s", 0xfd, 43, Vector, "vv:v", I::None, -1),
    ("i8x16.ge_u", 0xfd, 44, Vector, "vv:v", I::None, -1),
    ("i16x8.eq", 0xfd, 45, Vector, "vv:v", I::None, -1),
    ("i16x8.ne", 0xfd, 46, Vector, "vv:v", I::None, -1),
    ("i16x8.lt_s", 0xfd, 47, Vector, "vv:v", I::None, -1),
    ("i16x8.lt_u", 0xfd, 48, Vector, "vv:v", I::None, -1),
    ("i16x8.gt_s", 0xfd, 49, Vector, "vv:v", I::None, -1),
    ("i16x8.gt_u", 0xfd, 50, Vector, "vv:v", I::None, -1),
    ("i16x8.le_s", 0xfd, 51, Vector, "vv:v", I::None, -1),
    ("i16x8.le_u", 0xfd, 52, Vector, "vv:v", I::None, -1),
    ("i16x8.ge_s", 0xfd, 53, Vector, "vv:v", I::None, -1),
    ("i16x8.ge_u", 0xfd, 54, Vector, "vv:v", I::None, -1),
    ("i32x4.eq", 0xfd, 55, Vector, "vv:v", I::None, -1),
    ("i32x4.ne", 0xfd, 56, Vector, "vv:v", I::None, -1),
    ("i32x4.lt_s", 0xfd, 57, Vector, "vv:v", I::None, -1),
    ("i32x4.lt_u", 0xfd, 58, Vector, "vv:v", I::None, -1),
    ("i32x4.gt_s", 0xfd, 59, Vector, "vv:v", I::None, -1),
    ("i32x4.gt_u", 0xfd, 60, Vector, "vv:v", I::None, -1),
    ("i32x4.le_s", 0xfd, 61, Vector, "vv:v", I::None, -1),
    ("i32x4.le_u", 0xfd, 62, Vector, "vv:v", I::None, -1),
    ("i32x4.ge_s", 0xfd, 63, Vector, "vv:v", I::None, -1),
    ("i32x4.ge_u", 0xfd, 64, Vector, "vv:v", I::None, -1),
    ("f32x4.eq", 0xfd, 65, Vector, "vv:v", I::None, -1),
    ("f32x4.ne", 0xfd, 66, Vector, "vv:v", I::None, -1),
    ("f32x4.lt", 0xfd, 67, Vector, "vv:v", I::None, -1),
    ("f32x4.gt", 0xfd, 68, Vector, "vv:v", I::None, -1),
    ("f32x4.le", 0xfd, 69, Vector, "vv:v", I::None, -1),
    ("f32x4.ge", 0xfd, 70, Vector, "vv:v", I::None, -1),
    ("f64x2.eq", 0xfd, 71, Vector, "vv:v", I::None, -1),
    ("f64x2.ne", 0xfd, 72, Vector, "vv:v", I::None, -1),
    ("f64x2.lt", 0xfd, 73, Vector, "vv:v", I::None, -1),
    ("f64x2.gt", 0xfd, 74, Vector, "vv:v", I::None, -1),
    ("f64x2.le", 0xfd, 75, Vector, "vv:v", I::None, -1),
    ("f64x2.ge", 0xfd, 76, Vector, "vv:v", I::None, -1),
    ("v128.not", 0xfd, 77, Vector, "v:v", I::None, -1),
    ("v128.and", 0xfd, 78, Vector, "vv:v", I::None, -1),
    ("v128.andnot", 0xfd, 79, Vector, "vv:v", I::None, -1),
    ("v128.or", 0xfd, 80, Vector, "vv:v", I::None, -1),
    ("v128.xor", 0xfd, 81, Vector, "vv:v", I::None, -1),
    ("v128.bitselect", 0xfd, 82, Vector, "vvv:v", I::None, -1),
    ("v128.any_true", 0xfd, 83, Vector, "v:i", I::None, -1),
    ("v128.load8_lane", 0xfd, 84, Memory, "iv:v", I::MemArgLane, 0),
    ("v128.load16_lane", 0xfd, 85, Memory, "iv:v", I::MemArgLane, 1),
    ("v128.load32_lane", 0xfd, 86, Memory, "iv:v", I::MemArgLane, 2),
    ("v128.load64_lane", 0xfd, 87, Memory, "iv:v", I::MemArgLane, 3),
    ("v128.store8_lane", 0xfd, 88, Memory, "iv:", I::MemArgLane, 0),
    ("v128.store16_lane", 0xfd, 89, Memory, "iv:", I::MemArgLane, 1),
    ("v128.store32_lane", 0xfd, 90, Memory, "iv:", I::MemArgLane, 2),
    ("v128.store64_lane", 0xfd, 91, Memory, "iv:", I::MemArgLane, 3),
    ("v128.load32_zero", 0xfd, 92, Memory, "i:v", I::MemArg, 2),
    ("v128.load64_zero", 0xfd, 93, Memory, "i:v", I::MemArg, 3),
    ("f32x4.demote_f64x2_zero", 0xfd, 94, Vector, "v:v", I::None, -1),
    ("f64x2.promote_low_f32x4", 0xfd, 95, Vector, "v:v", I::None, -1),
    ("i8x16.abs", 0xfd, 96, Vector, "v:v", I::None, -1),
    ("i8x16.neg", 0xfd, 97, Vector, "v:v", I::None, -1),
    ("i8x16.popcnt", 0xfd, 98, Vector, "v:v", I::None, -1),
    ("i8x16.all_true", 0xfd, 99, Vector, "v:i", I::None, -1),
    ("i8x16.bitmask", 0xfd, 100, Vector, "v:i", I::None, -1),
    ("i8x16.narrow_i16x8_s", 0xfd, 101, Vector, "vv:v", I::None, -1),
    ("i8x16.narrow_i16x8_u", 0xfd, 102, Vector, "vv:v", I::None, -1),
    ("f32x4.ceil", 0xfd, 103, Vector, "v:v", I::None, -1),
    ("f32x4.floor", 0xfd, 104, Vector, "v:v", I::None, -1),
    ("f32x4.trunc", 0xfd, 105, Vector, "v:v", I::None, -1),
    ("f32x4.nearest", 0xfd, 106, Vector, "v:v", I::None, -1),
    ("i8x16.shl", 0xfd, 107, Vector, "vi:v", I::None, -1),
    ("i8x16.shr_s", 0xfd, 108, Vector, "vi:v", I::None, -1),
    ("i8x16.shr_u", 0xfd, 109, Vector, "vi:v", I::None, -1),
    ("i8x16.add", 0xfd, 110, Vector, "vv:v", I::None, -1),
    ("i8x16.add_sat_s", 0xfd, 111, Vector, "vv:v", I::None, -1),
    ("i8x16.add_sat_u", 0xfd, 112, Vector, "vv:v", I::None, -1),
    ("i8x16.sub", 0xfd, 113, Vector, "vv:v", I::None, -1),
    ("i8x16.sub_sat_s", 0xfd, 114, Vector, "vv:v", I::None, -1),
    ("i8x16.sub_sat_u", 0xfd, 115, Vector, "vv:v", I::None, -1),
    ("f64x2.ceil", 0xfd, 116, Vector, "v:v", I::None, -1),
    ("f64x2.floor", 0xfd, 117, Vector, "v:v", I::None, -1),
    ("i8x16.min_s", 0xfd, 118, Vector, "vv:v", I::None, -1),
    ("i8x16.min_u", 0xfd, 119, Vector, "vv:v", I::None, -1),
    ("i8x16.max_s", 0xfd, 120, Vector, "vv:v", I::None, -1),
    ("i8x16.max_u", 0xfd, 121, Vector, "vv:v", I::None, -1),
    ("f64x2.trunc", 0xfd, 122, Vector, "v:v", I::None, -1),
    ("i8x16.avgr_u", 0xfd, 123, Vector, "vv:v", I::None, -1),
    ("i16x8.extadd_pairwise_i8x16_s", 0xfd, 124, Vector, "v:v", I::None, -1),
    ("i16x8.extadd_pairwise_i8x16_u", 0xfd, 125, Vector, "v:v", I::None, -1),
    ("i32x4.extadd_pairwise_i16x8_s", 0xfd, 126, Vector, "v:v", I::None, -1),
    ("i32x4.extadd_pairwise_i16x8_u", 0xfd, 127, Vector, "v:v", I::None, -1),
    ("i16x8.abs", 0xfd, 128, Vector, "v:v", I::None, -1),
    ("i16x8.neg", 0xfd, 129, Vector, "v:v", I::None, -1),
    ("i16x8.q15mulr_sat_s", 0xfd, 130, Vector, "vv:v", I::None, -1),
    ("i16x8.all_true", 0xfd, 131, Vector, "v:i", I::None, -1),
    ("i16x8.bitmask", 0xfd, 132, Vector, "v:i", I::None, -1),
    ("i16x8.narrow_i32x4_s", 0xfd, 133, Vector, "vv:v", I::None, -1),
    ("i16x8.narrow_i32x4_u", 0xfd, 134, Vector, "vv:v", I::None, -1),
    ("i16x8.extend_low_i8x16_s", 0xfd, 135, Vector, "v:v", I::None, -1),
    ("i16x8.extend_high_i8x16_s", 0xfd, 136, Vector, "v:v", I::None, -1),
    ("i16x8.extend_low_i8x16_u", 0xfd, 137, Vector, "v:v", I::None, -1),
    ("i16x8.extend_high_i8x16_u", 0xfd, 138, Vector, "v:v", I::None, -1),
    ("i16x8.shl", 0xfd, 139, Vector, "vi:v", I::None, -1),
    ("i16x8.shr_s", 0xfd, 140, Vector, "vi:v", I::None, -1),
    ("i16x8.shr_u", 0xfd, 141, Vector, "vi:v", I::None, -1),
    ("i16x8.add", 0xfd, 142, Vector, "vv:v", I::None, -1),
    ("i16x8.add_sat_s", 0xfd, 143, Vector, "vv:v", I::None, -1),
    ("i16x8.add_sat_u", 0xfd, 144, Vector, "vv:v", I::None, -1),
    ("i16x8.sub", 0xfd, 145, Vector, "vv:v", I::None, -1),
    ("i16x8.sub_sat_s", 0xfd, 146, Vector, "vv:v", I::None, -1),
    ("i16x8.sub_sat_u", 0xfd, 147, Vector, "vv:v", I::None, -1),
    ("f64x2.nearest", 0xfd, 148, Vector, "v:v", I::None, -1),
    ("i16x8.mul", 0xfd, 149, Vector, "vv:v", I::None, -1),
    ("i16x8.min_s", 0xfd, 150, Vector, "vv:v", I::None, -1),
    ("i16x8.min_u", 0xfd, 151, Vector, "vv:v", I::None, -1),
    ("i16x8.max_s", 0xfd, 152, Vector, "vv:v", I::None, -1),
    ("i16x8.max_u", 0xfd, 153, Vector, "vv:v", I::None, -1),
    ("i16x8.avgr_u", 0xfd, 155, Vector, "vv:v", I::None, -1),
    ("i16x8.extmul_low_i8x16_s", 0xfd, 156, Vector, "vv:v", I::None, -1),
    ("i16x8.extmul_high_i8x16_s", 0xfd, 157, Vector, "vv:v", I::None, -1),
    ("i16x8.extmul_low_i8x16_u", 0xfd, 158, Vector, "vv:v", I::None, -1),
    ("i16x8.extmul_high_i8x16_u", 0xfd, 159, Vector, "vv:v", I::None, -1),
    ("i32x4.abs", 0xfd, 160, Vector, "v:v", I::None, -1),
    ("i32x4.neg", 0xfd, 161, Vector, "v:v", I::None, -1),
    ("i32x4.all_true", 0xfd, 163, Vector, "v:i", I::None, -1),
    ("i32x4.bitmask", 0xfd, 164, Vector, "v:i", I::None, -1),
    ("i32x4.extend_low_i16x8_s", 0xfd, 167, Vector, "v:v", I::None, -1),
    ("i32x4.extend_high_i16x8_s", 0xfd, 168, Vector, "v:v", I::None, -1),
    ("i32x4.extend_low_i16x8_u", 0xfd, 169, Vector, "v:v", I::None, -1),
    ("i32x4.extend_high_i16x8_u", 0xfd, 170, Vector, "v:v", I::None, -1),
    ("i32x4.shl", 0xfd, 171, Vector, "vi:v", I::None, -1),
    ("i32x4.shr_s", 0xfd, 172, Vector, "vi:v", I::None, -1),
    ("i32x4.shr_u", 0xfd, 173, Vector, "vi:v", I::None, -1),
    ("i32x4.add", 0xfd, 174, Vector, "vv:v", I::None, -1),
    ("i32x4.sub", 0xfd, 177, Vector, "vv:v", I::None, -1),
    ("i32x4.mul", 0xfd, 181, Vector, "vv:v", I::None, -1),
    ("i32x4.min_s", 0xfd, 182, Vector, "vv:v", I::None, -1),
    ("i32x4.min_u", 0xfd, 183, Vector, "vv:v", I::None, -1),
    ("i32x4.max_s", 0xfd, 184, Vector, "vv:v", I::None, -1),
    ("i32x4.max_u", 0xfd, 185, Vector, "vv:v", I::None, -1),
    ("i32x4.dot_i16x8_s", 0xfd, 186, Vector, "vv:v", I::None, -1),
    ("i32x4.extmul_low_i16x8_s", 0xfd, 188, Vector, "vv:v", I::None, -1),
    ("i32x4.extmul_high_i16x8_s", 0xfd, 189, Vector, "vv:v", I::None, -1),
    ("i32x4.extmul_low_i16x8_u", 0xfd, 190, Vector, "vv:v", I::None, -1),
    ("i32x4.extmul_high_i16x8_u", 0xfd, 191, Vector, "vv:v", I::None, -1),
    ("i64x2.abs", 0xfd, 192, Vector, "v:v", I::None, -1),
    ("i64x2.neg", 0xfd, 193, Vector, "v:v", I::None, -1),
    ("i64x2.all_true", 0xfd, 195, Vector, "v:i", I::None, -1),
    ("i64x2.bitmask", 0xfd, 196, Vector, "v:i", I::None, -1),
    ("i64x2.extend_low_i32x4_s", 0xfd, 199, Vector, "v:v", I::None, -1),
    ("i64x2.extend_high_i32x4_s", 0xfd, 200, Vector, "v:v", I::None, -1),
    ("i64x2.extend_low_i32x4_u", 0xfd, 201, Vector, "v:v", I::None, -1),
    ("i64x2.extend_high_i32x4_u", 0xfd, 202, Vector, "v:v", I::None, -1),
    ("i64x2.shl", 0xfd, 203, Vector, "vi:v", I::None, -1),
    ("i64x2.shr_s", 0xfd, 204, Vector, "vi:v", I::None, -1),
    ("i64x2.shr_u", 0xfd, 205, Vector, "vi:v", I::None, -1),
    ("i64x2.add", 0xfd, 206, Vector, "vv:v", I::None, -1),
    ("i64x2.sub", 0xfd, 209, Vector, "vv:v", I::None, -1),
    ("i64x2.mul", 0xfd, 213, Vector, "vv:v", I::None, -1),
    ("i64x2.eq", 0xfd, 214, Vector, "vv:v", I::None, -1),
    ("i64x2.ne", 0xfd, 215, Vector, "vv:v", I::None, -1),
    ("i64x2.lt_s", 0xfd, 216, Vector, "vv:v", I::None, -1),
    ("i64x2.gt_s", 0xfd, 217, Vector, "vv:v", I::None, -1),
    ("i64x2.le_s", 0xfd, 218, Vector, "vv:v", I::None, -1),
    ("i64x2.ge_s", 0xfd, 219, Vector, "vv:v", I::None, -1),
    ("i64x2.extmul_low_i32x4_s", 0xfd, 220, Vector, "vv:v", I::None, -1),
    ("i64x2.extmul_high_i32x4_s", 0xfd, 221, Vector, "vv:v", I::None, -1),
    ("i64x2.extmul_low_i32x4_u", 0xfd, 222, Vector, "vv:v", I::None, -1),
    ("i64x2.extmul_high_i32x4_u", 0xfd, 223, Vector, "vv:v", I::None, -1),
    ("f32x4.abs", 0xfd, 224, Vector, "v:v", I::None, -1),
    ("f32x4.neg", 0xfd, 225, Vector, "v:v", I::None, -1),
    ("f32x4.sqrt", 0xfd, 227, Vector, "v:v", I::None, -1),
    ("f32x4.add", 0xfd, 228, Vector, "vv:v", I::None, -1),
    ("f32x4.sub", 0xfd, 229, Vector, "vv:v", I::None, -1),
    ("f32x4.mul", 0xfd, 230, Vector, "vv:v", I::None, -1),
    ("f32x4.div", 0xfd, 231, Vector, "vv:v", I::None, -1),
    ("f32x4.min", 0xfd, 232, Vector, "vv:v", I::None, -1),
    ("f32x4.max", 0xfd, 233, Vector, "vv:v", I::None, -1),
    ("f32x4.pmin", 0xfd, 234, Vector, "vv:v", I::None, -1),
    ("f32x4.pmax", 0xfd, 235, Vector, "vv:v", I::None, -1),
    ("f64x2.abs", 0xfd, 236, Vector, "v:v", I::None, -1),
    ("f64x2.neg", 0xfd, 237, Vector, "v:v", I::None, -1),
    ("f64x2.sqrt", 0xfd, 239, Vector, "v:v", I::None, -1),
    ("f64x2.add", 0xfd, 240, Vector, "vv:v", I::None, -1),
    ("f64x2.sub", 0xfd, 241, Vector, "vv:v", I::None, -1),
    ("f64x2.mul", 0xfd, 242, Vector, "vv:v", I::None, -1),
    ("f64x2.div", 0xfd, 243, Vector, "vv:v", I::None, -1),
    ("f64x2.min", 0xfd, 244, Vector, "vv:v", I::None, -1),
    ("f64x2.max", 0xfd, 245, Vector, "vv:v", I::None, -1),
    ("f64x2.pmin", 0xfd, 246, Vector, "vv:v", I::None, -1),
    ("f64x2.pmax", 0xfd, 247, Vector, "vv:v", I::None, -1),
    ("i32x4.trunc_sat_f32x4_s", 0xfd, 248, Vector, "v:v", I::None, -1),
    ("i32x4.trunc_sat_f32x4_u", 0xfd, 249, Vector, "v:v", I::None, -1),
    ("f32x4.convert_i32x4_s", 0xfd, 250, Vector, "v:v", I::None, -1),
    ("f32x4.convert_i32x4_u", 0xfd, 251, Vector, "v:v", I::None, -1),
    ("i32x4.trunc_sat_f64x2_s_zero", 0xfd, 252, Vector, "v:v", I::None, -1),
    ("i32x4.trunc_sat_f64x2_u_zero", 0xfd, 253, Vector, "v:v", I::None, -1),
    ("f64x2.convert_low_i32x4_s", 0xfd, 254, Vector, "v:v", I::None, -1),
    ("f64x2.convert_low_i32x4_u", 0xfd, 255, Vector, "v:v", I::None, -1),
];

fn parse_types(s: &str) -> (Vec<ValType>, bool) {
    let mut variadic = false;
    let mut out = Vec::new();
    for c in s.chars() {
        out.push(match c {
            'i' => ValType::I32,
            'l' => ValType::I64,
            'f' => ValType::F32,
            'd' => ValType::F64,
            'v' => ValType::V128,
            'r' => ValType::FuncRef,
            't' => ValType::Wildcard,
            '*' => {
                variadic = true;
                continue;
            }
            other => panic!("bad stack notation {other:?}"),
        });
    }
    (out, variadic)
}

fn constraint_for(name: &str, group: Group) -> ConstraintKind {
    match group {
        Group::Variable if name.starts_with("local.") => C::LocalRef,
        Group::Variable => C::GlobalRef,
        Group::Memory => C::MemoryRange,
        Group::Table if name.starts_with("ref.") => C::None,
        Group::Table => C::TableRef,
        Group::Control => match name {
            "block" | "loop" | "if" | "br" | "br_if" | "br_table" | "return" => C::BlockSig,
            "call" => C::DirectCall,
            "call_indirect" => C::IndirectCall,
            _ => C::None,
        },
        _ => C::None,
    }
}

struct Table {
    rows: Vec<InstructionMeta>,
    by_name: HashMap<&'static str, Opcode>,
    single: [Option<Opcode>; 256],
    prefixed: HashMap<(u8, u32), Opcode>,
}

static TABLE: LazyLock<Table> = LazyLock::new(|| {
    let mut rows = Vec::with_capacity(ROWS.len());
    let mut by_name = HashMap::new();
    let mut single = [None; 256];
    let mut prefixed = HashMap::new();
    for (i, &(name, prefix, code, group, stack, imm, access)) in ROWS.iter().enumerate() {
        let op = Opcode(i as u16);
        let (p, r) = stack.split_once(':').expect("stack notation has ':'");
        let (params, pv) = parse_types(p);
        let (results, rv) = parse_types(r);
        rows.push(InstructionMeta {
            opcode: op,
            name,
            prefix,
            code,
            group,
            stack_template: StackType::new(params, results),
            variadic: pv || rv,
            constraint: constraint_for(name, group),
            imm,
            access_log2: (access >= 0).then_some(access as u8),
        });
        assert!(by_name.insert(name, op).is_none(), "duplicate opcode {name}");
        if prefix == 0 {
            single[code as usize] = Some(op);
        } else {
            prefixed.insert((prefix, code), op);
        }
    }
    Table {
        rows,
        by_name,
        single,
        prefixed,
    }
});

impl Opcode {
    pub fn meta(self) -> &'static InstructionMeta {
        &TABLE.rows[self.0 as usize]
    }

    pub fn name(self) -> &'static str {
        self.meta().name
    }

    pub fn from_name(name: &str) -> Result<Opcode, UnknownOpcode> {
        TABLE
            .by_name
            .get(name)
            .copied()
            .ok_or_else(|| UnknownOpcode(name.to_string()))
    }

    /// Lookup by binary encoding. `prefix` is 0 for single-byte opcodes.
    pub fn from_encoding(prefix: u8, code: u32) -> Option<Opcode> {
        if prefix == 0 {
            TABLE.single.get(code as usize).copied().flatten()
        } else {
            TABLE.prefixed.get(&(prefix, code)).copied()
        }
    }

    pub fn all() -> impl Iterator<Item = Opcode> {
        (0..TABLE.rows.len()).map(|i| Opcode(i as u16))
    }

    pub fn is(self, name: &str) -> bool {
        self.name() == name
    }
}

/// Convenience for building instructions by name; panics on unknown names,
/// so only use it with literals.
pub fn op(name: &str) -> Opcode {
    Opcode::from_name(name).unwrap_or_else(|e| panic!("{e}"))
}

/// Metadata row for a canonical opcode name.
pub fn instruction_meta(name: &str) -> Result<&'static InstructionMeta, UnknownOpcode> {
    Opcode::from_name(name).map(Opcode::meta)
}

impl fmt::Debug for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Opcode {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Opcode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        Opcode::from_name(&name).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simd_inventory_is_236() {
        assert_eq!(Opcode::all().filter(|o| o.meta().is_simd()).count(), 236);
    }

    #[test]
    fn every_opcode_has_metadata() {
        for o in Opcode::all() {
            let m = instruction_meta(o.name()).unwrap();
            assert_eq!(m.opcode, o);
            assert_eq!(Opcode::from_encoding(m.prefix, m.code), Some(o));
        }
        assert!(instruction_meta("i32.frobnicate").is_err());
    }

    #[test]
    fn table_rows_match_reference_examples() {
        let add = instruction_meta("i64.add").unwrap();
        assert_eq!(add.group, Group::Numeric);
        assert_eq!(
            add.stack_template,
            StackType::new(vec![ValType::I64, ValType::I64], vec![ValType::I64])
        );
        assert_eq!(add.constraint, ConstraintKind::None);

        let drop = instruction_meta("drop").unwrap();
        assert_eq!(drop.group, Group::Parametric);
        assert_eq!(
            drop.stack_template,
            StackType::new(vec![ValType::Wildcard], vec![])
        );
        assert_eq!(drop.constraint, ConstraintKind::None);

        let call = instruction_meta("call").unwrap();
        assert_eq!(call.group, Group::Control);
        assert!(call.variadic);
        assert_eq!(call.constraint, ConstraintKind::DirectCall);

        let lg = instruction_meta("local.get").unwrap();
        assert_eq!(lg.constraint, ConstraintKind::LocalRef);
        assert_eq!(instruction_meta("i32.load").unwrap().constraint, ConstraintKind::MemoryRange);
        assert_eq!(instruction_meta("table.get").unwrap().constraint, ConstraintKind::TableRef);
        assert_eq!(
            instruction_meta("call_indirect").unwrap().constraint,
            ConstraintKind::IndirectCall
        );
    }

    fn camel(name: &str) -> String {
        name.split(['.', '_'])
            .map(|w| {
                let mut c = w.chars();
                match c.next() {
                    Some(f) => f.to_ascii_uppercase().to_string() + c.as_str(),
                    None => String::new(),
                }
            })
            .collect()
    }

    #[test]
    fn names_and_encodings_match_reference_decoder() {
        use crate::wasm::encode::encode_body;
        use crate::wasm::module::{FunctionBody, Instruction};
        for o in Opcode::all() {
            let ins = Instruction::placeholder(o);
            let mut instrs = vec![ins];
            if o.name() == "else" {
                instrs.insert(0, Instruction::placeholder(op("if")));
            }
            let bytes = encode_body(&FunctionBody::new(vec![], instrs.clone())).unwrap();
            let body = wasmparser::FunctionBody::new(wasmparser::BinaryReader::new(&bytes, 0));
            let mut ops = body.get_operators_reader().unwrap();
            if instrs.len() > 1 {
                ops.read().unwrap();
            }
            let parsed = format!("{:?}", ops.read().unwrap());
            let head = parsed.split([' ', '{', '(']).next().unwrap().to_string();
            let expected = match o.name() {
                "select_t" => "TypedSelect".to_string(),
                n => camel(n),
            };
            assert_eq!(head.to_lowercase(), expected.to_lowercase(), "{}", o.name());
        }
    }
}
