use std::fmt;

use serde::{Deserialize, Serialize};

/// Value types of the operand stack.
///
/// `Wildcard` only appears in stack-type templates and is never encoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValType {
    I32,
    I64,
    F32,
    F64,
    V128,
    FuncRef,
    ExternRef,
    Wildcard,
}

impl ValType {
    /// The five numeric and vector types, in the order used for the
    /// fixed local/global layout of generated functions.
    pub const NUMERIC: [ValType; 5] = [
        ValType::I32,
        ValType::I64,
        ValType::F32,
        ValType::F64,
        ValType::V128,
    ];

    pub fn from_byte(b: u8) -> Option<ValType> {
        Some(match b {
            0x7f => ValType::I32,
            0x7e => ValType::I64,
            0x7d => ValType::F32,
            0x7c => ValType::F64,
            0x7b => ValType::V128,
            0x70 => ValType::FuncRef,
            0x6f => ValType::ExternRef,
            _ => return None,
        })
    }

    /// Binary encoding. Panics on `Wildcard`, which has no encoding.
    pub fn to_byte(self) -> u8 {
        match self {
            ValType::I32 => 0x7f,
            ValType::I64 => 0x7e,
            ValType::F32 => 0x7d,
            ValType::F64 => 0x7c,
            ValType::V128 => 0x7b,
            ValType::FuncRef => 0x70,
            ValType::ExternRef => 0x6f,
            ValType::Wildcard => panic!("wildcard value type has no binary encoding"),
        }
    }

    pub fn is_ref(self) -> bool {
        matches!(self, ValType::FuncRef | ValType::ExternRef)
    }

    pub fn is_numeric(self) -> bool {
        matches!(
            self,
            ValType::I32 | ValType::I64 | ValType::F32 | ValType::F64 | ValType::V128
        )
    }

    /// Slot of this type in the five-entry local/global layout.
    pub fn layout_index(self) -> Option<u32> {
        Self::NUMERIC.iter().position(|t| *t == self).map(|i| i as u32)
    }

    /// Width in hex digits of the raw-bit rendering.
    pub fn hex_width(self) -> usize {
        match self {
            ValType::I32 | ValType::F32 => 8,
            ValType::I64 | ValType::F64 => 16,
            ValType::V128 => 32,
            _ => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ValType::I32 => "i32",
            ValType::I64 => "i64",
            ValType::F32 => "f32",
            ValType::F64 => "f64",
            ValType::V128 => "v128",
            ValType::FuncRef => "funcref",
            ValType::ExternRef => "externref",
            ValType::Wildcard => "t",
        }
    }
}

impl fmt::Display for ValType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `[params] -> [results]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct StackType {
    pub params: Vec<ValType>,
    pub results: Vec<ValType>,
}

impl StackType {
    pub fn new(params: Vec<ValType>, results: Vec<ValType>) -> Self {
        StackType { params, results }
    }

    pub fn empty() -> Self {
        StackType::default()
    }

    /// True when no wildcard remains.
    pub fn is_concrete(&self) -> bool {
        !self
            .params
            .iter()
            .chain(self.results.iter())
            .any(|t| *t == ValType::Wildcard)
    }

    pub fn mentions_ref(&self) -> bool {
        self.params
            .iter()
            .chain(self.results.iter())
            .any(|t| t.is_ref())
    }
}

impl fmt::Display for StackType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[ValType]| v.iter().map(|t| t.name()).collect::<Vec<_>>().join(",");
        write!(f, "[{}]->[{}]", join(&self.params), join(&self.results))
    }
}

/// Function signature as it appears in the type section.
pub type FuncType = StackType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Limits {
    pub min: u32,
    pub max: Option<u32>,
}

impl Limits {
    pub fn new(min: u32, max: Option<u32>) -> Self {
        Limits { min, max }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockType {
    Empty,
    Value(ValType),
    Type(u32),
}
