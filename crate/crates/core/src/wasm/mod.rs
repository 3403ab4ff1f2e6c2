//! Binary codec, instruction table and validator.

pub mod decode;
pub mod encode;
pub mod module;
pub mod opcodes;
pub mod types;
pub mod validate;

pub use decode::{decode_module, DecodeError};
pub use encode::{encode_module, EncodeError};
pub use module::*;
pub use opcodes::{instruction_meta, op, ConstraintKind, Group, ImmKind, InstructionMeta, Opcode};
pub use types::*;
pub use validate::{validate_module, Verdict, Violation};
