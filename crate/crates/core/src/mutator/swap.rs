//! Replaces an instruction with another of the same stack type. Only opcodes
//! with no immediates and no module-dependent typing take part, so the
//! children and every surrounding use stay valid.

use std::collections::HashMap;
use std::sync::LazyLock;

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::corpus::AstNode;
use crate::wasm::{ConstraintKind, Group, ImmKind, Instruction, Opcode, StackType};

static CLASSES: LazyLock<HashMap<StackType, Vec<Opcode>>> = LazyLock::new(|| {
    let mut m: HashMap<StackType, Vec<Opcode>> = HashMap::new();
    for o in Opcode::all() {
        let meta = o.meta();
        if meta.imm == ImmKind::None
            && meta.constraint == ConstraintKind::None
            && !meta.variadic
            && meta.group != Group::Control
            && meta.stack_template.is_concrete()
        {
            m.entry(meta.stack_template.clone()).or_default().push(o);
        }
    }
    m.retain(|_, v| v.len() > 1);
    m
});

/// Opcodes sharing `o`'s stack type, `o` included. Empty when `o` never swaps.
pub fn class_of(o: Opcode) -> &'static [Opcode] {
    CLASSES
        .get(&o.meta().stack_template)
        .filter(|v| v.contains(&o))
        .map(Vec::as_slice)
        .unwrap_or(&[])
}

pub fn eligible(node: &AstNode) -> bool {
    !class_of(node.instr.op).is_empty()
}

/// Copy of `node` with its own opcode replaced by a different member of its
/// class. Children are kept.
pub fn swap_same_stacktype<R: Rng>(node: &AstNode, rng: &mut R) -> AstNode {
    let mut out = node.clone();
    let others: Vec<Opcode> = class_of(node.instr.op)
        .iter()
        .copied()
        .filter(|o| *o != node.instr.op)
        .collect();
    if let Some(o) = others.choose(rng) {
        out.instr = Instruction::new(*o, vec![]);
    }
    out
}
