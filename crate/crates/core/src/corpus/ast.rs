use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::wasm::{Instruction, WasmModule};

use super::context::{function_contexts, ConcreteContext};
use super::CorpusError;

/// One instruction with its concretized context and child sub-trees.
///
/// For `block`/`loop`/`if` the first `operand_count` children are the
/// operands and the rest are body roots; `else_index` marks where the else
/// arm starts. `else` and `end` markers are implied and not stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AstNode {
    pub instr: Instruction,
    pub context: ConcreteContext,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<AstNode>,
    pub operand_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub else_index: Option<usize>,
}

impl AstNode {
    pub fn leaf(instr: Instruction, context: ConcreteContext) -> Self {
        AstNode {
            instr,
            context,
            children: vec![],
            operand_count: 0,
            else_index: None,
        }
    }

    pub fn is_nesting(&self) -> bool {
        self.instr.op.meta().is_nesting()
    }

    /// Values this node leaves on the stack.
    pub fn pushes(&self) -> usize {
        self.context.stack_type.results.len()
    }

    pub fn operands(&self) -> &[AstNode] {
        &self.children[..self.operand_count]
    }

    pub fn body(&self) -> &[AstNode] {
        &self.children[self.operand_count..]
    }

    /// In-order instruction sequence of this sub-tree.
    pub fn serialize_into(&self, out: &mut Vec<Instruction>) {
        for c in self.operands() {
            c.serialize_into(out);
        }
        out.push(self.instr.clone());
        if self.is_nesting() {
            for (i, c) in self.children.iter().enumerate().skip(self.operand_count) {
                if Some(i) == self.else_index {
                    out.push(Instruction::simple("else"));
                }
                c.serialize_into(out);
            }
            if self.else_index == Some(self.children.len()) {
                out.push(Instruction::simple("else"));
            }
            out.push(Instruction::simple("end"));
        }
    }

    pub fn serialize(&self) -> Vec<Instruction> {
        let mut out = Vec::new();
        self.serialize_into(&mut out);
        out
    }

    /// Number of instructions in the serialized sub-tree.
    pub fn size(&self) -> usize {
        let own = if self.is_nesting() {
            2 + usize::from(self.else_index.is_some())
        } else {
            1
        };
        own + self.children.iter().map(AstNode::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(AstNode::depth).max().unwrap_or(0)
    }

    /// Pre-order visit of every node.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a AstNode)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut AstNode)) {
        f(self);
        for c in &mut self.children {
            c.walk_mut(f);
        }
    }

    pub fn any(&self, pred: &impl Fn(&AstNode) -> bool) -> bool {
        pred(self) || self.children.iter().any(|c| c.any(pred))
    }
}

/// Serializes a list of roots back to a flat instruction sequence.
pub fn serialize_roots(roots: &[AstNode]) -> Vec<Instruction> {
    let mut out = Vec::new();
    for r in roots {
        r.serialize_into(&mut out);
    }
    out
}

fn underflow(ins: &Instruction) -> CorpusError {
    CorpusError::StackUnderflow {
        offset: ins.offset,
        opcode: ins.name().to_string(),
    }
}

/// Pops preceding roots until exactly `need` values are covered.
fn take_operands(roots: &mut Vec<AstNode>, need: usize, ins: &Instruction) -> Result<Vec<AstNode>, CorpusError> {
    let mut got = 0;
    let mut taken = Vec::new();
    while got < need {
        let r = roots.pop().ok_or_else(|| underflow(ins))?;
        got += r.pushes();
        taken.push(r);
    }
    if got != need {
        return Err(underflow(ins));
    }
    taken.reverse();
    Ok(taken)
}

#[derive(PartialEq, Eq)]
enum Stop {
    Input,
    End,
    Else,
}

struct Parser<'a> {
    instrs: &'a [Instruction],
    ctxs: &'a [ConcreteContext],
    pos: usize,
}

impl Parser<'_> {
    fn sequence(&mut self) -> Result<(Vec<AstNode>, Stop), CorpusError> {
        let mut roots: Vec<AstNode> = Vec::new();
        while self.pos < self.instrs.len() {
            let ins = &self.instrs[self.pos];
            let ctx = &self.ctxs[self.pos];
            self.pos += 1;
            match ins.name() {
                "end" => return Ok((roots, Stop::End)),
                "else" => return Ok((roots, Stop::Else)),
                _ => {}
            }
            let operands = take_operands(&mut roots, ctx.stack_type.params.len(), ins)?;
            let mut node = AstNode {
                instr: ins.clone(),
                context: ctx.clone(),
                operand_count: operands.len(),
                children: operands,
                else_index: None,
            };
            if node.is_nesting() {
                let (body, stop) = self.sequence()?;
                node.children.extend(body);
                match stop {
                    Stop::End => {}
                    Stop::Else if ins.name() == "if" => {
                        node.else_index = Some(node.children.len());
                        let (arm, stop) = self.sequence()?;
                        if stop != Stop::End {
                            return Err(underflow(ins));
                        }
                        node.children.extend(arm);
                    }
                    _ => return Err(underflow(ins)),
                }
            }
            roots.push(node);
        }
        Ok((roots, Stop::Input))
    }
}

/// Builds root nodes from a validated body and its per-instruction contexts.
pub fn parse_asts(instrs: &[Instruction], contexts: &[ConcreteContext]) -> Result<Vec<AstNode>, CorpusError> {
    assert_eq!(instrs.len(), contexts.len());
    let mut p = Parser {
        instrs,
        ctxs: contexts,
        pos: 0,
    };
    let (roots, stop) = p.sequence()?;
    if stop != Stop::Input {
        let ins = &instrs[p.pos - 1];
        return Err(underflow(ins));
    }
    Ok(roots)
}

/// Context extraction plus parsing for one defined function.
pub fn parse_function(module: &WasmModule, func_idx: u32) -> Result<Vec<AstNode>, CorpusError> {
    let ctxs = function_contexts(module, func_idx)?;
    let body = module.body(func_idx).expect("defined function");
    parse_asts(&body.instrs, &ctxs)
}

fn dfs_string(node: &AstNode, out: &mut String) {
    out.push_str(node.instr.name());
    if node.children.is_empty() {
        out.push(';');
        return;
    }
    out.push('(');
    for (i, c) in node.children.iter().enumerate() {
        if node.is_nesting() && i == node.operand_count {
            out.push('|');
        }
        if node.else_index == Some(i) {
            out.push_str("else;");
        }
        dfs_string(c, out);
    }
    if node.else_index == Some(node.children.len()) {
        out.push_str("else;");
    }
    out.push(')');
}

/// Stable 64-bit hash of the opcode tree, immediates stripped.
pub fn fingerprint(node: &AstNode) -> u64 {
    let mut s = String::new();
    dfs_string(node, &mut s);
    let d = Sha256::digest(s.as_bytes());
    u64::from_be_bytes(d[..8].try_into().unwrap())
}

/// Opcode tree string used for fingerprinting; handy in diagnostics.
pub fn shape(node: &AstNode) -> String {
    let mut s = String::new();
    dfs_string(node, &mut s);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::factorial_module;
    use crate::wasm::{FuncType, FunctionBody, Instruction as I, ValType};

    fn single(instrs: Vec<Instruction>, locals: Vec<(u32, ValType)>) -> (WasmModule, u32) {
        let mut m = WasmModule::default();
        let f = m.add_function(FuncType::empty(), FunctionBody::new(locals, instrs));
        (m, f)
    }

    #[test]
    fn const_then_set_is_one_root() {
        let (m, f) = single(
            vec![I::i32_const(5), I::with_idx("local.set", 0)],
            vec![(1, ValType::I32)],
        );
        let roots = parse_function(&m, f).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].instr.name(), "local.set");
        assert_eq!(roots[0].children[0].instr, I::i32_const(5));
    }

    #[test]
    fn lone_const_is_leaf() {
        let mut m = WasmModule::default();
        let f = m.add_function(
            FuncType::new(vec![], vec![ValType::I32]),
            FunctionBody::new(vec![], vec![I::i32_const(1)]),
        );
        let roots = parse_function(&m, f).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].children.is_empty());
    }

    #[test]
    fn factorial_has_four_roots_and_round_trips() {
        let m = factorial_module();
        let roots = parse_function(&m, 0).unwrap();
        assert_eq!(roots.len(), 4);
        assert_eq!(serialize_roots(&roots), m.code[0].instrs);
        assert_eq!(fingerprint(&roots[0]), fingerprint(&roots[1]));
        assert_ne!(fingerprint(&roots[0]), fingerprint(&roots[2]));
    }

    #[test]
    fn immediates_do_not_change_fingerprint() {
        let (m, f) = single(vec![I::i32_const(5), I::simple("drop")], vec![]);
        let (m2, f2) = single(vec![I::i32_const(9), I::simple("drop")], vec![]);
        let a = parse_function(&m, f).unwrap();
        let b = parse_function(&m2, f2).unwrap();
        assert_eq!(fingerprint(&a[0]), fingerprint(&b[0]));
    }

    #[test]
    fn if_else_round_trips() {
        let mut m = WasmModule::default();
        let f = m.add_function(
            FuncType::new(vec![ValType::I32], vec![ValType::I32]),
            FunctionBody::new(
                vec![],
                vec![
                    I::with_idx("local.get", 0),
                    I::block("if", crate::wasm::BlockType::Value(ValType::I32)),
                    I::i32_const(1),
                    I::simple("else"),
                    I::i32_const(2),
                    I::simple("end"),
                ],
            ),
        );
        let roots = parse_function(&m, f).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].operand_count, 1);
        assert_eq!(roots[0].else_index, Some(2));
        assert_eq!(serialize_roots(&roots), m.code[0].instrs);
    }

    #[test]
    fn void_roots_between_operands_become_children() {
        let mut m = WasmModule::default();
        let f = m.add_function(
            FuncType::new(vec![], vec![ValType::I32]),
            FunctionBody::new(
                vec![],
                vec![I::i32_const(1), I::simple("nop"), I::i32_const(2), I::simple("i32.add")],
            ),
        );
        let roots = parse_function(&m, f).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].children.len(), 3);
        assert_eq!(serialize_roots(&roots), m.code[0].instrs);
    }
}
