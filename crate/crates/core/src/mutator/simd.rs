//! Rewrites scalar sub-trees into vector form, inserting splats and lane-0
//! extractions wherever the operand types stop matching.

use rand::Rng;

use crate::corpus::{AstNode, ConcreteContext};
use crate::wasm::{op, Immediate, Instruction, StackType, ValType};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    /// Lane-wise binary op over two vectors.
    Binary,
    /// Lane-wise unary op.
    Unary,
    /// Vector shifted by an i32 count.
    Shift,
    Const,
    Load,
    Store,
}

fn analogue(name: &str) -> Option<(&'static str, Kind)> {
    use Kind::*;
    Some(match name {
        "i32.add" => ("i32x4.add", Binary),
        "i32.sub" => ("i32x4.sub", Binary),
        "i32.mul" => ("i32x4.mul", Binary),
        "i32.and" | "i64.and" => ("v128.and", Binary),
        "i32.or" | "i64.or" => ("v128.or", Binary),
        "i32.xor" | "i64.xor" => ("v128.xor", Binary),
        "i32.shl" => ("i32x4.shl", Shift),
        "i32.shr_s" => ("i32x4.shr_s", Shift),
        "i32.shr_u" => ("i32x4.shr_u", Shift),
        "i64.add" => ("i64x2.add", Binary),
        "i64.sub" => ("i64x2.sub", Binary),
        "i64.mul" => ("i64x2.mul", Binary),
        "i64.shl" => ("i64x2.shl", Shift),
        "i64.shr_s" => ("i64x2.shr_s", Shift),
        "i64.shr_u" => ("i64x2.shr_u", Shift),
        "f32.add" => ("f32x4.add", Binary),
        "f32.sub" => ("f32x4.sub", Binary),
        "f32.mul" => ("f32x4.mul", Binary),
        "f32.div" => ("f32x4.div", Binary),
        "f32.min" => ("f32x4.min", Binary),
        "f32.max" => ("f32x4.max", Binary),
        "f32.abs" => ("f32x4.abs", Unary),
        "f32.neg" => ("f32x4.neg", Unary),
        "f32.sqrt" => ("f32x4.sqrt", Unary),
        "f32.ceil" => ("f32x4.ceil", Unary),
        "f32.floor" => ("f32x4.floor", Unary),
        "f32.trunc" => ("f32x4.trunc", Unary),
        "f32.nearest" => ("f32x4.nearest", Unary),
        "f64.add" => ("f64x2.add", Binary),
        "f64.sub" => ("f64x2.sub", Binary),
        "f64.mul" => ("f64x2.mul", Binary),
        "f64.div" => ("f64x2.div", Binary),
        "f64.min" => ("f64x2.min", Binary),
        "f64.max" => ("f64x2.max", Binary),
        "f64.abs" => ("f64x2.abs", Unary),
        "f64.neg" => ("f64x2.neg", Unary),
        "f64.sqrt" => ("f64x2.sqrt", Unary),
        "f64.ceil" => ("f64x2.ceil", Unary),
        "f64.floor" => ("f64x2.floor", Unary),
        "f64.trunc" => ("f64x2.trunc", Unary),
        "f64.nearest" => ("f64x2.nearest", Unary),
        "i32.const" | "i64.const" | "f32.const" | "f64.const" => ("v128.const", Const),
        "i32.load" | "i64.load" | "f32.load" | "f64.load" => ("v128.load", Load),
        "i32.store" | "i64.store" | "f32.store" | "f64.store" => ("v128.store", Store),
        _ => return None,
    })
}

/// Scalar type of a node we know how to vectorize (result, or stored value).
fn scalar_of(node: &AstNode) -> Option<ValType> {
    let st = &node.context.stack_type;
    if node.instr.name().ends_with(".store") {
        return st.params.get(1).copied();
    }
    st.results.first().copied()
}

pub fn eligible(node: &AstNode) -> bool {
    node.any(&|n| analogue(n.instr.name()).is_some() && n.operand_count == n.children.len() && !n.is_nesting())
}

fn splat_name(t: ValType) -> &'static str {
    match t {
        ValType::I32 => "i32x4.splat",
        ValType::I64 => "i64x2.splat",
        ValType::F32 => "f32x4.splat",
        _ => "f64x2.splat",
    }
}

fn extract_name(t: ValType) -> &'static str {
    match t {
        ValType::I32 => "i32x4.extract_lane",
        ValType::I64 => "i64x2.extract_lane",
        ValType::F32 => "f32x4.extract_lane",
        _ => "f64x2.extract_lane",
    }
}

fn new_node(ins: Instruction, st: StackType, children: Vec<AstNode>) -> AstNode {
    AstNode {
        instr: ins,
        context: ConcreteContext {
            stack_type: st,
            constraints: vec![],
        },
        operand_count: children.len(),
        children,
        else_index: None,
    }
}

fn splat(child: AstNode, t: ValType) -> AstNode {
    new_node(
        Instruction::simple(splat_name(t)),
        StackType::new(vec![t], vec![ValType::V128]),
        vec![child],
    )
}

fn extract(child: AstNode, t: ValType) -> AstNode {
    new_node(
        Instruction::lane(extract_name(t), 0),
        StackType::new(vec![ValType::V128], vec![t]),
        vec![child],
    )
}

fn const_bits(ins: &Instruction) -> u128 {
    match ins.imms.first() {
        Some(Immediate::I32(v)) => u128::from(*v as u32) * 0x0000_0001_0000_0001_0000_0001_0000_0001,
        Some(Immediate::F32(b)) => u128::from(*b) * 0x0000_0001_0000_0001_0000_0001_0000_0001,
        Some(Immediate::I64(v)) => u128::from(*v as u64) * 0x0000_0000_0000_0001_0000_0000_0000_0001,
        Some(Immediate::F64(b)) => u128::from(*b) * 0x0000_0000_0000_0001_0000_0000_0000_0001,
        _ => 0,
    }
}

struct Rewriter<'r, R> {
    rng: &'r mut R,
}

impl<R: Rng> Rewriter<'_, R> {
    /// Whether `node` itself will be turned into vector form.
    fn convertible(&self, node: &AstNode) -> bool {
        analogue(node.instr.name()).is_some()
            && !node.is_nesting()
            && node.operand_count == node.children.len()
            && scalar_of(node).is_some_and(|t| t.is_numeric() && t != ValType::V128)
    }

    /// Vector form of a convertible value-producing node.
    fn vector(&mut self, node: AstNode) -> AstNode {
        let (vname, kind) = analogue(node.instr.name()).unwrap();
        let t = scalar_of(&node).unwrap();
        let v = ValType::V128;
        let mut kids = node.children.into_iter();
        match kind {
            Kind::Const => new_node(
                Instruction::v128_const(const_bits(&node.instr)),
                StackType::new(vec![], vec![v]),
                vec![],
            ),
            Kind::Binary => {
                let a = self.as_vector(kids.next().unwrap(), t);
                let b = self.as_vector(kids.next().unwrap(), t);
                new_node(Instruction::simple(vname), StackType::new(vec![v, v], vec![v]), vec![a, b])
            }
            Kind::Unary => {
                let a = self.as_vector(kids.next().unwrap(), t);
                new_node(Instruction::simple(vname), StackType::new(vec![v], vec![v]), vec![a])
            }
            Kind::Shift => {
                let a = self.as_vector(kids.next().unwrap(), t);
                let mut count = self.scalar(kids.next().unwrap());
                if t == ValType::I64 {
                    count = new_node(
                        Instruction::simple("i32.wrap_i64"),
                        StackType::new(vec![ValType::I64], vec![ValType::I32]),
                        vec![count],
                    );
                }
                new_node(
                    Instruction::simple(vname),
                    StackType::new(vec![v, ValType::I32], vec![v]),
                    vec![a, count],
                )
            }
            Kind::Load => {
                let addr = self.scalar(kids.next().unwrap());
                let mut ins = node.instr.clone();
                ins.op = op(vname);
                let mut n = new_node(ins, StackType::new(vec![ValType::I32], vec![v]), vec![addr]);
                n.context.constraints = node.context.constraints.clone();
                n
            }
            Kind::Store => unreachable!("stores produce no vector"),
        }
    }

    /// A v128 producer for an operand that used to produce scalar `t`.
    fn as_vector(&mut self, node: AstNode, t: ValType) -> AstNode {
        if self.convertible(&node) && !node.instr.name().ends_with(".store") && self.rng.random_bool(0.75) {
            self.vector(node)
        } else {
            splat(self.scalar(node), t)
        }
    }

    /// Rewrites a node keeping its own stack type.
    fn scalar(&mut self, mut node: AstNode) -> AstNode {
        if self.convertible(&node) {
            let t = scalar_of(&node).unwrap();
            if node.instr.name().ends_with(".store") {
                let stack_type = node.context.stack_type.clone();
                let constraints = node.context.constraints.clone();
                let mut kids = node.children.into_iter();
                let addr = self.scalar(kids.next().unwrap());
                let val = self.as_vector(kids.next().unwrap(), t);
                let mut ins = node.instr.clone();
                ins.op = op("v128.store");
                let mut n = new_node(ins, StackType::new(vec![ValType::I32, ValType::V128], vec![]), vec![addr, val]);
                n.context.constraints = constraints;
                debug_assert!(stack_type.results.is_empty());
                return n;
            }
            let v = self.vector(node);
            return extract(v, t);
        }
        node.children = std::mem::take(&mut node.children)
            .into_iter()
            .map(|c| self.scalar(c))
            .collect();
        node
    }
}

/// Vector-form rewrite of the sub-tree rooted at `node`. The result has the
/// same result types as `node`; a tree with nothing to convert comes back
/// unchanged.
pub fn mutate_to_simd<R: Rng>(node: &AstNode, rng: &mut R) -> AstNode {
    Rewriter { rng }.scalar(node.clone())
}
