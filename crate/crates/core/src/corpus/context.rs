use serde::{Deserialize, Serialize};

use crate::wasm::opcodes::ConstraintKind;
use crate::wasm::validate::{declared_refs, FuncTyper, StepTypes};
use crate::wasm::{BlockType, FuncType, Instruction, StackType, ValType, WasmModule};

use super::CorpusError;

/// A cross-section requirement bound to one instruction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SemanticConstraint {
    pub kind: ConstraintKind,
    pub index: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_type: Option<ValType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub page_min: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub page_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<StackType>,
}

impl SemanticConstraint {
    fn new(kind: ConstraintKind, index: u32) -> Self {
        SemanticConstraint {
            kind,
            index,
            value_type: None,
            page_min: None,
            page_max: None,
            signature: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConcreteContext {
    pub stack_type: StackType,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<SemanticConstraint>,
}

impl ConcreteContext {
    pub fn constraint(&self, kind: ConstraintKind) -> Option<&SemanticConstraint> {
        self.constraints.iter().find(|c| c.kind == kind)
    }

    pub fn signature(&self) -> Option<&StackType> {
        self.constraints.iter().find_map(|c| c.signature.as_ref())
    }
}

fn concrete(types: &[Option<ValType>], what: &str) -> Result<Vec<ValType>, CorpusError> {
    types
        .iter()
        .map(|t| t.ok_or_else(|| CorpusError::UnresolvableContext(format!("{what}: operand of unknown type"))))
        .collect()
}

fn unresolved(msg: String) -> CorpusError {
    CorpusError::UnresolvableContext(msg)
}

/// Concretized contexts for every instruction of one defined function, in
/// body order. `end` and `else` get an empty context.
pub fn function_contexts(module: &WasmModule, func_idx: u32) -> Result<Vec<ConcreteContext>, CorpusError> {
    let ty = module
        .func_type(func_idx)
        .cloned()
        .ok_or_else(|| unresolved(format!("function {func_idx} has no signature")))?;
    let body = module
        .body(func_idx)
        .ok_or_else(|| unresolved(format!("function {func_idx} is imported")))?;
    let refs = declared_refs(module);
    let mut typer = FuncTyper::new(module, &ty, body, &refs);
    let mut out = Vec::with_capacity(body.instrs.len());
    for ins in &body.instrs {
        let pre_labels = label_sig(module, &typer, ins, &ty)?;
        let step = typer
            .step(ins)
            .map_err(|e| unresolved(format!("{} @{:#x}: {e}", ins.name(), ins.offset)))?;
        out.push(bind(module, &typer, ins, &step, pre_labels)?);
    }
    Ok(out)
}

/// Context of the instruction at `pos` within function `func_idx`.
pub fn extract_context(module: &WasmModule, func_idx: u32, pos: usize) -> Result<ConcreteContext, CorpusError> {
    function_contexts(module, func_idx)?
        .into_iter()
        .nth(pos)
        .ok_or_else(|| unresolved(format!("no instruction {pos} in function {func_idx}")))
}

fn label_sig(
    module: &WasmModule,
    typer: &FuncTyper<'_>,
    ins: &Instruction,
    func_ty: &FuncType,
) -> Result<Option<StackType>, CorpusError> {
    let labels = |l: u32| {
        typer
            .label_types(l)
            .ok_or_else(|| unresolved(format!("unknown label {l}")))
    };
    Ok(match ins.name() {
        "block" | "loop" | "if" => {
            let bt = ins.block_type().unwrap_or(BlockType::Empty);
            Some(
                module
                    .block_signature(bt)
                    .ok_or_else(|| unresolved("dangling block type".into()))?,
            )
        }
        "br" | "br_if" => {
            let t = labels(ins.idx().unwrap_or(0))?;
            Some(StackType::new(t.clone(), t))
        }
        "br_table" => {
            let d = match ins.imms.last() {
                Some(crate::wasm::Immediate::Idx(d)) => *d,
                _ => 0,
            };
            let t = labels(d)?;
            Some(StackType::new(t.clone(), t))
        }
        "return" => Some(StackType::new(func_ty.results.clone(), func_ty.results.clone())),
        _ => None,
    })
}

fn bind(
    module: &WasmModule,
    typer: &FuncTyper<'_>,
    ins: &Instruction,
    step: &StepTypes,
    block_sig: Option<StackType>,
) -> Result<ConcreteContext, CorpusError> {
    let meta = ins.op.meta();
    let name = meta.name;
    if matches!(name, "end" | "else") {
        return Ok(ConcreteContext {
            stack_type: StackType::empty(),
            constraints: vec![],
        });
    }
    let stack_type = match name {
        "block" | "loop" | "if" => {
            let sig = block_sig.clone().unwrap();
            let mut params = sig.params.clone();
            if name == "if" {
                params.push(ValType::I32);
            }
            StackType::new(params, sig.results)
        }
        _ => StackType::new(concrete(&step.popped, name)?, concrete(&step.pushed, name)?),
    };

    let idx = ins.idx().unwrap_or(0);
    let mut c = SemanticConstraint::new(meta.constraint, idx);
    match meta.constraint {
        ConstraintKind::None => {
            return Ok(ConcreteContext {
                stack_type,
                constraints: vec![],
            })
        }
        ConstraintKind::LocalRef => {
            c.value_type = typer.local_types().get(idx as usize).copied();
        }
        ConstraintKind::GlobalRef => {
            c.value_type = module.global_type(idx).map(|g| g.ty);
        }
        ConstraintKind::MemoryRange => {
            let mem = module.all_memories().first().copied();
            c.page_min = mem.map(|m| m.min);
            c.page_max = mem.map(|m| m.max.unwrap_or(crate::wasm::validate::MAX_PAGES));
            if !matches!(name, "memory.init" | "data.drop") {
                c.index = 0;
            }
        }
        ConstraintKind::TableRef => {
            c.value_type = module.all_tables().get(idx as usize).map(|t| t.elem);
        }
        ConstraintKind::DirectCall => {
            c.signature = module.func_type(idx).cloned();
        }
        ConstraintKind::IndirectCall => {
            c.signature = module.types.get(idx as usize).cloned();
        }
        ConstraintKind::BlockSig => {
            c.signature = block_sig;
        }
    }
    if matches!(
        c.kind,
        ConstraintKind::DirectCall | ConstraintKind::IndirectCall | ConstraintKind::BlockSig
    ) && c.signature.is_none()
    {
        return Err(unresolved(format!("{name}: signature does not resolve")));
    }
    Ok(ConcreteContext {
        stack_type,
        constraints: vec![c],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wasm::{FunctionBody, Instruction as I};

    #[test]
    fn call_gets_callee_signature() {
        let mut m = WasmModule::default();
        let callee = m.add_function(
            FuncType::new(vec![ValType::I32, ValType::I32], vec![ValType::I64]),
            FunctionBody::new(vec![], vec![I::i64_const(0)]),
        );
        let caller = m.add_function(
            FuncType::new(vec![], vec![ValType::I64]),
            FunctionBody::new(
                vec![],
                vec![I::i32_const(1), I::i32_const(2), I::with_idx("call", callee)],
            ),
        );
        let ctx = extract_context(&m, caller, 2).unwrap();
        assert_eq!(
            ctx.stack_type,
            StackType::new(vec![ValType::I32, ValType::I32], vec![ValType::I64])
        );
        assert_eq!(ctx.constraints[0].kind, ConstraintKind::DirectCall);

        let k = extract_context(&m, caller, 0).unwrap();
        assert_eq!(k.stack_type, StackType::new(vec![], vec![ValType::I32]));
        assert!(k.constraints.is_empty());
    }

    #[test]
    fn local_get_binds_type() {
        let mut m = WasmModule::default();
        let f = m.add_function(
            FuncType::new(vec![], vec![ValType::F32]),
            FunctionBody::new(vec![(2, ValType::F32)], vec![I::with_idx("local.get", 1)]),
        );
        let ctx = extract_context(&m, f, 0).unwrap();
        assert_eq!(ctx.stack_type, StackType::new(vec![], vec![ValType::F32]));
        let c = &ctx.constraints[0];
        assert_eq!((c.kind, c.index, c.value_type), (ConstraintKind::LocalRef, 1, Some(ValType::F32)));
    }

    #[test]
    fn dangling_index_is_unresolvable() {
        let mut m = WasmModule::default();
        let f = m.add_function(
            FuncType::empty(),
            FunctionBody::new(vec![], vec![I::with_idx("call", 9)]),
        );
        assert!(matches!(
            function_contexts(&m, f),
            Err(CorpusError::UnresolvableContext(_))
        ));
    }
}
