//! Bottom-up assembly of runnable modules from corpus sub-trees.
//!
//! A generated module has an entry function (index 0, no params) exported as
//! `main`, a tree of synthesized callees, five zero-initialised mutable
//! globals (one per numeric type) and, when needed, one memory and one
//! funcref table.

use rand::seq::IndexedRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{AstNode, ConcreteContext, Corpus, CorpusEntry};
use crate::mutator::{mutate_module, mutate_roots, MutationPlan, MutationRecord};
use crate::par;
use crate::wasm::{
    encode_module, validate_module, BlockType, ConstraintKind, DataSegment, ElemItems, ElementSegment, Export,
    ExportKind, FuncType, FunctionBody, Global, GlobalType, Group, Immediate, Instruction, Limits, SegmentMode,
    StackType, TableType, ValType, WasmModule,
};

pub const ENTRY_EXPORT: &str = "main";
const PAGE: u64 = 65536;
/// Above this many functions every new callee is built from the leaf pool.
const MAX_FUNCTIONS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub subtrees_per_function: usize,
    pub max_call_depth: u32,
    /// Entry results; `None` picks one of the five numeric types per seed.
    #[serde(default)]
    pub entry_result_types: Option<Vec<ValType>>,
    pub memory_page_cap: u32,
    pub seed: u64,
    /// Total loop iterations allowed per run, enforced by a guard at every
    /// loop head. `None` leaves loops unguarded.
    #[serde(default)]
    pub loop_fuel: Option<u32>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            subtrees_per_function: 8,
            max_call_depth: 2,
            entry_result_types: None,
            memory_page_cap: 16,
            seed: 0,
            loop_fuel: None,
        }
    }
}

impl GenConfig {
    pub fn check(&self) -> Result<(), String> {
        if self.subtrees_per_function == 0 {
            return Err("subtrees_per_function must be positive".into());
        }
        if self.max_call_depth == 0 {
            return Err("max_call_depth must be at least 1".into());
        }
        if self.memory_page_cap == 0 {
            return Err("memory_page_cap must be at least 1".into());
        }
        if let Some(ts) = &self.entry_result_types {
            if let Some(t) = ts.iter().find(|t| !t.is_numeric()) {
                return Err(format!("entry result type {t} is not numeric"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lineage {
    pub seed: u64,
    /// Corpus entries sampled, in sampling order.
    pub fingerprints: Vec<u64>,
    pub mutations: Vec<MutationRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedBinary {
    pub bytes: Vec<u8>,
    pub module: WasmModule,
    pub entry_export: String,
    pub lineage: Lineage,
}

impl GeneratedBinary {
    /// Lowercase sha256 of the bytes; the binary's file name.
    pub fn id(&self) -> String {
        content_hash(&self.bytes)
    }

    pub fn entry_results(&self) -> Vec<ValType> {
        let f = self.module.export_index(&self.entry_export, ExportKind::Func).unwrap();
        self.module.func_type(f).map(|t| t.results.clone()).unwrap_or_default()
    }
}

pub fn content_hash(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("corpus has no usable entries")]
    EmptyCorpus,
    #[error("invalid config: {0}")]
    Config(String),
    #[error("generation failed: {}", .0.join("; "))]
    GenerationFailed(Vec<String>),
}

fn touches_ref(node: &AstNode) -> bool {
    let st = &node.context.stack_type;
    if st.mentions_ref() {
        return true;
    }
    node.context
        .constraints
        .iter()
        .any(|c| c.signature.as_ref().is_some_and(StackType::mentions_ref) || c.value_type.is_some_and(ValType::is_ref))
}

fn excluded_op(node: &AstNode) -> bool {
    let meta = node.instr.op.meta();
    meta.group == Group::Table
        || meta.name.starts_with("ref.")
        || matches!(meta.name, "memory.init" | "data.drop" | "elem.drop" | "return")
}

/// True when a branch leaves the sub-tree, given `depth` enclosing blocks.
fn escapes(node: &AstNode, depth: u32) -> bool {
    let out = match node.instr.name() {
        "br" | "br_if" => node.instr.idx().unwrap_or(0) >= depth,
        "br_table" => node.instr.imms.iter().any(|i| match i {
            Immediate::Idx(l) => *l >= depth,
            Immediate::Labels(ls) => ls.iter().any(|l| *l >= depth),
            _ => false,
        }),
        _ => false,
    };
    out || node.children.iter().enumerate().any(|(i, c)| {
        let d = if node.is_nesting() && i >= node.operand_count { depth + 1 } else { depth };
        escapes(c, d)
    })
}

/// Whether a corpus root can be dropped into a fresh function body.
pub fn usable(root: &AstNode) -> bool {
    root.instr.name() != "unreachable"
        && !root.any(&|n| excluded_op(n) || touches_ref(n))
        && !escapes(root, 0)
}

fn calls(root: &AstNode) -> bool {
    root.any(&|n| matches!(n.instr.name(), "call" | "call_indirect"))
}

/// Corpus entries split into everything usable and the call-free subset.
pub struct Pools<'c> {
    pub full: Vec<&'c CorpusEntry>,
    pub leaf: Vec<&'c CorpusEntry>,
}

impl<'c> Pools<'c> {
    pub fn new(corpus: &'c Corpus) -> Self {
        let full: Vec<_> = corpus.entries.iter().filter(|e| usable(&e.root)).collect();
        let leaf = full.iter().copied().filter(|e| !calls(&e.root)).collect();
        Pools { full, leaf }
    }
}

fn layout(t: Option<ValType>) -> u32 {
    t.and_then(ValType::layout_index).unwrap_or(0)
}

fn five_locals() -> Vec<(u32, ValType)> {
    ValType::NUMERIC.iter().map(|t| (1, *t)).collect()
}

fn leaf_node(ins: Instruction, st: StackType) -> AstNode {
    AstNode::leaf(
        ins,
        ConcreteContext {
            stack_type: st,
            constraints: vec![],
        },
    )
}

/// Module under construction plus everything Step III needs to know.
pub struct Builder<'p, 'c> {
    pools: &'p Pools<'c>,
    cfg: &'p GenConfig,
    plan: &'p MutationPlan,
    rng: ChaCha8Rng,
    mut_rng: ChaCha8Rng,
    pub module: WasmModule,
    pub table_slots: Vec<u32>,
    pub needs_memory: bool,
    /// Highest byte (exclusive) touched by a constant-address access.
    pub max_static_addr: u64,
    pub lineage: Lineage,
}

impl<'p, 'c> Builder<'p, 'c> {
    pub fn new(pools: &'p Pools<'c>, cfg: &'p GenConfig, plan: &'p MutationPlan) -> Self {
        Builder {
            pools,
            cfg,
            plan,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            mut_rng: ChaCha8Rng::seed_from_u64(cfg.seed ^ plan.seed.rotate_left(29) ^ 0x6d75_7461),
            module: WasmModule::default(),
            table_slots: vec![],
            needs_memory: false,
            max_static_addr: 0,
            lineage: Lineage {
                seed: cfg.seed,
                fingerprints: vec![],
                mutations: vec![],
            },
        }
    }

    fn sample(&mut self, depth: u32) -> Vec<AstNode> {
        let leaf = depth >= self.cfg.max_call_depth || self.module.code.len() >= MAX_FUNCTIONS;
        let pool = if leaf { &self.pools.leaf } else { &self.pools.full };
        let mut out = Vec::with_capacity(self.cfg.subtrees_per_function);
        for _ in 0..self.cfg.subtrees_per_function {
            let Some(e) = pool.choose(&mut self.rng) else { break };
            self.lineage.fingerprints.push(e.fingerprint);
            out.push(e.root.clone());
        }
        out
    }

    /// Steps I and II for one function of type `ty`: sample roots, mutate
    /// them, rewrite variable indices, and synthesize callees. Returns the
    /// function's index.
    pub fn build_function(&mut self, ty: FuncType, depth: u32) -> u32 {
        let idx = self.module.add_function(ty.clone(), FunctionBody::new(five_locals(), vec![]));
        let base = ty.params.len() as u32;
        let mut roots = self.sample(depth);
        mutate_roots(
            &mut roots,
            self.plan,
            &mut self.mut_rng,
            &format!("func/{idx}"),
            &mut self.lineage.mutations,
        );
        for r in &mut roots {
            self.maintain(r, depth, base);
        }
        let mut instrs = Vec::new();
        for r in &roots {
            r.serialize_into(&mut instrs);
            for _ in 0..r.pushes() {
                instrs.push(Instruction::simple("drop"));
            }
        }
        for t in &ty.results {
            instrs.push(Instruction::with_idx("local.get", base + layout(Some(*t))));
        }
        self.module.code[idx as usize].instrs = instrs;
        idx
    }

    /// Rewrites one node's module-dependent immediates, synthesizing callees
    /// for calls.
    fn maintain(&mut self, node: &mut AstNode, depth: u32, base: u32) {
        for c in &mut node.children {
            self.maintain(c, depth, base);
        }
        let meta = node.instr.op.meta();
        let sig = node.context.signature().cloned();
        let vt = node.context.constraints.first().and_then(|c| c.value_type);
        match meta.constraint {
            ConstraintKind::LocalRef => node.instr.set_idx(base + layout(vt)),
            ConstraintKind::GlobalRef => node.instr.set_idx(layout(vt)),
            ConstraintKind::BlockSig => {
                if let (Some(BlockType::Type(_)), Some(sig)) = (node.instr.block_type(), sig) {
                    let t = self.module.intern_type(sig);
                    node.instr.imms = vec![Immediate::BlockType(BlockType::Type(t))];
                }
            }
            ConstraintKind::DirectCall => {
                let callee = self.build_function(sig.unwrap_or_default(), depth + 1);
                node.instr.set_idx(callee);
            }
            ConstraintKind::IndirectCall => {
                let sig = sig.unwrap_or_default();
                let slot = self.table_slots.len() as u32;
                self.table_slots.push(u32::MAX);
                let callee = self.build_function(sig.clone(), depth + 1);
                self.table_slots[slot as usize] = callee;
                let t = self.module.intern_type(sig);
                node.instr.imms = vec![Immediate::Idx(t), Immediate::Idx(0)];
                let index_expr = node.children.pop().expect("call_indirect index operand");
                let drop = AstNode {
                    operand_count: 1,
                    children: vec![index_expr],
                    ..leaf_node(Instruction::simple("drop"), StackType::new(vec![ValType::I32], vec![]))
                };
                node.children.push(drop);
                node.children.push(leaf_node(
                    Instruction::i32_const(slot as i32),
                    StackType::new(vec![], vec![ValType::I32]),
                ));
                node.operand_count = node.children.len();
            }
            ConstraintKind::MemoryRange => {
                self.needs_memory = true;
                if let (Some(m), Some(bytes)) = (node.instr.memarg(), meta.access_bytes()) {
                    let addr = node.children.iter().find(|c| c.pushes() > 0);
                    if let Some(Immediate::I32(b)) = addr.filter(|a| a.instr.is("i32.const")).and_then(|a| a.instr.imms.first()) {
                        let end = u64::from(*b as u32) + m.offset + bytes;
                        if end <= u64::from(self.cfg.memory_page_cap) * PAGE {
                            self.max_static_addr = self.max_static_addr.max(end);
                        }
                    }
                }
            }
            _ => {}
        }
    }

    /// Step III: memory + data, table + elements, globals, export.
    pub fn supplement_sections(&mut self, entry: u32) {
        let cap = self.cfg.memory_page_cap;
        if self.needs_memory {
            let pages = self.max_static_addr.div_ceil(PAGE).max(1) as u32;
            self.module.memories.push(Limits::new(pages.min(cap), Some(cap)));
            let len = if self.max_static_addr > 0 { self.max_static_addr } else { 256 };
            let mut bytes = vec![0u8; len as usize];
            self.rng.fill_bytes(&mut bytes);
            self.module.data.push(DataSegment {
                mode: SegmentMode::Active {
                    index: 0,
                    offset: vec![Instruction::i32_const(0)],
                },
                bytes,
            });
        }
        if !self.table_slots.is_empty() {
            let n = self.table_slots.len() as u32;
            self.module.tables.push(TableType {
                elem: ValType::FuncRef,
                limits: Limits::new(n, Some(n)),
            });
            self.module.elements.push(ElementSegment {
                mode: SegmentMode::Active {
                    index: 0,
                    offset: vec![Instruction::i32_const(0)],
                },
                elem_type: ValType::FuncRef,
                items: ElemItems::Funcs(self.table_slots.clone()),
                flags: 0,
            });
        }
        for t in ValType::NUMERIC {
            self.module.globals.push(Global {
                ty: GlobalType { ty: t, mutable: true },
                init: vec![Instruction::zero_of(t)],
            });
        }
        self.module.exports.push(Export {
            name: ENTRY_EXPORT.into(),
            kind: ExportKind::Func,
            index: entry,
        });
    }
}

/// Appends a global holding `fuel` and, after every `loop`, a guard that
/// traps once the fuel is spent and decrements it otherwise.
pub fn add_loop_fuel(m: &mut WasmModule, fuel: u32) {
    let g = m.num_globals();
    m.globals.push(Global {
        ty: GlobalType {
            ty: ValType::I32,
            mutable: true,
        },
        init: vec![Instruction::i32_const(fuel as i32)],
    });
    for body in &mut m.code {
        let mut out = Vec::with_capacity(body.instrs.len());
        for ins in body.instrs.drain(..) {
            let is_loop = ins.is("loop");
            out.push(ins);
            if is_loop {
                out.extend([
                    Instruction::with_idx("global.get", g),
                    Instruction::simple("i32.eqz"),
                    Instruction::block("if", BlockType::Empty),
                    Instruction::simple("unreachable"),
                    Instruction::simple("end"),
                    Instruction::with_idx("global.get", g),
                    Instruction::i32_const(1),
                    Instruction::simple("i32.sub"),
                    Instruction::with_idx("global.set", g),
                ]);
            }
        }
        body.instrs = out;
    }
}

/// Generates one binary with AST and module mutations from `plan`.
pub fn generate_with_plan(corpus: &Corpus, cfg: &GenConfig, plan: &MutationPlan) -> Result<GeneratedBinary, GenError> {
    let pools = Pools::new(corpus);
    generate_from_pools(&pools, cfg, plan)
}

pub fn generate_binary(corpus: &Corpus, cfg: &GenConfig) -> Result<GeneratedBinary, GenError> {
    generate_with_plan(corpus, cfg, &MutationPlan::none())
}

pub fn generate_from_pools(pools: &Pools<'_>, cfg: &GenConfig, plan: &MutationPlan) -> Result<GeneratedBinary, GenError> {
    cfg.check().map_err(GenError::Config)?;
    plan.check().map_err(GenError::Config)?;
    if pools.full.is_empty() {
        return Err(GenError::EmptyCorpus);
    }
    let mut b = Builder::new(pools, cfg, plan);
    let results = match &cfg.entry_result_types {
        Some(ts) => ts.clone(),
        None => vec![*ValType::NUMERIC.choose(&mut b.rng).unwrap()],
    };
    let entry = b.build_function(FuncType::new(vec![], results), 0);
    b.supplement_sections(entry);
    let mut rng = b.mut_rng.clone();
    mutate_module(&mut b.module, &plan.module_ops, &mut rng, &mut b.lineage.mutations);
    // after mutation, so no strategy can touch the fuel global or its guards
    if let Some(fuel) = cfg.loop_fuel {
        add_loop_fuel(&mut b.module, fuel);
    }
    let module = b.module;
    let violations = validate_module(&module).violations().to_vec();
    if !violations.is_empty() {
        return Err(GenError::GenerationFailed(
            violations.iter().map(|v| v.to_string()).collect(),
        ));
    }
    let bytes = encode_module(&module).map_err(|e| GenError::GenerationFailed(vec![e.to_string()]))?;
    Ok(GeneratedBinary {
        bytes,
        module,
        entry_export: ENTRY_EXPORT.into(),
        lineage: b.lineage,
    })
}

/// Generates one binary per seed, in parallel; results keep seed order.
pub fn generate_many(
    corpus: &Corpus,
    base: &GenConfig,
    plan: &MutationPlan,
    seeds: &[u64],
) -> Vec<Result<GeneratedBinary, GenError>> {
    let pools = Pools::new(corpus);
    par::map(seeds, |s| {
        let cfg = GenConfig { seed: *s, ..base.clone() };
        generate_from_pools(&pools, &cfg, plan)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_corpus, Limits as TreeLimits};
    use crate::fixtures::factorial_module;

    fn factorial_corpus() -> Corpus {
        let bytes = encode_module(&factorial_module()).unwrap();
        build_corpus(&[("fact".into(), bytes)], TreeLimits::default()).0
    }

    #[test]
    fn factorial_corpus_generates_valid_modules() {
        let c = factorial_corpus();
        for seed in 0..50 {
            let cfg = GenConfig { seed, ..Default::default() };
            let g = generate_binary(&c, &cfg).unwrap();
            assert_eq!(g.lineage.fingerprints.len(), 8);
            assert!(g.lineage.fingerprints.iter().all(|f| c.contains(*f)));
            assert!(g.module.imports.is_empty());
            assert_eq!(g.module.globals.len(), 5);
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let c = factorial_corpus();
        let cfg = GenConfig { seed: 77, ..Default::default() };
        assert_eq!(generate_binary(&c, &cfg).unwrap().bytes, generate_binary(&c, &cfg).unwrap().bytes);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert_eq!(
            generate_binary(&Corpus::default(), &GenConfig::default()).unwrap_err(),
            GenError::EmptyCorpus
        );
    }

    #[test]
    fn v128_entry_ends_with_local_get_4() {
        let c = factorial_corpus();
        let cfg = GenConfig {
            entry_result_types: Some(vec![ValType::V128]),
            ..Default::default()
        };
        let g = generate_binary(&c, &cfg).unwrap();
        assert_eq!(g.module.code[0].instrs.last(), Some(&Instruction::with_idx("local.get", 4)));
    }

    #[test]
    fn fuel_guard_validates() {
        let c = factorial_corpus();
        let cfg = GenConfig {
            loop_fuel: Some(1000),
            ..Default::default()
        };
        let g = generate_binary(&c, &cfg).unwrap();
        assert_eq!(g.module.globals.len(), 6);
        assert!(g.module.code[0].instrs.iter().any(|i| i.is("global.set")));
    }

    #[test]
    fn branch_escape_detection() {
        let m = factorial_module();
        let roots = crate::corpus::parse_function(&m, 0).unwrap();
        assert!(roots.iter().all(usable));
        let mut br = roots[2].clone();
        br.walk_mut(&mut |n| {
            if n.instr.is("br_if") {
                n.instr.set_idx(2)
            }
        });
        assert!(!usable(&br));
    }
}
