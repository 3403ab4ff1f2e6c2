//! AST-level and module-level mutations. Every strategy keeps the module
//! valid.

pub mod immediates;
pub mod module_ops;
pub mod simd;
pub mod swap;

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{parse_function, serialize_roots, AstNode};
use crate::wasm::WasmModule;

pub use immediates::mutate_immediates;
pub use module_ops::mutate_module;
pub use simd::mutate_to_simd;
pub use swap::swap_same_stacktype;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Strategy {
    Immediates,
    Simd,
    Swap,
    GlobalAttrs,
    ImportExport,
    MemoryLimits,
    TableLimits,
}

impl Strategy {
    pub const AST: [Strategy; 3] = [Strategy::Immediates, Strategy::Simd, Strategy::Swap];
    pub const MODULE: [Strategy; 4] = [
        Strategy::GlobalAttrs,
        Strategy::ImportExport,
        Strategy::MemoryLimits,
        Strategy::TableLimits,
    ];

    pub fn is_ast(self) -> bool {
        Self::AST.contains(&self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationPlan {
    /// Expected AST mutations per function.
    pub ast_budget: f64,
    pub ast_ops: Vec<Strategy>,
    pub module_ops: Vec<Strategy>,
    /// Strategies allowed to emit invalid modules. None are implemented, so
    /// any `true` here is rejected by [`MutationPlan::check`].
    #[serde(default)]
    pub validity_breaking: BTreeMap<Strategy, bool>,
    pub seed: u64,
}

impl Default for MutationPlan {
    fn default() -> Self {
        MutationPlan {
            ast_budget: 2.0,
            ast_ops: Strategy::AST.to_vec(),
            module_ops: Strategy::MODULE.to_vec(),
            validity_breaking: BTreeMap::new(),
            seed: 0,
        }
    }
}

impl MutationPlan {
    pub fn none() -> Self {
        MutationPlan {
            ast_budget: 0.0,
            ast_ops: vec![],
            module_ops: vec![],
            ..Default::default()
        }
    }

    pub fn check(&self) -> Result<(), String> {
        if !(self.ast_budget >= 0.0) {
            return Err("ast budget must be non-negative".into());
        }
        if let Some(s) = self.ast_ops.iter().find(|s| !s.is_ast()) {
            return Err(format!("{s:?} is not an AST-level strategy"));
        }
        if let Some(s) = self.module_ops.iter().find(|s| s.is_ast()) {
            return Err(format!("{s:?} is not a module-level strategy"));
        }
        if let Some((s, _)) = self.validity_breaking.iter().find(|(_, on)| **on) {
            return Err(format!("{s:?}: validity-breaking mutations are not supported"));
        }
        Ok(())
    }
}

/// One applied mutation, kept in a binary's lineage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationRecord {
    pub strategy: Strategy,
    pub site: String,
    pub before: String,
    pub after: String,
}

fn applicable(node: &AstNode, s: Strategy) -> bool {
    match s {
        Strategy::Immediates => immediates::eligible(node),
        Strategy::Simd => simd::eligible(node),
        Strategy::Swap => swap::eligible(node),
        _ => false,
    }
}

fn paths(node: &AstNode, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    out.push(prefix.clone());
    for (i, c) in node.children.iter().enumerate() {
        prefix.push(i);
        paths(c, prefix, out);
        prefix.pop();
    }
}

fn at_path<'a>(roots: &'a mut [AstNode], path: &[usize]) -> &'a mut AstNode {
    let mut n = &mut roots[path[0]];
    for &i in &path[1..] {
        n = &mut n.children[i];
    }
    n
}

fn path_string(p: &[usize]) -> String {
    p.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
}

/// Applies AST-level strategies to the roots of one function. Each eligible
/// site is picked with probability `budget / sites`, then one applicable
/// strategy is drawn for it.
pub fn mutate_roots<R: Rng>(
    roots: &mut [AstNode],
    plan: &MutationPlan,
    rng: &mut R,
    site_prefix: &str,
    log: &mut Vec<MutationRecord>,
) {
    if plan.ast_ops.is_empty() || plan.ast_budget <= 0.0 {
        return;
    }
    let mut all = Vec::new();
    for (i, r) in roots.iter().enumerate() {
        paths(r, &mut vec![i], &mut all);
    }
    let eligible: Vec<(Vec<usize>, Vec<Strategy>)> = all
        .into_iter()
        .filter_map(|p| {
            let n = at_path(roots, &p);
            let ops: Vec<Strategy> = plan.ast_ops.iter().copied().filter(|s| applicable(n, *s)).collect();
            (!ops.is_empty()).then_some((p, ops))
        })
        .collect();
    if eligible.is_empty() {
        return;
    }
    let p = (plan.ast_budget / eligible.len() as f64).min(1.0);
    let mut picked: Vec<(Vec<usize>, Strategy)> = Vec::new();
    for (path, ops) in eligible {
        if rng.random_bool(p) {
            let s = ops[rng.random_range(0..ops.len())];
            picked.push((path, s));
        }
    }
    // Later sites first: edits never move an earlier path.
    for (path, s) in picked.into_iter().rev() {
        let node = at_path(roots, &path);
        let before = crate::corpus::ast::shape(node);
        let changed = match s {
            Strategy::Immediates => {
                let old = node.instr.clone();
                mutate_immediates(node, rng);
                if node.instr != old {
                    log.push(MutationRecord {
                        strategy: s,
                        site: format!("{site_prefix}/{}", path_string(&path)),
                        before: format!("{:?}", old.imms),
                        after: format!("{:?}", node.instr.imms),
                    });
                }
                false
            }
            Strategy::Simd => {
                let new = mutate_to_simd(node, rng);
                let changed = new != *node;
                *node = new;
                changed
            }
            Strategy::Swap => {
                let new = swap_same_stacktype(node, rng);
                let changed = new != *node;
                *node = new;
                changed
            }
            _ => false,
        };
        if changed {
            log.push(MutationRecord {
                strategy: s,
                site: format!("{site_prefix}/{}", path_string(&path)),
                before,
                after: crate::corpus::ast::shape(at_path(roots, &path)),
            });
        }
    }
}

/// Runs the whole plan over a module: AST strategies on every defined
/// function body, then each module-level strategy once.
pub fn apply_plan<R: Rng>(m: &mut WasmModule, plan: &MutationPlan, rng: &mut R) -> Vec<MutationRecord> {
    let mut log = Vec::new();
    let first = m.num_imported_funcs();
    for f in first..m.total_funcs() {
        let Ok(mut roots) = parse_function(m, f) else { continue };
        mutate_roots(&mut roots, plan, rng, &format!("func/{f}"), &mut log);
        m.body_mut(f).unwrap().instrs = serialize_roots(&roots);
    }
    mutate_module(m, &plan.module_ops, rng, &mut log);
    log
}
