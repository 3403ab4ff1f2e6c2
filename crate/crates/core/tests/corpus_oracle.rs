mod common;

use std::collections::{HashMap, HashSet};

use common::seeds;
use proptest::prelude::*;
use wdiff_core::corpus::context::{ConcreteContext, SemanticConstraint};
use wdiff_core::corpus::{
    build_corpus, fingerprint, function_contexts, parse_function, serialize_roots, AstNode, Limits,
};
use wdiff_core::wasm::opcodes::ConstraintKind;
use wdiff_core::wasm::{decode_module, instruction_meta, Instruction, StackType, ValType, WasmModule};

fn decoded() -> Vec<(String, WasmModule)> {
    seeds()
        .into_iter()
        .map(|(n, b)| {
            let m = decode_module(&b).unwrap();
            (n, m)
        })
        .collect()
}

#[test]
fn serialization_reproduces_every_parsed_function() {
    let mut parsed = 0;
    let mut skipped = 0;
    for (name, m) in decoded() {
        for f in m.num_imported_funcs()..m.total_funcs() {
            match parse_function(&m, f) {
                Ok(roots) => {
                    assert_eq!(serialize_roots(&roots), m.body(f).unwrap().instrs, "{name} func {f}");
                    parsed += 1;
                }
                Err(_) => skipped += 1,
            }
        }
    }
    eprintln!("parsed {parsed} functions, skipped {skipped}");
    assert!(parsed > 1000);
    assert!(skipped * 20 < parsed, "too many skipped: {skipped}");
}

fn check_node(m: &WasmModule, locals: &[ValType], n: &AstNode, bad: &mut Vec<String>) {
    let meta = instruction_meta(n.instr.name()).unwrap();
    let st = &n.context.stack_type;
    let name = meta.name;
    if !st.is_concrete() {
        bad.push(format!("{name}: not concrete {st}"));
    }
    let expect: Option<StackType> = match name {
        "call" => m.func_type(n.instr.idx().unwrap()).cloned(),
        "call_indirect" => m.types.get(n.instr.idx().unwrap() as usize).map(|t| {
            let mut p = t.params.clone();
            p.push(ValType::I32);
            StackType::new(p, t.results.clone())
        }),
        "block" | "loop" | "if" => m.block_signature(n.instr.block_type().unwrap()).map(|s| {
            let mut p = s.params.clone();
            if name == "if" {
                p.push(ValType::I32);
            }
            StackType::new(p, s.results)
        }),
        "local.get" => Some(StackType::new(vec![], vec![locals[n.instr.idx().unwrap() as usize]])),
        "local.set" => Some(StackType::new(vec![locals[n.instr.idx().unwrap() as usize]], vec![])),
        "local.tee" => {
            let t = locals[n.instr.idx().unwrap() as usize];
            Some(StackType::new(vec![t], vec![t]))
        }
        "global.get" => Some(StackType::new(vec![], vec![m.global_type(n.instr.idx().unwrap()).unwrap().ty])),
        "global.set" => Some(StackType::new(vec![m.global_type(n.instr.idx().unwrap()).unwrap().ty], vec![])),
        _ if meta.variadic => None,
        _ => {
            let t = &meta.stack_template;
            let fits = |tmpl: &[ValType], got: &[ValType]| {
                tmpl.len() == got.len()
                    && tmpl.iter().zip(got).all(|(a, b)| *a == ValType::Wildcard || a == b)
            };
            if !fits(&t.params, &st.params) || !fits(&t.results, &st.results) {
                bad.push(format!("{name}: {st} does not fit template {t}"));
            }
            None
        }
    };
    if let Some(e) = expect {
        if &e != st {
            bad.push(format!("{name}: {st} expected {e}"));
        }
    }
    let kind = meta.constraint;
    if kind != ConstraintKind::None && n.context.constraint(kind).is_none() {
        bad.push(format!("{name}: missing {kind:?} constraint"));
    }
    for c in &n.children {
        check_node(m, locals, c, bad);
    }
}

#[test]
fn contexts_agree_with_metadata_and_module() {
    let mut bad = Vec::new();
    for (name, m) in decoded() {
        for f in m.num_imported_funcs()..m.total_funcs() {
            let Ok(roots) = parse_function(&m, f) else { continue };
            let ty = m.func_type(f).unwrap();
            let mut locals = ty.params.clone();
            for (k, t) in &m.body(f).unwrap().locals {
                locals.extend(std::iter::repeat_n(*t, *k as usize));
            }
            let before = bad.len();
            for r in &roots {
                check_node(&m, &locals, r, &mut bad);
            }
            if bad.len() > before {
                bad.push(format!("^ in {name} func {f}"));
            }
        }
    }
    assert!(bad.is_empty(), "{:#?}", &bad[..bad.len().min(20)]);
}

#[test]
fn every_function_context_resolves() {
    for (name, m) in decoded().into_iter().take(20) {
        for f in m.num_imported_funcs()..m.total_funcs() {
            let ctxs = function_contexts(&m, f).unwrap_or_else(|e| panic!("{name} {f}: {e}"));
            assert_eq!(ctxs.len(), m.body(f).unwrap().instrs.len());
        }
    }
}

#[test]
fn entry_count_matches_independent_census() {
    let seeds = seeds();
    let (corpus, report) = build_corpus(&seeds, Limits::default());
    // Second pass: recompute the set of fingerprints directly.
    let mut census = HashSet::new();
    let mut roots = 0;
    for (_, b) in &seeds {
        let m = decode_module(b).unwrap();
        for f in m.num_imported_funcs()..m.total_funcs() {
            if let Ok(rs) = parse_function(&m, f) {
                for r in rs {
                    roots += 1;
                    if r.depth() <= 64 && r.size() <= 4096 {
                        census.insert(fingerprint(&r));
                    }
                }
            }
        }
    }
    assert_eq!(report.roots, roots);
    assert_eq!(corpus.len(), census.len());
    let fps: HashSet<u64> = corpus.entries.iter().map(|e| e.fingerprint).collect();
    assert_eq!(fps.len(), corpus.len());
    eprintln!("{} roots -> {} entries", roots, corpus.len());
}

#[test]
fn duplicating_seed_set_keeps_entry_count() {
    let seeds = seeds();
    let (once, _) = build_corpus(&seeds, Limits::default());
    let mut twice = seeds.clone();
    twice.extend(seeds.iter().map(|(n, b)| (format!("copy-{n}"), b.clone())));
    let (doubled, _) = build_corpus(&twice, Limits::default());
    assert_eq!(once.len(), doubled.len());
}

fn bare(name: &str, children: Vec<AstNode>) -> AstNode {
    AstNode {
        instr: Instruction::placeholder(wdiff_core::wasm::op(name)),
        context: ConcreteContext {
            stack_type: StackType::empty(),
            constraints: Vec::<SemanticConstraint>::new(),
        },
        operand_count: children.len(),
        children,
        else_index: None,
    }
}

#[test]
fn shallow_trees_over_small_alphabet_have_distinct_fingerprints() {
    let leaves = ["i32.const", "i64.const", "local.get", "nop"];
    let arity: [(&str, usize); 6] = [
        ("drop", 1),
        ("local.set", 1),
        ("i32.eqz", 1),
        ("i32.add", 2),
        ("i32.sub", 2),
        ("select", 3),
    ];
    let mut trees = Vec::new();
    for l in leaves {
        trees.push(bare(l, vec![]));
    }
    for (op, k) in arity {
        let mut combos: Vec<Vec<&str>> = vec![vec![]];
        for _ in 0..k {
            combos = combos
                .into_iter()
                .flat_map(|c| leaves.iter().map(move |l| [c.clone(), vec![*l]].concat()))
                .collect();
        }
        for c in combos {
            trees.push(bare(op, c.into_iter().map(|l| bare(l, vec![])).collect()));
        }
    }
    assert_eq!(trees.len(), 4 + 3 * 4 + 2 * 16 + 64);
    let mut seen: HashMap<u64, usize> = HashMap::new();
    for (i, t) in trees.iter().enumerate() {
        if let Some(j) = seen.insert(fingerprint(t), i) {
            panic!("trees {j} and {i} collide");
        }
    }
}

proptest! {
    #[test]
    fn constants_fingerprint_alike(a in any::<i32>(), b in any::<i32>()) {
        let mk = |v| {
            let mut n = bare("local.set", vec![bare("i32.const", vec![])]);
            n.children[0].instr = Instruction::i32_const(v);
            n
        };
        prop_assert_eq!(fingerprint(&mk(a)), fingerprint(&mk(b)));
    }
}
