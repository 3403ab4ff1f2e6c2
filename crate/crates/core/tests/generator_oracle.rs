mod common;

use std::time::Instant;

use wdiff_core::corpus::{build_corpus, Corpus, Limits as TreeLimits};
use wdiff_core::generator::{generate_binary, generate_many, GenConfig};
use wdiff_core::mutator::MutationPlan;
use wdiff_core::wasm::{
    encode_module, ExportKind, FuncType, FunctionBody, GlobalType, Global, Instruction as I, Limits, ValType,
    WasmModule,
};

fn seed_corpus() -> Corpus {
    let seeds = common::seeds();
    assert!(seeds.len() >= 50);
    build_corpus(&seeds, TreeLimits::default()).0
}

/// Corpus made from one function body of a throwaway module.
fn corpus_of(m: WasmModule) -> Corpus {
    build_corpus(&[("t".into(), encode_module(&m).unwrap())], TreeLimits::default()).0
}

fn call_graph_is_tree(m: &WasmModule) -> bool {
    let mut callers = vec![0u32; m.total_funcs() as usize];
    for (i, body) in m.code.iter().enumerate() {
        for ins in &body.instrs {
            if ins.is("call") {
                let c = ins.idx().unwrap();
                if c as usize <= i {
                    return false;
                }
                callers[c as usize] += 1;
            }
        }
    }
    callers.iter().all(|n| *n <= 1)
}

#[test]
fn thousand_generations_validate() {
    let corpus = seed_corpus();
    let seeds: Vec<u64> = (0..1000).collect();
    let t = Instant::now();
    let plain = generate_many(&corpus, &GenConfig::default(), &MutationPlan::none(), &seeds);
    let mutated = generate_many(&corpus, &GenConfig::default(), &MutationPlan::default(), &seeds);
    let mut failures = Vec::new();
    for (i, r) in plain.iter().chain(mutated.iter()).enumerate() {
        match r {
            Ok(g) => {
                if let Err(e) = common::reference_valid(&g.bytes) {
                    failures.push(format!("#{i}: {e}"));
                }
            }
            Err(e) => failures.push(format!("#{i}: {e}")),
        }
    }
    println!("2000 generations in {:?}", t.elapsed());
    assert!(failures.is_empty(), "{} failures: {:?}", failures.len(), &failures[..failures.len().min(5)]);
    for g in plain.iter().map(|r| r.as_ref().unwrap()) {
        assert!(g.module.imports.is_empty());
        assert!(call_graph_is_tree(&g.module));
        assert_eq!(g.module.exports.iter().filter(|e| e.name == g.entry_export).count(), 1);
    }
}

#[test]
fn v128_entries_end_with_local_get_4() {
    let corpus = seed_corpus();
    let base = GenConfig {
        entry_result_types: Some(vec![ValType::V128]),
        ..Default::default()
    };
    let seeds: Vec<u64> = (0..1000).collect();
    for r in generate_many(&corpus, &base, &MutationPlan::none(), &seeds) {
        let g = r.unwrap();
        assert_eq!(g.module.code[0].instrs.last(), Some(&I::with_idx("local.get", 4)));
        assert!(common::reference_valid(&g.bytes).is_ok());
    }
}

#[test]
fn deterministic_across_runs() {
    let corpus = seed_corpus();
    let cfg = GenConfig {
        seed: 4242,
        ..Default::default()
    };
    let a = generate_binary(&corpus, &cfg).unwrap();
    let b = generate_binary(&corpus, &cfg).unwrap();
    assert_eq!(a.bytes, b.bytes);
    assert_eq!(a.lineage, b.lineage);
}

#[test]
fn i64_local_get_is_rewritten_to_one() {
    let mut m = WasmModule::default();
    m.add_function(
        FuncType::empty(),
        FunctionBody::new(
            vec![(3, ValType::I32), (1, ValType::I64)],
            vec![I::with_idx("local.get", 3), I::simple("drop")],
        ),
    );
    let c = corpus_of(m);
    let g = generate_binary(&c, &GenConfig::default()).unwrap();
    let gets: Vec<_> = g.module.code[0].instrs.iter().filter(|i| i.is("local.get")).collect();
    assert!(gets.len() >= 8);
    for i in &gets[..8] {
        assert_eq!(i.idx(), Some(1));
    }
}

#[test]
fn f64_global_set_is_rewritten_to_three() {
    let mut m = WasmModule::default();
    m.globals.push(Global {
        ty: GlobalType { ty: ValType::F64, mutable: true },
        init: vec![I::f64_const(0)],
    });
    m.add_function(
        FuncType::empty(),
        FunctionBody::new(vec![], vec![I::f64_const(2f64.to_bits()), I::with_idx("global.set", 0)]),
    );
    let g = generate_binary(&corpus_of(m), &GenConfig::default()).unwrap();
    let sets: Vec<_> = g.module.code[0].instrs.iter().filter(|i| i.is("global.set")).collect();
    assert_eq!(sets.len(), 8);
    assert!(sets.iter().all(|i| i.idx() == Some(3)));
    assert_eq!(g.module.globals.len(), 5);
}

#[test]
fn constant_address_sizes_memory_and_data() {
    let mut m = WasmModule::default();
    m.memories.push(Limits::new(2, None));
    m.add_function(
        FuncType::empty(),
        FunctionBody::new(vec![], vec![I::i32_const(70000), I::mem("i32.load", 2, 0), I::simple("drop")]),
    );
    let g = generate_binary(&corpus_of(m), &GenConfig::default()).unwrap();
    assert!(g.module.memories[0].min >= 2);
    // Independent recomputation: scan for const/load pairs.
    let mut max_end = 0u64;
    for w in g.module.code[0].instrs.windows(2) {
        if let (Some(v), Some(arg)) = (w[0].imms.first(), w[1].memarg()) {
            if let wdiff_core::wasm::Immediate::I32(b) = v {
                max_end = max_end.max(*b as u32 as u64 + arg.offset + 4);
            }
        }
    }
    assert_eq!(max_end, 70004);
    assert!(g.module.data[0].bytes.len() as u64 >= 70004);
}

#[test]
fn direct_call_gets_synthesized_callee() {
    let mut m = WasmModule::default();
    let callee = m.add_function(
        FuncType::new(vec![ValType::I32], vec![ValType::I64]),
        FunctionBody::new(vec![], vec![I::i64_const(1)]),
    );
    m.add_function(
        FuncType::empty(),
        FunctionBody::new(vec![], vec![I::i32_const(3), I::with_idx("call", callee), I::simple("drop")]),
    );
    let c = corpus_of(m);
    let cfg = GenConfig {
        subtrees_per_function: 1,
        seed: 3,
        ..Default::default()
    };
    // Sample until the call entry is drawn.
    let g = (0..64)
        .map(|s| generate_binary(&c, &GenConfig { seed: s, ..cfg.clone() }).unwrap())
        .find(|g| g.module.code[0].instrs.iter().any(|i| i.is("call")))
        .unwrap();
    let call = g.module.code[0].instrs.iter().find(|i| i.is("call")).unwrap();
    let target = call.idx().unwrap();
    assert_eq!(
        g.module.func_type(target).unwrap(),
        &FuncType::new(vec![ValType::I32], vec![ValType::I64])
    );
    assert!(g.module.imports.is_empty());
}

#[test]
fn call_indirect_gets_table_slot() {
    let mut m = WasmModule::default();
    let callee = m.add_function(FuncType::new(vec![], vec![ValType::F32]), FunctionBody::new(vec![], vec![I::f32_const(0)]));
    m.tables.push(wdiff_core::wasm::TableType {
        elem: ValType::FuncRef,
        limits: Limits::new(1, Some(1)),
    });
    m.elements.push(wdiff_core::wasm::ElementSegment {
        mode: wdiff_core::wasm::SegmentMode::Active { index: 0, offset: vec![I::i32_const(0)] },
        elem_type: ValType::FuncRef,
        items: wdiff_core::wasm::ElemItems::Funcs(vec![callee]),
        flags: 0,
    });
    let ty = m.intern_type(FuncType::new(vec![], vec![ValType::F32]));
    m.add_function(
        FuncType::empty(),
        FunctionBody::new(
            vec![(1, ValType::I32)],
            vec![
                I::with_idx("local.get", 0),
                I::new(wdiff_core::wasm::op("call_indirect"), vec![wdiff_core::wasm::Immediate::Idx(ty), wdiff_core::wasm::Immediate::Idx(0)]),
                I::simple("drop"),
            ],
        ),
    );
    let c = corpus_of(m);
    let g = (0..64)
        .map(|s| generate_binary(&c, &GenConfig { seed: s, subtrees_per_function: 1, ..Default::default() }).unwrap())
        .find(|g| g.module.code[0].instrs.iter().any(|i| i.is("call_indirect")))
        .unwrap();
    let body = &g.module.code[0].instrs;
    let at = body.iter().position(|i| i.is("call_indirect")).unwrap();
    assert!(body[at - 2].is("drop"), "{:?}", &body[..=at]);
    assert_eq!(body[at - 1], I::i32_const(0));
    let slots = match &g.module.elements[0].items {
        wdiff_core::wasm::ElemItems::Funcs(f) => f.clone(),
        _ => unreachable!(),
    };
    let n = slots.len() as u32;
    assert_eq!(g.module.tables[0].limits, Limits::new(n, Some(n)));
    assert_eq!(
        g.module.func_type(slots[0]).unwrap(),
        &FuncType::new(vec![], vec![ValType::F32])
    );
    assert!(common::reference_valid(&g.bytes).is_ok());
    let exported = g.module.export_index("main", ExportKind::Func);
    assert_eq!(exported, Some(0));
}
