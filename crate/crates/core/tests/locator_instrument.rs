mod common;

use wdiff_core::corpus::{build_corpus, Limits as TreeLimits};
use wdiff_core::generator::{generate_many, GenConfig};
use wdiff_core::locator::instrument::{FD_WRITE, WASI_MODULE};
use wdiff_core::locator::{instrument_functions, instrument_instructions, ProbeSite};
use wdiff_core::mutator::MutationPlan;
use wdiff_core::wasm::{decode_module, encode_module, FuncType, FunctionBody, ImportDesc, Instruction as I, ValType, WasmModule};

#[test]
fn thousand_instrumented_binaries_validate() {
    let corpus = build_corpus(&common::seeds(), TreeLimits::default()).0;
    let seeds: Vec<u64> = (0..500).collect();
    let mut bins = generate_many(&corpus, &GenConfig::default(), &MutationPlan::none(), &seeds);
    bins.extend(generate_many(&corpus, &GenConfig::default(), &MutationPlan::default(), &seeds));
    let mut failures = Vec::new();
    let mut checked = 0;
    for (i, g) in bins.iter().enumerate() {
        let g = g.as_ref().unwrap();
        let calls = match instrument_functions(&g.bytes) {
            Ok(c) => c,
            Err(e) => {
                failures.push(format!("#{i} calls: {e}"));
                continue;
            }
        };
        if let Err(e) = common::reference_valid(&calls.bytes) {
            failures.push(format!("#{i} calls: {e}"));
        }
        let n_calls = g
            .module
            .code
            .iter()
            .flat_map(|b| &b.instrs)
            .filter(|x| x.is("call") || x.is("call_indirect"))
            .count();
        // every generated call site is reachable
        if i < 500 && calls.probes.len() != 2 * n_calls {
            failures.push(format!("#{i}: {} probes for {n_calls} calls", calls.probes.len()));
        }
        let target = g.module.num_imported_funcs() + (i as u32 % g.module.code.len() as u32);
        match instrument_instructions(&g.bytes, target) {
            Ok(s) => {
                if let Err(e) = common::reference_valid(&s.bytes) {
                    failures.push(format!("#{i} steps: {e}"));
                }
                if s.probes.iter().any(|p| !matches!(p, ProbeSite::Step { func, .. } if *func == target)) {
                    failures.push(format!("#{i}: foreign step probe"));
                }
            }
            Err(e) => failures.push(format!("#{i} steps: {e}")),
        }
        checked += 1;
    }
    assert!(failures.is_empty(), "{} failures: {:?}", failures.len(), &failures[..failures.len().min(5)]);
    assert_eq!(checked, 1000);
}

#[test]
fn zero_call_binary_gets_import_and_page_only() {
    let mut m = WasmModule::default();
    m.add_function(
        FuncType::new(vec![], vec![ValType::I32]),
        FunctionBody::new(vec![], vec![I::i32_const(7)]),
    );
    let bytes = encode_module(&m).unwrap();
    let out = instrument_functions(&bytes).unwrap();
    assert!(out.probes.is_empty());
    let d = decode_module(&out.bytes).unwrap();
    assert_eq!(d.imports.len(), 1);
    assert_eq!((d.imports[0].module.as_str(), d.imports[0].name.as_str()), (WASI_MODULE, FD_WRITE));
    let ImportDesc::Func(t) = d.imports[0].desc else { panic!() };
    assert_eq!(d.types[t as usize], FuncType::new(vec![ValType::I32; 4], vec![ValType::I32]));
    assert_eq!(d.memories.len(), 1);
    assert_eq!((d.memories[0].min, d.memories[0].max), (1, Some(1)));
    // the original body is untouched apart from the index shift
    assert_eq!(d.code[0].instrs, m.code[0].instrs);
    assert_eq!(out.log_base, 0);
}

#[test]
fn existing_memory_grows_by_one_page() {
    let mut m = WasmModule::default();
    m.memories.push(wdiff_core::wasm::Limits::new(2, Some(2)));
    m.add_function(FuncType::empty(), FunctionBody::new(vec![], vec![]));
    let out = instrument_instructions(&encode_module(&m).unwrap(), 0).unwrap();
    let d = decode_module(&out.bytes).unwrap();
    assert_eq!((d.memories[0].min, d.memories[0].max), (3, Some(3)));
    assert_eq!(out.log_base, 2 * 65536);
    assert!(out.probes.is_empty());
}
