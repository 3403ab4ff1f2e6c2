mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wdiff_core::corpus::{parse_function, serialize_roots};
use wdiff_core::mutator::{mutate_module, mutate_roots, MutationPlan, Strategy};
use wdiff_core::wasm::{decode_module, encode_module, validate_module, WasmModule};

fn modules() -> Vec<(String, WasmModule)> {
    common::seeds()
        .into_iter()
        .map(|(n, b)| (n, decode_module(&b).unwrap()))
        .collect()
}

fn check(m: &WasmModule) -> Result<(), String> {
    if let Some(v) = validate_module(m).violations().first() {
        return Err(format!("own validator: {v}"));
    }
    let bytes = encode_module(m).map_err(|e| e.to_string())?;
    common::reference_valid(&bytes)
}

#[test]
fn ast_mutations_preserve_validity() {
    let mods = modules();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut applied = [0usize; 3];
    let mut failures = Vec::new();
    let mut round = 0u64;
    while applied.iter().sum::<usize>() < 10_000 {
        round += 1;
        let (name, base) = &mods[rng.random_range(0..mods.len())];
        let first = base.num_imported_funcs();
        if base.total_funcs() == first {
            continue;
        }
        let f = rng.random_range(first..base.total_funcs());
        let k = rng.random_range(0..3);
        let plan = MutationPlan {
            ast_budget: 1.0,
            ast_ops: vec![Strategy::AST[k]],
            module_ops: vec![],
            seed: round,
            ..Default::default()
        };
        let mut roots = parse_function(base, f).unwrap();
        let mut log = vec![];
        mutate_roots(&mut roots, &plan, &mut rng, "", &mut log);
        if log.is_empty() {
            continue;
        }
        applied[k] += log.len();
        let mut m = base.clone();
        m.body_mut(f).unwrap().instrs = serialize_roots(&roots);
        if let Err(e) = check(&m) {
            failures.push(format!("{name} func {f} {:?}: {e}", Strategy::AST[k]));
        }
    }
    println!("applied per strategy {applied:?}");
    assert!(applied.iter().all(|n| *n > 1000), "{applied:?}");
    assert!(failures.is_empty(), "{} failures, first: {:?}", failures.len(), &failures[..failures.len().min(5)]);
}

#[test]
fn module_mutations_preserve_validity() {
    let mods = modules();
    let mut rng = ChaCha8Rng::seed_from_u64(0xface);
    let mut applied = 0;
    let mut failures = Vec::new();
    for i in 0..2_000 {
        let (name, base) = &mods[i % mods.len()];
        let mut m = base.clone();
        let mut log = vec![];
        mutate_module(&mut m, &Strategy::MODULE, &mut rng, &mut log);
        applied += log.len();
        if let Err(e) = check(&m) {
            failures.push(format!("{name}: {e}"));
        }
    }
    assert!(applied > 1000);
    assert!(failures.is_empty(), "{:?}", &failures[..failures.len().min(5)]);
}
