mod common;

use std::path::Path;
use std::process::Command;

use common::*;
use wdiff_core::corpus::store::load_corpus;
use wdiff_core::corpus::{build_corpus, Limits};
use wdiff_core::generator::{generate_many, GenConfig};
use wdiff_core::harness::{load_panel, run_panel, InconsistencyType, Verdict};
use wdiff_core::locator::probe::{parse_log, ProbeEntry};
use wdiff_core::locator::{instrument_functions, instrument_instructions, locate};
use wdiff_core::mutator::MutationPlan;
use wdiff_core::wasm::{encode_module, Export, ExportKind, FuncType, FunctionBody, Instruction as I, ValType, WasmModule};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn exec(engine: &str, bytes: &[u8], dir: &Path, invoke: &str) -> Run {
    let p = dir.join("m.wasm");
    std::fs::write(&p, bytes).unwrap();
    let o = Command::new(exec_path()).arg(engine).arg(&p).arg(invoke).output().unwrap();
    Run {
        code: o.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&o.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&o.stderr).into_owned(),
    }
}

fn results_only(stdout: &str) -> Vec<&str> {
    stdout.lines().filter(|l| !l.starts_with("##WRT|")).collect()
}

fn export_main(m: &mut WasmModule, f: u32) {
    m.exports.push(Export {
        name: "main".into(),
        kind: ExportKind::Func,
        index: f,
    });
}

#[test]
fn const_then_local_set_gives_two_steps() {
    let t = tempfile::tempdir().unwrap();
    let mut m = WasmModule::default();
    let f = m.add_function(
        FuncType::empty(),
        FunctionBody::new(vec![(1, ValType::I32)], vec![I::i32_const(5), I::with_idx("local.set", 0)]),
    );
    export_main(&mut m, f);
    let inst = instrument_instructions(&encode_module(&m).unwrap(), f).unwrap();
    let r = exec("wasmi", &inst.bytes, t.path(), "main");
    assert_eq!(r.code, 0, "{}", r.stderr);
    let log = parse_log(&r.stdout);
    // offsets are body byte offsets: one local group precedes the code
    assert_eq!(
        log,
        [
            ProbeEntry::Step { offset: 3, opcode: "i32.const".into(), bits: "00000005".into() },
            ProbeEntry::Step { offset: 5, opcode: "local.set".into(), bits: String::new() },
        ]
    );
}

#[test]
fn call_probes_nest_like_the_call_tree() {
    // main -> a(3) twice; a(x) -> b(x + x); b(y) = y * 7
    let t = tempfile::tempdir().unwrap();
    let mut m = WasmModule::default();
    let i32_to_i32 = FuncType::new(vec![ValType::I32], vec![ValType::I32]);
    let b = m.add_function(
        i32_to_i32.clone(),
        FunctionBody::new(vec![], vec![I::with_idx("local.get", 0), I::i32_const(7), I::simple("i32.mul")]),
    );
    let a = m.add_function(
        i32_to_i32,
        FunctionBody::new(
            vec![],
            vec![
                I::with_idx("local.get", 0),
                I::with_idx("local.get", 0),
                I::simple("i32.add"),
                I::with_idx("call", b),
            ],
        ),
    );
    let main = m.add_function(
        FuncType::new(vec![], vec![ValType::I32]),
        FunctionBody::new(
            vec![],
            vec![
                I::i32_const(3),
                I::with_idx("call", a),
                I::i32_const(3),
                I::with_idx("call", a),
                I::simple("i32.add"),
            ],
        ),
    );
    export_main(&mut m, main);
    let bytes = encode_module(&m).unwrap();
    let inst = instrument_functions(&bytes).unwrap();
    let r = exec("wasmi", &inst.bytes, t.path(), "main");
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(results_only(&r.stdout), ["i32 84"]);
    let call = |func, v: &str| ProbeEntry::Call { func, vals: vec![v.into()] };
    let ret = |func, v: &str| ProbeEntry::Ret { func, vals: vec![v.into()] };
    let once = [call(a, "00000003"), call(b, "00000006"), ret(b, "0000002a"), ret(a, "0000002a")];
    let expected: Vec<ProbeEntry> = once.iter().chain(once.iter()).cloned().collect();
    assert_eq!(parse_log(&r.stdout), expected);
}

#[test]
fn instrumented_binaries_keep_their_results() {
    let t = tempfile::tempdir().unwrap();
    let corpus = build_corpus(&wdiff_seeds(), Limits::default()).0;
    let cfg = GenConfig { loop_fuel: Some(10_000), ..GenConfig::default() };
    let seeds: Vec<u64> = (0..60).collect();
    let mut checked = 0;
    for g in generate_many(&corpus, &cfg, &MutationPlan::default(), &seeds) {
        let g = g.unwrap();
        let base = exec("wasmi", &g.bytes, t.path(), "main");
        // wasmi's translator aborts on some valid modules; nothing to compare against
        if base.code < 0 {
            continue;
        }
        let entry = g.module.export_index("main", ExportKind::Func).unwrap();
        for inst in [instrument_functions(&g.bytes).unwrap(), instrument_instructions(&g.bytes, entry).unwrap()] {
            let r = exec("wasmi", &inst.bytes, t.path(), "main");
            assert_eq!(r.code, base.code, "{}\n{}", base.stderr, r.stderr);
            assert_eq!(results_only(&r.stdout), results_only(&base.stdout));
            assert_eq!(r.stderr.lines().next(), base.stderr.lines().next());
        }
        checked += 1;
    }
    assert!(checked >= 50, "only {checked} binaries ran");
}

#[test]
fn accesses_near_the_log_page_keep_their_bounds() {
    let t = tempfile::tempdir().unwrap();
    for (addr, offset, grow) in [(-8, 4u64, false), (65532, 0, false), (65532, 0, true), (65530, 8, true), (0, 65535, false)] {
        let mut m = WasmModule::default();
        m.memories.push(wdiff_core::wasm::Limits { min: 1, max: Some(2) });
        let mut code = vec![];
        if grow {
            code.extend([I::i32_const(1), I::simple("memory.grow"), I::simple("drop")]);
        }
        code.extend([I::i32_const(addr), I::i32_const(7), I::mem("i32.store", 2, offset)]);
        code.extend([I::i32_const(addr), I::mem("i32.load", 2, offset), I::simple("memory.size"), I::simple("i32.add")]);
        let f = m.add_function(FuncType::new(vec![], vec![ValType::I32]), FunctionBody::new(vec![], code));
        export_main(&mut m, f);
        let bytes = encode_module(&m).unwrap();
        let base = exec("wasmi", &bytes, t.path(), "main");
        for inst in [instrument_functions(&bytes).unwrap(), instrument_instructions(&bytes, f).unwrap()] {
            let r = exec("wasmi", &inst.bytes, t.path(), "main");
            assert_eq!((r.code, results_only(&r.stdout)), (base.code, results_only(&base.stdout)), "{addr} {offset} {grow}");
            assert_eq!(r.stderr.lines().next(), base.stderr.lines().next());
        }
    }
}

fn wdiff_seeds() -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(seed_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "wasm"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn shift_case_study_is_blamed_on_the_shift() {
    let t = tempfile::tempdir().unwrap();
    let adapters = load_panel(&panel("fast-shl.toml"), &self_dir()).unwrap();
    let bin = repo().join("fixtures/case-studies/simd_shift.wasm");
    let bytes = std::fs::read(&bin).unwrap();
    let p = run_panel("shift", &bin, "main", &[ValType::V128], &adapters).unwrap();
    let Verdict::Inconsistent(rec) = p.verdict else { panic!("{:?}", p.verdict) };
    assert_eq!((rec.kind, rec.suspects.as_slice()), (InconsistencyType::UO, &["mock-shl".to_string()][..]));
    let blame = locate(&rec, &bytes, "main", &adapters, t.path()).unwrap();
    assert_eq!(blame.func, Some(0));
    assert_eq!(blame.opcode.as_deref(), Some("i8x16.shl"));
    assert_eq!(blame.offset, Some(22));
    assert_eq!(blame.key.stack_type, "[v128,i32]->[v128]");
}

#[test]
fn saved_corpus_generates_like_a_fresh_one() {
    let t = tempfile::tempdir().unwrap();
    run_ok(wdiff().arg("corpus-build").arg(seed_dir()).arg(t.path()));
    let saved = load_corpus(&t.path().join("corpus")).unwrap();
    let fresh = build_corpus(&wdiff_seeds(), Limits::default()).0;
    let seeds: Vec<u64> = (0..5).collect();
    let a = generate_many(&saved, &GenConfig::default(), &MutationPlan::default(), &seeds);
    let b = generate_many(&fresh, &GenConfig::default(), &MutationPlan::default(), &seeds);
    for (x, y) in a.into_iter().zip(b) {
        assert_eq!(x.unwrap().bytes, y.unwrap().bytes);
    }
}
