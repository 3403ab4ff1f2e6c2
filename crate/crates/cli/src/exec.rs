//! Runtime runners behind the `wdiff-exec` binary.
//!
//! Protocol shared by every runner: one `<type> <value>` line per result on
//! stdout; exit 0 on success, 1 with `trap: <message>` on stderr for a
//! trap, 2 with `compile error: <message>` when the module is rejected or
//! cannot be linked, 3 for usage problems.

use std::io::Write;

use base64::Engine as _;
use wasmi::{Caller, Config, Engine, Extern, Linker, Memory, Module, Store, Val};
use wdiff_core::wasm::{
    decode_module, encode_module, ExportKind, FuncType, FunctionBody, Instruction as I, Limits, ValType, WasmModule,
    Export,
};

pub const WASI: &str = "wasi_snapshot_preview1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunResult {
    /// One printed line per result.
    Ok(Vec<String>),
    Trap(String),
    CompileError(String),
    Usage(String),
}

impl RunResult {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunResult::Ok(_) => 0,
            RunResult::Trap(_) => 1,
            RunResult::CompileError(_) => 2,
            RunResult::Usage(_) => 3,
        }
    }
}

struct Host {
    mem: Option<Memory>,
    out: Box<dyn Write>,
}

const ERRNO_BADF: i32 = 8;
const ERRNO_FAULT: i32 = 21;
const ERRNO_NOSYS: i32 = 52;

fn fd_write(mut caller: Caller<'_, Host>, fd: i32, iovs: i32, n: i32, nwritten: i32) -> i32 {
    let Some(mem) = caller.data().mem else { return ERRNO_NOSYS };
    if fd != 1 && fd != 2 {
        return ERRNO_BADF;
    }
    let data = mem.data(&caller);
    let word = |at: u64| -> Option<u32> {
        let at = usize::try_from(at).ok()?;
        data.get(at..at + 4).map(|b| u32::from_le_bytes(b.try_into().unwrap()))
    };
    let mut bytes = Vec::new();
    for i in 0..n.max(0) as u64 {
        let base = u64::from(iovs as u32) + 8 * i;
        let (Some(ptr), Some(len)) = (word(base), word(base + 4)) else { return ERRNO_FAULT };
        let (ptr, len) = (ptr as usize, len as usize);
        match data.get(ptr..ptr + len) {
            Some(s) => bytes.extend_from_slice(s),
            None => return ERRNO_FAULT,
        }
    }
    let total = bytes.len() as u32;
    let nw = nwritten as u32 as usize;
    if nw + 4 > data.len() {
        return ERRNO_FAULT;
    }
    let _ = caller.data_mut().out.write_all(&bytes);
    mem.data_mut(&mut caller)[nw..nw + 4].copy_from_slice(&total.to_le_bytes());
    0
}

fn render(v: &Val) -> String {
    match v {
        Val::I32(x) => format!("i32 {x}"),
        Val::I64(x) => format!("i64 {x}"),
        Val::F32(x) => format!("f32 0x{:08x}", x.to_bits()),
        Val::F64(x) => format!("f64 0x{:016x}", x.to_bits()),
        Val::V128(x) => format!("v128 0x{:032x}", x.as_u128()),
        other => format!("ref {other:?}"),
    }
}

/// Runs `invoke` in-process on wasmi. Probe output goes to `out`.
pub fn run_wasmi(bytes: &[u8], invoke: &str, out: Box<dyn Write>) -> RunResult {
    let mut config = Config::default();
    config.wasm_simd(true);
    let engine = Engine::new(&config);
    let module = match Module::new(&engine, bytes) {
        Ok(m) => m,
        Err(e) => return RunResult::CompileError(e.to_string()),
    };
    let mut store = Store::new(&engine, Host { mem: None, out });
    let mut linker = <Linker<Host>>::new(&engine);
    linker.func_wrap(WASI, "fd_write", fd_write).unwrap();
    linker
        .func_wrap(WASI, "proc_exit", |_: Caller<'_, Host>, code: i32| -> Result<(), wasmi::Error> {
            Err(wasmi::Error::new(format!("exit({code})")))
        })
        .unwrap();
    for imp in module.imports() {
        if imp.module() != WASI || !matches!(imp.name(), "fd_write" | "proc_exit") {
            return RunResult::CompileError(format!("unresolved import {}.{}", imp.module(), imp.name()));
        }
    }
    let instance = match linker.instantiate_and_start(&mut store, &module) {
        Ok(i) => i,
        // imports are resolved above, so what is left happens at run time
        Err(e) => return RunResult::Trap(e.to_string()),
    };
    let mem = instance.exports(&store).find_map(|e| match e.into_extern() {
        Extern::Memory(m) => Some(m),
        _ => None,
    });
    store.data_mut().mem = mem;
    let Some(func) = instance.get_func(&store, invoke) else {
        return RunResult::Usage(format!("no exported function {invoke}"));
    };
    let ty = func.ty(&store);
    let params: Vec<Val> = ty.params().iter().map(|t| Val::default_for_ty(*t)).collect();
    let mut results: Vec<Val> = ty.results().iter().map(|t| Val::default_for_ty(*t)).collect();
    let r = func.call(&mut store, &params, &mut results);
    let _ = store.data_mut().out.flush();
    match r {
        Ok(()) => RunResult::Ok(results.iter().map(render).collect()),
        Err(e) => RunResult::Trap(e.to_string()),
    }
}

fn splice(bytes: &[u8], target: &str, before: &[I], after: &[I]) -> Vec<u8> {
    let Ok(mut m) = decode_module(bytes) else { return bytes.to_vec() };
    for body in &mut m.code {
        let mut out = Vec::with_capacity(body.instrs.len());
        for ins in body.instrs.drain(..) {
            let hit = ins.is(target);
            if hit {
                out.extend_from_slice(before);
            }
            out.push(ins);
            if hit {
                out.extend_from_slice(after);
            }
        }
        body.instrs = out;
    }
    encode_module(&m).unwrap_or_else(|_| bytes.to_vec())
}

/// The seeded bug: every `i32.add` also adds one.
pub fn mock_add_rewrite(bytes: &[u8]) -> Vec<u8> {
    splice(bytes, "i32.add", &[], &[I::i32_const(1), I::simple("i32.add")])
}

/// Another seeded bug: `i8x16.shl` halves its shift count (arithmetic
/// shift) before reducing it.
pub fn mock_shl_rewrite(bytes: &[u8]) -> Vec<u8> {
    splice(bytes, "i8x16.shl", &[I::i32_const(1), I::simple("i32.shr_s")], &[])
}

fn store_name(t: ValType) -> Option<(&'static str, u32)> {
    Some(match t {
        ValType::I32 => ("i32.store", 2),
        ValType::I64 => ("i64.store", 3),
        ValType::F32 => ("f32.store", 2),
        ValType::F64 => ("f64.store", 3),
        ValType::V128 => ("v128.store", 4),
        _ => return None,
    })
}

/// A module importing `m.f` with signature `sig`; its export `run` calls it
/// with zero arguments and stores result `i` at byte `16 * i` of `mem`.
/// Lets a JS host read results (including v128) without crossing the JS
/// value boundary.
pub fn result_wrapper(sig: &FuncType) -> Option<Vec<u8>> {
    let mut m = WasmModule::default();
    m.add_func_import("m", "f", sig.clone());
    m.memories.push(Limits::new(1, None));
    let mut body: Vec<I> = sig.params.iter().map(|t| I::zero_of(*t)).collect();
    body.push(I::with_idx("call", 0));
    let n = sig.results.len() as u32;
    for i in (0..n).rev() {
        body.push(I::with_idx("local.set", i));
    }
    for (i, t) in sig.results.iter().enumerate() {
        let (name, align) = store_name(*t)?;
        body.extend([I::i32_const(16 * i as i32), I::with_idx("local.get", i as u32), I::mem(name, align, 0)]);
    }
    let locals = sig.results.iter().map(|t| (1, *t)).collect();
    let run = m.add_function(FuncType::empty(), FunctionBody::new(locals, body));
    m.exports.push(Export { name: "run".into(), kind: ExportKind::Func, index: run });
    m.exports.push(Export { name: "mem".into(), kind: ExportKind::Memory, index: 0 });
    encode_module(&m).ok()
}

/// Host script for node; argv: module path, export, wrapper (base64),
/// comma-separated result types.
pub const NODE_SCRIPT: &str = r#"
const fs = require('fs');
const [file, invoke, wrapB64, types] = process.argv.slice(1);
const die = (code, msg) => { fs.writeSync(2, msg + '\n'); process.exit(code); };
let mod;
try { mod = new WebAssembly.Module(fs.readFileSync(file)); } catch (e) { die(2, 'compile error: ' + e.message); }
let mem = null;
const fdWrite = (fd, iovs, n, nw) => {
  if (!mem) return 52;
  if (fd !== 1 && fd !== 2) return 8;
  try {
    const dv = new DataView(mem.buffer);
    const parts = [];
    let total = 0;
    for (let i = 0; i < n; i++) {
      const p = dv.getUint32(iovs + 8 * i, true), l = dv.getUint32(iovs + 8 * i + 4, true);
      parts.push(Buffer.from(new Uint8Array(mem.buffer, p, l)));
      total += l;
    }
    dv.setUint32(nw, total, true);
    fs.writeSync(fd, Buffer.concat(parts));
    return 0;
  } catch (e) { return 21; }
};
const imports = {};
for (const imp of WebAssembly.Module.imports(mod)) {
  let v;
  if (imp.module === 'wasi_snapshot_preview1' && imp.kind === 'function' && imp.name === 'fd_write') v = fdWrite;
  else if (imp.module === 'wasi_snapshot_preview1' && imp.kind === 'function' && imp.name === 'proc_exit')
    v = (c) => { throw new WebAssembly.RuntimeError('exit(' + c + ')'); };
  else die(2, 'compile error: unresolved import ' + imp.module + '.' + imp.name);
  (imports[imp.module] ??= {})[imp.name] = v;
}
let inst;
try { inst = new WebAssembly.Instance(mod, imports); } catch (e) {
  if (e instanceof WebAssembly.LinkError) die(2, 'compile error: ' + e.message);
  die(1, 'trap: ' + e.message);
}
for (const v of Object.values(inst.exports)) if (v instanceof WebAssembly.Memory) { mem = v; break; }
const f = inst.exports[invoke];
if (typeof f !== 'function') die(3, 'no exported function ' + invoke);
if (!wrapB64) die(3, 'unsupported entry signature');
const w = new WebAssembly.Instance(new WebAssembly.Module(Buffer.from(wrapB64, 'base64')), { m: { f } });
try { w.exports.run(); } catch (e) { die(1, 'trap: ' + (e && e.message)); }
const dv = new DataView(w.exports.mem.buffer);
const hex = (v, n) => v.toString(16).padStart(n, '0');
const out = [];
(types ? types.split(',') : []).forEach((t, i) => {
  const o = 16 * i;
  if (t === 'i32') out.push('i32 ' + dv.getUint32(o, true));
  else if (t === 'i64') out.push('i64 ' + dv.getBigUint64(o, true));
  else if (t === 'f32') out.push('f32 0x' + hex(dv.getUint32(o, true), 8));
  else if (t === 'f64') out.push('f64 0x' + hex(dv.getBigUint64(o, true), 16));
  else out.push('v128 0x' + hex(dv.getBigUint64(o + 8, true), 16) + hex(dv.getBigUint64(o, true), 16));
});
fs.writeSync(1, out.map((l) => l + '\n').join(''));
"#;

/// Node flags per execution tier.
pub fn node_flags(tier: &str) -> Option<&'static [&'static str]> {
    Some(match tier {
        "node-liftoff" => &["--liftoff", "--no-wasm-tier-up", "--no-wasm-lazy-compilation"],
        "node-turbofan" => &["--no-liftoff", "--no-wasm-lazy-compilation"],
        _ => return None,
    })
}

/// Arguments for `node` running `invoke` from the module at `path`.
pub fn node_args(tier_flags: &[&str], path: &str, bytes: &[u8], invoke: &str) -> Vec<String> {
    let sig = decode_module(bytes).ok().and_then(|m| {
        let f = m.export_index(invoke, ExportKind::Func)?;
        m.func_type(f).cloned()
    });
    let wrapper = sig.as_ref().and_then(result_wrapper);
    let b64 = wrapper.map(|w| base64::engine::general_purpose::STANDARD.encode(w)).unwrap_or_default();
    let types = sig
        .map(|s| s.results.iter().map(|t| t.name()).collect::<Vec<_>>().join(","))
        .unwrap_or_default();
    let mut args: Vec<String> = tier_flags.iter().map(|s| s.to_string()).collect();
    args.extend(["-e".into(), NODE_SCRIPT.into(), path.into(), invoke.into(), b64, types]);
    args
}
