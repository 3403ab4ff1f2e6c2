//! `wdiff-exec <engine> <binary> <export>`: runs one export on one engine.
//!
//! Engines: `wasmi`, `mock-add` (wasmi with `i32.add` off by one),
//! `mock-shl` (wasmi with a misreduced `i8x16.shl` count), `node-liftoff`,
//! `node-turbofan`.

use std::io::Write;
use std::os::unix::process::CommandExt;
use std::process::{exit, Command};

use wdiff_cli::exec::{mock_add_rewrite, mock_shl_rewrite, node_args, node_flags, run_wasmi, RunResult};

fn finish(r: RunResult) -> ! {
    let code = r.exit_code();
    match r {
        RunResult::Ok(lines) => {
            let mut out = std::io::stdout().lock();
            for l in lines {
                let _ = writeln!(out, "{l}");
            }
            let _ = out.flush();
        }
        RunResult::Trap(m) => eprintln!("trap: {m}"),
        RunResult::CompileError(m) => eprintln!("compile error: {m}"),
        RunResult::Usage(m) => eprintln!("{m}"),
    }
    exit(code)
}

const ENGINE_STACK: usize = 256 << 20;

/// Runs `f` on a thread with a generous stack; a panic becomes a crash trap.
fn on_big_stack(f: impl FnOnce() -> RunResult + Send + 'static) -> RunResult {
    let h = std::thread::Builder::new().stack_size(ENGINE_STACK).spawn(f).expect("spawn engine thread");
    match h.join() {
        Ok(r) => r,
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            RunResult::Trap(format!("engine panic: {msg}"))
        }
    }
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [engine, path, invoke] = args.as_slice() else {
        eprintln!("usage: wdiff-exec <wasmi|mock-add|mock-shl|node-liftoff|node-turbofan> <binary> <export>");
        exit(3);
    };
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("{path}: {e}");
            exit(3);
        }
    };
    match engine.as_str() {
        "wasmi" | "mock-add" | "mock-shl" => {
            let engine = engine.clone();
            let invoke = invoke.clone();
            finish(on_big_stack(move || {
                let stdout = Box::new(std::io::LineWriter::new(std::io::stdout()));
                let bytes = match engine.as_str() {
                    "mock-add" => mock_add_rewrite(&bytes),
                    "mock-shl" => mock_shl_rewrite(&bytes),
                    _ => bytes,
                };
                run_wasmi(&bytes, &invoke, stdout)
            }))
        }
        tier => match node_flags(tier) {
            Some(flags) => {
                // replace this process so a timeout kill reaches node itself
                let err = Command::new("node").args(node_args(flags, path, &bytes, invoke)).exec();
                eprintln!("node: {err}");
                exit(3);
            }
            None => {
                eprintln!("unknown engine {tier}");
                exit(3);
            }
        },
    }
}
