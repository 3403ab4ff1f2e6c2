//! Hand-built modules used as regression fixtures, and replay of recorded
//! runtime output for them.

use std::path::Path;

use serde::Deserialize;

use crate::harness::{classify, interpret, Adapter, Captured, HarnessError, InconsistencyType, PanelFile, Verdict};
use crate::wasm::{
    BlockType, DataSegment, Export, ExportKind, FuncType, FunctionBody, Instruction as I, Limits,
    SegmentMode, ValType, WasmModule,
};

/// Iterative factorial of 5: no params, returns i32, two i32 locals.
pub fn factorial_module() -> WasmModule {
    let body = vec![
        I::i32_const(5),
        I::with_idx("local.set", 0),
        I::i32_const(1),
        I::with_idx("local.set", 1),
        I::block("block", BlockType::Empty),
        I::block("loop", BlockType::Empty),
        I::with_idx("local.get", 1),
        I::with_idx("local.get", 0),
        I::simple("i32.mul"),
        I::with_idx("local.set", 1),
        I::with_idx("local.get", 0),
        I::i32_const(1),
        I::simple("i32.sub"),
        I::with_idx("local.tee", 0),
        I::with_idx("br_if", 0),
        I::simple("end"),
        I::simple("end"),
        I::with_idx("local.get", 1),
    ];
    let mut m = WasmModule::default();
    let f = m.add_function(
        FuncType::new(vec![], vec![ValType::I32]),
        FunctionBody::new(vec![(2, ValType::I32)], body),
    );
    m.exports.push(Export {
        name: "factorial".into(),
        kind: ExportKind::Func,
        index: f,
    });
    m
}

fn main_export(m: &mut WasmModule, f: u32) {
    m.exports.push(Export {
        name: "main".into(),
        kind: ExportKind::Func,
        index: f,
    });
}

/// A 4 GiB memory initialised at an offset whose i32 encoding is negative.
pub fn data_offset_module() -> WasmModule {
    let mut m = WasmModule::default();
    m.memories.push(Limits::new(65536, Some(65536)));
    m.data.push(DataSegment {
        mode: SegmentMode::Active {
            index: 0,
            offset: vec![I::i32_const(-79158787)],
        },
        bytes: b"Bp222N".to_vec(),
    });
    let f = m.add_function(FuncType::empty(), FunctionBody::new(vec![], vec![]));
    main_export(&mut m, f);
    m
}

/// v128 shifted left by a negative shift count.
pub fn simd_shift_module() -> WasmModule {
    let lanes: [u32; 4] = [0x3d52aa71, 0xea2f90b2, 0xb20cdf3d, 0x4d6054bc];
    let mut bits = 0u128;
    for (i, l) in lanes.iter().enumerate() {
        bits |= u128::from(*l) << (32 * i);
    }
    let mut m = WasmModule::default();
    let f = m.add_function(
        FuncType::new(vec![], vec![ValType::V128]),
        FunctionBody::new(
            vec![],
            vec![I::v128_const(bits), I::i32_const(-7235), I::simple("i8x16.shl")],
        ),
    );
    main_export(&mut m, f);
    m
}

/// Three exports whose names begin with NUL or are empty.
pub fn nul_export_module() -> WasmModule {
    let mut m = WasmModule::default();
    for (i, name) in ["\0jCeH", "", "fj"].iter().enumerate() {
        let f = m.add_function(FuncType::empty(), FunctionBody::new(vec![], vec![]));
        debug_assert_eq!(f as usize, i);
        m.exports.push(Export {
            name: (*name).into(),
            kind: ExportKind::Func,
            index: f,
        });
    }
    m
}

/// One runtime's captured output as stored on disk.
#[derive(Debug, Clone, Deserialize)]
pub struct RecordedRun {
    pub runtime: String,
    pub exit_code: Option<i32>,
    #[serde(default)]
    pub stdout: String,
    #[serde(default)]
    pub stderr: String,
    #[serde(default)]
    pub timed_out: bool,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Expectation {
    #[serde(rename = "type")]
    pub kind: InconsistencyType,
    pub suspects: Vec<String>,
}

/// A binary plus the output each runtime of a panel produced for it.
#[derive(Debug, Clone, Deserialize)]
pub struct RecordedCase {
    pub case: String,
    pub binary: String,
    pub invoke: String,
    pub results: Vec<ValType>,
    pub expect: Expectation,
    pub runs: Vec<RecordedRun>,
}

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
    #[error("{0}: {1}")]
    Format(String, String),
    #[error(transparent)]
    Harness(#[from] HarnessError),
}

/// Replays every case in `dir/outcomes.json` through the rules of
/// `dir/panel.toml` and classifies it.
pub fn replay_dir(dir: &Path) -> Result<Vec<(RecordedCase, Verdict)>, ReplayError> {
    let read = |name: &str| {
        let p = dir.join(name);
        std::fs::read_to_string(&p).map_err(|e| ReplayError::Io(p.display().to_string(), e))
    };
    let panel: PanelFile = toml::from_str(&read("panel.toml")?).map_err(|e| ReplayError::Format("panel.toml".into(), e.to_string()))?;
    let adapters = panel.adapters.into_iter().map(Adapter::for_replay).collect::<Result<Vec<_>, _>>()?;
    let cases: Vec<RecordedCase> =
        serde_json::from_str(&read("outcomes.json")?).map_err(|e| ReplayError::Format("outcomes.json".into(), e.to_string()))?;
    let mut out = Vec::with_capacity(cases.len());
    for c in cases {
        let mut outcomes = Vec::with_capacity(c.runs.len());
        for r in &c.runs {
            let a = adapters
                .iter()
                .find(|a| a.name() == r.runtime)
                .ok_or_else(|| ReplayError::Format(c.case.clone(), format!("no adapter {}", r.runtime)))?;
            let cap = Captured {
                stdout: r.stdout.clone(),
                stderr: r.stderr.clone(),
                exit_code: r.exit_code,
                timed_out: r.timed_out,
            };
            outcomes.push(interpret(a, &c.results, cap));
        }
        let v = classify(&c.binary, &outcomes);
        out.push((c, v));
    }
    Ok(out)
}
