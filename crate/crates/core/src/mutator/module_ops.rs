//! Module-level mutations: global attributes, imports/exports, memory and
//! table limits. Each keeps the module valid and instantiable.

use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::Rng;

use super::immediates::{F32_BOUNDARY, F64_BOUNDARY, I32_BOUNDARY, I64_BOUNDARY};
use super::{MutationRecord, Strategy};
use crate::wasm::{
    ExportKind, Export, FuncType, ImportDesc, Instruction, Limits, SegmentMode, ValType, WasmModule,
};

const PAGE: u64 = 65536;
/// Upper bound for perturbed memory limits, in pages.
pub const MEMORY_PAGE_CAP: u32 = 256;
/// Upper bound for perturbed table sizes.
pub const TABLE_CAP: u32 = 1024;

fn record(log: &mut Vec<MutationRecord>, strategy: Strategy, site: String, before: String, after: String) {
    log.push(MutationRecord {
        strategy,
        site,
        before,
        after,
    });
}

fn const_offset(expr: &[Instruction]) -> Option<u64> {
    match expr {
        [i] if i.is("i32.const") => i.imms.first().and_then(|imm| match imm {
            crate::wasm::Immediate::I32(v) => Some(u64::from(*v as u32)),
            _ => None,
        }),
        _ => None,
    }
}

fn boundary_init<R: Rng>(t: ValType, rng: &mut R) -> Option<Instruction> {
    Some(match t {
        ValType::I32 => Instruction::i32_const(*I32_BOUNDARY.choose(rng).unwrap()),
        ValType::I64 => Instruction::i64_const(*I64_BOUNDARY.choose(rng).unwrap()),
        ValType::F32 => Instruction::f32_const(*F32_BOUNDARY.choose(rng).unwrap()),
        ValType::F64 => Instruction::f64_const(*F64_BOUNDARY.choose(rng).unwrap()),
        _ => return None,
    })
}

fn global_attrs<R: Rng>(m: &mut WasmModule, rng: &mut R, log: &mut Vec<MutationRecord>) {
    let mut written = HashSet::new();
    for body in &m.code {
        for i in &body.instrs {
            if i.is("global.set") {
                written.insert(i.idx().unwrap_or(u32::MAX));
            }
        }
    }
    let imported = m.num_imported_globals();
    for (k, g) in m.globals.iter_mut().enumerate() {
        let idx = imported + k as u32;
        if !rng.random_bool(0.5) {
            continue;
        }
        let before = format!("{:?} {:?}", g.ty, g.init);
        if !written.contains(&idx) {
            g.ty.mutable = !g.ty.mutable;
        }
        let plain_const = g.init.len() == 1 && g.init[0].name().ends_with(".const");
        if plain_const && rng.random_bool(0.5) {
            if let Some(i) = boundary_init(g.ty.ty, rng) {
                g.init = vec![i];
            }
        }
        let after = format!("{:?} {:?}", g.ty, g.init);
        if after != before {
            record(log, Strategy::GlobalAttrs, format!("global/{idx}"), before, after);
        }
    }
}

fn fresh_name(m: &WasmModule, stem: char) -> String {
    let taken: HashSet<&str> = m.exports.iter().map(|e| e.name.as_str()).collect();
    (0..)
        .map(|n| format!("{stem}{n}"))
        .find(|n| !taken.contains(n.as_str()))
        .unwrap()
}

fn import_export<R: Rng>(m: &mut WasmModule, rng: &mut R, log: &mut Vec<MutationRecord>) {
    let mut candidates: Vec<(ExportKind, u32)> = Vec::new();
    for f in 0..m.total_funcs() {
        candidates.push((ExportKind::Func, f));
    }
    for g in 0..m.num_globals() {
        candidates.push((ExportKind::Global, g));
    }
    for t in 0..m.all_tables().len() as u32 {
        candidates.push((ExportKind::Table, t));
    }
    for mem in 0..m.all_memories().len() as u32 {
        candidates.push((ExportKind::Memory, mem));
    }
    let exported: HashSet<(ExportKind, u32)> = m.exports.iter().map(|e| (e.kind, e.index)).collect();
    candidates.retain(|c| !exported.contains(c));
    let n = rng.random_range(0..=candidates.len().min(3));
    for (kind, index) in candidates.choose_multiple(rng, n).copied().collect::<Vec<_>>() {
        let stem = match kind {
            ExportKind::Func => 'f',
            ExportKind::Global => 'g',
            ExportKind::Table => 't',
            ExportKind::Memory => 'm',
        };
        let name = fresh_name(m, stem);
        record(
            log,
            Strategy::ImportExport,
            format!("export/{name}"),
            String::new(),
            format!("{kind:?} {index}"),
        );
        m.exports.push(Export { name, kind, index });
    }
    if rng.random_bool(0.5) {
        let (name, ty) = if rng.random_bool(0.5) {
            (
                "fd_write",
                FuncType::new(vec![ValType::I32; 4], vec![ValType::I32]),
            )
        } else {
            ("proc_exit", FuncType::new(vec![ValType::I32], vec![]))
        };
        let present = m.imports.iter().any(|i| {
            i.module == WASI_MODULE && i.name == name && matches!(i.desc, ImportDesc::Func(_))
        });
        if !present {
            let at = m.add_func_import(WASI_MODULE, name, ty);
            record(
                log,
                Strategy::ImportExport,
                format!("import/{at}"),
                String::new(),
                format!("{WASI_MODULE}.{name}"),
            );
        }
    }
}

pub const WASI_MODULE: &str = "wasi_snapshot_preview1";

/// Bytes the active data segments of memory `idx` need, or None when an
/// offset is not a constant.
fn data_extent(m: &WasmModule, idx: u32) -> Option<u64> {
    let mut need = 0;
    for d in &m.data {
        if let SegmentMode::Active { index, offset } = &d.mode {
            if *index == idx {
                need = need.max(const_offset(offset)? + d.bytes.len() as u64);
            }
        }
    }
    Some(need)
}

fn elem_extent(m: &WasmModule, idx: u32) -> Option<u64> {
    let mut need = 0;
    for e in &m.elements {
        if let SegmentMode::Active { index, offset } = &e.mode {
            if *index == idx {
                need = need.max(const_offset(offset)? + e.len() as u64);
            }
        }
    }
    Some(need)
}

/// New limits with `min >= floor` and `min <= max`, staying under `cap`.
fn perturb<R: Rng>(old: Limits, floor: u32, cap: u32, rng: &mut R) -> Limits {
    let floor = floor.min(cap);
    let hi = cap.max(floor);
    let min = match rng.random_range(0..3) {
        0 => floor,
        1 => old.min.clamp(floor, hi),
        _ => rng.random_range(floor..=hi.min(floor.saturating_add(16))),
    };
    let max = match rng.random_range(0..3) {
        0 => None,
        1 => Some(min),
        _ => Some(rng.random_range(min..=hi.max(min))),
    };
    Limits::new(min, max)
}

fn memory_limits<R: Rng>(m: &mut WasmModule, rng: &mut R, log: &mut Vec<MutationRecord>) {
    let imported = m
        .imports
        .iter()
        .filter(|i| matches!(i.desc, ImportDesc::Memory(_)))
        .count() as u32;
    for k in 0..m.memories.len() {
        let idx = imported + k as u32;
        let Some(bytes) = data_extent(m, idx) else { continue };
        let floor = bytes.div_ceil(PAGE) as u32;
        let old = m.memories[k];
        if floor > MEMORY_PAGE_CAP || old.min > MEMORY_PAGE_CAP {
            continue;
        }
        // A shrinking min could turn an in-bounds access into a trap, which
        // is fine, but it must never drop below the data.
        let new = perturb(old, floor, MEMORY_PAGE_CAP, rng);
        if new != old {
            m.memories[k] = new;
            record(log, Strategy::MemoryLimits, format!("memory/{idx}"), format!("{old:?}"), format!("{new:?}"));
        }
    }
}

fn table_limits<R: Rng>(m: &mut WasmModule, rng: &mut R, log: &mut Vec<MutationRecord>) {
    let imported = m
        .imports
        .iter()
        .filter(|i| matches!(i.desc, ImportDesc::Table(_)))
        .count() as u32;
    for k in 0..m.tables.len() {
        let idx = imported + k as u32;
        let Some(need) = elem_extent(m, idx) else { continue };
        let old = m.tables[k].limits;
        if need > u64::from(TABLE_CAP) || old.min > TABLE_CAP {
            continue;
        }
        let new = perturb(old, need as u32, TABLE_CAP, rng);
        if new != old {
            m.tables[k].limits = new;
            record(log, Strategy::TableLimits, format!("table/{idx}"), format!("{old:?}"), format!("{new:?}"));
        }
    }
}

/// Applies each listed module-level strategy once.
pub fn mutate_module<R: Rng>(m: &mut WasmModule, ops: &[Strategy], rng: &mut R, log: &mut Vec<MutationRecord>) {
    for s in ops {
        match s {
            Strategy::GlobalAttrs => global_attrs(m, rng, log),
            Strategy::ImportExport => import_export(m, rng, log),
            Strategy::MemoryLimits => memory_limits(m, rng, log),
            Strategy::TableLimits => table_limits(m, rng, log),
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{data_offset_module, factorial_module};
    use crate::wasm::validate_module;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn module_ops_keep_fixtures_valid() {
        for base in [factorial_module(), data_offset_module()] {
            for seed in 0..200 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut m = base.clone();
                let mut log = vec![];
                mutate_module(&mut m, &Strategy::MODULE, &mut rng, &mut log);
                assert!(validate_module(&m).is_ok(), "seed {seed}: {:?}", validate_module(&m));
            }
        }
    }

    #[test]
    fn import_shifts_entry_export() {
        let mut m = factorial_module();
        let before = m.export_index("factorial", ExportKind::Func).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20 {
            import_export(&mut m, &mut rng, &mut vec![]);
        }
        let imports = m.num_imported_funcs();
        assert!(imports > 0);
        assert_eq!(m.export_index("factorial", ExportKind::Func).unwrap(), before + imports);
        assert!(validate_module(&m).is_ok());
    }

    #[test]
    fn huge_memory_is_left_alone() {
        let mut m = data_offset_module();
        let old = m.memories.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        memory_limits(&mut m, &mut rng, &mut vec![]);
        assert_eq!(m.memories, old);
    }
}
