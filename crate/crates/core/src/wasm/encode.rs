use super::decode::{MAGIC, VERSION};
use super::module::*;
use super::opcodes::ImmKind;
use super::types::{BlockType, FuncType, Limits, ValType};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("encoding overflow: {0}")]
    EncodingOverflow(String),
    #[error("cannot encode: {0}")]
    Invalid(String),
}

type Result<T> = std::result::Result<T, EncodeError>;

pub(crate) fn write_u32(out: &mut Vec<u8>, mut v: u32) {
    loop {
        let b = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(b);
            return;
        }
        out.push(b | 0x80);
    }
}

pub(crate) fn write_i64(out: &mut Vec<u8>, mut v: i64) {
    loop {
        let b = (v & 0x7f) as u8;
        v >>= 7;
        let done = (v == 0 && b & 0x40 == 0) || (v == -1 && b & 0x40 != 0);
        if done {
            out.push(b);
            return;
        }
        out.push(b | 0x80);
    }
}

fn write_len(out: &mut Vec<u8>, n: usize, what: &str) -> Result<()> {
    let n = u32::try_from(n)
        .map_err(|_| EncodeError::EncodingOverflow(format!("{what} length {n}")))?;
    write_u32(out, n);
    Ok(())
}

fn write_name(out: &mut Vec<u8>, s: &str) -> Result<()> {
    write_len(out, s.len(), "name")?;
    out.extend_from_slice(s.as_bytes());
    Ok(())
}

fn write_valtype(out: &mut Vec<u8>, t: ValType) -> Result<()> {
    if t == ValType::Wildcard {
        return Err(EncodeError::Invalid("wildcard value type".into()));
    }
    out.push(t.to_byte());
    Ok(())
}

fn write_limits(out: &mut Vec<u8>, l: &Limits) {
    match l.max {
        None => {
            out.push(0);
            write_u32(out, l.min);
        }
        Some(max) => {
            out.push(1);
            write_u32(out, l.min);
            write_u32(out, max);
        }
    }
}

fn write_memarg(out: &mut Vec<u8>, m: &MemArg) -> Result<()> {
    write_u32(out, m.align);
    let off = u32::try_from(m.offset)
        .map_err(|_| EncodeError::EncodingOverflow(format!("memarg offset {}", m.offset)))?;
    write_u32(out, off);
    Ok(())
}

fn bad_imms(ins: &Instruction) -> EncodeError {
    EncodeError::Invalid(format!(
        "immediates {:?} do not fit opcode {}",
        ins.imms,
        ins.name()
    ))
}

pub(crate) fn write_instruction(out: &mut Vec<u8>, ins: &Instruction) -> Result<()> {
    use Immediate as M;
    let meta = ins.op.meta();
    if meta.prefix == 0 {
        out.push(meta.code as u8);
    } else {
        out.push(meta.prefix);
        write_u32(out, meta.code);
    }
    let imms = ins.imms.as_slice();
    match (meta.imm, imms) {
        (ImmKind::None, []) => {}
        (ImmKind::BlockType, [M::BlockType(bt)]) => match bt {
            BlockType::Empty => out.push(0x40),
            BlockType::Value(t) => write_valtype(out, *t)?,
            BlockType::Type(i) => write_i64(out, i64::from(*i)),
        },
        (
            ImmKind::Label
            | ImmKind::Func
            | ImmKind::Local
            | ImmKind::Global
            | ImmKind::Table
            | ImmKind::Data
            | ImmKind::Elem,
            [M::Idx(i)],
        ) => write_u32(out, *i),
        (ImmKind::BrTable, [M::Labels(ls), M::Idx(d)]) => {
            write_len(out, ls.len(), "br_table")?;
            for l in ls {
                write_u32(out, *l);
            }
            write_u32(out, *d);
        }
        (ImmKind::CallIndirect | ImmKind::TableInit | ImmKind::TableCopy, [M::Idx(a), M::Idx(b)]) => {
            write_u32(out, *a);
            write_u32(out, *b);
        }
        (ImmKind::MemArg, [M::MemArg(m)]) => write_memarg(out, m)?,
        (ImmKind::MemZero, []) => out.push(0),
        (ImmKind::I32, [M::I32(v)]) => write_i64(out, i64::from(*v)),
        (ImmKind::I64, [M::I64(v)]) => write_i64(out, *v),
        (ImmKind::F32, [M::F32(b)]) => out.extend_from_slice(&b.to_le_bytes()),
        (ImmKind::F64, [M::F64(b)]) => out.extend_from_slice(&b.to_le_bytes()),
        (ImmKind::V128, [M::V128(b)]) => out.extend_from_slice(&b.to_le_bytes()),
        (ImmKind::Shuffle, [M::Shuffle(l)]) => out.extend_from_slice(l),
        (ImmKind::Lane, [M::Lane(l)]) => out.push(*l),
        (ImmKind::MemArgLane, [M::MemArg(m), M::Lane(l)]) => {
            write_memarg(out, m)?;
            out.push(*l);
        }
        (ImmKind::RefType, [M::RefType(t)]) => write_valtype(out, *t)?,
        (ImmKind::SelectTypes, [M::ValTypes(ts)]) => {
            write_len(out, ts.len(), "select types")?;
            for t in ts {
                write_valtype(out, *t)?;
            }
        }
        (ImmKind::MemInit, [M::Idx(d)]) => {
            write_u32(out, *d);
            out.push(0);
        }
        (ImmKind::MemCopy, []) => out.extend_from_slice(&[0, 0]),
        _ => return Err(bad_imms(ins)),
    }
    Ok(())
}

fn write_const_expr(out: &mut Vec<u8>, e: &ConstExpr) -> Result<()> {
    for ins in e {
        write_instruction(out, ins)?;
    }
    out.push(0x0b);
    Ok(())
}

fn write_vec<T>(
    out: &mut Vec<u8>,
    items: &[T],
    what: &str,
    mut f: impl FnMut(&mut Vec<u8>, &T) -> Result<()>,
) -> Result<()> {
    write_len(out, items.len(), what)?;
    for it in items {
        f(out, it)?;
    }
    Ok(())
}

fn write_func_type(out: &mut Vec<u8>, t: &FuncType) -> Result<()> {
    out.push(0x60);
    write_vec(out, &t.params, "params", |o, v| write_valtype(o, *v))?;
    write_vec(out, &t.results, "results", |o, v| write_valtype(o, *v))
}

fn write_global_type(out: &mut Vec<u8>, g: &GlobalType) -> Result<()> {
    write_valtype(out, g.ty)?;
    out.push(u8::from(g.mutable));
    Ok(())
}

fn write_table_type(out: &mut Vec<u8>, t: &TableType) -> Result<()> {
    write_valtype(out, t.elem)?;
    write_limits(out, &t.limits);
    Ok(())
}

fn element_flags(e: &ElementSegment) -> u8 {
    let exprs = matches!(e.items, ElemItems::Exprs(_));
    let base = match &e.mode {
        SegmentMode::Passive => 1,
        SegmentMode::Declared => 3,
        SegmentMode::Active { index, .. } => {
            let short_form_ok = *index == 0 && e.elem_type == ValType::FuncRef;
            let wants_explicit = e.flags & 0b010 != 0;
            if short_form_ok && !wants_explicit {
                0
            } else {
                2
            }
        }
    };
    if exprs {
        base | 0b100
    } else {
        base
    }
}

fn write_element(out: &mut Vec<u8>, e: &ElementSegment) -> Result<()> {
    let flags = element_flags(e);
    write_u32(out, u32::from(flags));
    if let SegmentMode::Active { index, offset } = &e.mode {
        if flags & 0b010 != 0 {
            write_u32(out, *index);
        }
        write_const_expr(out, offset)?;
    }
    let has_kind = flags & 0b011 != 0;
    match &e.items {
        ElemItems::Funcs(fs) => {
            if has_kind {
                out.push(0x00);
            }
            write_vec(out, fs, "element funcs", |o, f| {
                write_u32(o, *f);
                Ok(())
            })
        }
        ElemItems::Exprs(es) => {
            if has_kind {
                write_valtype(out, e.elem_type)?;
            }
            write_vec(out, es, "element exprs", write_const_expr)
        }
    }
}

fn write_data(out: &mut Vec<u8>, d: &DataSegment) -> Result<()> {
    match &d.mode {
        SegmentMode::Active { index: 0, offset } => {
            out.push(0);
            write_const_expr(out, offset)?;
        }
        SegmentMode::Active { index, offset } => {
            out.push(2);
            write_u32(out, *index);
            write_const_expr(out, offset)?;
        }
        SegmentMode::Passive => out.push(1),
        SegmentMode::Declared => {
            return Err(EncodeError::Invalid("data segments cannot be declarative".into()))
        }
    }
    write_len(out, d.bytes.len(), "data")?;
    out.extend_from_slice(&d.bytes);
    Ok(())
}

/// Serializes one function body (size prefix excluded).
pub fn encode_body(body: &FunctionBody) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    write_vec(&mut out, &body.locals, "locals", |o, (n, t)| {
        write_u32(o, *n);
        write_valtype(o, *t)
    })?;
    for ins in &body.instrs {
        write_instruction(&mut out, ins)?;
    }
    out.push(0x0b);
    Ok(out)
}

fn section(out: &mut Vec<u8>, id: u8, payload: Vec<u8>) -> Result<()> {
    out.push(id);
    write_len(out, payload.len(), "section")?;
    out.extend_from_slice(&payload);
    Ok(())
}

fn customs_after(out: &mut Vec<u8>, m: &WasmModule, id: u8) -> Result<()> {
    for c in m.customs.iter().filter(|c| c.after == id) {
        let mut p = Vec::new();
        write_name(&mut p, &c.name)?;
        p.extend_from_slice(&c.data);
        section(out, 0, p)?;
    }
    Ok(())
}

/// Serializes a module. Empty sections are omitted; custom sections are
/// re-emitted after the section they originally followed.
pub fn encode_module(m: &WasmModule) -> Result<Vec<u8>> {
    if m.functions.len() != m.code.len() {
        return Err(EncodeError::Invalid(format!(
            "{} function declarations but {} bodies",
            m.functions.len(),
            m.code.len()
        )));
    }
    let mut out = Vec::with_capacity(1024);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION);
    customs_after(&mut out, m, 0)?;

    // binary order: 1..=9, 12, 10, 11
    for id in [1u8, 2, 3, 4, 5, 6, 7, 8, 9, 12, 10, 11] {
        let mut p = Vec::new();
        let present = match id {
            1 if !m.types.is_empty() => {
                write_vec(&mut p, &m.types, "types", write_func_type)?;
                true
            }
            2 if !m.imports.is_empty() => {
                write_vec(&mut p, &m.imports, "imports", |o, i| {
                    write_name(o, &i.module)?;
                    write_name(o, &i.name)?;
                    match &i.desc {
                        ImportDesc::Func(t) => {
                            o.push(0);
                            write_u32(o, *t);
                        }
                        ImportDesc::Table(t) => {
                            o.push(1);
                            write_table_type(o, t)?;
                        }
                        ImportDesc::Memory(l) => {
                            o.push(2);
                            write_limits(o, l);
                        }
                        ImportDesc::Global(g) => {
                            o.push(3);
                            write_global_type(o, g)?;
                        }
                    }
                    Ok(())
                })?;
                true
            }
            3 if !m.functions.is_empty() => {
                write_vec(&mut p, &m.functions, "functions", |o, t| {
                    write_u32(o, *t);
                    Ok(())
                })?;
                true
            }
            4 if !m.tables.is_empty() => {
                write_vec(&mut p, &m.tables, "tables", write_table_type)?;
                true
            }
            5 if !m.memories.is_empty() => {
                write_vec(&mut p, &m.memories, "memories", |o, l| {
                    write_limits(o, l);
                    Ok(())
                })?;
                true
            }
            6 if !m.globals.is_empty() => {
                write_vec(&mut p, &m.globals, "globals", |o, g| {
                    write_global_type(o, &g.ty)?;
                    write_const_expr(o, &g.init)
                })?;
                true
            }
            7 if !m.exports.is_empty() => {
                write_vec(&mut p, &m.exports, "exports", |o, e| {
                    write_name(o, &e.name)?;
                    o.push(match e.kind {
                        ExportKind::Func => 0,
                        ExportKind::Table => 1,
                        ExportKind::Memory => 2,
                        ExportKind::Global => 3,
                    });
                    write_u32(o, e.index);
                    Ok(())
                })?;
                true
            }
            8 => match m.start {
                Some(s) => {
                    write_u32(&mut p, s);
                    true
                }
                None => false,
            },
            9 if !m.elements.is_empty() => {
                write_vec(&mut p, &m.elements, "elements", write_element)?;
                true
            }
            12 => match m.data_count {
                Some(n) => {
                    write_u32(&mut p, n);
                    true
                }
                None => false,
            },
            10 if !m.code.is_empty() => {
                write_vec(&mut p, &m.code, "code", |o, b| {
                    let body = encode_body(b)?;
                    write_len(o, body.len(), "function body")?;
                    o.extend_from_slice(&body);
                    Ok(())
                })?;
                true
            }
            11 if !m.data.is_empty() => {
                write_vec(&mut p, &m.data, "data", write_data)?;
                true
            }
            _ => false,
        };
        if present {
            section(&mut out, id, p)?;
        }
        customs_after(&mut out, m, id)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wasm::decode::decode_module;

    #[test]
    fn empty_module_is_header_only() {
        assert_eq!(
            encode_module(&WasmModule::default()).unwrap(),
            vec![0, 0x61, 0x73, 0x6d, 1, 0, 0, 0]
        );
    }

    #[test]
    fn leb_encodings() {
        let mut v = Vec::new();
        write_i64(&mut v, -1);
        assert_eq!(v, [0x7f]);
        v.clear();
        write_i64(&mut v, 64);
        assert_eq!(v, [0xc0, 0x00]);
        v.clear();
        write_u32(&mut v, 624485);
        assert_eq!(v, [0xe5, 0x8e, 0x26]);
    }

    #[test]
    fn nul_prefixed_export_name_survives() {
        let mut m = WasmModule::default();
        m.add_function(
            FuncType::empty(),
            FunctionBody::new(vec![], vec![]),
        );
        m.exports.push(Export {
            name: "\0jCeH".into(),
            kind: ExportKind::Func,
            index: 0,
        });
        let bytes = encode_module(&m).unwrap();
        // name length 5 followed by the raw bytes
        let needle = [5u8, 0, b'j', b'C', b'e', b'H'];
        assert!(bytes.windows(needle.len()).any(|w| w == needle));
        assert_eq!(decode_module(&bytes).unwrap(), m);
    }

    #[test]
    fn mismatched_immediates_are_rejected() {
        let mut m = WasmModule::default();
        m.add_function(
            FuncType::empty(),
            FunctionBody::new(vec![], vec![Instruction::new(crate::wasm::op("i32.add"), vec![Immediate::Idx(1)])]),
        );
        assert!(matches!(encode_module(&m), Err(EncodeError::Invalid(_))));
    }
}
