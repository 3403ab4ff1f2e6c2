use super::module::*;
use super::opcodes::{ImmKind, Opcode};
use super::types::{BlockType, FuncType, Limits, ValType};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("malformed binary at offset {offset:#x}: {reason}")]
    MalformedBinary { offset: usize, reason: String },
    #[error("unsupported proposal: {0}")]
    UnsupportedProposal(String),
}

pub const MAGIC: [u8; 4] = [0x00, 0x61, 0x73, 0x6d];
pub const VERSION: [u8; 4] = [0x01, 0x00, 0x00, 0x00];

pub(crate) struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
    /// Absolute offset of `data[0]` in the whole binary.
    base: usize,
}

type Result<T> = std::result::Result<T, DecodeError>;

impl<'a> Reader<'a> {
    pub(crate) fn new(data: &'a [u8], base: usize) -> Self {
        Reader { data, pos: 0, base }
    }

    fn err<T>(&self, reason: impl Into<String>) -> Result<T> {
        Err(DecodeError::MalformedBinary {
            offset: self.base + self.pos,
            reason: reason.into(),
        })
    }

    fn eof(&self) -> bool {
        self.pos >= self.data.len()
    }

    fn byte(&mut self) -> Result<u8> {
        match self.data.get(self.pos) {
            Some(b) => {
                self.pos += 1;
                Ok(*b)
            }
            None => self.err("unexpected end of input"),
        }
    }

    fn bytes(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.data.len() - self.pos < n {
            return self.err("unexpected end of input");
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn leb_unsigned(&mut self, bits: u32) -> Result<u64> {
        let mut result: u64 = 0;
        let mut shift = 0;
        loop {
            let b = self.byte()?;
            if shift >= bits {
                return self.err("integer representation too long");
            }
            let low = u64::from(b & 0x7f);
            if shift + 7 > bits && (low >> (bits - shift)) != 0 {
                return self.err("integer too large");
            }
            result |= low << shift;
            shift += 7;
            if b & 0x80 == 0 {
                return Ok(result);
            }
        }
    }

    fn leb_signed(&mut self, bits: u32) -> Result<i64> {
        let mut result: i64 = 0;
        let mut shift = 0;
        loop {
            let b = self.byte()?;
            if shift >= bits {
                return self.err("integer representation too long");
            }
            result |= i64::from(b & 0x7f) << shift;
            shift += 7;
            if b & 0x80 == 0 {
                if shift < 64 && (b & 0x40) != 0 {
                    result |= -1i64 << shift;
                }
                if shift > bits {
                    // unused high bits of the final byte must sign-extend
                    let keep = bits + 7 - shift;
                    let payload = b & 0x7f;
                    let sign = (payload >> (keep - 1)) & 1;
                    let mask = 0x7f & !((1u8 << keep) - 1);
                    let want = if sign == 1 { mask } else { 0 };
                    if payload & mask != want {
                        return self.err("integer too large");
                    }
                }
                return Ok(result);
            }
        }
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        self.leb_unsigned(32).map(|v| v as u32)
    }

    fn name(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let start = self.pos;
        let raw = self.bytes(len)?;
        match std::str::from_utf8(raw) {
            Ok(s) => Ok(s.to_string()),
            Err(_) => {
                self.pos = start;
                self.err("malformed UTF-8 encoding")
            }
        }
    }

    fn val_type(&mut self) -> Result<ValType> {
        let b = self.byte()?;
        match ValType::from_byte(b) {
            Some(t) => Ok(t),
            None => {
                self.pos -= 1;
                match b {
                    0x64 | 0x63 | 0x6e | 0x6d | 0x6c | 0x6b | 0x6a | 0x69 | 0x71 | 0x72 | 0x73
                    | 0x74 => Err(DecodeError::UnsupportedProposal(format!(
                        "reference type {b:#04x} (gc/function-references)"
                    ))),
                    _ => self.err(format!("invalid value type {b:#04x}")),
                }
            }
        }
    }

    fn ref_type(&mut self) -> Result<ValType> {
        let t = self.val_type()?;
        if !t.is_ref() {
            return self.err("expected reference type");
        }
        Ok(t)
    }

    fn limits(&mut self) -> Result<Limits> {
        let flag = self.byte()?;
        match flag {
            0x00 => Ok(Limits::new(self.u32()?, None)),
            0x01 => {
                let min = self.u32()?;
                let max = self.u32()?;
                Ok(Limits::new(min, Some(max)))
            }
            0x02 | 0x03 => Err(DecodeError::UnsupportedProposal("threads (shared memory)".into())),
            0x04..=0x07 => Err(DecodeError::UnsupportedProposal("memory64".into())),
            _ => self.err(format!("invalid limits flags {flag:#04x}")),
        }
    }

    fn table_type(&mut self) -> Result<TableType> {
        let elem = self.ref_type()?;
        let limits = self.limits()?;
        Ok(TableType { elem, limits })
    }

    fn global_type(&mut self) -> Result<GlobalType> {
        let ty = self.val_type()?;
        let m = self.byte()?;
        let mutable = match m {
            0 => false,
            1 => true,
            _ => return self.err("invalid mutability"),
        };
        Ok(GlobalType { ty, mutable })
    }

    fn block_type(&mut self) -> Result<BlockType> {
        let b = *self.data.get(self.pos).ok_or_else(|| DecodeError::MalformedBinary {
            offset: self.base + self.pos,
            reason: "unexpected end of input".into(),
        })?;
        if b == 0x40 {
            self.pos += 1;
            return Ok(BlockType::Empty);
        }
        if let Some(t) = ValType::from_byte(b) {
            self.pos += 1;
            return Ok(BlockType::Value(t));
        }
        let idx = self.leb_signed(33)?;
        if idx < 0 {
            return self.err("invalid block type");
        }
        Ok(BlockType::Type(idx as u32))
    }

    fn memarg(&mut self) -> Result<MemArg> {
        let align = self.u32()?;
        if align & 0x40 != 0 {
            return Err(DecodeError::UnsupportedProposal("multi-memory".into()));
        }
        let offset = self.u32()? as u64;
        Ok(MemArg { align, offset })
    }

    fn zero_byte(&mut self) -> Result<()> {
        match self.byte()? {
            0 => Ok(()),
            _ => Err(DecodeError::UnsupportedProposal("multi-memory".into())),
        }
    }

    /// Decodes one instruction (opcode + immediates). `origin` is
    /// subtracted from the absolute position to give body-relative offsets.
    fn instruction(&mut self, origin: usize) -> Result<Instruction> {
        let at = self.pos;
        let first = self.byte()?;
        let op = match first {
            0xfc | 0xfd => {
                let sub = self.u32()?;
                match Opcode::from_encoding(first, sub) {
                    Some(op) => op,
                    None if first == 0xfd => {
                        return Err(DecodeError::UnsupportedProposal(format!(
                            "simd opcode 0xfd {sub} (relaxed-simd or unknown)"
                        )))
                    }
                    None => {
                        return Err(DecodeError::UnsupportedProposal(format!(
                            "opcode 0xfc {sub}"
                        )))
                    }
                }
            }
            0xfe => return Err(DecodeError::UnsupportedProposal("threads (atomics)".into())),
            0xfb => return Err(DecodeError::UnsupportedProposal("gc".into())),
            0x06..=0x0a | 0x18 | 0x19 => {
                return Err(DecodeError::UnsupportedProposal("exception-handling".into()))
            }
            0x12 | 0x13 => return Err(DecodeError::UnsupportedProposal("tail-call".into())),
            0x14 | 0x15 | 0xd3..=0xd6 => {
                return Err(DecodeError::UnsupportedProposal("function-references".into()))
            }
            b => match Opcode::from_encoding(0, u32::from(b)) {
                Some(op) => op,
                None => {
                    self.pos = at;
                    return self.err(format!("illegal opcode {b:#04x}"));
                }
            },
        };
        let imms = self.immediates(op.meta().imm)?;
        Ok(Instruction {
            op,
            imms,
            offset: (self.base + at - origin) as u32,
        })
    }

    fn immediates(&mut self, kind: ImmKind) -> Result<Vec<Immediate>> {
        use Immediate as M;
        Ok(match kind {
            ImmKind::None => vec![],
            ImmKind::BlockType => vec![M::BlockType(self.block_type()?)],
            ImmKind::Label
            | ImmKind::Func
            | ImmKind::Local
            | ImmKind::Global
            | ImmKind::Table
            | ImmKind::Data
            | ImmKind::Elem => vec![M::Idx(self.u32()?)],
            ImmKind::BrTable => {
                let n = self.u32()?;
                let mut labels = Vec::with_capacity(n.min(4096) as usize);
                for _ in 0..n {
                    labels.push(self.u32()?);
                }
                let default = self.u32()?;
                vec![M::Labels(labels), M::Idx(default)]
            }
            ImmKind::CallIndirect => {
                let ty = self.u32()?;
                let table = self.u32()?;
                vec![M::Idx(ty), M::Idx(table)]
            }
            ImmKind::MemArg => vec![M::MemArg(self.memarg()?)],
            ImmKind::MemZero => {
                self.zero_byte()?;
                vec![]
            }
            ImmKind::I32 => vec![M::I32(self.leb_signed(32)? as i32)],
            ImmKind::I64 => vec![M::I64(self.leb_signed(64)?)],
            ImmKind::F32 => {
                let b = self.bytes(4)?;
                vec![M::F32(u32::from_le_bytes(b.try_into().unwrap()))]
            }
            ImmKind::F64 => {
                let b = self.bytes(8)?;
                vec![M::F64(u64::from_le_bytes(b.try_into().unwrap()))]
            }
            ImmKind::V128 => {
                let b = self.bytes(16)?;
                vec![M::V128(u128::from_le_bytes(b.try_into().unwrap()))]
            }
            ImmKind::Shuffle => {
                let b = self.bytes(16)?;
                vec![M::Shuffle(b.try_into().unwrap())]
            }
            ImmKind::Lane => vec![M::Lane(self.byte()?)],
            ImmKind::MemArgLane => {
                let m = self.memarg()?;
                vec![M::MemArg(m), M::Lane(self.byte()?)]
            }
            ImmKind::RefType => vec![M::RefType(self.ref_type()?)],
            ImmKind::SelectTypes => {
                let n = self.u32()?;
                let mut ts = Vec::new();
                for _ in 0..n {
                    ts.push(self.val_type()?);
                }
                vec![M::ValTypes(ts)]
            }
            ImmKind::MemInit => {
                let d = self.u32()?;
                self.zero_byte()?;
                vec![M::Idx(d)]
            }
            ImmKind::MemCopy => {
                self.zero_byte()?;
                self.zero_byte()?;
                vec![]
            }
            ImmKind::TableInit | ImmKind::TableCopy => {
                let a = self.u32()?;
                let b = self.u32()?;
                vec![M::Idx(a), M::Idx(b)]
            }
        })
    }

    /// Reads a constant expression up to and including its `end`.
    fn const_expr(&mut self) -> Result<ConstExpr> {
        let mut out = Vec::new();
        loop {
            let ins = self.instruction(self.base)?;
            if ins.is("end") {
                return Ok(out);
            }
            out.push(ins);
        }
    }

    fn function_body(&mut self) -> Result<FunctionBody> {
        let size = self.u32()? as usize;
        let start = self.pos;
        let body = self.bytes(size)?;
        let mut r = Reader::new(body, self.base + start);
        let origin = self.base + start;
        let groups = r.u32()?;
        let mut locals = Vec::new();
        let mut total: u64 = 0;
        for _ in 0..groups {
            let n = r.u32()?;
            total += u64::from(n);
            if total > 50_000 {
                return r.err("too many locals");
            }
            locals.push((n, r.val_type()?));
        }
        let mut instrs = Vec::new();
        let mut depth = 0usize;
        loop {
            if r.eof() {
                return r.err("function body must end with `end`");
            }
            let ins = r.instruction(origin)?;
            let meta = ins.op.meta();
            if meta.is_nesting() {
                depth += 1;
            } else if ins.is("end") {
                if depth == 0 {
                    if !r.eof() {
                        return r.err("trailing bytes after function end");
                    }
                    break;
                }
                depth -= 1;
            }
            instrs.push(ins);
        }
        Ok(FunctionBody { locals, instrs })
    }
}

fn vec_of<T>(r: &mut Reader<'_>, mut f: impl FnMut(&mut Reader<'_>) -> Result<T>) -> Result<Vec<T>> {
    let n = r.u32()?;
    let mut out = Vec::with_capacity(n.min(1 << 16) as usize);
    for _ in 0..n {
        out.push(f(r)?);
    }
    Ok(out)
}

fn func_type(r: &mut Reader<'_>) -> Result<FuncType> {
    match r.byte()? {
        0x60 => {}
        0x50 | 0x4e | 0x4f | 0x5e | 0x5f => {
            return Err(DecodeError::UnsupportedProposal("gc (rec/sub types)".into()))
        }
        b => return r.err(format!("invalid function type form {b:#04x}")),
    }
    let params = vec_of(r, |r| r.val_type())?;
    let results = vec_of(r, |r| r.val_type())?;
    Ok(FuncType::new(params, results))
}

fn element_segment(r: &mut Reader<'_>) -> Result<ElementSegment> {
    let flags = r.u32()?;
    if flags > 7 {
        return r.err(format!("invalid element segment flags {flags}"));
    }
    let flags = flags as u8;
    let passive_or_declared = flags & 0b001 != 0;
    let explicit_table = flags & 0b010 != 0;
    let uses_exprs = flags & 0b100 != 0;
    let mode = if !passive_or_declared {
        let index = if explicit_table { r.u32()? } else { 0 };
        let offset = r.const_expr()?;
        SegmentMode::Active { index, offset }
    } else if explicit_table {
        SegmentMode::Declared
    } else {
        SegmentMode::Passive
    };
    // flags 0 and 4 carry no element kind/type byte
    let has_kind = passive_or_declared || explicit_table;
    let elem_type = if uses_exprs {
        if has_kind {
            r.ref_type()?
        } else {
            ValType::FuncRef
        }
    } else {
        if has_kind && r.byte()? != 0x00 {
            return r.err("invalid element kind");
        }
        ValType::FuncRef
    };
    let items = if uses_exprs {
        ElemItems::Exprs(vec_of(r, |r| r.const_expr())?)
    } else {
        ElemItems::Funcs(vec_of(r, |r| r.u32())?)
    };
    Ok(ElementSegment {
        mode,
        elem_type,
        items,
        flags,
    })
}

fn data_segment(r: &mut Reader<'_>) -> Result<DataSegment> {
    let flags = r.u32()?;
    let mode = match flags {
        0 => SegmentMode::Active {
            index: 0,
            offset: r.const_expr()?,
        },
        1 => SegmentMode::Passive,
        2 => {
            let index = r.u32()?;
            SegmentMode::Active {
                index,
                offset: r.const_expr()?,
            }
        }
        _ => return r.err(format!("invalid data segment flags {flags}")),
    };
    let len = r.u32()? as usize;
    let bytes = r.bytes(len)?.to_vec();
    Ok(DataSegment { mode, bytes })
}

fn import(r: &mut Reader<'_>) -> Result<Import> {
    let module = r.name()?;
    let name = r.name()?;
    let desc = match r.byte()? {
        0x00 => ImportDesc::Func(r.u32()?),
        0x01 => ImportDesc::Table(r.table_type()?),
        0x02 => ImportDesc::Memory(r.limits()?),
        0x03 => ImportDesc::Global(r.global_type()?),
        0x04 => return Err(DecodeError::UnsupportedProposal("exception-handling (tag)".into())),
        b => return r.err(format!("invalid import kind {b:#04x}")),
    };
    Ok(Import { module, name, desc })
}

fn export(r: &mut Reader<'_>) -> Result<Export> {
    let name = r.name()?;
    let kind = match r.byte()? {
        0x00 => ExportKind::Func,
        0x01 => ExportKind::Table,
        0x02 => ExportKind::Memory,
        0x03 => ExportKind::Global,
        0x04 => return Err(DecodeError::UnsupportedProposal("exception-handling (tag)".into())),
        b => return r.err(format!("invalid export kind {b:#04x}")),
    };
    let index = r.u32()?;
    Ok(Export { name, kind, index })
}

/// Position of a section id in the required ordering.
fn section_rank(id: u8) -> u8 {
    match id {
        1..=9 => id,
        12 => 10, // data count sits between element and code
        10 => 11,
        11 => 12,
        _ => 0,
    }
}

/// Decodes a complete binary into the intermediate representation.
pub fn decode_module(bytes: &[u8]) -> std::result::Result<WasmModule, DecodeError> {
    let mut r = Reader::new(bytes, 0);
    if r.bytes(4).ok() != Some(&MAGIC[..]) {
        return Err(DecodeError::MalformedBinary {
            offset: 0,
            reason: "magic header not detected".into(),
        });
    }
    match r.bytes(4) {
        Ok(v) if v == VERSION => {}
        _ => {
            return Err(DecodeError::MalformedBinary {
                offset: 4,
                reason: "unknown binary version".into(),
            })
        }
    }
    let mut m = WasmModule::default();
    let mut last_rank = 0u8;
    let mut last_id = 0u8;
    let mut func_count: Option<usize> = None;
    while !r.eof() {
        let id = r.byte()?;
        let size = r.u32()? as usize;
        let start = r.pos;
        let payload = r.bytes(size)?;
        let mut s = Reader::new(payload, start);
        if id != 0 {
            let rank = section_rank(id);
            if rank == 0 {
                if id == 13 {
                    return Err(DecodeError::UnsupportedProposal("exception-handling (tag section)".into()));
                }
                return s.err(format!("malformed section id {id}"));
            }
            if rank <= last_rank {
                return s.err(format!("unexpected section {id} (out of order or duplicate)"));
            }
            last_rank = rank;
            last_id = id;
        }
        match id {
            0 => {
                let name = s.name()?;
                let data = payload[s.pos..].to_vec();
                s.pos = payload.len();
                m.customs.push(CustomSection {
                    name,
                    data,
                    after: last_id,
                });
            }
            1 => m.types = vec_of(&mut s, func_type)?,
            2 => m.imports = vec_of(&mut s, import)?,
            3 => {
                m.functions = vec_of(&mut s, |r| r.u32())?;
                func_count = Some(m.functions.len());
            }
            4 => m.tables = vec_of(&mut s, |r| r.table_type())?,
            5 => m.memories = vec_of(&mut s, |r| r.limits())?,
            6 => {
                m.globals = vec_of(&mut s, |r| {
                    let ty = r.global_type()?;
                    let init = r.const_expr()?;
                    Ok(Global { ty, init })
                })?
            }
            7 => m.exports = vec_of(&mut s, export)?,
            8 => m.start = Some(s.u32()?),
            9 => m.elements = vec_of(&mut s, element_segment)?,
            12 => m.data_count = Some(s.u32()?),
            10 => {
                m.code = vec_of(&mut s, |r| r.function_body())?;
                if m.code.len() != func_count.unwrap_or(0) {
                    return s.err("function and code section have inconsistent lengths");
                }
            }
            11 => {
                m.data = vec_of(&mut s, data_segment)?;
                if let Some(n) = m.data_count {
                    if n as usize != m.data.len() {
                        return s.err("data count and data section have inconsistent lengths");
                    }
                }
            }
            _ => unreachable!(),
        }
        if !s.eof() {
            return s.err("section size mismatch");
        }
    }
    if m.code.len() != m.functions.len() {
        return Err(DecodeError::MalformedBinary {
            offset: bytes.len(),
            reason: "function and code section have inconsistent lengths".into(),
        });
    }
    Ok(m)
}
