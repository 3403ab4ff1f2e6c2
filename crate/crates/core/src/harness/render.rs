//! Canonical result rendering: lowercase hex of raw bits, one value per
//! comma-separated field.

use serde::{Deserialize, Serialize};

use crate::wasm::ValType;

pub const CANONICAL_NAN_F32: u32 = 0x7fc0_0000;
pub const CANONICAL_NAN_F64: u64 = 0x7ff8_0000_0000_0000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Signedness {
    #[default]
    Signed,
    Unsigned,
}

/// How a runtime prints integers, per width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IntRendering {
    #[serde(default)]
    pub i32: Signedness,
    #[serde(default)]
    pub i64: Signedness,
}

pub fn canonical_f32(bits: u32) -> u32 {
    if f32::from_bits(bits).is_nan() {
        CANONICAL_NAN_F32
    } else {
        bits
    }
}

pub fn canonical_f64(bits: u64) -> u64 {
    if f64::from_bits(bits).is_nan() {
        CANONICAL_NAN_F64
    } else {
        bits
    }
}

/// Hex of raw bits at the type's width, scalar NaNs canonicalized.
pub fn hex_bits(t: ValType, bits: u128) -> String {
    match t {
        ValType::I32 => format!("{:08x}", bits as u32),
        ValType::F32 => format!("{:08x}", canonical_f32(bits as u32)),
        ValType::I64 => format!("{:016x}", bits as u64),
        ValType::F64 => format!("{:016x}", canonical_f64(bits as u64)),
        _ => format!("{bits:032x}"),
    }
}

fn parse_hex(s: &str) -> Option<u128> {
    let h = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X"))?;
    if h.is_empty() || h.len() > 32 {
        return None;
    }
    u128::from_str_radix(h, 16).ok()
}

fn parse_int(text: &str, bits: u32, sign: Signedness) -> Result<u128, String> {
    let v: i128 = text.parse().map_err(|_| format!("not an integer: {text:?}"))?;
    let (lo, hi) = match sign {
        Signedness::Signed => (-(1i128 << (bits - 1)), (1i128 << (bits - 1)) - 1),
        Signedness::Unsigned => (0, (1i128 << bits) - 1),
    };
    if v < lo || v > hi {
        return Err(format!("{text} out of range for {sign:?} i{bits}"));
    }
    Ok((v as u128) & ((1u128 << bits) - 1))
}

/// Raw bits of one printed value of type `t`.
///
/// Accepts `0x`-prefixed raw bits for any type, decimal integers checked
/// against the declared signedness, decimal floats, and four
/// space-separated 32-bit lanes for v128.
pub fn parse_value(t: ValType, text: &str, ints: IntRendering) -> Result<u128, String> {
    let text = text.trim();
    if let Some(b) = parse_hex(text) {
        let width = t.hex_width() as u32 * 4;
        if width < 128 && b >> width != 0 {
            return Err(format!("{text} too wide for {t}"));
        }
        return Ok(b);
    }
    match t {
        ValType::I32 => parse_int(text, 32, ints.i32),
        ValType::I64 => parse_int(text, 64, ints.i64),
        ValType::F32 => text
            .parse::<f32>()
            .map(|f| u128::from(f.to_bits()))
            .map_err(|_| format!("not an f32: {text:?}")),
        ValType::F64 => text
            .parse::<f64>()
            .map(|f| u128::from(f.to_bits()))
            .map_err(|_| format!("not an f64: {text:?}")),
        ValType::V128 => {
            let lanes: Vec<&str> = text.split_whitespace().collect();
            if lanes.len() != 4 {
                return Err(format!("not a v128: {text:?}"));
            }
            let mut bits = 0u128;
            for (i, l) in lanes.iter().enumerate() {
                let v = parse_hex(l)
                    .map(Ok)
                    .unwrap_or_else(|| parse_int(l, 32, Signedness::Unsigned).or_else(|_| parse_int(l, 32, Signedness::Signed)))?;
                bits |= (v & 0xffff_ffff) << (32 * i);
            }
            Ok(bits)
        }
        _ => Err(format!("{t} results are not supported")),
    }
}

/// Canonical rendering of a full result list.
pub fn render_results(types: &[ValType], texts: &[String], ints: IntRendering) -> Result<String, String> {
    if types.len() != texts.len() {
        return Err(format!("expected {} results, got {}", types.len(), texts.len()));
    }
    let mut parts = Vec::with_capacity(types.len());
    for (t, s) in types.iter().zip(texts) {
        parts.push(hex_bits(*t, parse_value(*t, s, ints)?));
    }
    Ok(parts.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_minus_one_is_all_ones() {
        let r = render_results(&[ValType::I32], &["-1".into()], IntRendering::default()).unwrap();
        assert_eq!(r, "ffffffff");
        let u = IntRendering {
            i32: Signedness::Unsigned,
            i64: Signedness::Unsigned,
        };
        assert_eq!(render_results(&[ValType::I32], &["4294967295".into()], u).unwrap(), r);
        assert!(render_results(&[ValType::I32], &["4294967295".into()], IntRendering::default()).is_err());
    }

    #[test]
    fn nan_payloads_collapse() {
        let a = render_results(&[ValType::F32], &["0x7fa00000".into()], IntRendering::default()).unwrap();
        let b = render_results(&[ValType::F32], &["0xffc00001".into()], IntRendering::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, "7fc00000");
        let c = render_results(&[ValType::F64], &["NaN".into()], IntRendering::default()).unwrap();
        assert_eq!(c, "7ff8000000000000");
    }

    #[test]
    fn v128_forms_agree() {
        let ints = IntRendering::default();
        let hex = render_results(&[ValType::V128], &["0x000000040000000300000002ffffffff".into()], ints).unwrap();
        let lanes = render_results(&[ValType::V128], &["-1 2 3 4".into()], ints).unwrap();
        assert_eq!(hex, lanes);
        assert_eq!(hex.len(), 32);
    }

    #[test]
    fn void_is_empty() {
        assert_eq!(render_results(&[], &[], IntRendering::default()).unwrap(), "");
    }
}
