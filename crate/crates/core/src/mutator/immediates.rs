use rand::seq::IndexedRandom;
use rand::Rng;

use crate::corpus::AstNode;
use crate::wasm::{Immediate, MemArg};

pub const I32_BOUNDARY: [i32; 7] = [0, 1, -1, i32::MIN, i32::MIN + 1, i32::MAX, i32::MAX - 1];
pub const I64_BOUNDARY: [i64; 7] = [0, 1, -1, i64::MIN, i64::MIN + 1, i64::MAX, i64::MAX - 1];
pub const I16_BOUNDARY: [i16; 7] = [0, 1, -1, i16::MIN, i16::MIN + 1, i16::MAX, i16::MAX - 1];
pub const I8_BOUNDARY: [i8; 7] = [0, 1, -1, i8::MIN, i8::MIN + 1, i8::MAX, i8::MAX - 1];

/// f32 bit patterns: zeros, ones, extremes, infinities, NaN payloads.
pub const F32_BOUNDARY: [u32; 13] = [
    0x0000_0000,
    0x8000_0000,
    0x3f80_0000,
    0xbf80_0000,
    0x7f7f_ffff,
    0xff7f_ffff,
    0x0080_0000,
    0x0000_0001,
    0x7f80_0000,
    0xff80_0000,
    0x7fc0_0000,
    0x7fa0_0000,
    0xffc0_0001,
];

pub const F64_BOUNDARY: [u64; 13] = [
    0x0000_0000_0000_0000,
    0x8000_0000_0000_0000,
    0x3ff0_0000_0000_0000,
    0xbff0_0000_0000_0000,
    0x7fef_ffff_ffff_ffff,
    0xffef_ffff_ffff_ffff,
    0x0010_0000_0000_0000,
    0x0000_0000_0000_0001,
    0x7ff0_0000_0000_0000,
    0xfff0_0000_0000_0000,
    0x7ff8_0000_0000_0000,
    0x7ff4_0000_0000_0000,
    0xfff8_0000_0000_0001,
];

pub const OFFSET_BOUNDARY: [u64; 7] = [0, 1, 65535, 65536, (1 << 31) - 1, 1 << 31, (1 << 32) - 1];

pub fn eligible(node: &AstNode) -> bool {
    matches!(
        node.instr.name(),
        "i32.const" | "i64.const" | "f32.const" | "f64.const" | "v128.const"
    ) || node.instr.memarg().is_some()
}

/// Fills every lane of one randomly chosen shape with boundary values.
fn boundary_v128<R: Rng>(rng: &mut R) -> u128 {
    let mut bits = 0u128;
    match rng.random_range(0..6) {
        0 => (0..16).for_each(|i| bits |= u128::from(*I8_BOUNDARY.choose(rng).unwrap() as u8) << (8 * i)),
        1 => (0..8).for_each(|i| bits |= u128::from(*I16_BOUNDARY.choose(rng).unwrap() as u16) << (16 * i)),
        2 => (0..4).for_each(|i| bits |= u128::from(*I32_BOUNDARY.choose(rng).unwrap() as u32) << (32 * i)),
        3 => (0..2).for_each(|i| bits |= u128::from(*I64_BOUNDARY.choose(rng).unwrap() as u64) << (64 * i)),
        4 => (0..4).for_each(|i| bits |= u128::from(*F32_BOUNDARY.choose(rng).unwrap()) << (32 * i)),
        _ => (0..2).for_each(|i| bits |= u128::from(*F64_BOUNDARY.choose(rng).unwrap()) << (64 * i)),
    }
    bits
}

/// Replaces constant operands with boundary values and memory offsets and
/// alignments with boundary/legal values. Structure is untouched.
pub fn mutate_immediates<R: Rng>(node: &mut AstNode, rng: &mut R) {
    let natural = node.instr.op.meta().natural_align();
    for imm in node.instr.imms.iter_mut() {
        match imm {
            Immediate::I32(v) => *v = *I32_BOUNDARY.choose(rng).unwrap(),
            Immediate::I64(v) => *v = *I64_BOUNDARY.choose(rng).unwrap(),
            Immediate::F32(b) => *b = *F32_BOUNDARY.choose(rng).unwrap(),
            Immediate::F64(b) => *b = *F64_BOUNDARY.choose(rng).unwrap(),
            Immediate::V128(b) => *b = boundary_v128(rng),
            Immediate::MemArg(MemArg { align, offset }) => {
                *offset = *OFFSET_BOUNDARY.choose(rng).unwrap();
                if let Some(n) = natural {
                    *align = rng.random_range(0..=n);
                }
            }
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ConcreteContext;
    use crate::wasm::{Instruction, StackType};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn leaf(i: Instruction) -> AstNode {
        AstNode::leaf(
            i,
            ConcreteContext {
                stack_type: StackType::empty(),
                constraints: vec![],
            },
        )
    }

    #[test]
    fn i32_constants_land_on_boundaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..200 {
            let mut n = leaf(Instruction::i32_const(7));
            mutate_immediates(&mut n, &mut rng);
            match n.instr.imms[0] {
                Immediate::I32(v) => {
                    assert!(I32_BOUNDARY.contains(&v));
                    seen.insert(v);
                }
                _ => unreachable!(),
            }
        }
        assert!(seen.contains(&(4294967295u32 as i32)));
    }

    #[test]
    fn no_immediates_means_no_change() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut n = leaf(Instruction::simple("drop"));
        let before = n.clone();
        mutate_immediates(&mut n, &mut rng);
        assert_eq!(n, before);
        assert!(!eligible(&n));
    }

    #[test]
    fn load_alignment_stays_natural() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let mut n = leaf(Instruction::mem("i32.load", 2, 0));
            mutate_immediates(&mut n, &mut rng);
            let m = n.instr.memarg().unwrap();
            assert!(m.align <= 2);
            assert!(OFFSET_BOUNDARY.contains(&m.offset));
        }
    }
}
