mod common;

use common::{reference_valid, seeds};
use wdiff_core::wasm::{decode_module, encode_module, validate_module, DecodeError};

#[test]
fn seed_set_is_large_enough() {
    assert!(seeds().len() >= 100);
}

#[test]
fn round_trip_is_idempotent_over_seeds() {
    for (name, bytes) in seeds() {
        let m = decode_module(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
        let re = encode_module(&m).unwrap_or_else(|e| panic!("{name}: {e}"));
        let m2 = decode_module(&re).unwrap_or_else(|e| panic!("{name} re-decode: {e}"));
        assert_eq!(m, m2, "{name}");
        assert_eq!(re, encode_module(&m2).unwrap(), "{name}");
        reference_valid(&re).unwrap_or_else(|e| panic!("{name}: re-encoded binary rejected: {e}"));
    }
}

#[test]
fn validator_agrees_with_reference_on_seeds() {
    for (name, bytes) in seeds() {
        let m = decode_module(&bytes).unwrap();
        let ours = validate_module(&m);
        let theirs = reference_valid(&bytes);
        assert_eq!(ours.is_ok(), theirs.is_ok(), "{name}: {ours:?} vs {theirs:?}");
    }
}

// Perturb seed bodies so the reference validator sees rejections too.
#[test]
fn validator_agrees_with_reference_on_broken_bodies() {
    use wdiff_core::wasm::Instruction;
    let mut disagreements = Vec::new();
    let mut checked = 0;
    for (name, bytes) in seeds().into_iter().step_by(3) {
        let base = decode_module(&bytes).unwrap();
        for (k, edit) in ["drop", "i64.const", "swap_local"].iter().enumerate() {
            let mut m = base.clone();
            let Some(body) = m.code.iter_mut().find(|b| b.instrs.len() > 4) else { continue };
            let at = (k * 7) % body.instrs.len();
            match *edit {
                "drop" => body.instrs.insert(at, Instruction::simple("drop")),
                "i64.const" => body.instrs.insert(at, Instruction::i64_const(1)),
                _ => body.instrs.insert(at, Instruction::with_idx("local.get", 10_000)),
            }
            let Ok(enc) = encode_module(&m) else { continue };
            checked += 1;
            let ours = validate_module(&m).is_ok();
            let theirs = reference_valid(&enc).is_ok();
            if ours != theirs {
                disagreements.push(format!("{name}/{edit}: ours={ours} ref={theirs}"));
            }
        }
    }
    assert!(checked > 50);
    assert!(disagreements.is_empty(), "{disagreements:#?}");
}

#[test]
fn on_disk_binaries_decode_or_report_unsupported() {
    // Real-world binaries shipped by other packages, when present.
    let roots = ["/usr/lib/node_modules", "/usr/local/lib/python3.10/dist-packages/marimo"];
    let mut seen = 0;
    for root in roots {
        let Ok(walk) = std::process::Command::new("find").args([root, "-name", "*.wasm", "-size", "-4M"]).output() else {
            continue;
        };
        for path in String::from_utf8_lossy(&walk.stdout).lines() {
            let bytes = std::fs::read(path).unwrap();
            let Ok(()) = reference_valid(&bytes) else { continue };
            match decode_module(&bytes) {
                Ok(m) => {
                    let re = encode_module(&m).unwrap();
                    assert_eq!(decode_module(&re).unwrap(), m, "{path}");
                    assert!(validate_module(&m).is_ok(), "{path}: {:?}", validate_module(&m));
                    seen += 1;
                }
                Err(DecodeError::UnsupportedProposal(_)) => {}
                Err(e) => panic!("{path}: {e}"),
            }
        }
    }
    eprintln!("{seen} on-disk binaries round-tripped");
}
