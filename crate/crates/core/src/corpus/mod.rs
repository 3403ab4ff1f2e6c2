//! Corpus of context-annotated AST sub-trees harvested from seed binaries.

pub mod ast;
pub mod context;
pub mod store;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::par;
use crate::wasm::{decode_module, validate_module, WasmModule};

pub use ast::{fingerprint, parse_asts, parse_function, serialize_roots, AstNode};
pub use context::{extract_context, function_contexts, ConcreteContext, SemanticConstraint};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("unresolvable context: {0}")]
    UnresolvableContext(String),
    #[error("stack underflow at {opcode} @{offset:#x}")]
    StackUnderflow { offset: u32, opcode: String },
}

/// Size bounds for admitted sub-trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_depth: usize,
    pub max_size: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_depth: 64,
            max_size: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub fingerprint: u64,
    /// Identifier of the seed binary the root came from.
    pub source: String,
    pub root: AstNode,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub entries: Vec<CorpusEntry>,
    fingerprints: HashSet<u64>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, fp: u64) -> bool {
        self.fingerprints.contains(&fp)
    }

    /// Admits `root` unless an entry with the same fingerprint exists.
    pub fn admit(&mut self, root: AstNode, source: &str) -> bool {
        let fp = fingerprint(&root);
        if !self.fingerprints.insert(fp) {
            return false;
        }
        self.entries.push(CorpusEntry {
            fingerprint: fp,
            source: source.to_string(),
            root,
        });
        true
    }

    pub fn from_entries(entries: Vec<CorpusEntry>) -> Self {
        let mut c = Corpus::default();
        for e in entries {
            if c.fingerprints.insert(e.fingerprint) {
                c.entries.push(e);
            }
        }
        c
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub func: Option<u32>,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    pub binaries: usize,
    pub binaries_skipped: usize,
    pub functions: usize,
    pub functions_skipped: usize,
    pub roots: usize,
    pub roots_oversized: usize,
    pub admitted: usize,
    pub diagnostics: Vec<Diagnostic>,
}

/// Roots harvested from one binary, before dedup.
#[derive(Debug, Default)]
pub struct Harvest {
    pub roots: Vec<AstNode>,
    pub functions: usize,
    pub oversized: usize,
    pub diagnostics: Vec<Diagnostic>,
    pub rejected: bool,
}

/// Parses every defined function of one binary into roots.
pub fn harvest_binary(source: &str, bytes: &[u8], limits: Limits) -> Harvest {
    let mut h = Harvest::default();
    let diag = |func, reason: String| Diagnostic {
        source: source.to_string(),
        func,
        reason,
    };
    let module = match decode_module(bytes) {
        Ok(m) => m,
        Err(e) => {
            h.rejected = true;
            h.diagnostics.push(diag(None, e.to_string()));
            return h;
        }
    };
    if let Some(v) = validate_module(&module).violations().first() {
        h.rejected = true;
        h.diagnostics.push(diag(None, format!("invalid: {v}")));
        return h;
    }
    harvest_module(source, &module, limits, &mut h);
    h
}

pub fn harvest_module(source: &str, module: &WasmModule, limits: Limits, h: &mut Harvest) {
    let first = module.num_imported_funcs();
    for f in first..module.total_funcs() {
        h.functions += 1;
        match parse_function(module, f) {
            Ok(roots) => {
                for r in roots {
                    if r.depth() > limits.max_depth || r.size() > limits.max_size {
                        h.oversized += 1;
                    } else {
                        h.roots.push(r);
                    }
                }
            }
            Err(e) => h.diagnostics.push(Diagnostic {
                source: source.to_string(),
                func: Some(f),
                reason: e.to_string(),
            }),
        }
    }
}

/// Builds a deduplicated corpus. Binaries are parsed in parallel; admission
/// runs in input order so the result does not depend on scheduling.
pub fn build_corpus(binaries: &[(String, Vec<u8>)], limits: Limits) -> (Corpus, BuildReport) {
    let harvests = par::map(binaries, |(name, bytes)| harvest_binary(name, bytes, limits));
    let mut corpus = Corpus::default();
    let mut report = BuildReport {
        binaries: binaries.len(),
        ..Default::default()
    };
    for ((name, _), h) in binaries.iter().zip(harvests) {
        if h.rejected {
            report.binaries_skipped += 1;
        }
        report.functions += h.functions;
        report.functions_skipped += h.diagnostics.iter().filter(|d| d.func.is_some()).count();
        report.roots += h.roots.len() + h.oversized;
        report.roots_oversized += h.oversized;
        report.diagnostics.extend(h.diagnostics);
        for r in h.roots {
            if corpus.admit(r, name) {
                report.admitted += 1;
            }
        }
    }
    (corpus, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::factorial_module;
    use crate::wasm::encode_module;

    fn factorial_bytes() -> Vec<u8> {
        encode_module(&factorial_module()).unwrap()
    }

    #[test]
    fn factorial_yields_three_entries() {
        let (c, r) = build_corpus(&[("fact".into(), factorial_bytes())], Limits::default());
        assert_eq!(r.roots, 4);
        assert_eq!(c.len(), 3);
    }

    #[test]
    fn duplicate_binary_adds_nothing() {
        let b = factorial_bytes();
        let (one, _) = build_corpus(&[("a".into(), b.clone())], Limits::default());
        let (two, _) = build_corpus(&[("a".into(), b.clone()), ("b".into(), b)], Limits::default());
        assert_eq!(one.entries, two.entries);
    }

    #[test]
    fn empty_input_gives_empty_corpus() {
        let (c, r) = build_corpus(&[], Limits::default());
        assert!(c.is_empty());
        assert_eq!(r.admitted, 0);
    }

    #[test]
    fn garbage_is_reported_not_fatal() {
        let (c, r) = build_corpus(&[("junk".into(), vec![1, 2, 3])], Limits::default());
        assert!(c.is_empty());
        assert_eq!(r.binaries_skipped, 1);
        assert_eq!(r.diagnostics.len(), 1);
    }

    #[test]
    fn limits_drop_large_roots() {
        let tight = Limits {
            max_depth: 2,
            max_size: 4096,
        };
        let (c, r) = build_corpus(&[("fact".into(), factorial_bytes())], tight);
        assert_eq!(r.roots_oversized, 1);
        assert_eq!(c.len(), 2);
    }
}
