//! On-disk corpus: `index.json` plus one record per entry under `entries/`.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AstNode, Corpus, CorpusEntry};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct IndexRow {
    fingerprint: String,
    path: String,
    source: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct Index {
    version: u32,
    entries: Vec<IndexRow>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EntryRecord {
    version: u32,
    fingerprint: String,
    source: String,
    root: AstNode,
}

fn json_err(e: serde_json::Error) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, e)
}

/// Entry records nest about two JSON levels per tree level, past
/// serde_json's default limit; tree depth is already bounded at admission.
fn read_record(bytes: &[u8]) -> serde_json::Result<EntryRecord> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    de.disable_recursion_limit();
    let rec = EntryRecord::deserialize(&mut de)?;
    de.end()?;
    Ok(rec)
}

pub fn fp_hex(fp: u64) -> String {
    format!("{fp:016x}")
}

/// Writes the corpus under `dir`, replacing any previous index.
pub fn save_corpus(corpus: &Corpus, dir: &Path) -> io::Result<()> {
    let entries_dir = dir.join("entries");
    fs::create_dir_all(&entries_dir)?;
    let mut rows = Vec::with_capacity(corpus.len());
    for e in &corpus.entries {
        let hex = fp_hex(e.fingerprint);
        let rel = format!("entries/{hex}.json");
        let rec = EntryRecord {
            version: FORMAT_VERSION,
            fingerprint: hex.clone(),
            source: e.source.clone(),
            root: e.root.clone(),
        };
        fs::write(dir.join(&rel), serde_json::to_vec(&rec).map_err(json_err)?)?;
        rows.push(IndexRow {
            fingerprint: hex,
            path: rel,
            source: e.source.clone(),
        });
    }
    let index = Index {
        version: FORMAT_VERSION,
        entries: rows,
    };
    let tmp = dir.join("index.json.tmp");
    fs::write(&tmp, serde_json::to_vec_pretty(&index).map_err(json_err)?)?;
    fs::rename(tmp, dir.join("index.json"))
}

pub fn load_corpus(dir: &Path) -> io::Result<Corpus> {
    let index: Index = serde_json::from_slice(&fs::read(dir.join("index.json"))?).map_err(json_err)?;
    if index.version != FORMAT_VERSION {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("corpus format version {} (expected {FORMAT_VERSION})", index.version),
        ));
    }
    let mut entries = Vec::with_capacity(index.entries.len());
    for row in index.entries {
        let rec = read_record(&fs::read(dir.join(&row.path))?).map_err(json_err)?;
        let fp = u64::from_str_radix(&rec.fingerprint, 16)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        entries.push(CorpusEntry {
            fingerprint: fp,
            source: rec.source,
            root: rec.root,
        });
    }
    Ok(Corpus::from_entries(entries))
}

pub fn corpus_exists(dir: &Path) -> bool {
    dir.join("index.json").is_file()
}
