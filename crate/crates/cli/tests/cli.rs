mod common;

use std::fs;
use std::path::Path;
use std::process::Stdio;
use std::time::{Duration, Instant};

use common::*;
use serde_json::Value;
use wdiff_cli::campaign::{cmd_locate, ResultLine};
use wdiff_core::harness::{Phase, RuntimeOutcome};
use wdiff_core::wasm::encode_module;

fn code(cmd: &mut std::process::Command) -> i32 {
    cmd.stdout(Stdio::null()).stderr(Stdio::null()).status().unwrap().code().unwrap()
}

#[test]
fn exit_codes() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("out");
    assert_eq!(code(&mut wdiff()), 1);
    assert_eq!(code(wdiff().arg("--help")), 0);
    assert_eq!(code(wdiff().args(["fuzz", "--bogus"])), 1);
    // no stop condition
    assert_eq!(code(wdiff().arg("fuzz").arg("--out").arg(&out)), 1);
    assert_eq!(code(wdiff().arg("report").arg("--out").arg(t.path().join("missing"))), 1);

    let bad = t.path().join("bad.toml");
    fs::write(
        &bad,
        "[[adapter]]\nname = \"x\"\ncommand = \"/nonexistent/runtime {binary}\"\nresult_pattern = '(.+)'\n",
    )
    .unwrap();
    let mut c = wdiff();
    c.arg("fuzz").arg("--out").arg(&out).arg("--corpus").arg(seed_dir()).args(["--count", "1"]).arg("--adapters").arg(&bad);
    assert_eq!(code(&mut c), 2);

    let broken = t.path().join("broken");
    fs::create_dir_all(&broken).unwrap();
    fs::write(broken.join("campaign.json"), "{ not json").unwrap();
    let mut c = wdiff();
    c.arg("fuzz").arg("--out").arg(&broken).arg("--corpus").arg(seed_dir()).args(["--count", "1"]);
    c.arg("--adapters").arg(panel("fast-add.toml"));
    assert_eq!(code(&mut c), 3);
}

#[test]
fn corpus_build_on_empty_dir() {
    let t = tempfile::tempdir().unwrap();
    let seeds = t.path().join("seeds");
    fs::create_dir_all(&seeds).unwrap();
    let out = run_ok(wdiff().arg("corpus-build").arg(&seeds).arg(t.path().join("out")));
    assert!(out.contains("binaries 0"), "{out}");
    let summary: Value = serde_json::from_slice(&fs::read(t.path().join("out/corpus/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["admitted"], 0);
}

#[test]
fn corpus_build_on_factorial_gives_three_entries() {
    let t = tempfile::tempdir().unwrap();
    let seeds = t.path().join("seeds");
    fs::create_dir_all(&seeds).unwrap();
    fs::copy(repo().join("fixtures/case-studies/factorial.wasm"), seeds.join("f.wasm")).unwrap();
    run_ok(wdiff().arg("corpus-build").arg(&seeds).arg(t.path().join("out")));
    let summary: Value = serde_json::from_slice(&fs::read(t.path().join("out/corpus/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["admitted"], 3);
}

#[test]
fn corpus_build_counts_match_recount() {
    let t = tempfile::tempdir().unwrap();
    let seeds = t.path().join("seeds");
    fs::create_dir_all(seeds.join("nested")).unwrap();
    let mut files: Vec<_> = fs::read_dir(seed_dir()).unwrap().map(|e| e.unwrap().path()).collect();
    files.retain(|p| p.extension().is_some_and(|x| x == "wasm"));
    files.sort();
    for (i, p) in files.iter().take(98).enumerate() {
        let dest = if i % 3 == 0 { seeds.join("nested") } else { seeds.clone() };
        fs::copy(p, dest.join(p.file_name().unwrap())).unwrap();
    }
    fs::write(seeds.join("junk.wasm"), b"not wasm at all").unwrap();
    let first = fs::read(&files[0]).unwrap();
    fs::write(seeds.join("cut.wasm"), &first[..first.len() / 2]).unwrap();
    fs::write(seeds.join("ignored.txt"), b"x").unwrap();

    let (mut ok, mut bad, mut bodies) = (0, 0, 0);
    let mut walk = vec![seeds.clone()];
    while let Some(d) = walk.pop() {
        for e in fs::read_dir(d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk.push(p);
                continue;
            }
            if p.extension().is_none_or(|x| x != "wasm") {
                continue;
            }
            let bytes = fs::read(&p).unwrap();
            if wasmparser::Validator::new().validate_all(&bytes).is_err() {
                bad += 1;
                continue;
            }
            ok += 1;
            for payload in wasmparser::Parser::new(0).parse_all(&bytes) {
                if let Ok(wasmparser::Payload::CodeSectionEntry(_)) = payload {
                    bodies += 1;
                }
            }
        }
    }
    run_ok(wdiff().arg("corpus-build").arg(&seeds).arg(t.path().join("out")));
    let s: Value = serde_json::from_slice(&fs::read(t.path().join("out/corpus/summary.json")).unwrap()).unwrap();
    assert_eq!(ok + bad, 100);
    assert_eq!(s["binaries"], ok + bad);
    assert_eq!(s["binaries_skipped"], bad);
    assert_eq!(s["functions"], bodies);
}

fn fuzz(out: &Path, count: u64) -> std::process::Command {
    let mut c = wdiff();
    c.arg("fuzz").arg("--out").arg(out).arg("--corpus").arg(seed_dir());
    c.arg("--adapters").arg(panel("fast-add.toml")).args(["--seed", "7", "--count", &count.to_string()]);
    c
}

fn blame_files(out: &Path) -> Vec<(String, String)> {
    let mut v: Vec<_> = fs::read_dir(out.join("blame"))
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn interrupted_campaign_resumes_to_the_same_results() {
    const N: u64 = 24;
    let t = tempfile::tempdir().unwrap();
    let whole = t.path().join("whole");
    run_ok(&mut fuzz(&whole, N));

    let split = t.path().join("split");
    run_ok(&mut fuzz(&split, 5));
    // a torn final line, as left by a crash mid-append
    let mut log = fs::read_to_string(split.join("results.log")).unwrap();
    log.push_str("{\"seq\":5,\"seed\"");
    fs::write(split.join("results.log"), log).unwrap();
    // killed while running
    let mut child = fuzz(&split, N).stdout(Stdio::null()).stderr(Stdio::null()).spawn().unwrap();
    let start = Instant::now();
    while results_len(&split) < 10 && start.elapsed() < Duration::from_secs(120) {
        std::thread::sleep(Duration::from_millis(20));
    }
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(results_len(&split) < N as usize, "campaign finished before it was interrupted");
    run_ok(&mut fuzz(&split, N));

    let a: Vec<Value> = results(&whole).iter().map(essence).collect();
    let b: Vec<Value> = results(&split).iter().map(essence).collect();
    assert_eq!(a.len(), N as usize);
    assert_eq!(a, b);
    assert_eq!(blame_files(&whole), blame_files(&split));
    let ra = fs::read_to_string(whole.join("report.json")).unwrap();
    let rb = fs::read_to_string(split.join("report.json")).unwrap();
    assert_eq!(ra, rb);
}

fn results_len(out: &Path) -> usize {
    fs::read_to_string(out.join("results.log")).map(|s| s.lines().count()).unwrap_or(0)
}

#[test]
fn report_matches_census_and_locate_blames_the_mock() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("c");
    run_ok(&mut fuzz(&out, 40));
    // layout
    for d in ["binaries", "blame", "corpus"] {
        assert!(out.join(d).is_dir(), "{d}");
    }
    let lines = results(&out);
    for l in &lines {
        if let Some(id) = l["binary_id"].as_str() {
            let bytes = fs::read(out.join("binaries").join(format!("{id}.wasm"))).unwrap();
            assert_eq!(wdiff_core::generator::content_hash(&bytes), id);
        }
    }

    let report: Value = serde_json::from_str(&run_ok(wdiff().arg("report").arg("--out").arg(&out).arg("--json"))).unwrap();
    let count = |v: &str| lines.iter().filter(|l| l["verdict"] == v).count() as u64;
    assert_eq!(report["binaries"], lines.len() as u64);
    assert_eq!(report["consistent"], count("Consistent"));
    assert_eq!(report["cf"], count("CF"));
    assert_eq!(report["rf"], count("RF"));
    assert_eq!(report["uo"], count("UO"));
    assert_eq!(report["insufficient_panel"], count("InsufficientPanel"));
    assert_eq!(report["generation_failures"], count("GenError"));
    let inconsistent = count("CF") + count("RF") + count("UO");
    assert!(inconsistent > 0, "the seeded bug never showed");
    let located = report["located"].as_u64().unwrap();
    assert_eq!(located + report["locate_failures"].as_u64().unwrap() + report["unlocated"].as_u64().unwrap(), inconsistent);
    let grouped: u64 = report["unique"].as_array().unwrap().iter().map(|g| g["count"].as_u64().unwrap()).sum();
    assert_eq!(grouped + report["heisenbugs"].as_u64().unwrap(), located);

    let uo = lines.iter().find(|l| l["verdict"] == "UO").expect("a UO record");
    let seq = uo["seq"].to_string();
    let blame: Value = serde_json::from_str(&run_ok(wdiff().arg("locate").arg("--out").arg(&out).arg(&seq))).unwrap();
    assert_eq!(blame["suspect"], "mock-add");
    assert_eq!(blame["type"], "UO");
    assert_eq!(blame["opcode"], "i32.add");
    assert!(blame["func"].is_u64());
    assert_eq!(code(wdiff().arg("locate").arg("--out").arg(&out).arg("no-such-record")), 1);
}

#[test]
fn locate_on_cf_record_is_module_level() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path();
    let bytes = encode_module(&wdiff_core::fixtures::data_offset_module()).unwrap();
    let id = wdiff_core::generator::content_hash(&bytes);
    fs::create_dir_all(out.join("binaries")).unwrap();
    fs::write(out.join("binaries").join(format!("{id}.wasm")), &bytes).unwrap();
    let o = |rt: &str, phase| RuntimeOutcome {
        runtime: rt.into(),
        phase,
        trap: None,
        rendered: (phase == Phase::RunOk).then(String::new),
        stdout: String::new(),
        stderr: String::new(),
        exit_code: Some(0),
    };
    let line = ResultLine {
        seq: 0,
        seed: 0,
        binary_id: Some(id.clone()),
        size: bytes.len(),
        entry_results: vec![],
        verdict: "CF".into(),
        suspects: vec!["mock-add".into()],
        tie: false,
        outcomes: vec![o("wasmi", Phase::RunOk), o("wasmi-twin", Phase::RunOk), o("mock-add", Phase::CompileFail)],
        error: None,
    };
    fs::write(out.join("results.log"), serde_json::to_string(&line).unwrap() + "\n").unwrap();
    let r = cmd_locate(out, &id[..12], Some(&panel("fast-add.toml")), &self_dir()).unwrap();
    assert_eq!(r.suspect, "mock-add");
    assert_eq!(r.func, None);
    assert_eq!(r.offset, None);
    assert!(out.join("blame").join(format!("{id}.json")).is_file());
}
