//! Campaigns: persisted layout, the generate/run/persist loop,
//! localization of divergent binaries, and reporting.
//!
//! Output directory:
//! ```text
//! binaries/<sha256>.wasm          generated binaries, content-addressed
//! binaries/<sha256>.lineage.json  seed, sampled fingerprints, mutation log
//! results.log                     one JSON line per binary, in seq order
//! blame/<sha256>.json             blame reports (`.err` when locating failed)
//! corpus/                         corpus snapshot used by the campaign
//! campaign.json                   base seed and generation settings
//! adapters.toml                   the panel
//! ```

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use wdiff_core::corpus::store::{corpus_exists, load_corpus, save_corpus};
use wdiff_core::corpus::{build_corpus, BuildReport, Corpus, Limits as TreeLimits};
use wdiff_core::generator::{generate_from_pools, GenConfig, Pools, ENTRY_EXPORT};
use wdiff_core::harness::adapter::{parse_panel, Adapter};
use wdiff_core::harness::{
    run_panel, HarnessError, InconsistencyRecord, InconsistencyType, RuntimeOutcome, Verdict,
};
use wdiff_core::locator::{dedup_reports, locate, BlameReport, DedupGroup};
use wdiff_core::mutator::MutationPlan;
use wdiff_core::par;
use wdiff_core::wasm::{validate_module, ValType};

pub const DEFAULT_PANEL: &str = include_str!("../panels/default.toml");
pub const MOCK_PANEL: &str = include_str!("../panels/mock.toml");
pub const DEFAULT_LOOP_FUEL: u32 = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("adapter misconfigured: {0}")]
    Adapter(String),
    #[error("campaign error: {0}")]
    Campaign(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Adapter(_) => 2,
            CliError::Campaign(_) => 3,
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::AdapterMisconfigured(m) => CliError::Adapter(m),
            other => CliError::Campaign(other.to_string()),
        }
    }
}

fn io_err(what: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Campaign(format!("{}: {e}", what.display()))
}

#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Layout { root: root.into() }
    }
    pub fn binaries(&self) -> PathBuf {
        self.root.join("binaries")
    }
    pub fn binary(&self, id: &str) -> PathBuf {
        self.binaries().join(format!("{id}.wasm"))
    }
    pub fn results_log(&self) -> PathBuf {
        self.root.join("results.log")
    }
    pub fn blame(&self) -> PathBuf {
        self.root.join("blame")
    }
    pub fn corpus(&self) -> PathBuf {
        self.root.join("corpus")
    }
    pub fn work(&self) -> PathBuf {
        self.root.join("work")
    }
    pub fn campaign_file(&self) -> PathBuf {
        self.root.join("campaign.json")
    }
    pub fn adapters_file(&self) -> PathBuf {
        self.root.join("adapters.toml")
    }

    fn create(&self) -> Result<(), CliError> {
        for d in [self.binaries(), self.blame(), self.work()] {
            fs::create_dir_all(&d).map_err(io_err(&d))?;
        }
        Ok(())
    }
}

/// Settings fixed at campaign creation; a resumed campaign reuses them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignState {
    pub base_seed: u64,
    pub gen: GenConfig,
    pub plan: MutationPlan,
}

#[derive(Debug, Clone)]
pub struct CampaignConfig {
    /// Saved corpus or a directory of seed binaries. Optional when resuming.
    pub corpus: Option<PathBuf>,
    /// Panel file; defaults to the campaign's own copy, then the built-in panel.
    pub adapters: Option<PathBuf>,
    pub gen: GenConfig,
    pub plan: MutationPlan,
    pub workers: usize,
    pub out_dir: PathBuf,
    /// Total binaries in the campaign, counting earlier runs.
    pub count: Option<u64>,
    pub duration: Option<Duration>,
    pub base_seed: u64,
    pub locate: bool,
    /// Directory substituted for `{self_dir}` in adapter commands.
    pub self_dir: PathBuf,
}

impl CampaignConfig {
    pub fn new(out_dir: impl Into<PathBuf>, self_dir: impl Into<PathBuf>) -> Self {
        CampaignConfig {
            corpus: None,
            adapters: None,
            gen: GenConfig {
                loop_fuel: Some(DEFAULT_LOOP_FUEL),
                ..GenConfig::default()
            },
            plan: MutationPlan::default(),
            workers: 1,
            out_dir: out_dir.into(),
            count: None,
            duration: None,
            base_seed: 0,
            locate: true,
            self_dir: self_dir.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultLine {
    pub seq: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binary_id: Option<String>,
    #[serde(default)]
    pub size: usize,
    #[serde(default)]
    pub entry_results: Vec<ValType>,
    /// `Consistent`, `CF`, `RF`, `UO`, `InsufficientPanel` or `GenError`.
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub suspects: Vec<String>,
    #[serde(default)]
    pub tie: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outcomes: Vec<RuntimeOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ResultLine {
    pub fn record(&self) -> Option<InconsistencyRecord> {
        let kind = match self.verdict.as_str() {
            "CF" => InconsistencyType::CF,
            "RF" => InconsistencyType::RF,
            "UO" => InconsistencyType::UO,
            _ => return None,
        };
        Some(InconsistencyRecord {
            binary_id: self.binary_id.clone()?,
            kind,
            suspects: self.suspects.clone(),
            tie: self.tie,
            outcomes: self.outcomes.clone(),
        })
    }
}

fn wasm_files(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for e in fs::read_dir(dir)? {
        let p = e?.path();
        if p.is_dir() {
            wasm_files(&p, out)?;
        } else if p.extension().is_some_and(|x| x == "wasm") {
            out.push(p);
        }
    }
    Ok(())
}

fn read_seeds(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, CliError> {
    if !dir.is_dir() {
        return Err(CliError::Usage(format!("{}: not a directory", dir.display())));
    }
    let mut files = Vec::new();
    wasm_files(dir, &mut files).map_err(io_err(dir))?;
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.strip_prefix(dir).unwrap_or(&p).to_string_lossy().into_owned();
            fs::read(&p).map(|b| (name, b)).map_err(io_err(&p))
        })
        .collect()
}

/// Builds a corpus from every `.wasm` under `seed_dir` into `<out>/corpus`.
/// Re-running over the same seeds rewrites an identical corpus.
pub fn cmd_corpus_build(seed_dir: &Path, out_dir: &Path) -> Result<BuildReport, CliError> {
    let seeds = read_seeds(seed_dir)?;
    let (corpus, report) = build_corpus(&seeds, TreeLimits::default());
    let dir = Layout::new(out_dir).corpus();
    save_corpus(&corpus, &dir).map_err(io_err(&dir))?;
    let summary = dir.join("summary.json");
    fs::write(&summary, serde_json::to_vec_pretty(&report).unwrap()).map_err(io_err(&summary))?;
    Ok(report)
}

fn campaign_corpus(cfg: &CampaignConfig, layout: &Layout) -> Result<Corpus, CliError> {
    match &cfg.corpus {
        Some(dir) if corpus_exists(dir) => {
            let c = load_corpus(dir).map_err(io_err(dir))?;
            if dir != &layout.corpus() {
                save_corpus(&c, &layout.corpus()).map_err(io_err(&layout.corpus()))?;
            }
            Ok(c)
        }
        Some(dir) => {
            cmd_corpus_build(dir, &layout.root)?;
            load_corpus(&layout.corpus()).map_err(io_err(&layout.corpus()))
        }
        None if corpus_exists(&layout.corpus()) => load_corpus(&layout.corpus()).map_err(io_err(&layout.corpus())),
        None => Err(CliError::Usage("no corpus: pass --corpus".into())),
    }
}

/// Loads the panel: explicit file, else the campaign's copy, else built-in.
pub fn campaign_panel(explicit: Option<&Path>, layout: &Layout, self_dir: &Path) -> Result<Vec<Adapter>, CliError> {
    let text = match explicit {
        Some(p) => fs::read_to_string(p).map_err(|e| CliError::Adapter(format!("{}: {e}", p.display())))?,
        None if layout.adapters_file().is_file() => {
            fs::read_to_string(layout.adapters_file()).map_err(io_err(&layout.adapters_file()))?
        }
        None => DEFAULT_PANEL.to_string(),
    };
    let adapters = parse_panel(&text, self_dir)?;
    if adapters.len() < 3 {
        return Err(CliError::Adapter(format!("panel has {} runtimes, need at least 3", adapters.len())));
    }
    if layout.root.is_dir() {
        fs::write(layout.adapters_file(), &text).map_err(io_err(&layout.adapters_file()))?;
    }
    Ok(adapters)
}

/// Result lines persisted so far. A torn trailing line (interrupted write)
/// is dropped and truncated away.
pub fn read_results(layout: &Layout) -> Result<Vec<ResultLine>, CliError> {
    let path = layout.results_log();
    if !path.is_file() {
        return Ok(vec![]);
    }
    let f = fs::File::open(&path).map_err(io_err(&path))?;
    let mut lines = Vec::new();
    let mut good_bytes = 0u64;
    for l in BufReader::new(f).split(b'\n') {
        let l = l.map_err(io_err(&path))?;
        match serde_json::from_slice::<ResultLine>(&l) {
            Ok(r) if r.seq == lines.len() as u64 => {
                good_bytes += l.len() as u64 + 1;
                lines.push(r);
            }
            _ => break,
        }
    }
    let len = fs::metadata(&path).map_err(io_err(&path))?.len();
    if len != good_bytes {
        let f = OpenOptions::new().write(true).open(&path).map_err(io_err(&path))?;
        f.set_len(good_bytes).map_err(io_err(&path))?;
    }
    Ok(lines)
}

fn process(
    seq: u64,
    state: &CampaignState,
    pools: &Pools<'_>,
    layout: &Layout,
    adapters: &[Adapter],
) -> Result<ResultLine, CliError> {
    let seed = state.base_seed.wrapping_add(seq);
    let mut line = ResultLine {
        seq,
        seed,
        binary_id: None,
        size: 0,
        entry_results: vec![],
        verdict: "GenError".into(),
        suspects: vec![],
        tie: false,
        outcomes: vec![],
        error: None,
    };
    let cfg = GenConfig { seed, ..state.gen.clone() };
    let g = match generate_from_pools(pools, &cfg, &state.plan) {
        Ok(g) => g,
        Err(e) => {
            line.error = Some(e.to_string());
            return Ok(line);
        }
    };
    if let Some(v) = validate_module(&g.module).violations().first() {
        line.error = Some(format!("generated binary invalid: {v}"));
        return Ok(line);
    }
    let id = g.id();
    let path = layout.binary(&id);
    if !path.is_file() {
        fs::write(&path, &g.bytes).map_err(io_err(&path))?;
        let lineage = layout.binaries().join(format!("{id}.lineage.json"));
        fs::write(&lineage, serde_json::to_vec(&g.lineage).unwrap()).map_err(io_err(&lineage))?;
    }
    let results = g.entry_results();
    let panel = run_panel(&id, &path, ENTRY_EXPORT, &results, adapters)?;
    line.binary_id = Some(id);
    line.size = g.bytes.len();
    line.entry_results = results;
    line.outcomes = panel.outcomes;
    line.verdict = match panel.verdict {
        Verdict::Consistent => "Consistent".into(),
        Verdict::InsufficientPanel => "InsufficientPanel".into(),
        Verdict::Inconsistent(r) => {
            line.suspects = r.suspects;
            line.tie = r.tie;
            format!("{:?}", r.kind)
        }
    };
    Ok(line)
}

/// Runs (or resumes) a campaign, then localizes and reports.
pub fn cmd_fuzz(cfg: &CampaignConfig) -> Result<CampaignReport, CliError> {
    if cfg.count.is_none() && cfg.duration.is_none() {
        return Err(CliError::Usage("give --count or --duration".into()));
    }
    if cfg.workers == 0 {
        return Err(CliError::Usage("--workers must be positive".into()));
    }
    cfg.gen.check().map_err(CliError::Usage)?;
    cfg.plan.check().map_err(CliError::Usage)?;
    let layout = Layout::new(&cfg.out_dir);
    layout.create()?;
    let adapters = campaign_panel(cfg.adapters.as_deref(), &layout, &cfg.self_dir)?;
    let state = if layout.campaign_file().is_file() {
        let text = fs::read(layout.campaign_file()).map_err(io_err(&layout.campaign_file()))?;
        serde_json::from_slice(&text).map_err(|e| CliError::Campaign(format!("campaign.json: {e}")))?
    } else {
        let s = CampaignState {
            base_seed: cfg.base_seed,
            gen: cfg.gen.clone(),
            plan: cfg.plan.clone(),
        };
        fs::write(layout.campaign_file(), serde_json::to_vec_pretty(&s).unwrap())
            .map_err(io_err(&layout.campaign_file()))?;
        s
    };
    let corpus = campaign_corpus(cfg, &layout)?;
    let pools = Pools::new(&corpus);
    let mut next = read_results(&layout)?.len() as u64;
    let start = Instant::now();
    let batch = (cfg.workers * 2) as u64;
    let mut log = OpenOptions::new()
        .create(true)
        .append(true)
        .open(layout.results_log())
        .map_err(io_err(&layout.results_log()))?;
    loop {
        let mut n = batch;
        if let Some(c) = cfg.count {
            n = n.min(c.saturating_sub(next));
        }
        if n == 0 || cfg.duration.is_some_and(|d| start.elapsed() >= d) {
            break;
        }
        let seqs: Vec<u64> = (next..next + n).collect();
        let lines = par::with_workers(cfg.workers, || {
            par::map(&seqs, |s| process(*s, &state, &pools, &layout, &adapters))
        });
        let mut text = String::new();
        for l in lines {
            text.push_str(&serde_json::to_string(&l?).unwrap());
            text.push('\n');
        }
        log.write_all(text.as_bytes()).map_err(io_err(&layout.results_log()))?;
        next += n;
    }
    if cfg.locate {
        locate_pending(&layout, &adapters, cfg.workers)?;
    }
    cmd_report(&cfg.out_dir)
}

fn blame_path(layout: &Layout, id: &str) -> PathBuf {
    layout.blame().join(format!("{id}.json"))
}

/// Localizes one persisted inconsistency and stores its blame report.
pub fn locate_line(layout: &Layout, line: &ResultLine, adapters: &[Adapter]) -> Result<BlameReport, CliError> {
    let record = line
        .record()
        .ok_or_else(|| CliError::Usage(format!("seq {} is not an inconsistency", line.seq)))?;
    let path = layout.binary(&record.binary_id);
    let bytes = fs::read(&path).map_err(io_err(&path))?;
    let work = layout.work().join(&record.binary_id);
    let result = locate(&record, &bytes, ENTRY_EXPORT, adapters, &work);
    let _ = fs::remove_dir_all(&work);
    match result {
        Ok(r) => {
            let p = blame_path(layout, &record.binary_id);
            fs::write(&p, serde_json::to_vec_pretty(&r).unwrap()).map_err(io_err(&p))?;
            Ok(r)
        }
        Err(wdiff_core::locator::LocError::Harness(h)) => Err(h.into()),
        Err(e) => {
            let p = layout.blame().join(format!("{}.err", record.binary_id));
            fs::write(&p, e.to_string()).map_err(io_err(&p))?;
            Err(CliError::Campaign(e.to_string()))
        }
    }
}

/// Localizes every inconsistency that has no blame report yet.
pub fn locate_pending(layout: &Layout, adapters: &[Adapter], workers: usize) -> Result<(), CliError> {
    fs::create_dir_all(layout.blame()).map_err(io_err(&layout.blame()))?;
    let mut seen = std::collections::HashSet::new();
    let pending: Vec<ResultLine> = read_results(layout)?
        .into_iter()
        .filter(|l| l.record().is_some())
        .filter(|l| {
            let id = l.binary_id.clone().unwrap();
            seen.insert(id.clone()) && !blame_path(layout, &id).is_file()
        })
        .collect();
    let results = par::with_workers(workers, || par::map(&pending, |l| locate_line(layout, l, adapters)));
    for r in results {
        match r {
            Err(CliError::Adapter(m)) => return Err(CliError::Adapter(m)),
            // failures are persisted as `.err` files and counted in the report
            _ => continue,
        }
    }
    Ok(())
}

/// Finds a persisted inconsistency by binary id (or unique prefix) or seq.
pub fn find_line(layout: &Layout, key: &str) -> Result<ResultLine, CliError> {
    let lines = read_results(layout)?;
    let hits: Vec<&ResultLine> = lines
        .iter()
        .filter(|l| {
            l.binary_id.as_deref().is_some_and(|id| id.starts_with(key)) || key.parse::<u64>().is_ok_and(|s| s == l.seq)
        })
        .collect();
    match hits.as_slice() {
        [one] => Ok((*one).clone()),
        [] => Err(CliError::Usage(format!("no record matches {key}"))),
        many if many.iter().all(|l| l.binary_id == many[0].binary_id) => Ok(many[0].clone()),
        _ => Err(CliError::Usage(format!("{key} is ambiguous"))),
    }
}

pub fn cmd_locate(out_dir: &Path, key: &str, adapters: Option<&Path>, self_dir: &Path) -> Result<BlameReport, CliError> {
    let layout = Layout::new(out_dir);
    if !layout.results_log().is_file() {
        return Err(CliError::Usage(format!("{}: no results.log", out_dir.display())));
    }
    let line = find_line(&layout, key)?;
    let adapters = campaign_panel(adapters, &layout, self_dir)?;
    fs::create_dir_all(layout.blame()).map_err(io_err(&layout.blame()))?;
    locate_line(&layout, &line, &adapters)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub binaries: u64,
    pub generation_failures: u64,
    pub consistent: u64,
    pub insufficient_panel: u64,
    pub cf: u64,
    pub rf: u64,
    pub uo: u64,
    pub ties: u64,
    pub located: u64,
    pub heisenbugs: u64,
    pub locate_failures: u64,
    /// Inconsistent binaries with no blame report and no failure record.
    pub unlocated: u64,
    pub unique: Vec<DedupGroup>,
}

impl CampaignReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let mut row = |k: &str, v: u64| s.push_str(&format!("{k:<22}{v:>10}\n"));
        row("binaries", self.binaries);
        row("generation failures", self.generation_failures);
        row("consistent", self.consistent);
        row("insufficient panel", self.insufficient_panel);
        row("CF", self.cf);
        row("RF", self.rf);
        row("UO", self.uo);
        row("ties", self.ties);
        row("located", self.located);
        row("heisenbugs", self.heisenbugs);
        row("locate failures", self.locate_failures);
        row("unlocated", self.unlocated);
        row("unique bugs", self.unique.len() as u64);
        for g in &self.unique {
            s.push_str(&format!(
                "  {:>6}  {} {:?} {} {}  e.g. {}\n",
                g.count, g.key.suspect, g.key.kind, g.key.detail, g.key.stack_type, g.representative
            ));
        }
        s
    }
}

/// Counts from `results.log` and dedup over `blame/`. Also writes
/// `report.json`.
pub fn cmd_report(out_dir: &Path) -> Result<CampaignReport, CliError> {
    let layout = Layout::new(out_dir);
    if !layout.results_log().is_file() {
        return Err(CliError::Usage(format!("{}: no results.log", out_dir.display())));
    }
    let lines = read_results(&layout)?;
    let mut r = CampaignReport {
        binaries: lines.len() as u64,
        ..Default::default()
    };
    let mut sizes = BTreeMap::new();
    for l in &lines {
        match l.verdict.as_str() {
            "GenError" => r.generation_failures += 1,
            "Consistent" => r.consistent += 1,
            "InsufficientPanel" => r.insufficient_panel += 1,
            "CF" => r.cf += 1,
            "RF" => r.rf += 1,
            "UO" => r.uo += 1,
            _ => {}
        }
        r.ties += u64::from(l.tie);
        if l.record().is_some() {
            sizes.insert(l.binary_id.clone().unwrap(), l.size);
        }
    }
    let mut reports = Vec::new();
    for (id, size) in &sizes {
        let p = blame_path(&layout, id);
        if let Ok(text) = fs::read(&p) {
            let b: BlameReport =
                serde_json::from_slice(&text).map_err(|e| CliError::Campaign(format!("{}: {e}", p.display())))?;
            r.located += 1;
            if b.heisenbug {
                r.heisenbugs += 1;
            } else {
                reports.push((b, *size));
            }
        } else if layout.blame().join(format!("{id}.err")).is_file() {
            r.locate_failures += 1;
        } else {
            r.unlocated += 1;
        }
    }
    r.unique = dedup_reports(&reports);
    let p = out_dir.join("report.json");
    fs::write(&p, serde_json::to_vec_pretty(&r).unwrap()).map_err(io_err(&p))?;
    Ok(r)
}
