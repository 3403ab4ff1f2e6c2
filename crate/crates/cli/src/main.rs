use std::path::PathBuf;
use std::process::exit;
use std::time::Duration;

use clap::{Parser, Subcommand};
use wdiff_cli::campaign::{cmd_corpus_build, cmd_fuzz, cmd_locate, cmd_report, CampaignConfig, CliError};
use wdiff_core::harness::adapter::self_dir;
use wdiff_core::mutator::MutationPlan;

#[derive(Parser)]
#[command(name = "wdiff", version, about = "Differential testing for WebAssembly runtimes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Harvest a sub-tree corpus from seed binaries into OUT/corpus.
    CorpusBuild { seed_dir: PathBuf, out_dir: PathBuf },
    /// Generate, run and compare binaries; resumes an existing OUT.
    Fuzz {
        #[arg(long)]
        out: PathBuf,
        /// Saved corpus or directory of seed binaries.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Panel file (TOML). Defaults to OUT/adapters.toml, then the built-in panel.
        #[arg(long)]
        adapters: Option<PathBuf>,
        /// Stop once the campaign holds this many binaries.
        #[arg(long)]
        count: Option<u64>,
        /// Stop after this many seconds.
        #[arg(long)]
        duration_secs: Option<u64>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Expected AST mutations per function; 0 disables mutation.
        #[arg(long)]
        ast_budget: Option<f64>,
        #[arg(long)]
        subtrees: Option<usize>,
        #[arg(long)]
        loop_fuel: Option<u32>,
        #[arg(long)]
        no_locate: bool,
    },
    /// Localize one persisted inconsistency (binary id prefix or seq).
    Locate {
        #[arg(long)]
        out: PathBuf,
        record: String,
        #[arg(long)]
        adapters: Option<PathBuf>,
    },
    /// Summarize a campaign.
    Report {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::CorpusBuild { seed_dir, out_dir } => {
            let r = cmd_corpus_build(&seed_dir, &out_dir)?;
            println!(
                "binaries {} (skipped {}), functions {} (skipped {}), roots {}, admitted {}",
                r.binaries, r.binaries_skipped, r.functions, r.functions_skipped, r.roots, r.admitted
            );
            for d in &r.diagnostics {
                eprintln!("skip {}{}: {}", d.source, d.func.map(|f| format!(" func {f}")).unwrap_or_default(), d.reason);
            }
        }
        Cmd::Fuzz {
            out,
            corpus,
            adapters,
            count,
            duration_secs,
            workers,
            seed,
            ast_budget,
            subtrees,
            loop_fuel,
            no_locate,
        } => {
            let mut cfg = CampaignConfig::new(out, self_dir());
            cfg.corpus = corpus;
            cfg.adapters = adapters;
            cfg.count = count;
            cfg.duration = duration_secs.map(Duration::from_secs);
            cfg.workers = workers;
            cfg.base_seed = seed;
            cfg.locate = !no_locate;
            match ast_budget {
                Some(b) if b == 0.0 => cfg.plan = MutationPlan::none(),
                Some(b) => cfg.plan.ast_budget = b,
                None => {}
            }
            if let Some(n) = subtrees {
                cfg.gen.subtrees_per_function = n;
            }
            if loop_fuel.is_some() {
                cfg.gen.loop_fuel = loop_fuel;
            }
            print!("{}", cmd_fuzz(&cfg)?.render());
        }
        Cmd::Locate { out, record, adapters } => {
            let r = cmd_locate(&out, &record, adapters.as_deref(), &self_dir())?;
            println!("{}", serde_json::to_string_pretty(&r).unwrap());
        }
        Cmd::Report { out, json } => {
            let r = cmd_report(&out)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&r).unwrap());
            } else {
                print!("{}", r.render());
            }
        }
    }
    Ok(())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("wdiff: {e}");
        exit(e.exit_code());
    }
}
