use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use macroreal::anticommute_family;
use macroreal::formats::{family_to_document, write_json};
use macroreal::parallel::{env_threads, with_threads, THREADS_ENV};
use macroreal::render::render_tree;
use macroreal::{run_scenario, verify_all, ScenarioConfig};
use macroreal_core::anticommute::MAX_VERIFIED_K;
use macroreal_core::bell::settings_budget;

#[derive(Parser)]
#[command(
    name = "macroreal",
    version,
    about = "Local-realism checks for macroscopic Bell scenarios"
)]
#[command(after_help = format!("Set {THREADS_ENV}=<n> to fix the number of worker threads."))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario config and print its report table.
    Run {
        config: PathBuf,
        /// JSON report path (defaults to the config's `output`, if any).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every shipped acceptance config.
    VerifyAll {
        /// Use this seed for every config instead of the shipped ones.
        #[arg(long)]
        seed: Option<u64>,
        /// JSON suite report path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw an anti-commuting operator tree.
    Tree {
        #[arg(long)]
        k: usize,
        /// Folded construction with balanced region sizes.
        #[arg(long)]
        folded: bool,
        /// Also write the family as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Settings budget floor(n / m) per region.
    Budget {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command) -> Result<bool> {
    let threads = env_threads()?;
    match command {
        Command::Run { config, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            let report = with_threads(threads, || run_scenario(&cfg))??;
            print!("{}", report.table());
            if let Some(path) = out.or_else(|| cfg.output.as_ref().map(PathBuf::from)) {
                std::fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(report.passed)
        }
        Command::VerifyAll { seed, out } => {
            let suite = with_threads(threads, || {
                verify_all(seed, |r| {
                    println!(
                        "{:<32} {}  {:>8.2}s",
                        r.name,
                        if r.passed { "PASS" } else { "FAIL" },
                        r.wall_clock_seconds
                    );
                    for c in r.checks.iter().filter(|c| !c.passed) {
                        println!("    failed {}: {}", c.name, c.detail);
                    }
                })
            })??;
            println!("overall: {}", if suite.passed { "PASS" } else { "FAIL" });
            if let Some(path) = out {
                write_json(&path, &suite)?;
            }
            Ok(suite.passed)
        }
        Command::Tree { k, folded, json } => {
            let family = anticommute_family(k, folded)?;
            print!("{}", render_tree(&family));
            println!("regions: {:?}", family.region_sizes());
            let verified = if k <= MAX_VERIFIED_K {
                let ok = family.verify();
                println!("sequences: {}, anti-commuting: {ok}", family.len());
                ok
            } else {
                println!(
                    "sequences: {}, pairwise check skipped above k = {MAX_VERIFIED_K}",
                    family.len()
                );
                true
            };
            if let Some(path) = json {
                write_json(&path, &family_to_document(&family))?;
            }
            Ok(verified)
        }
        Command::Budget { n, m } => {
            println!("{}", settings_budget(n, m)?);
            Ok(true)
        }
    }
}
