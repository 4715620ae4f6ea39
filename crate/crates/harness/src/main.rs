use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rekanren::laws::{check_laws, LawConfig, Mutation, DEFAULT_SEED};
use rekanren::scenario::{self, RunOptions};
use rekanren::{bench, export};

#[derive(Parser)]
#[command(name = "rekanren", version, about = "Run scenarios, check update laws and measure view updates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MutationArg {
    SkipClassResolution,
}

#[derive(Subcommand)]
enum Command {
    /// Replay scenario files and check their expectations.
    Run {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        /// Compare every step against a fresh mount.
        #[arg(long)]
        check_oracle: bool,
        /// Write the op log (one JSON record per line) to this file, or `-` for stdout.
        #[arg(long, value_name = "FILE")]
        emit_ops: Option<PathBuf>,
        /// Include view-tree dumps in the report.
        #[arg(long)]
        dump_tree: bool,
        /// Include the snapshot of every step in the report.
        #[arg(long)]
        snapshot_every_step: bool,
        /// Rewrite snapshot files from the current output.
        #[arg(long)]
        bless: bool,
        #[arg(long)]
        json: bool,
    },
    /// Check the update laws on random states.
    Laws {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        cases: u32,
        /// Run against a deliberately broken patch builder.
        #[arg(long, value_enum)]
        mutate: Option<MutationArg>,
        #[arg(long)]
        json: bool,
    },
    /// Count view changes for a head insertion under membero and imembero.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = [64, 128])]
        sizes: Vec<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Write a model as JSON: the final model of a scenario, or a model file
    /// read back through normalization.
    Export {
        #[arg(long, conflicts_with = "model", required_unless_present = "model")]
        scenario: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Run { scenarios, check_oracle, emit_ops, dump_tree, snapshot_every_step, bless, json } => {
            let opts = RunOptions { check_oracle, snapshot_every_step, dump_tree, bless };
            let mut sink: Option<Box<dyn Write>> = match &emit_ops {
                Some(p) if p.as_os_str() == "-" => Some(Box::new(std::io::stdout())),
                Some(p) => Some(Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)),
                None => None,
            };
            let quiet = emit_ops.as_ref().is_some_and(|p| p.as_os_str() == "-");
            let mut all_ok = true;
            let mut reports = Vec::new();
            for path in &scenarios {
                let report = scenario::run_file(path, &opts, sink.as_mut().map(|b| &mut **b as &mut dyn Write))?;
                all_ok &= report.passed();
                if json {
                    reports.push(report.to_json());
                } else if quiet {
                    eprint!("{}", report.to_text());
                } else {
                    print!("{}", report.to_text());
                    if dump_tree || snapshot_every_step {
                        for s in &report.steps {
                            if let Some(snap) = &s.snapshot {
                                println!("  snapshot {}: {}", s.index, snap);
                            }
                            for t in s.trees.iter().flatten() {
                                println!("  tree {}: {}", s.index, serde_json::to_string_pretty(t)?);
                            }
                        }
                    }
                }
            }
            if json {
                let out = serde_json::to_string_pretty(&reports)?;
                if quiet {
                    eprintln!("{}", out);
                } else {
                    println!("{}", out);
                }
            }
            Ok(all_ok)
        }
        Command::Laws { seed, cases, mutate, json } => {
            let mutation = mutate.map(|MutationArg::SkipClassResolution| Mutation::SkipClassResolution);
            let report = check_laws(&LawConfig { seed, cases, mutation });
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", report.to_text());
            }
            Ok(report.violations() == 0)
        }
        Command::Bench { sizes, json } => {
            if sizes.contains(&0) {
                bail!("sizes must be positive");
            }
            let rows: Vec<_> = sizes.iter().map(|n| bench::head_insert(*n)).collect();
            if json {
                println!("{}", serde_json::to_string_pretty(&rows)?);
            } else {
                print!("{}", bench::to_text(&rows));
            }
            Ok(true)
        }
        Command::Export { scenario: scn, model, out } => {
            let sys = match (scn, model) {
                (Some(p), _) => {
                    let s = scenario::load(&p)?;
                    let (report, sys) = scenario::run_to_state(&s, &p, &RunOptions::default())?;
                    if !report.passed() {
                        eprint!("{}", report.to_text());
                    }
                    sys
                }
                (None, Some(p)) => export::import_model(&p)?,
                (None, None) => unreachable!("clap requires one source"),
            };
            match out {
                Some(p) => export::export_model(&sys, &p)?,
                None => print!("{}", export::model_json(&sys)?),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(2)
        }
    }
}
