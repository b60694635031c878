//! `dlsched`: solve, sweep and analyse divisible load schedules from JSON
//! configs.
//!
//! Exit codes: 0 ok, 1 input error, 2 infeasible, 3 no recommendation,
//! 4 simulation found violations.

mod csv;
mod io;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use dlsched::analysis::{DEFAULT_GRADIENT_THRESHOLD, DEFAULT_SPEEDUP_MODE, DEFAULT_TRADEOFF_MODE};
use dlsched::{Mode, Recommendation, TradeoffQuery};

use crate::io::{ConfigFile, ResultFile};

const EXIT_INPUT: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_NO_SOLUTION: u8 = 3;
const EXIT_VIOLATIONS: u8 = 4;

#[derive(Parser)]
#[command(name = "dlsched", version, about = "Divisible load scheduling for multi-source systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    FrontEnd,
    StoreForward,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::FrontEnd => Mode::FrontEnd,
            ModeArg::StoreForward => Mode::StoreForward,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and write the result document.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finish time and cost over source/processor counts.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        sources: Vec<usize>,
        #[arg(long)]
        max_processors: usize,
        /// Defaults to the config's job size.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        jobs: Vec<f64>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        csv: PathBuf,
    },
    /// Speedup of several sources over one.
    Speedup {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        sources: Vec<usize>,
        #[arg(long)]
        max_processors: usize,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        csv: PathBuf,
    },
    /// Recommend a processor count under cost and/or time budgets.
    Tradeoff {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        cost_budget: Option<f64>,
        #[arg(long)]
        time_budget: Option<f64>,
        #[arg(long)]
        gradient_threshold: Option<f64>,
        #[arg(long)]
        max_processors: usize,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a result document and check it for violations.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        result: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<dlsched::Error>() {
        Some(dlsched::Error::InfeasibleSchedule(_)) => EXIT_INFEASIBLE,
        _ => EXIT_INPUT,
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Solve { config, mode, out } => {
            let cfg = ConfigFile::load(&config)?.system(mode.map(Into::into), Mode::FrontEnd)?;
            let result = dlsched::solve(&cfg)?;
            for w in &result.warnings {
                eprintln!("warning: {w:?}");
            }
            emit(&to_json(&ResultFile::from_solve(&cfg, result)?)?, out.as_deref())?;
            Ok(0)
        }
        Command::Sweep { config, sources, max_processors, jobs, mode, csv } => {
            let cfg = ConfigFile::load(&config)?.system(mode.map(Into::into), Mode::FrontEnd)?;
            let jobs = if jobs.is_empty() { vec![cfg.job] } else { jobs };
            let counts: Vec<usize> = (1..=max_processors).collect();
            let points = dlsched::sweep(&cfg, &sources, &counts, &jobs)?;
            emit(&csv::sweep_csv(&points), Some(&csv))?;
            Ok(0)
        }
        Command::Speedup { config, sources, max_processors, mode, csv } => {
            let cfg = ConfigFile::load(&config)?.system(mode.map(Into::into), DEFAULT_SPEEDUP_MODE)?;
            let points = dlsched::speedup_curve(&cfg, &sources, max_processors)?;
            emit(&csv::speedup_csv(&points), Some(&csv))?;
            Ok(0)
        }
        Command::Tradeoff {
            config,
            cost_budget,
            time_budget,
            gradient_threshold,
            max_processors,
            mode,
            out,
        } => {
            let file = ConfigFile::load(&config)?;
            let cfg = file.system(mode.map(Into::into), DEFAULT_TRADEOFF_MODE)?;
            let mut query = TradeoffQuery::new(cost_budget, time_budget);
            query.gradient_threshold = gradient_threshold
                .or(file.options.gradient_threshold)
                .unwrap_or(DEFAULT_GRADIENT_THRESHOLD);
            let report = dlsched::tradeoff(&cfg, &query, max_processors)?;
            for note in &report.notes {
                eprintln!("note: {note}");
            }
            emit(&to_json(&report)?, out.as_deref())?;
            Ok(match report.recommendation {
                Recommendation::Processors { .. } => 0,
                Recommendation::NoSolution { reason } => {
                    eprintln!("no recommendation: {reason}");
                    EXIT_NO_SOLUTION
                }
            })
        }
        Command::Simulate { config, result } => {
            let doc = ResultFile::load(&result)?;
            let cfg = ConfigFile::load(&config)?.system(Some(doc.mode), doc.mode)?;
            let n = doc.beta.len();
            let m = doc.beta.first().map_or(0, Vec::len);
            if (n, m) != (cfg.n_sources(), cfg.n_processors()) {
                anyhow::bail!(
                    "result is {n}x{m} but the config has {} sources and {} processors",
                    cfg.n_sources(),
                    cfg.n_processors()
                );
            }
            let solved = doc.into_solve_result()?;
            let report = dlsched::simulate::simulate(&cfg, &solved)?;
            println!("mode: {}", cfg.mode);
            println!("claimed_finish: {}", solved.t_f);
            println!("achieved_finish: {}", report.achieved_finish);
            println!("violations: {}", report.violations.len());
            // Report node indices in the caller's order.
            let perms = &solved.permutations;
            for v in &report.violations {
                let mut v = v.clone();
                v.source = v.source.map(|i| perms.sources.original(i));
                v.processor = v.processor.map(|j| perms.processors.original(j));
                println!("  {v}");
            }
            Ok(if report.is_clean() { 0 } else { EXIT_VIOLATIONS })
        }
    }
}
