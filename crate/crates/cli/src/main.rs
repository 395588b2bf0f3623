//! `arsim`: run scenarios, check properties, explore small instances.
//!
//! Exit status: 0 pass, 1 fail or counterexample, 2 usage or validation error.
//! `AR_SIM_SEED` overrides the scenario seed when set.

mod commands;
mod render;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "arsim", version, about = "Auditable restoration simulator and checker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Property {
    #[value(name = "s1-convergence")]
    S1Convergence,
    #[value(name = "two-phase")]
    TwoPhase,
    #[value(name = "closure-T")]
    ClosureT,
    #[value(name = "notify-lemma")]
    NotifyLemma,
    Unison,
    #[value(name = "as-window")]
    AsWindow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Target {
    #[value(name = "S1")]
    S1,
    #[value(name = "S2")]
    S2,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a scenario and print its step log.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Write the full trace (JSON) to this file.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Check one property of a scenario.
    Check {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum)]
        property: Property,
        /// Ticks ignored by the unison window check.
        #[arg(long, default_value_t = 1000)]
        burn_in: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Explore every behaviour of a small instance.
    Explore {
        #[arg(long)]
        scenario: PathBuf,
        /// S1: every fair path reaches S1. S2: every fair path passes through S2 before S1.
        #[arg(long, value_enum, ignore_case = true)]
        target: Target,
        #[arg(long, default_value_t = 1_000_000)]
        max_states: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, format) = match cli.command {
        Command::Run {
            scenario,
            trace_out,
            format,
        } => (commands::run(&scenario, trace_out.as_deref()), format),
        Command::Check {
            scenario,
            property,
            burn_in,
            format,
        } => (commands::check(&scenario, property, burn_in), format),
        Command::Explore {
            scenario,
            target,
            max_states,
            format,
        } => (commands::explore(&scenario, target, max_states), format),
    };
    match result {
        Ok(outcome) => {
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&outcome.value).expect("JSON value serializes"),
                Format::Text => render::text(&outcome.value),
            };
            // A closed pipe (e.g. `| head`) is not an error worth a panic.
            let _ = writeln!(std::io::stdout(), "{text}");
            ExitCode::from(if outcome.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("arsim: {e}");
            ExitCode::from(2)
        }
    }
}
