//! Job-document driver for `growth-tight`.
//!
//! A job is a JSON object with `"version": 1`, a `command` and the fields that
//! command reads. [`execute`] is the whole program minus process exit.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod job;
pub mod run;
pub mod table;

use std::fs;
use std::io::Read;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use growth_tight::quotients::Verdict;

pub use job::{parse_job, Command, JobSpec, Overrides};
pub use run::{run, Report};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{context}: {source}")]
    Core {
        context: String,
        source: growth_tight::Error,
    },
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn core(context: impl Into<String>, source: growth_tight::Error) -> Self {
        CliError::Core {
            context: context.into(),
            source,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Parse(msg.into())
    }

    /// 2 for unreadable or invalid input, 3 for an exhausted budget, 4 for a broken invariant.
    pub fn exit_code(&self) -> i32 {
        use growth_tight::Error as E;
        match self {
            CliError::Parse(_) | CliError::Io(_) => 2,
            CliError::Core { source, .. } => match source {
                E::Malformed { .. } | E::AlphabetMismatch { .. } | E::InvalidInput(_) => 2,
                E::ResourceLimit(_) => 3,
                E::Invariant(_) => 4,
            },
        }
    }
}

pub fn verdict_name(v: Verdict) -> String {
    match v {
        Verdict::Tight => "tight",
        Verdict::NotTight => "not-tight",
        Verdict::Inconclusive => "inconclusive",
    }
    .to_string()
}

#[derive(Debug, Parser)]
#[command(name = "growth-tight", version, about = "Growth exponents of free groups, products and quotients")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Sphere and ball counts of a free group or forbidden-factor language
    Count(JobArgs),
    /// Spectral and Fekete brackets for the growth exponent of a language
    Exponent(JobArgs),
    /// Build and export the automaton avoiding a set of factors
    Avoid(JobArgs),
    /// The Ĝ language of an element: automaton, exponent and gap to the free group
    Ghat(JobArgs),
    /// Ball counts of an L^p product checked against the duality formula
    Product(JobArgs),
    /// Minimal section and coset counts of a product quotient
    Quotient(JobArgs),
    /// Compare growth of a product with a quotient and give a verdict
    Tightness(JobArgs),
    /// Projection axioms on a family of quasi-axes
    Axioms(JobArgs),
    /// Run a document using its own command field, e.g. the spec embedded in a report
    Run(JobArgs),
}

#[derive(Debug, Args)]
pub struct JobArgs {
    /// Job document; `-` reads standard input. A report file is accepted and its spec is re-run.
    pub spec: String,
    /// Write the JSON report here instead of standard output
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Print an aligned-column table instead of JSON
    #[arg(long)]
    pub table: bool,
    /// Write per-radius counts as CSV
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub radius: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub max_words: Option<u64>,
    #[arg(long)]
    pub max_radius: Option<usize>,
}

impl Sub {
    fn split(&self) -> (Option<Command>, &JobArgs) {
        match self {
            Sub::Count(a) => (Some(Command::Count), a),
            Sub::Exponent(a) => (Some(Command::Exponent), a),
            Sub::Avoid(a) => (Some(Command::Avoid), a),
            Sub::Ghat(a) => (Some(Command::Ghat), a),
            Sub::Product(a) => (Some(Command::Product), a),
            Sub::Quotient(a) => (Some(Command::Quotient), a),
            Sub::Tightness(a) => (Some(Command::Tightness), a),
            Sub::Axioms(a) => (Some(Command::Axioms), a),
            Sub::Run(a) => (None, a),
        }
    }
}

fn read_input(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Io(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))
    }
}

/// Unwraps a report into its embedded spec; plain job documents pass through.
fn job_text(text: &str) -> Result<String, CliError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("job document: {e}")))?;
    match value.get("spec") {
        Some(spec) if value.get("result").is_some() => Ok(spec.to_string()),
        _ => Ok(text.to_string()),
    }
}

/// Parses, resolves and runs a job document.
pub fn run_text(text: &str, command: Option<Command>, overrides: &Overrides) -> Result<Report, CliError> {
    let job = parse_job(&job_text(text)?, command)?.resolve(overrides)?;
    run(&job)
}

/// Runs the parsed command line, returning what goes to standard output.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let (command, args) = cli.command.split();
    let overrides = Overrides {
        radius: args.radius,
        tolerance: args.tolerance,
        max_words: args.max_words,
        max_radius: args.max_radius,
    };
    let report = run_text(&read_input(&args.spec)?, command, &overrides)?;
    if let Some(path) = &args.csv {
        let counts = report.counts().ok_or_else(|| {
            CliError::invalid(format!("{} produces no per-radius counts", report.spec.command.name()))
        })?;
        fs::write(path, counts.to_csv()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    let json = report.to_json();
    let mut stdout = String::new();
    match &args.output {
        Some(path) => fs::write(path, &json).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None if !args.table => stdout = json,
        None => {}
    }
    if args.table {
        stdout = table::render(&report);
    }
    Ok(stdout)
}
