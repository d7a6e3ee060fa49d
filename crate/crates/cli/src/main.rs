use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Kurosh and Higgins decompositions of finite-index subgroups of free
/// products of finite groups.
///
/// Exit codes: 0 success, 1 verification failure, 2 a bound was exceeded,
/// 3 invalid input.
#[derive(Debug, Parser)]
#[command(name = "higgins", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct BoundFlags {
    /// Maximum number of cosets during completion [default: 10000]
    #[arg(long)]
    pub max_cosets: Option<usize>,
    /// Maximum B-image length in the Θ-trivial path search [default: 12]
    #[arg(long)]
    pub tree_word_bound: Option<usize>,
    /// Additional spanning-tree attempts after the first [default: 8]
    #[arg(long)]
    pub tree_retries: Option<usize>,
    /// Maximum alternating length in the bounded freeness check [default: 8]
    #[arg(long)]
    pub free_test_len: Option<usize>,
    /// Seed for sampled checks
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decompose H = ∗ H_λ with Θ-trivial representatives, write the
    /// certificate and verify it
    Decompose {
        input: PathBuf,
        /// Certificate output path (default: stdout)
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the verification report as JSON
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also write the coset graph of H in DOT format
        #[arg(long)]
        dot: Option<PathBuf>,
        #[command(flatten)]
        bounds: BoundFlags,
    },
    /// Kurosh decomposition of H (B and theta are ignored)
    Kurosh {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        bounds: BoundFlags,
    },
    /// Verify a certificate against a system file
    Verify {
        system: PathBuf,
        certificate: PathBuf,
        /// Report output path (default: stdout)
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Print the report as JSON instead of text
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        bounds: BoundFlags,
    },
    /// Coset graph of H in DOT format
    Graph {
        input: PathBuf,
        /// Print the folded core instead of the completed graph
        #[arg(long)]
        core: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Same as --output
        #[arg(long)]
        dot: Option<PathBuf>,
        #[command(flatten)]
        bounds: BoundFlags,
    },
    /// Normal form of a word in G
    Normalform { system: PathBuf, word: String },
    /// Whether a word lies in H
    Member { system: PathBuf, word: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Decompose {
            input,
            output,
            report,
            dot,
            bounds,
        } => commands::decompose(&input, output.as_deref(), report.as_deref(), dot.as_deref(), bounds),
        Command::Kurosh { input, output, bounds } => commands::kurosh(&input, output.as_deref(), bounds),
        Command::Verify {
            system,
            certificate,
            output,
            json,
            bounds,
        } => commands::verify(&system, &certificate, output.as_deref(), json, bounds),
        Command::Graph {
            input,
            core,
            output,
            dot,
            bounds,
        } => commands::graph(&input, core, output.or(dot).as_deref(), bounds),
        Command::Normalform { system, word } => commands::normalform(&system, &word),
        Command::Member { system, word } => commands::member(&system, &word),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
