//! The `regionfj` command-line interface.
//!
//! One subcommand, `analyze`, drives the whole pipeline: parse, infer,
//! optionally re-check, and print a report. Results go to stdout,
//! diagnostics to stderr, and the exit code states what happened:
//!
//! | code | meaning                                             |
//! |------|-----------------------------------------------------|
//! | 0    | success (also `--help` / `--version`)               |
//! | 1    | unreadable input, syntax/validation errors, bad flags |
//! | 2    | `--check` found the inferred table inconsistent     |
//! | 3    | an iteration or context cap was exceeded            |

use std::ffi::OsString;
use std::io::IsTerminal;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::inference::{analyze_with, AnalysisError, Options};
use crate::report::{Report, Sections};
use crate::syntax::parse_program;

#[derive(Parser, Debug)]
#[command(
    name = "regionfj",
    version,
    about = "Region type inference for a small class-based object language"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Infer a program's region class table from its source file.
    Analyze(AnalyzeArgs),
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Source file to analyze.
    file: PathBuf,
    /// Which results to print.
    #[arg(long, value_enum, default_value_t = Emit::Types)]
    emit: Emit,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Re-derive every method row with the declarative checker and fail if
    /// anything is not covered.
    #[arg(long)]
    check: bool,
    /// Safety cap on fixed-point passes.
    #[arg(long = "max-iter", default_value_t = 10_000)]
    max_iter: usize,
    /// Cap on calling contexts enumerated per class-table pass.
    #[arg(long = "max-contexts", default_value_t = 100_000)]
    max_contexts: usize,
    /// Include instrumentation counters in the report.
    #[arg(long)]
    stats: bool,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq, Debug)]
enum Emit {
    /// The inferred class table.
    Types,
    /// The per-method summaries.
    Summaries,
    /// Both.
    All,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq, Debug)]
enum Format {
    Text,
    Json,
}

/// True when `stream` may be styled: it is a terminal and `REGIONFJ_COLOR`
/// is not set to `0`.
fn styled(stream_is_terminal: bool) -> bool {
    stream_is_terminal && std::env::var_os("REGIONFJ_COLOR").is_none_or(|v| v != "0")
}

fn bold(s: &str) -> String {
    format!("\x1b[1m{s}\x1b[0m")
}

fn red(s: &str) -> String {
    format!("\x1b[31m{s}\x1b[0m")
}

fn error_line(message: &str) {
    if styled(std::io::stderr().is_terminal()) {
        eprintln!("{}", red(message));
    } else {
        eprintln!("{message}");
    }
}

/// Runs the CLI on the given argument list and returns the process exit
/// code. `main` is a one-line wrapper; tests call this directly.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprint!("{e}");
            return 1;
        }
    };
    match cli.command {
        Command::Analyze(args) => run_analyze(&args),
    }
}

fn run_analyze(args: &AnalyzeArgs) -> i32 {
    let path = args.file.display();
    let source = match std::fs::read_to_string(&args.file) {
        Ok(source) => source,
        Err(e) => {
            error_line(&format!("{path}: {e}"));
            return 1;
        }
    };

    let program = match parse_program(&source) {
        Ok(program) => program,
        Err(diagnostics) => {
            for d in diagnostics {
                error_line(&format!("{path}:{d}"));
            }
            return 1;
        }
    };

    let options = Options { max_iterations: args.max_iter, max_contexts: args.max_contexts };
    let analysis = match analyze_with(&program, &options) {
        Ok(analysis) => analysis,
        Err(e) => {
            error_line(&format!("{path}: {e}"));
            return match e {
                AnalysisError::SummaryIterationCap(_)
                | AnalysisError::TableIterationCap(_)
                | AnalysisError::ContextCap(_) => 3,
                AnalysisError::MissingSummary { .. } => 1,
            };
        }
    };

    let sections = Sections {
        tables: matches!(args.emit, Emit::Types | Emit::All),
        summaries: matches!(args.emit, Emit::Summaries | Emit::All),
        stats: args.stats,
    };
    let report = Report::build(&analysis, sections);
    match args.format {
        Format::Json => println!("{}", report.to_json()),
        Format::Text => {
            let text = if styled(std::io::stdout().is_terminal()) {
                report.to_text(&|s: &str| bold(s))
            } else {
                report.to_text(&|s: &str| s.to_string())
            };
            print!("{text}");
        }
    }

    if args.check {
        let findings = analysis.check();
        if !findings.is_empty() {
            for finding in &findings {
                error_line(&format!("check: {finding}"));
            }
            return 2;
        }
    }
    0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn help_and_version_succeed() {
        assert_eq!(run(["regionfj", "--help"]), 0);
        assert_eq!(run(["regionfj", "--version"]), 0);
        assert_eq!(run(["regionfj", "analyze", "--help"]), 0);
    }

    #[test]
    fn unknown_flags_and_missing_args_fail_with_one() {
        assert_eq!(run(["regionfj", "analyze"]), 1);
        assert_eq!(run(["regionfj", "analyze", "x.fj", "--no-such-flag"]), 1);
        assert_eq!(run(["regionfj", "frobnicate"]), 1);
    }

    #[test]
    fn unreadable_files_fail_with_one() {
        assert_eq!(run(["regionfj", "analyze", "/no/such/file.fj"]), 1);
    }
}
