//! `jdlg`: runs the splitting, semigroup and characterization routines on
//! JSON inputs or built-in examples and writes JSON, CSV or text reports.
//!
//! Exit codes: 0 success, 2 not admissible (several minimal ideals or
//! idempotents), 3 not power-bounded, 4 no convergence or undecided,
//! 5 malformed input.

mod commands;
mod failure;
mod settings;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use failure::{Failure, Outcome, MALFORMED};
use settings::{CommandArgs, CommandKind, CommonArgs, MethodChoice, Settings, SourceChoice, PROFILE_ENV};

#[derive(Parser)]
#[command(name = "jdlg", version, about = "Reversible / almost weakly stable splittings of operator semigroups")]
#[command(after_help = "The default tolerance profile can be set with JDLG_TOL_PROFILE.")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Minimal ideals, kernel and admissibility of a finite semigroup (Cayley table JSON).
    AnalyzeSemigroup,
    /// Split a representation into its reversible and almost weakly stable parts.
    Decompose {
        #[arg(long, value_enum)]
        method: Option<MethodChoice>,
        /// Compare every computed split with the others (and the known answer for catalog entries).
        #[arg(long)]
        reconcile: bool,
    },
    /// Run the characterization battery on one vector, or on every split basis vector.
    Characterize {
        /// `e<i>`, `[[re, im], ...]` or `[x, ...]`.
        #[arg(long, value_name = "VECTOR")]
        vector: Option<String>,
        /// Also write `avg ‖π_s ξ‖²` against the box index as CSV.
        #[arg(long, value_name = "FILE")]
        curves: Option<PathBuf>,
    },
    /// Invariant inner product and irreducible unitary systems on the reversible part.
    UnitaryStructure {
        #[arg(long, value_enum)]
        source: Option<SourceChoice>,
    },
    /// Exact Følner averages and orbit data for the non-admissible semigroup example.
    Counterexample {
        /// Base point `m,n` with `n ≥ 1`.
        #[arg(long, value_name = "M,N")]
        base: Option<String>,
    },
    /// Statistics of the closure ε-net and its minimal idempotent.
    Closure,
    /// Names accepted by `--catalog`.
    ListCatalog,
}

impl Command {
    fn split(self) -> (CommandKind, CommandArgs) {
        let mut args = CommandArgs::default();
        let kind = match self {
            Command::AnalyzeSemigroup => CommandKind::AnalyzeSemigroup,
            Command::Decompose { method, reconcile } => {
                args.method = method;
                args.reconcile = reconcile;
                CommandKind::Decompose
            }
            Command::Characterize { vector, curves } => {
                args.vector = vector;
                args.curves = curves;
                CommandKind::Characterize
            }
            Command::UnitaryStructure { source } => {
                args.source = source;
                CommandKind::UnitaryStructure
            }
            Command::Counterexample { base } => {
                args.base = base;
                CommandKind::Counterexample
            }
            Command::Closure => CommandKind::Closure,
            Command::ListCatalog => CommandKind::ListCatalog,
        };
        (kind, args)
    }
}

fn write_file(path: &PathBuf, body: &str) -> Outcome<()> {
    std::fs::write(path, body).map_err(|e| Failure::malformed(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: Cli) -> Outcome<u8> {
    let (kind, args) = match cli.command {
        Some(c) => {
            let (k, a) = c.split();
            (Some(k), a)
        }
        None => (None, CommandArgs::default()),
    };
    let env_profile = std::env::var(PROFILE_ENV).ok().filter(|s| !s.is_empty());
    let settings = Settings::resolve(kind, cli.common, args, env_profile)?;
    let report = commands::run(&settings)?;
    let body = report.render(settings.format)?;
    match &settings.output {
        Some(path) => write_file(path, &body)?,
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(body.as_bytes()).and_then(|_| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    return Err(Failure::malformed(format!("cannot write to stdout: {e}")));
                }
                _ => {}
            }
        }
    }
    for (path, body) in &report.extra {
        write_file(path, body)?;
    }
    Ok(report.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap's own usage errors would otherwise exit 2, which means "not admissible" here
            return ExitCode::from(if e.use_stderr() { MALFORMED } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
