use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use timedsess::cli::{self, Report, RunOpts, BAD_INPUT};
use timedsess::semantics::{CheckBudget, Mode};
use timedsess::syntax::{Aliases, SpecFile};

/// Type check, run and certify timed session-typed processes.
///
/// Exit status: 0 pass, 1 fail, 2 inconclusive, 3 bad input or usage.
#[derive(Parser)]
#[command(name = "timedsess", version)]
struct Cli {
    /// Last instant examined by runs and membership checks [default: 50,
    /// or the run directive's own horizon].
    #[arg(long, global = true, env = "TIMEDSESS_HORIZON")]
    horizon: Option<u64>,
    /// Reserved; every command is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Star,
    Nostar,
}

#[derive(Subcommand)]
enum Cmd {
    /// Type check every process in a spec file.
    Check {
        file: PathBuf,
        /// Print each derivation.
        #[arg(long)]
        dump: bool,
    },
    /// Execute a run directive with the earliest-enabled scheduler.
    Run {
        file: PathBuf,
        /// Index or target name of the directive.
        #[arg(long)]
        run: Option<String>,
        /// Channel the root provides.
        #[arg(long)]
        channel: Option<String>,
        /// Write the executed run as a certificate.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Print the certificate of a process's witness.
    Witness {
        file: PathBuf,
        #[arg(long)]
        proc: Option<String>,
        /// Values for the process's time variables, as `t0=3,t1=5`.
        #[arg(long)]
        at: Option<String>,
    },
    /// Re-check a certificate.
    Validate {
        cert: PathBuf,
        #[arg(long, default_value_t = 3)]
        probes: u64,
    },
    /// Check a certified trajectory against a type, or, given a spec file,
    /// every process's witness.
    Semcheck {
        input: PathBuf,
        /// Type to check against; required for certificates.
        #[arg(long = "type")]
        ty: Option<String>,
        /// Spec file whose type aliases `--type` may use.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        time: Option<u64>,
        #[arg(long, value_enum, default_value = "nostar")]
        mode: ModeArg,
        #[arg(long)]
        proc: Option<String>,
    },
    /// Decide `A |> B @ T` (cut) or `A <| B @ T` (forward).
    Retype {
        query: String,
        #[arg(long)]
        spec: Option<PathBuf>,
    },
}

const DEFAULT_HORIZON: u64 = 50;

fn read(p: &Path) -> Result<String, Report> {
    std::fs::read_to_string(p).map_err(|e| Report { code: BAD_INPUT, out: format!("error: {}: {e}\n", p.display()), artifact: None })
}

fn aliases(p: Option<&Path>) -> Result<Aliases, Report> {
    match p {
        None => Ok(Aliases::new()),
        Some(p) => SpecFile::parse(&read(p)?).map(|s| s.aliases()).map_err(|e| Report {
            code: BAD_INPUT,
            out: format!("error: {}: parse error at {e}\n", p.display()),
            artifact: None,
        }),
    }
}

fn dispatch(cli: Cli) -> Result<Report, Report> {
    let budget = CheckBudget::with_horizon(cli.horizon.unwrap_or(DEFAULT_HORIZON));
    Ok(match cli.cmd {
        Cmd::Check { file, dump } => cli::check(&read(&file)?, dump),
        Cmd::Run { file, run, channel, trace } => {
            let opts = RunOpts { run, horizon: cli.horizon, channel, trace: trace.is_some() };
            let r = cli::run(&read(&file)?, &opts, DEFAULT_HORIZON);
            if let (Some(path), Some(body)) = (trace, &r.artifact) {
                std::fs::write(&path, body).map_err(|e| Report {
                    code: BAD_INPUT,
                    out: format!("error: {}: {e}\n", path.display()),
                    artifact: None,
                })?;
            }
            r
        }
        Cmd::Witness { file, proc, at } => {
            let val = match at.as_deref().map(cli::parse_valuation).transpose() {
                Ok(v) => v,
                Err(e) => return Err(Report { code: BAD_INPUT, out: format!("error: {e}\n"), artifact: None }),
            };
            cli::witness(&read(&file)?, proc.as_deref(), val.as_ref(), &budget)
        }
        Cmd::Validate { cert, probes } => cli::validate(&read(&cert)?, probes),
        Cmd::Semcheck { input, ty, spec, time, mode, proc } => {
            let src = read(&input)?;
            match ty {
                Some(ty) => {
                    let mode = match mode {
                        ModeArg::Star => Mode::Star,
                        ModeArg::Nostar => Mode::NoStar,
                    };
                    cli::semcheck(&src, &ty, &aliases(spec.as_deref())?, time, mode, &budget)
                }
                None => cli::semcheck_spec(&src, proc.as_deref(), &budget),
            }
        }
        Cmd::Retype { query, spec } => cli::retype(&query, &aliases(spec.as_deref())?, &budget),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { BAD_INPUT as u8 } else { 0 });
        }
    };
    let r = dispatch(cli).unwrap_or_else(|r| r);
    if r.code == BAD_INPUT {
        eprint!("{}", r.out);
    } else {
        print!("{}", r.out);
    }
    ExitCode::from(r.code as u8)
}
