use std::io::{IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use abc_core::explorer::{check_property, explore, render_trace, Limits, Outcome};
use abc_core::parser::{parse_spec, Diagnostic};
use abc_core::sim::{simulate, trace_to_json, trace_to_text, Termination};
use abc_core::Program;

const OK: u8 = 0;
const FAILS: u8 = 1;
const INVALID: u8 = 2;
const LIMIT: u8 = 3;
const RUNTIME: u8 = 4;

// Writes to stdout; a closed pipe (`abc ... | head`) ends the process quietly.
macro_rules! out {
    ($($arg:tt)*) => {
        if write!(std::io::stdout(), $($arg)*).is_err() {
            std::process::exit(0);
        }
    };
}

#[derive(Parser)]
#[command(name = "abc", version, about = "Run and verify AbC system specifications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a specification
    Parse { file: PathBuf },
    /// Simulate one random run
    Run {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Build the full state space
    Explore {
        file: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        max_states: usize,
        #[arg(long, default_value_t = usize::MAX, hide_default_value = true)]
        max_depth: usize,
        /// Write the LTS in line-oriented text form
        #[arg(long)]
        export_lts: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Check declared properties
    Check {
        file: PathBuf,
        #[arg(long, conflicts_with = "all", required_unless_present = "all")]
        property: Option<String>,
        #[arg(long)]
        all: bool,
        #[arg(long, default_value_t = 1_000_000)]
        max_states: usize,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

fn color() -> bool {
    std::env::var("ABC_COLOR").map_or(true, |v| v != "0") && std::io::stderr().is_terminal()
}

fn load(file: &PathBuf) -> Result<Program, u8> {
    let name = file.display().to_string();
    let src = std::fs::read_to_string(file).map_err(|e| {
        eprintln!("{name}: {e}");
        INVALID
    })?;
    parse_spec(&src).map(Program::new).map_err(|diags: Vec<Diagnostic>| {
        let color = color();
        for d in &diags {
            eprintln!("{}", d.render(&name, color));
        }
        INVALID
    })
}

fn run(cli: Cli) -> Result<u8, u8> {
    match cli.command {
        Command::Parse { file } => {
            load(&file)?;
            Ok(OK)
        }
        Command::Run {
            file,
            seed,
            max_steps,
            format,
        } => {
            let program = load(&file)?;
            let trace = simulate(&program, seed, max_steps).map_err(|e| {
                eprintln!("error: {e}");
                RUNTIME
            })?;
            let out = match format {
                Format::Json => trace_to_json(&program, &trace),
                Format::Text => trace_to_text(&program, &trace),
            };
            out!("{out}");
            Ok(if trace.termination == Termination::Error {
                RUNTIME
            } else {
                OK
            })
        }
        Command::Explore {
            file,
            max_states,
            max_depth,
            export_lts,
            workers,
        } => {
            let program = load(&file)?;
            let limits = Limits {
                max_states,
                max_depth,
                workers,
            };
            let lts = explore(&program, limits).map_err(|e| {
                eprintln!("error: {e}");
                RUNTIME
            })?;
            out!("states: {}\n", lts.states.len());
            out!("transitions: {}\n", lts.transitions.len());
            out!("truncated: {}\n", lts.truncated);
            if let Some(path) = export_lts {
                std::fs::write(&path, lts.export(&program)).map_err(|e| {
                    eprintln!("{}: {e}", path.display());
                    RUNTIME
                })?;
            }
            Ok(if lts.truncated { LIMIT } else { OK })
        }
        Command::Check {
            file,
            property,
            all,
            max_states,
            workers,
        } => {
            let program = load(&file)?;
            let selected: Vec<_> = if all {
                program.spec.properties.iter().collect()
            } else {
                let name = property.expect("clap enforces --property or --all");
                match program.spec.property(&name) {
                    Some(p) => vec![p],
                    None => {
                        eprintln!("error: no property named `{name}`");
                        return Err(INVALID);
                    }
                }
            };
            let limits = Limits {
                max_states,
                workers,
                ..Limits::default()
            };
            let lts = explore(&program, limits).map_err(|e| {
                eprintln!("error: {e}");
                RUNTIME
            })?;
            let mut code = OK;
            for decl in selected {
                let v = check_property(&program, &lts, decl);
                match v.outcome {
                    Outcome::Holds => out!("HOLDS    {}\n", v.name),
                    Outcome::Fails => {
                        out!("FAILS    {}\n", v.name);
                        out!("{}", render_trace(&program, &lts, &v));
                        code = FAILS;
                    }
                    Outcome::Unknown => {
                        out!("UNKNOWN  {} (state space truncated)\n", v.name);
                        if code == OK {
                            code = LIMIT;
                        }
                    }
                }
            }
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { INVALID } else { OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) | Err(code) => ExitCode::from(code),
    }
}
