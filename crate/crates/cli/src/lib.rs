// SPDX-License-Identifier: Apache-2.0

//! `softc` command line: compile truth tables, check netlists, run timed
//! simulations and serve the compile API.

pub mod server;

use std::ffi::OsString;
use std::io::Write;
use std::net::{Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use softc_core::family::lookup_family;
use softc_core::netlist::Netlist;
use softc_core::pipeline::CompileError;
use softc_core::sim::{timed_simulate, verify, SimError, Verification};
use softc_core::truthtable::{parse_truth_table, TableDoc, TableError, TruthTable};
use softc_core::{compile_pipeline, family_registry, Assignment, CompileOptions, CompileResult};
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "softc", version, about = "Compile truth tables into soft logic circuits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Artifact {
    /// expr.txt: the optimized expression
    Expr,
    /// netlist.json
    Netlist,
    /// page-N.svg, one per schematic page
    Svg,
    /// report.json
    Report,
    /// schematic.json
    Schematic,
    /// result.json: the full compile result, as served by the API
    Result,
}

impl Artifact {
    const ALL: [Artifact; 6] = [
        Artifact::Expr,
        Artifact::Netlist,
        Artifact::Svg,
        Artifact::Report,
        Artifact::Schematic,
        Artifact::Result,
    ];
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile one output column of a truth table.
    Compile {
        /// Truth table, in the text form or the structured JSON form.
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, default_value = "sbv")]
        family: String,
        /// Output column; the first one by default.
        #[arg(long)]
        output: Option<String>,
        /// Directory for the emitted files. Without it the full result is
        /// printed as JSON.
        #[arg(long, value_name = "DIR")]
        out_dir: Option<PathBuf>,
        /// Files to write into the output directory; all by default.
        #[arg(long, value_delimiter = ',')]
        emit: Vec<Artifact>,
        /// Page size limit in grid cells, e.g. `3x4`.
        #[arg(long, value_name = "COLSxROWS", value_parser = parse_window)]
        window: Option<(u32, u32)>,
    },
    /// Check a netlist against a truth table on every specified row.
    Verify {
        #[arg(long, value_name = "FILE")]
        netlist: PathBuf,
        #[arg(long, value_name = "FILE")]
        table: PathBuf,
        #[arg(long)]
        output: Option<String>,
    },
    /// Timed simulation of one input step.
    Simulate {
        #[arg(long, value_name = "FILE")]
        netlist: PathBuf,
        /// Settled input levels before the step, first input first.
        #[arg(long, value_name = "BITS")]
        from: String,
        /// Input levels after the step.
        #[arg(long, value_name = "BITS")]
        to: String,
        #[arg(long, default_value_t = 0)]
        step_time: u64,
        /// Print the trace as CSV instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// List the built-in logic families.
    Families,
    /// Run the local HTTP compile service.
    Serve {
        #[arg(long, env = "SOFTC_PORT", default_value_t = 8080)]
        port: u16,
        /// Directory of static files served for unmatched paths.
        #[arg(long = "static", value_name = "DIR")]
        static_dir: Option<PathBuf>,
    },
}

fn parse_window(s: &str) -> Result<(u32, u32), String> {
    let (c, r) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected COLSxROWS, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<u32>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(c)?, parse(r)?))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}: {1}")]
    Table(PathBuf, TableError),
    #[error("{0}: {1}")]
    Netlist(PathBuf, softc_core::netlist::NetlistError),
    #[error("{}: {}", .0.code(), .0)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Family(#[from] softc_core::family::FamilyError),
    #[error("{0}")]
    Usage(String),
    #[error("netlist disagrees with the table at row {row} ({bits}): expected {expected}, got {got}")]
    Mismatch {
        row: u32,
        bits: String,
        expected: bool,
        got: bool,
    },
}

impl CliError {
    /// 2 for a compiler fault, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Compile(e) if e.is_internal() => 2,
            _ => 1,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses a table file in the text form, or the structured form when the
/// file starts with `{`.
pub fn parse_table_file(text: &str) -> Result<TruthTable, TableError> {
    if text.trim_start().starts_with('{') {
        let doc: TableDoc = serde_json::from_str(text).map_err(|e| TableError::Syntax {
            line: e.line(),
            message: e.to_string(),
        })?;
        doc.into_table()
    } else {
        parse_truth_table(text)
    }
}

fn load_table(path: &Path) -> Result<TruthTable, CliError> {
    parse_table_file(&read(path)?).map_err(|e| CliError::Table(path.to_path_buf(), e))
}

fn load_netlist(path: &Path) -> Result<Netlist, CliError> {
    Netlist::from_json(&read(path)?).map_err(|e| CliError::Netlist(path.to_path_buf(), e))
}

fn output_index(t: &TruthTable, output: Option<&str>, path: &Path) -> Result<usize, CliError> {
    match output {
        Some(name) => t
            .output_index(name)
            .map_err(|e| CliError::Table(path.to_path_buf(), e)),
        None => Ok(0),
    }
}

/// Writes the selected artifacts of `r` into `dir`.
pub fn write_artifacts(r: &CompileResult, dir: &Path, emit: &[Artifact]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let emit = if emit.is_empty() { &Artifact::ALL[..] } else { emit };
    for artifact in emit {
        match artifact {
            Artifact::Expr => write(&dir.join("expr.txt"), &format!("{}\n", r.optimized_expression))?,
            Artifact::Netlist => write(&dir.join("netlist.json"), &format!("{}\n", r.netlist.to_json()))?,
            Artifact::Schematic => {
                write(&dir.join("schematic.json"), &format!("{}\n", r.schematic.to_json()))?
            }
            Artifact::Report => write(
                &dir.join("report.json"),
                &format!(
                    "{}\n",
                    serde_json::to_string_pretty(&r.report).expect("report serializes")
                ),
            )?,
            Artifact::Svg => {
                for (page, svg) in r.schematic.pages.iter().zip(&r.svg_pages) {
                    write(&dir.join(format!("page-{}.svg", page.number)), svg)?;
                }
            }
            Artifact::Result => write(&dir.join("result.json"), &r.to_json())?,
        }
    }
    Ok(())
}

fn parse_levels(bits: &str, netlist: &Netlist) -> Result<Assignment, CliError> {
    let names = netlist.input_names();
    if bits.len() != names.len() || !bits.chars().all(|c| c == '0' || c == '1') {
        return Err(CliError::Usage(format!(
            "{bits:?} must be {} bits, one per input ({})",
            names.len(),
            names.join(" ")
        )));
    }
    Ok(names.into_iter().zip(bits.chars().map(|c| c == '1')).collect())
}

/// Runs `command`, writing normal output to `out`.
pub fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    let stdout_err = |source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    };
    match command {
        Command::Compile {
            input,
            family,
            output,
            out_dir,
            emit,
            window,
        } => {
            let table = load_table(&input)?;
            let index = output_index(&table, output.as_deref(), &input)?;
            let result = compile_pipeline(&table, index, &family, CompileOptions { window })?;
            match out_dir {
                Some(dir) => {
                    write_artifacts(&result, &dir, &emit)?;
                    writeln!(out, "{}", result.optimized_expression).map_err(stdout_err)?;
                }
                None => out.write_all(result.to_json().as_bytes()).map_err(stdout_err)?,
            }
        }
        Command::Verify {
            netlist,
            table,
            output,
        } => {
            let n = load_netlist(&netlist)?;
            let t = load_table(&table)?;
            let index = output_index(&t, output.as_deref(), &table)?;
            match verify(&n, &t, index)? {
                Verification::Pass => writeln!(out, "pass").map_err(stdout_err)?,
                Verification::Fail {
                    row,
                    bits,
                    expected,
                    got,
                } => {
                    return Err(CliError::Mismatch {
                        row,
                        bits,
                        expected,
                        got,
                    })
                }
            }
        }
        Command::Simulate {
            netlist,
            from,
            to,
            step_time,
            csv,
        } => {
            let n = load_netlist(&netlist)?;
            let family = lookup_family(&n.family)?;
            n.validate(Some(family))
                .map_err(|e| CliError::Netlist(netlist.clone(), e))?;
            let trace = timed_simulate(&n, family, &parse_levels(&from, &n)?, &parse_levels(&to, &n)?, step_time)?;
            let text = if csv {
                trace.to_csv()
            } else {
                format!("{}\n", serde_json::to_string_pretty(&trace).expect("trace serializes"))
            };
            out.write_all(text.as_bytes()).map_err(stdout_err)?;
        }
        Command::Families => {
            let text = serde_json::to_string_pretty(family_registry()).expect("families serialize");
            writeln!(out, "{text}").map_err(stdout_err)?;
        }
        Command::Serve { port, static_dir } => {
            let runtime = tokio::runtime::Runtime::new().map_err(stdout_err)?;
            let addr = SocketAddr::from((Ipv4Addr::LOCALHOST, port));
            runtime
                .block_on(server::serve(addr, static_dir))
                .map_err(|source| CliError::Io {
                    path: PathBuf::from(addr.to_string()),
                    source,
                })?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    match execute(cli.command, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("softc: {e}");
            e.exit_code()
        }
    }
}
