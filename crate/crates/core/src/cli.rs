//! Command-line front end. Exit codes: 0 pass, 1 check failure, 2 usage or
//! configuration error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::algebroid::{self, LieAlgebroid};
use crate::config::{CheckSettings, ConfigDocument, System};
use crate::error::{Error, Result};
use crate::report::{self, RunReport};
use crate::scenarios::{scenario, SCENARIOS};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "varalg", version, about = "Higher-order variational calculus on Lie algebroids")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Print the JSON report on stdout instead of the text table.
    #[arg(long, global = true)]
    pub json: bool,
    /// Also write the JSON report to this file.
    #[arg(long, global = true, value_name = "PATH")]
    pub report: Option<PathBuf>,
    /// Tolerance override for the command's main checks: identity checks for
    /// `check` and `operators`, drift and EL residual for `simulate` and
    /// `scenarios`, discrepancy and round trip for `reduce`.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for sampled checks (default 7 unless the config sets one).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of sample points for sampled checks (default 100).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structure, morphism, operator and regularity checks.
    Check { config: PathBuf },
    /// Integrate the Euler-Lagrange equations and report drifts.
    Simulate {
        config: PathBuf,
        /// Trajectory output file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Compare a source system with its reduction along the morphism.
    Reduce { config: PathBuf },
    /// Run, list or export the bundled scenarios.
    Scenarios {
        /// Scenario names; all when empty.
        names: Vec<String>,
        #[arg(long)]
        list: bool,
        /// Write config files instead of running.
        #[arg(long)]
        emit: bool,
        /// Directory for emitted configs or trajectories.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Operator identity suite for k = 1..=max-order; without a config it
    /// runs on tangent(2), so(3), Heisenberg and the heavy-top algebroid.
    Operators {
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        max_order: usize,
    },
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::Io(_) | Error::Dimension(_) | Error::Unsupported(_) | Error::InvalidOrder(_) => EXIT_CONFIG,
        _ => EXIT_FAIL,
    }
}

fn settings(doc: Option<&ConfigDocument>, c: &Common) -> CheckSettings {
    let mut s = doc.map(|d| d.checks).unwrap_or_default();
    if let Some(seed) = c.seed {
        s.seed = seed;
    }
    if let Some(n) = c.samples {
        s.samples = n;
    }
    s
}

fn load(path: &Path) -> Result<System> {
    ConfigDocument::load(path)?.build().map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        e => e,
    })
}

fn emit(report: &RunReport, c: &Common, out: &mut dyn Write) -> Result<()> {
    if c.json {
        writeln!(out, "{}", report.to_json())?;
    } else {
        write!(out, "{}", report.to_text())?;
    }
    if let Some(p) = &c.report {
        std::fs::write(p, report.to_json() + "\n")?;
    }
    Ok(())
}

fn write_trajectory(path: &Path, traj: &crate::dynamics::Trajectory, format: Format) -> Result<()> {
    let body = match format {
        Format::Csv => traj.to_csv(),
        Format::Json => traj.to_json() + "\n",
    };
    std::fs::write(path, body)?;
    Ok(())
}

/// Runs one command; `Ok(true)` when every check passed.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<bool> {
    let c = &cli.common;
    match &cli.command {
        Command::Check { config } => {
            let sys = load(config)?;
            let mut s = settings(Some(&sys.doc), c);
            if let Some(t) = c.tol {
                s.structure_tol = t;
                s.morphism_tol = t;
                s.operator_tol = t;
                s.symmetry_tol = t;
                s.invariance_tol = t;
            }
            let r = report::check(&sys, &s)?;
            emit(&r, c, out)?;
            Ok(r.passed)
        }
        Command::Simulate { config, out: path, format } => {
            let sys = load(config)?;
            let mut s = settings(Some(&sys.doc), c);
            if let Some(t) = c.tol {
                s.conservation_tol = t;
                s.el_residual_tol = t;
            }
            let (r, traj) = report::simulate(&sys, &s)?;
            if let Some(p) = path {
                write_trajectory(p, &traj, *format)?;
            }
            emit(&r, c, out)?;
            Ok(r.passed)
        }
        Command::Reduce { config } => {
            let sys = load(config)?;
            let mut s = settings(Some(&sys.doc), c);
            if let Some(t) = c.tol {
                s.reduction_tol = t;
                s.reconstruction_tol = t;
            }
            let r = report::reduce(&sys, &s)?;
            emit(&r, c, out)?;
            Ok(r.passed)
        }
        Command::Scenarios { names, list, emit: emit_configs, out: dir, format } => {
            let names: Vec<String> = if names.is_empty() { SCENARIOS.iter().map(|s| s.to_string()).collect() } else { names.clone() };
            let scs = names.iter().map(|n| scenario(n)).collect::<Result<Vec<_>>>()?;
            if *list {
                for sc in &scs {
                    writeln!(out, "{:<14} {}", sc.name, sc.summary)?;
                }
                return Ok(true);
            }
            if *emit_configs {
                match dir {
                    Some(d) => {
                        std::fs::create_dir_all(d)?;
                        for sc in &scs {
                            std::fs::write(d.join(format!("{}.json", sc.name)), sc.config.to_json() + "\n")?;
                        }
                    }
                    None => {
                        for sc in &scs {
                            writeln!(out, "{}", sc.config.to_json())?;
                        }
                    }
                }
                return Ok(true);
            }
            let outcomes: Vec<Result<_>> = std::thread::scope(|scope| {
                let handles: Vec<_> = scs
                    .iter()
                    .map(|sc| {
                        scope.spawn(move || {
                            let mut s = settings(Some(&sc.config), c);
                            if let Some(t) = c.tol {
                                s.conservation_tol = t;
                                s.el_residual_tol = t;
                            }
                            sc.run(&s)
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("scenario thread panicked")).collect()
            });
            let mut all = true;
            let mut reports = Vec::new();
            for (sc, o) in scs.iter().zip(outcomes) {
                let o = o?;
                if let Some(d) = dir {
                    std::fs::create_dir_all(d)?;
                    let ext = if *format == Format::Csv { "csv" } else { "json" };
                    write_trajectory(&d.join(format!("{}.{ext}", sc.name)), &o.trajectory, *format)?;
                }
                all &= o.report.passed;
                if !c.json {
                    write!(out, "{}", o.report.to_text())?;
                }
                reports.push(o.report);
            }
            let json = serde_json::to_string_pretty(&reports).expect("reports serialize");
            if c.json {
                writeln!(out, "{json}")?;
            }
            if let Some(p) = &c.report {
                std::fs::write(p, json + "\n")?;
            }
            Ok(all)
        }
        Command::Operators { config, max_order } => {
            if *max_order == 0 {
                return Err(Error::Config("--max-order must be at least 1".into()));
            }
            let (name, algs, doc): (String, Vec<std::sync::Arc<LieAlgebroid>>, Option<ConfigDocument>) = match config {
                Some(p) => {
                    let sys = load(p)?;
                    (sys.doc.name.clone(), vec![sys.algebroid.clone()], Some(sys.doc))
                }
                None => ("catalog".into(), vec![algebroid::tangent(2)?, algebroid::so3()?, algebroid::heisenberg_algebra()?, algebroid::heavy_top()?], None),
            };
            let mut s = settings(doc.as_ref(), c);
            if let Some(t) = c.tol {
                s.operator_tol = t;
            }
            let mut r = RunReport::new("operators", &name, s);
            for alg in &algs {
                report::operators_on(&mut r, alg, &s, *max_order)?;
            }
            emit(&r, c, out)?;
            Ok(r.passed)
        }
    }
}

/// Parses arguments, runs, prints errors and returns the exit code.
pub fn main_with(args: impl IntoIterator<Item = impl Into<OsString> + Clone>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(&cli, &mut lock) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
