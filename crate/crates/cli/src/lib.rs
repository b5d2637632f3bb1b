//! Command line driver: subcommands, configuration, outputs and the acceptance criteria.

use std::ffi::OsString;
use std::sync::atomic::{AtomicBool, Ordering};

use clap::{Parser, Subcommand};

static QUIET: AtomicBool = AtomicBool::new(false);

pub(crate) fn is_quiet() -> bool {
    QUIET.load(Ordering::Relaxed)
}

macro_rules! out {
    ($($t:tt)*) => { if !$crate::is_quiet() { print!($($t)*); } };
}

macro_rules! outln {
    ($($t:tt)*) => { if !$crate::is_quiet() { println!($($t)*); } };
}

pub mod commands;
pub mod config;
pub mod contour;
pub mod criteria;
pub mod output;
pub mod svg;

use config::{Opts, RunConfig, UsageError};

#[derive(Debug, Parser)]
#[command(name = "cylas", version, about = "Numerical laboratory for the cylinder equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regime, admissibility in both charts and predicted decay rates.
    Classify(Opts),
    /// Integrate the ODE from (psi0, dpsi0) and classify the tail.
    Integrate(Opts),
    /// Period of closed orbits by quadrature and by return map.
    Period(Opts),
    /// Fit an exponential rate to a CSV column.
    Fit(Opts),
    /// Level sets of the energy and sample orbits.
    Portrait(Opts),
    /// Solve the cylinder PDE and measure symmetrization.
    Pde(Opts),
    /// Singularity verdict and the symmetry condition check.
    Singularity(Opts),
    /// Run the acceptance criteria.
    Verify(Opts),
}

impl Command {
    fn split(&self) -> (&'static str, &Opts) {
        match self {
            Command::Classify(o) => ("classify", o),
            Command::Integrate(o) => ("integrate", o),
            Command::Period(o) => ("period", o),
            Command::Fit(o) => ("fit", o),
            Command::Portrait(o) => ("portrait", o),
            Command::Pde(o) => ("pde", o),
            Command::Singularity(o) => ("singularity", o),
            Command::Verify(o) => ("verify", o),
        }
    }
}

/// Runs the named subcommand; returns its exit code.
pub fn dispatch(name: &str, cfg: &RunConfig) -> anyhow::Result<i32> {
    match name {
        "classify" => commands::cmd_classify(cfg),
        "integrate" => commands::cmd_integrate(cfg),
        "period" => commands::cmd_period(cfg),
        "fit" => commands::cmd_fit(cfg),
        "portrait" => commands::cmd_portrait(cfg),
        "pde" => commands::cmd_pde(cfg),
        "singularity" => commands::cmd_singularity(cfg),
        "verify" => commands::cmd_verify(cfg),
        _ => config::usage(format!("unknown command {name}")),
    }
}

/// Runs `f` with command output to stdout suppressed.
pub fn quietly<T>(f: impl FnOnce() -> T) -> T {
    let before = QUIET.swap(true, Ordering::Relaxed);
    let r = f();
    QUIET.store(before, Ordering::Relaxed);
    r
}

/// Exit code of a failed run: 2 for usage errors, 1 otherwise.
pub fn error_code(e: &anyhow::Error) -> i32 {
    if e.downcast_ref::<UsageError>().is_some() {
        2
    } else {
        1
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (name, opts) = cli.command.split();
    let res = RunConfig::from_opts(opts).and_then(|cfg| dispatch(name, &cfg));
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            error_code(&e)
        }
    }
}
