#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rtdyn::{Error, Result};

mod commands;
mod opts;

use commands::{DensityArgs, GfdArgs, McArgs, Outcome, RenormArgs};
use opts::{Common, Format};

/// Dynamical systems under random time changes by inverse subordinators.
#[derive(Debug, Parser)]
#[command(name = "rtdyn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check Phi = lambda K and K = L[k] on a lambda grid
    KernelCheck {
        #[command(flatten)]
        common: Common,
    },
    /// Density G_t(tau) of the inverse subordinator, or transform checks of it
    Density {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: DensityArgs,
    },
    /// v(t, x) = E f(X(E(t), x)) by the subordination integral
    Subordinate {
        #[command(flatten)]
        common: Common,
    },
    /// v(t) against its predicted long-time decay
    Asymptotics {
        #[command(flatten)]
        common: Common,
    },
    /// Residual of the generalized fractional evolution equation
    GfdResidual {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: GfdArgs,
    },
    /// Potential int_0^inf u dt against its Green-measure integral
    Potential {
        #[command(flatten)]
        common: Common,
    },
    /// Renormalized potential (1/N(T)) int_0^T v dt and the naive divergence
    Renormalize {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: RenormArgs,
    },
    /// Mean time-changed trajectory E[Y(t, x)]
    Trajectory {
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo checks of the sampler and of the subordination integral
    McValidate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: McArgs,
    },
}

fn run(cmd: Command) -> Result<()> {
    let (mut common, name) = match &cmd {
        Command::KernelCheck { common } => (common.clone(), "kernel-check"),
        Command::Density { common, .. } => (common.clone(), "density"),
        Command::Subordinate { common } => (common.clone(), "subordinate"),
        Command::Asymptotics { common } => (common.clone(), "asymptotics"),
        Command::GfdResidual { common, .. } => (common.clone(), "gfd-residual"),
        Command::Potential { common } => (common.clone(), "potential"),
        Command::Renormalize { common, .. } => (common.clone(), "renormalize"),
        Command::Trajectory { common } => (common.clone(), "trajectory"),
        Command::McValidate { common, .. } => (common.clone(), "mc-validate"),
    };
    common.merge_config()?;
    let Outcome { table, summary } = match &cmd {
        Command::KernelCheck { .. } => commands::kernel_check(&common),
        Command::Density { args, .. } => commands::density(&common, args),
        Command::Subordinate { .. } => commands::subordinate(&common),
        Command::Asymptotics { .. } => commands::asymptotics(&common),
        Command::GfdResidual { args, .. } => commands::gfd_residual(&common, args),
        Command::Potential { .. } => commands::potential(&common),
        Command::Renormalize { args, .. } => commands::renormalize(&common, args),
        Command::Trajectory { .. } => commands::trajectory(&common),
        Command::McValidate { args, .. } => commands::mc_validate(&common, args),
    }?;
    if let Some(path) = &common.output {
        let table = table
            .meta("command", name)
            .meta("version", env!("CARGO_PKG_VERSION"))
            .meta("argv", argv_line());
        let text = match common.format() {
            Format::Csv => table.to_csv(),
            Format::Json => table.to_json(),
        };
        fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    println!("{summary}");
    Ok(())
}

fn argv_line() -> String {
    std::env::args()
        .skip(1)
        .map(|a| {
            if a.is_empty() || a.contains(char::is_whitespace) {
                format!("\"{a}\"")
            } else {
                a
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 3 } else { 2 })
        }
    }
}
