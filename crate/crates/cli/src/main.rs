mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lambert_coulomb::SystemParams;

use crate::config::{parse_vector, physics, ScanArgs, ScanConfig};
use crate::error::CliError;
use crate::output::write_csv;

/// Semiclassical Coulomb Green function from Lambert's theorem.
#[derive(Debug, Parser)]
#[command(name = "lambert-coulomb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact bound-state energies and closed-orbit actions
    Eigenvalues {
        #[arg(long, default_value_t = 10)]
        kmax: u32,
        #[arg(long, default_value_t = 3)]
        ndim: usize,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        kc: f64,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Green function on a one- or two-axis grid
    Scan(ScanArgs),
    /// Quantum, semiclassical and uniform values along one axis
    Cut(ScanArgs),
    /// Actions, travel times and Morse indices of the four elementary paths
    Tof {
        /// Final point r, comma separated
        #[arg(long, allow_hyphen_values = true)]
        r: String,
        /// Initial point r', comma separated
        #[arg(long, allow_hyphen_values = true)]
        rp: String,
        #[arg(long, conflicts_with = "energy")]
        nu: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        energy: Option<f64>,
        #[arg(long, default_value_t = 3)]
        ndim: usize,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        kc: f64,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        /// Also list paths with up to this many extra round trips
        #[arg(long, default_value_t = 0)]
        loops: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Eigenvalues {
            kmax,
            ndim,
            mu,
            kc,
            hbar,
            out,
        } => {
            let params = SystemParams::new(mu, kc, hbar, ndim).map_err(CliError::from_config)?;
            let rows = commands::cmd_eigenvalues(kmax, &params);
            write_csv(&out, commands::EIGEN_HEADER, rows.iter().map(|r| r.csv()))
        }
        Command::Scan(args) => {
            let cfg = ScanConfig::from_args(args, false)?;
            let rows = commands::cmd_scan(&cfg)?;
            write_csv(&cfg.out, &commands::scan_header(&cfg), rows.iter().map(|r| r.csv()))
        }
        Command::Cut(args) => {
            let cfg = ScanConfig::from_args(args, true)?;
            let (rows, summary) = commands::cmd_cut(&cfg)?;
            write_csv(&cfg.out, &commands::cut_header(&cfg), rows.iter().map(|r| r.csv()))?;
            eprintln!("{}", summary.render());
            Ok(())
        }
        Command::Tof {
            r,
            rp,
            nu,
            energy,
            ndim,
            mu,
            kc,
            hbar,
            loops,
            out,
        } => {
            let phys = physics(nu, energy, ndim, mu, kc, hbar, false)?;
            let r = parse_vector(&r, ndim, "r")?;
            let rp = parse_vector(&rp, ndim, "rp")?;
            let rows = commands::cmd_tof(&r, &rp, &phys, loops)?;
            write_csv(&out, commands::TOF_HEADER, rows.iter().map(|r| r.csv()))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
