//! Command-line frontend for the `dicke-metrology` library.
//!
//! Six batch subcommands turn probe parameters or measured moment files into
//! CSV curves and JSON reports: sensitivity certificates for ideal Dicke
//! states, parameter scans over squeezed and thermal probe families, the
//! angle-resolved sensitivity curve, the bootstrap-backed experimental bound,
//! and the gain map over moment space. Exit codes: 0 on success, 2 for usage
//! errors, 1 for computational failures.

mod commands;
mod grid;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::CommandError;
use grid::GridSpec;

#[derive(Parser)]
#[command(
    name = "dicke-metrology",
    version,
    propagate_version = true,
    about = "Rotation-angle sensitivity and entanglement-depth certificates for Dicke-state probes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sensitivity certificate of the balanced N-particle Dicke state (JSON)
    IdealDicke {
        /// Particle number (must be even)
        #[arg(long)]
        n: u32,
        /// Write the report to this file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the exact moments as a zero-uncertainty moments file
        #[arg(long)]
        write_moments: Option<PathBuf>,
    },
    /// Scan sensitivity and Fisher information over squeezed ground states (CSV)
    ScanSqueezing {
        /// Particle number
        #[arg(long)]
        n: u32,
        /// Drive-strength grid as min:max:count[:lin|log]
        #[arg(long, value_parser = grid::parse_grid, default_value = "1e-3:1e3:61:log")]
        grid: GridSpec,
        /// Write the CSV to this file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scan sensitivity and Fisher information over thermal Dicke states (CSV)
    ScanThermal {
        /// Particle number (must be even)
        #[arg(long)]
        n: u32,
        /// Temperature grid as min:max:count[:lin|log]
        #[arg(long, value_parser = grid::parse_grid, default_value = "1e-2:1e2:61:log")]
        grid: GridSpec,
        /// Write the CSV to this file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Angle-resolved sensitivity curve from a measured moments file (CSV)
    SensitivityCurve {
        /// Moments file (key = value lines; see README for the keys)
        #[arg(long)]
        moments: PathBuf,
        /// Rotation-angle grid as min:max:count[:lin|log]
        #[arg(long, value_parser = grid::parse_grid, default_value = "1e-4:1.5706963267948966:400:log")]
        grid: GridSpec,
        /// Write the CSV to this file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sensitivity bound with bootstrap uncertainty from measured moments (JSON)
    ExpBound {
        /// Moments file (key = value lines; see README for the keys)
        #[arg(long)]
        moments: PathBuf,
        /// Number of bootstrap resamples
        #[arg(long, default_value_t = 10_000)]
        resamples: usize,
        /// Seed for the deterministic bootstrap
        #[arg(long, default_value_t = 1234)]
        seed: u64,
        /// Write the report to this file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gain and depth over the (normalized <Jx^2>, <Jz^2>) plane (CSV)
    RegionMap {
        /// Particle number
        #[arg(long, default_value_t = 7900)]
        n: u32,
        /// Fourth-moment reconstruction coefficient: <Jz^4> is modeled as beta <Jz^2>^2
        #[arg(long, default_value_t = 3.0)]
        beta: f64,
        /// Grid of <Jx^2> as a fraction of its maximum, min:max:count[:lin|log]
        #[arg(long, value_parser = grid::parse_grid, default_value = "0:1:41:lin")]
        fraction_grid: GridSpec,
        /// Grid of <Jz^2> values, min:max:count[:lin|log]
        #[arg(long, value_parser = grid::parse_grid, default_value = "0:200:41:lin")]
        jz2_grid: GridSpec,
        /// <Jx^2> fraction at which to cut the cross-section
        #[arg(long, default_value_t = 0.769)]
        cross_section_at: f64,
        /// Write the grid CSV to this file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the cross-section CSV here (default: derived from --out)
        #[arg(long)]
        cross_section_out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CommandError> {
    match cli.command {
        Command::IdealDicke {
            n,
            out,
            write_moments,
        } => commands::ideal_dicke(n, out.as_deref(), write_moments.as_deref()),
        Command::ScanSqueezing { n, grid, out } => {
            commands::scan_squeezing(n, &grid, out.as_deref())
        }
        Command::ScanThermal { n, grid, out } => commands::scan_thermal(n, &grid, out.as_deref()),
        Command::SensitivityCurve { moments, grid, out } => {
            commands::sensitivity_curve(&moments, &grid, out.as_deref())
        }
        Command::ExpBound {
            moments,
            resamples,
            seed,
            out,
        } => commands::exp_bound(&moments, resamples, seed, out.as_deref()),
        Command::RegionMap {
            n,
            beta,
            fraction_grid,
            jz2_grid,
            cross_section_at,
            out,
            cross_section_out,
        } => commands::region_map_cmd(
            n,
            beta,
            &fraction_grid,
            &jz2_grid,
            cross_section_at,
            out.as_deref(),
            cross_section_out.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CommandError::Usage(_) => ExitCode::from(2),
                CommandError::Failed(_) => ExitCode::from(1),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn argument_tree_is_consistent() {
        Cli::command().debug_assert();
    }
}
