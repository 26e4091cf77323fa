//! `chainlab`: batch experiments on harmonic chains with a defect block.

mod commands;
mod error;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use error::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "chainlab", version, about = "Classify, simulate and measure harmonic chains with defects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Chain file, or `bundled:NAME` for a shipped example.
    pub config: String,
    /// Output root; files go to `<root>/<chain>/<command>/`.
    #[arg(long, env = "CHAINLAB_OUT", default_value = "chainlab-out")]
    pub out: PathBuf,
}

#[derive(Args, Clone)]
pub struct RunArgs {
    /// Final time; the chain file's `run.horizon` or 400 when absent.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Time step; `0.2 / omega_max` when absent.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Exponent of the decaying norm `||Y||_{-alpha}`.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Record every n-th step.
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long, value_enum, default_value_t = IntegratorArg::Gauss4)]
    pub integrator: IntegratorArg,
    /// Sites beyond the initial support on each side.
    #[arg(long)]
    pub reach: Option<i64>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum IntegratorArg {
    Gauss4,
    Verlet,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum SideArg {
    Minus,
    Plus,
}

#[derive(Subcommand)]
enum Command {
    /// Decide condition C, C0 or resonance and write the decision trail.
    Classify {
        #[command(flatten)]
        common: Common,
    },
    /// Integrate the chain and write block trajectories with energy and norm.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Tabulate the defect kernel N(t) or the boundary kernels Gamma_n(t).
    Kernel {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 50.0)]
        t_max: f64,
        #[arg(long, default_value_t = 501)]
        points: usize,
        /// Time derivatives of N to include (0, 1, 2).
        #[arg(long, value_delimiter = ',', default_value = "0")]
        orders: Vec<u32>,
        /// Add the residues of real poles instead of refusing the chain.
        #[arg(long)]
        include_poles: bool,
        /// Write Gamma_n for both bulks at this distance instead of N.
        #[arg(long)]
        gamma: Option<i64>,
    },
    /// Tabulate Green functions of one bulk, free or on the half-line.
    Greens {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = SideArg::Minus)]
        side: SideArg,
        /// Times at which to tabulate.
        #[arg(long, value_delimiter = ',', default_value = "1,10")]
        times: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        n_max: usize,
        /// Source site for the half-line kernel G_t(n, k), n = 1..=n_max.
        #[arg(long)]
        halfline: Option<i64>,
    },
    /// Simulate and fit the decay exponent of a recorded series.
    DecayFit {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunArgs,
        /// Fit window `start,end`; the file's `run.fit_window` or the last
        /// nine tenths of the horizon when absent.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        window: Option<Vec<f64>>,
        /// Series to fit.
        #[arg(long, value_enum, default_value_t = SeriesArg::Norm)]
        series: SeriesArg,
        /// Envelope bin width; `pi / a` when absent.
        #[arg(long)]
        bin_width: Option<f64>,
        /// Fit every sample instead of bin maxima.
        #[arg(long)]
        pointwise: bool,
    },
    /// Build and verify a non-decaying solution of a resonant chain.
    Resonance {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 200.0)]
        horizon: f64,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        /// Initial block momenta for a zero mode, one per defect site.
        #[arg(long, value_delimiter = ',')]
        momenta: Vec<f64>,
    },
    /// Run the acceptance battery.
    Reproduce {
        /// Output root for the summary file.
        #[arg(long, env = "CHAINLAB_OUT", default_value = "chainlab-out")]
        out: PathBuf,
        /// Subset of criteria, e.g. `1,4,9`.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum SeriesArg {
    /// `||Y(t)||_{-alpha}`.
    Norm,
    /// Displacement of site 0.
    U0,
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Classify { common } => commands::classify(&common),
        Command::Simulate { common, run } => commands::simulate(&common, &run),
        Command::Kernel { common, t_max, points, orders, include_poles, gamma } => {
            commands::kernel(&common, t_max, points, &orders, include_poles, gamma)
        }
        Command::Greens { common, side, times, n_max, halfline } => commands::greens(&common, side, &times, n_max, halfline),
        Command::DecayFit { common, run, window, series, bin_width, pointwise } => {
            commands::decay_fit(&common, &run, window, series, bin_width, pointwise)
        }
        Command::Resonance { common, horizon, alpha, momenta } => commands::resonance(&common, horizon, alpha, momenta),
        Command::Reproduce { out, criteria } => commands::reproduce(&out, &criteria),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
