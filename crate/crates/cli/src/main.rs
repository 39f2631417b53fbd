//! `ionchain`: mode spectra, local-phonon observables, phase diagrams and
//! dipole-force sweeps for an impurity-doped linear ion crystal, emitted as
//! deterministic CSV or JSON tables.

mod commands;
mod config_file;
mod error;
mod resolve;
mod table;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "ionchain",
    version,
    about = "Transverse phonon physics of an impurity-doped linear ion crystal"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the axial equilibrium positions of the chain
    Equilibrium(EquilibriumArgs),
    /// Mode spectrum, optionally scanned over a parameter grid
    Spectrum(SpectrumArgs),
    /// Per-site local-phonon mean, variance and correlations
    Observables(ObservablesArgs),
    /// Time-dependent dipole-force sweep with adiabaticity diagnostics
    Sweep(SweepArgs),
    /// Effective mass ratio and phase label over a parameter grid
    PhaseDiagram(PhaseDiagramArgs),
    /// Compare closed-form observables against the Fock-space oracle
    OracleCheck(OracleCheckArgs),
}

#[derive(Args, Clone)]
struct TrapArgs {
    /// Number of ions in the chain
    #[arg(long = "n")]
    n_ions: Option<usize>,
    /// 1-based site of the impurity ion [default: the center site]
    #[arg(long)]
    impurity: Option<usize>,
    /// Impurity-to-host mass ratio [default: 1]
    #[arg(long)]
    mass_ratio: Option<f64>,
    /// Axial-to-transverse trap anisotropy, in (0, 1) [default: 0.1]
    #[arg(long)]
    alpha: Option<f64>,
    /// Static dipole pinning strength omega_s / omega_x0 [default: 0]
    #[arg(long)]
    beta: Option<f64>,
    /// Phonons prepared in the lowest-lying mode [default: 0]
    #[arg(long)]
    ll_phonons: Option<usize>,
}

#[derive(Args, Clone)]
struct IoArgs {
    /// `key = value` file supplying defaults; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path [default: stdout]
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Output format [default: csv]
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct EquilibriumArgs {
    /// Number of ions in the chain
    #[arg(long = "n")]
    n_ions: Option<usize>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    trap: TrapArgs,
    #[command(flatten)]
    io: IoArgs,
    /// Parameter grid: one of mass_ratio | alpha | dipole_beta, then MIN MAX COUNT
    #[arg(long, num_args = 4, value_names = ["PARAM", "MIN", "MAX", "COUNT"])]
    scan: Option<Vec<String>>,
}

#[derive(Args)]
struct ObservablesArgs {
    #[command(flatten)]
    trap: TrapArgs,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    trap: TrapArgs,
    #[command(flatten)]
    io: IoArgs,
    /// Peak dipole strength reached at the end of the sweep [default: 0.8]
    #[arg(long)]
    omega_s_max: Option<f64>,
    /// Total sweep time in units of 1/omega_x0 [default: 60000]
    #[arg(long)]
    duration: Option<f64>,
    /// Time-grid resolution [default: 801]
    #[arg(long)]
    steps: Option<usize>,
    /// Schedule shape [default: sqrt]
    #[arg(long, value_enum)]
    law: Option<Law>,
    /// Adiabatic verdict threshold on |S| / gap [default: 0.1]
    #[arg(long)]
    threshold: Option<f64>,
    /// Exit with status 4 when the adiabatic verdict fails
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct PhaseDiagramArgs {
    #[command(flatten)]
    trap: TrapArgs,
    #[command(flatten)]
    io: IoArgs,
    /// Parameter grid: one of mass_ratio | alpha | dipole_beta, then MIN MAX COUNT
    #[arg(long, num_args = 4, value_names = ["PARAM", "MIN", "MAX", "COUNT"])]
    scan: Option<Vec<String>>,
}

#[derive(Args)]
struct OracleCheckArgs {
    #[command(flatten)]
    trap: TrapArgs,
    #[command(flatten)]
    io: IoArgs,
    /// Per-mode Fock cutoff [default: prepared phonons + 6]
    #[arg(long)]
    cutoff: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Law {
    /// omega_s grows with the square root of time
    Sqrt,
    /// omega_s grows linearly in time
    Linear,
    /// omega_s held constant
    Constant,
}

impl Law {
    fn as_str(self) -> &'static str {
        match self {
            Law::Sqrt => "sqrt",
            Law::Linear => "linear",
            Law::Constant => "constant",
        }
    }
}

impl std::str::FromStr for Law {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sqrt" => Ok(Law::Sqrt),
            "linear" => Ok(Law::Linear),
            "constant" => Ok(Law::Constant),
            other => Err(format!("unknown schedule law `{other}`")),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Equilibrium(args) => commands::equilibrium(args),
        Command::Spectrum(args) => commands::spectrum(args),
        Command::Observables(args) => commands::observables_cmd(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::PhaseDiagram(args) => commands::phase_diagram(args),
        Command::OracleCheck(args) => commands::oracle_check(args),
    };
    match outcome {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code);
        }
    }
}

impl From<Law> for ionchain::ScheduleLaw {
    fn from(law: Law) -> Self {
        match law {
            Law::Sqrt => ionchain::ScheduleLaw::SqrtTime,
            Law::Linear => ionchain::ScheduleLaw::Linear,
            Law::Constant => ionchain::ScheduleLaw::Constant,
        }
    }
}
