use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

#[derive(Debug, Parser)]
#[command(
    name = "chargedrop",
    version,
    about = "Equilibrium droplets of elliptic potentials with a point charge"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Directory for all output files.
    #[arg(
        long,
        global = true,
        env = "CHARGEDROP_OUT_DIR",
        default_value = "chargedrop-out"
    )]
    pub out_dir: PathBuf,

    /// Format of curve and point data; reports are always JSON.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Run single-threaded so repeated runs give identical bytes.
    #[arg(long, global = true)]
    pub deterministic: bool,

    /// Size of the worker pool used by Fekete and verification.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub tau: f64,

    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub c: f64,

    /// Charge location as `re,im` or `re`.
    #[arg(long, default_value = "0", value_parser = parse_complex, allow_hyphen_values = true)]
    pub p: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoordsArg {
    Symmetric,
    Squared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnsembleArg {
    Complex,
    Symplectic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PotentialArg {
    /// Symmetric coordinates.
    Q,
    /// Squared coordinates.
    Qhat,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Boundary curves, phase, area and map data of the droplet.
    Droplet {
        #[command(flatten)]
        model: ModelArgs,
        /// Samples per boundary parametrization.
        #[arg(long, default_value_t = 1024)]
        n: usize,
    },
    /// Fekete points and their comparison with the droplet.
    Fekete {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = EnsembleArg::Complex)]
        ensemble: EnsembleArg,
        #[arg(long, value_enum, default_value_t = PotentialArg::Q)]
        potential: PotentialArg,
        #[arg(long, default_value_t = 20_000)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Variational equality and inequality, plus the mass-one identity.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        /// Interior grid size per axis.
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        rays: usize,
        /// Defaults to squared coordinates before the transition, symmetric after.
        #[arg(long, value_enum)]
        coords: Option<CoordsArg>,
    },
    /// Density of the one-dimensional limit `x²/2 − 2c log|x − p|`.
    Spectrum1d {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        c: f64,
        #[arg(long, default_value = "0", value_parser = parse_complex, allow_hyphen_values = true)]
        p: Complex64,
        #[arg(long, default_value_t = 1024)]
        n: usize,
    },
    /// Moments of the equilibrium measure, closed form and series.
    Moments {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 4)]
        kmax: usize,
        #[arg(long, value_enum, default_value_t = CoordsArg::Symmetric)]
        coords: CoordsArg,
    },
}

/// Parses `re,im` or a bare real number.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|e| format!("bad number {t:?}: {e}"))
    };
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(parse(re)?, parse(im)?)),
        None => Ok(Complex64::new(parse(s)?, 0.0)),
    }
}
