use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rieszpl::Parity;

mod commands;
mod spec;

use commands::{CheckConfig, Failure, SpectrumConfig};

/// Piecewise-linear trigonometric systems: Gram spectra, exact inner
/// products, decompositions and exact ReLU networks.
///
/// Exit codes: 0 success, 1 verification failure, 2 usage or parse error.
#[derive(Parser)]
#[command(name = "rieszpl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extreme Gram eigenvalues over a doubling ladder of truncations, as CSV.
    GramSpectrum {
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Largest univariate truncation N (dimension 1).
        #[arg(long, default_value_t = 4096)]
        n: u32,
        /// Largest max-norm of the frequencies (dimension 2 and up).
        #[arg(long, default_value_t = 4)]
        max_norm: u32,
        /// Use the unnormalized cosine-like block instead of the full normalized system.
        #[arg(long)]
        raw: bool,
        /// Eigen-residual tolerance.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Number of random Rayleigh quotients checked at the largest truncation.
        #[arg(long, default_value_t = 0)]
        rayleigh: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the full Gram matrix of the largest truncation.
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Exact inner product of two functions, checked against quadrature.
    InnerProduct {
        /// `const`, `C:<index>` or `S:<index>`, e.g. `C:1,2`.
        f: String,
        g: String,
        /// Multiply both non-constant functions by sqrt(3).
        #[arg(long)]
        normalized: bool,
    },
    /// Gershgorin discs of the normalized Gram matrix.
    Gershgorin {
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 256)]
        n: u32,
        #[arg(long, default_value_t = 6)]
        max_norm: u32,
        /// Per-row CSV of centers and radii.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build, evaluate or verify ReLU networks.
    #[command(subcommand)]
    Net(NetCommand),
    /// L2 error of the truncated Moebius decomposition of sqrt(2) cos/sin(2 pi x).
    Decomp {
        #[arg(long, value_enum)]
        target: Target,
        #[arg(long, value_delimiter = ',', default_value = "9,19,49,99")]
        truncations: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Partial Euler products over all primes and over odd primes.
    Euler {
        /// Prime bound.
        #[arg(long, default_value_t = 100_000)]
        n: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// L2 projection onto the normalized system.
    Project {
        /// `cos:<k>`, `sin:<k>`, `member:C:<k>`, `member:S:<k>` or `samples:<file>`.
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 16)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        max_norm: u32,
        /// Full coefficient CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum NetCommand {
    /// Compile `a*C:α | b*S:β` terms into the text network format. Put the
    /// terms after `--` when the first one starts with a minus sign.
    Build {
        #[arg(required = true)]
        terms: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a network file at points such as `0.25` or `0.1,0.7`.
    Eval {
        file: PathBuf,
        #[arg(required = true)]
        points: Vec<String>,
    },
    /// Check width, depth, weight bounds and agreement with the terms.
    Check {
        file: PathBuf,
        #[arg(required = true)]
        terms: Vec<String>,
        /// Uniform grid size in dimension 1.
        #[arg(long, default_value_t = 10_001)]
        grid: usize,
        /// Random sample count in dimension 2 and up.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Cos,
    Sin,
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::GramSpectrum {
            dim,
            n,
            max_norm,
            raw,
            tol,
            rayleigh,
            seed,
            out,
            matrix,
        } => commands::gram_spectrum(&SpectrumConfig {
            dim,
            n,
            max_norm,
            raw,
            tol,
            rayleigh,
            seed,
            out,
            matrix,
        }),
        Command::InnerProduct { f, g, normalized } => commands::inner_product(&f, &g, normalized),
        Command::Gershgorin {
            dim,
            n,
            max_norm,
            out,
        } => commands::gershgorin(dim, n, max_norm, out.as_deref()),
        Command::Net(NetCommand::Build { terms, out }) => {
            commands::net_build(&terms, out.as_deref())
        }
        Command::Net(NetCommand::Eval { file, points }) => commands::net_eval(&file, &points),
        Command::Net(NetCommand::Check {
            file,
            terms,
            grid,
            samples,
            tol,
            seed,
        }) => commands::net_check(
            &file,
            &terms,
            &CheckConfig {
                grid,
                samples,
                tol,
                seed,
            },
        ),
        Command::Decomp {
            target,
            truncations,
            out,
        } => {
            let parity = match target {
                Target::Cos => Parity::CosLike,
                Target::Sin => Parity::SinLike,
            };
            commands::decomp(parity, &truncations, out.as_deref())
        }
        Command::Euler { n, out } => commands::euler(n, out.as_deref()),
        Command::Project {
            target,
            dim,
            n,
            max_norm,
            out,
        } => commands::project(&target, dim, n, max_norm, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
