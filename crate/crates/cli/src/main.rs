mod commands;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

const AFTER_HELP: &str = "\
Exit codes:
  0  success
  2  usage error (bad flags or option values)
  3  schema violation (malformed or unsupported input document)
  4  numeric or solver failure (invalid data, inconsistent inputs)
  5  I/O failure

Environment:
  DMT_THREADS  maximum number of worker threads";

#[derive(Debug, Parser)]
#[command(name = "dmt", version, about = "Decorated merge trees: build, compare, render", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Inf,
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ComplexArg {
    Rips,
    Cech,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistanceMode {
    Tree,
    Dmt,
    Bottleneck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatrixMetric {
    Tree,
    Dmt,
    Bottleneck0,
    Bottleneck1,
    Max01,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentKind {
    Scalar,
    Figure1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RenderFormat {
    Dot,
    Svg,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Frank-Wolfe iteration cap.
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_iters: u64,
    /// Relative objective decrease at which Frank-Wolfe stops.
    #[arg(long, default_value_t = 1e-9, value_parser = non_negative)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct DecorationArgs {
    /// Homology degree of the decoration.
    #[arg(long, default_value_t = 1)]
    pub degree: usize,
    /// Also write the barcodes of degrees 0 and 1 to this file.
    #[arg(long)]
    pub barcodes: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Merge tree of a sampled scalar function (CSV: one value column, or t,f).
    ScalarTree {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Lift-decorated merge tree of a point cloud (CSV: one point per row).
    PointcloudDmt {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        decoration: DecorationArgs,
        /// Largest filtration value kept in the complex.
        #[arg(long, default_value_t = f64::INFINITY, value_parser = non_negative)]
        max_radius: f64,
        #[arg(long, value_enum, default_value_t = ComplexArg::Rips)]
        complex: ComplexArg,
    },
    /// Lift-decorated merge tree of a node-weighted graph (graph JSON).
    GraphDmt {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        decoration: DecorationArgs,
        /// Hop bound for edges and triangles of the sublevel complex.
        #[arg(long, default_value_t = 2)]
        hops: usize,
        /// Replace the stored weights by vertex degrees.
        #[arg(long)]
        degree_weights: bool,
    },
    /// Lift-decorated merge tree of a greyscale image (PGM or PNG), intensities scaled to [0, 1].
    ImageDmt {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        decoration: DecorationArgs,
        /// Pixel neighbourhood: 4 or 8.
        #[arg(long, default_value_t = 4, value_parser = connectivity)]
        connectivity: u8,
        #[arg(long, default_value_t = 2)]
        hops: usize,
    },
    /// Sliding-window embedding of a scalar series, then a point-cloud DMT.
    SlidingWindow {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        decoration: DecorationArgs,
        /// Embedding dimension (number of delayed copies).
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
        dim: u64,
        /// Delay, a multiple of the sample spacing.
        #[arg(long, value_parser = positive)]
        tau: f64,
        /// Neighbours used by the density estimate.
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Fraction of densest windows kept.
        #[arg(long, default_value_t = 1.0, value_parser = fraction)]
        keep_fraction: f64,
        #[arg(long, default_value_t = f64::INFINITY, value_parser = non_negative)]
        max_radius: f64,
        #[arg(long, value_enum, default_value_t = ComplexArg::Rips)]
        complex: ComplexArg,
    },
    /// Distance between two inputs; prints one number.
    Distance {
        #[arg(long, value_enum, default_value_t = DistanceMode::Tree)]
        mode: DistanceMode,
        #[arg(long, default_value_t = 0.5, value_parser = positive)]
        mesh: f64,
        #[arg(long, default_value_t = 0.5, value_parser = fraction)]
        zeta: f64,
        #[arg(long, value_enum, default_value_t = NormArg::Inf)]
        norm: NormArg,
        /// Start from the diagonal coupling (needs equal network sizes).
        #[arg(long)]
        identity_init: bool,
        #[command(flatten)]
        solver: SolverArgs,
        /// JSON report; the coupling and objective trace are written beside it.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Coupling CSV path [default: beside --output, else beside A].
        #[arg(long)]
        coupling: Option<PathBuf>,
        a: PathBuf,
        b: PathBuf,
    },
    /// Pairwise distance matrix (CSV) over several inputs.
    Matrix {
        #[arg(long, value_enum)]
        metric: MatrixMetric,
        #[arg(long, default_value_t = 0.5, value_parser = positive)]
        mesh: f64,
        #[arg(long, default_value_t = 0.5, value_parser = fraction)]
        zeta: f64,
        #[arg(long, value_enum, default_value_t = NormArg::Inf)]
        norm: NormArg,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        output: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Reproducible experiments; writes a JSON report.
    Experiment {
        #[arg(value_enum)]
        kind: ExperimentKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
        /// Mesh of the sampling grid (default 0.5 for scalar, 0.25 for figure1).
        #[arg(long, value_parser = positive)]
        mesh: Option<f64>,
        /// Samples per class (scalar).
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        /// Points on the sampling grid (scalar).
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(2..))]
        grid_points: u64,
        /// Circle radius (figure1).
        #[arg(long, default_value_t = 1.0, value_parser = positive)]
        radius: f64,
        /// Coordinate jitter (figure1).
        #[arg(long, default_value_t = 0.0, value_parser = non_negative)]
        noise: f64,
        /// Directory for the per-norm distance matrices (scalar).
        #[arg(long)]
        matrix_dir: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Draw a decorated merge tree.
    Render {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = RenderFormat::Svg)]
        format: RenderFormat,
        /// Bars shorter than this are not drawn.
        #[arg(long, default_value_t = 0.0, value_parser = non_negative)]
        bar_threshold: f64,
        /// Tree structure below this height is collapsed.
        #[arg(long, default_value_t = f64::NEG_INFINITY, allow_hyphen_values = true)]
        tree_threshold: f64,
    },
    /// Check a document against its schema and invariants.
    Validate {
        input: PathBuf,
    },
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("expected a positive finite number, got {s:?}")),
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x >= 0.0 => Ok(x),
        _ => Err(format!("expected a non-negative number, got {s:?}")),
    }
}

fn connectivity(s: &str) -> Result<u8, String> {
    match s {
        "4" => Ok(4),
        "8" => Ok(8),
        _ => Err(format!("expected 4 or 8, got {s:?}")),
    }
}

fn fraction(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if (0.0..=1.0).contains(&x) => Ok(x),
        _ => Err(format!("expected a number in [0, 1], got {s:?}")),
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("DMT_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| output::usage(format!("DMT_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(output::usage("DMT_THREADS must be at least 1").into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<String> {
    configure_threads()?;
    use commands::*;
    match cli.command {
        Command::ScalarTree { input, output } => scalar_tree(&input, &output),
        Command::PointcloudDmt { input, output, decoration, max_radius, complex } => {
            pointcloud(&input, &output, &decoration, max_radius, complex)
        }
        Command::GraphDmt { input, output, decoration, hops, degree_weights } => {
            graph(&input, &output, &decoration, hops, degree_weights)
        }
        Command::ImageDmt { input, output, decoration, connectivity, hops } => {
            image(&input, &output, &decoration, connectivity, hops)
        }
        Command::SlidingWindow { input, output, decoration, dim, tau, k, keep_fraction, max_radius, complex } => {
            let window = WindowArgs { dim: dim as usize, tau, k, keep_fraction, max_radius, complex };
            sliding(&input, &output, &decoration, &window)
        }
        Command::Distance { mode, mesh, zeta, norm, identity_init, solver, output, coupling, a, b } => {
            let opts = TransportArgs { mesh, zeta, norm, identity_init, solver };
            distance(mode, &opts, output.as_deref(), coupling.as_deref(), &a, &b)
        }
        Command::Matrix { metric, mesh, zeta, norm, solver, output, inputs } => {
            let opts = TransportArgs { mesh, zeta, norm, identity_init: false, solver };
            matrix(metric, &opts, &output, &inputs)
        }
        Command::Experiment { kind, seed, output, mesh, samples, grid_points, radius, noise, matrix_dir, solver } => {
            let opts = ExperimentArgs {
                seed,
                mesh,
                samples: samples as usize,
                grid_points: grid_points as usize,
                radius,
                noise,
                solver,
            };
            experiment(kind, &opts, &output, matrix_dir.as_deref())
        }
        Command::Render { input, output, format, bar_threshold, tree_threshold } => {
            render(&input, &output, format, bar_threshold, tree_threshold)
        }
        Command::Validate { input } => validate(&input),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            let (code, kind) = output::classify(&err);
            eprintln!("{}", output::error_line(code, kind, &err));
            ExitCode::from(code)
        }
    }
}
