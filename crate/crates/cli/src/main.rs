use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, ValueEnum};
use respsim_core::estimation::EstimateMethod;
use respsim_core::response::{parse_axes, parse_grid, run_pipeline, Mode, ModelSource, PipelineArgs};
use respsim_core::Error;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    /// Amplitude estimation (Heisenberg scaling).
    Ae,
    /// Repeated Hadamard tests.
    Direct,
}

/// Linear and third-order optical response from a fermionic model.
#[derive(Debug, Parser)]
#[command(name = "respsim", version)]
#[command(group(ArgGroup::new("source").required(true).args(["model", "toy"])))]
#[command(group(ArgGroup::new("mode").args(["oracle_only", "simulate"])))]
struct Cli {
    /// Integral file with one- and two-electron terms.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Dipole integral file; without it all dipoles are zero.
    #[arg(long, requires = "model")]
    dipoles: Option<PathBuf>,
    /// Built-in model, e.g. `hubbard:t=1,U=2,d=0.5` or `random:n=3,e=2,seed=1`.
    #[arg(long)]
    toy: Option<String>,
    /// Exact sum-over-states evaluation (default).
    #[arg(long)]
    oracle_only: bool,
    /// Bin search plus filtered window estimation.
    #[arg(long)]
    simulate: bool,
    #[arg(long, default_value_t = 0.05)]
    gamma: f64,
    #[arg(long, default_value_t = 0.005)]
    eps: f64,
    /// 1 or 3.
    #[arg(long, default_value_t = 1)]
    order: usize,
    /// Tensor element: two letters for order 1, four for order 3.
    #[arg(long)]
    axes: Option<String>,
    /// `lo:hi:n`; defaults to `0:1.2*max_excitation:241`.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "respsim-out")]
    out: PathBuf,
    /// Order-3 terms: all, eight, two or r1.
    #[arg(long)]
    pathway: Option<String>,
    #[arg(long, value_enum, default_value_t = Method::Ae)]
    method: Method,
    /// Order 3: fixed `w2,w3` while w1 scans the grid.
    #[arg(long, default_value = "0,0")]
    fixed: String,
    #[arg(long, default_value_t = 2)]
    branching: usize,
    /// Search resolution as a fraction of gamma.
    #[arg(long, default_value_t = 0.25)]
    resolution: f64,
    #[arg(long, default_value_t = 0.25)]
    overlap: f64,
    #[arg(long, default_value_t = 0.05)]
    min_amplitude: f64,
}

fn build_args(cli: &Cli) -> Result<PipelineArgs, Error> {
    let source = match (&cli.model, &cli.toy) {
        (Some(path), _) => ModelSource::File { path: path.clone(), dipoles: cli.dipoles.clone() },
        (None, Some(t)) => ModelSource::Toy(t.clone()),
        (None, None) => return Err(Error::Input("one of --model or --toy is required".into())),
    };
    let mut args = PipelineArgs::new(source, cli.out.clone());
    args.mode = if cli.simulate { Mode::Simulate } else { Mode::OracleOnly };
    args.gamma = cli.gamma;
    args.eps = cli.eps;
    args.order = cli.order;
    let default_axes = if cli.order == 1 { "xx" } else { "xxxx" };
    args.axes = parse_axes(cli.axes.as_deref().unwrap_or(default_axes))?;
    args.grid = cli.grid.as_deref().map(parse_grid).transpose()?;
    args.seed = cli.seed;
    args.pathway = cli.pathway.clone();
    args.method = match cli.method {
        Method::Ae => EstimateMethod::AmplitudeEstimation,
        Method::Direct => EstimateMethod::DirectSampling,
    };
    let fixed: Vec<f64> = cli
        .fixed
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Error::Input(format!("--fixed '{}' must be w2,w3", cli.fixed)))?;
    args.fixed = fixed
        .try_into()
        .map_err(|_| Error::Input("--fixed needs exactly two values".into()))?;
    args.branching = cli.branching;
    args.resolution_factor = cli.resolution;
    args.overlap = cli.overlap;
    args.min_amplitude = cli.min_amplitude;
    Ok(args)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Resource(_) => 3,
        Error::Statistical(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_args(&cli).and_then(|args| run_pipeline(&args));
    match result {
        Ok(out) => {
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            if let Some(t) = &out.table {
                println!("{} window estimates", t.entries.len());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("respsim: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
