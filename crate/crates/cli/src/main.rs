mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndwt::ndwt_matrix::{DEFAULT_MAX_ELEMENTS, MAX_ELEMENTS_ENV};
use ndwt::NdwtError;

/// Matrix-based non-decimated wavelet transforms.
#[derive(Parser, Debug)]
#[command(name = "ndwt", version, about)]
pub struct Cli {
    /// Worker threads for independent inputs (batch spectra, a-trous lanes).
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,

    /// Largest number of elements an NDWT matrix may hold.
    #[arg(long, global = true, env = MAX_ELEMENTS_ENV, default_value_t = DEFAULT_MAX_ELEMENTS)]
    pub max_elements: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List the built-in wavelet filters.
    Filters {
        /// Optional `list` verb; listing is the only action.
        #[arg(value_parser = ["list"])]
        action: Option<String>,
        #[arg(long, value_enum, default_value_t = ListFormat::Text)]
        format: ListFormat,
    },
    /// Generate a synthetic signal or image as CSV.
    Gen(GenArgs),
    /// Forward or inverse NDWT of a CSV vector/matrix or coefficient container.
    Transform(TransformArgs),
    /// Hard-threshold denoising.
    Denoise(DenoiseArgs),
    /// Diagonal wavelet spectra and Hurst exponent of an image.
    Spectra(SpectraArgs),
    /// Compressibility of the scale-mixing and standard 2-D transforms.
    Compress(CompressArgs),
    /// Time the matrix path against the a-trous path.
    Bench(BenchArgs),
    /// Run a demonstration pipeline end to end.
    Demo(DemoArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ListFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Doppler,
    Noise,
    Fbm,
    Fbf,
    Smooth,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: GenKind,
    /// Length `M` or shape `MxN`.
    #[arg(long)]
    pub size: String,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Hurst exponent for fbm/fbf.
    #[arg(long)]
    pub hurst: Option<f64>,
    /// Required for the stochastic generators.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Destination CSV; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct FilterArgs {
    #[arg(long, default_value = "haar")]
    pub filter: String,
    #[arg(long)]
    pub filter_rows: Option<String>,
    #[arg(long)]
    pub filter_cols: Option<String>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub depth_rows: Option<usize>,
    #[arg(long)]
    pub depth_cols: Option<usize>,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub shift: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Dims {
    Auto,
    #[value(name = "1d")]
    One,
    #[value(name = "2d")]
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CoefFormat {
    Bin,
    Csv,
}

#[derive(Args, Debug)]
pub struct TransformArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = Direction::Forward)]
    pub direction: Direction,
    #[arg(long, value_enum, default_value_t = Dims::Auto)]
    pub dims: Dims,
    #[command(flatten)]
    pub filters: FilterArgs,
    /// Coefficient format written by a forward transform. `csv` also
    /// writes a `<output>.layout.json` block map.
    #[arg(long, value_enum, default_value_t = CoefFormat::Bin)]
    pub format: CoefFormat,
    /// Block map for an inverse transform of CSV coefficients.
    #[arg(long)]
    pub layout: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    /// sqrt(2 ln m) sigma
    Text,
    /// sqrt(2 ln(p m)) sigma
    Demo,
}

#[derive(Args, Debug)]
pub struct DenoiseArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long, default_value = "haar")]
    pub filter: String,
    /// Defaults to floor(log2 m) - 1.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub shift: i64,
    #[arg(long, value_enum, default_value_t = Rule::Text)]
    pub rule: Rule,
    /// Known noise level; estimated from the finest level when omitted.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// JSON report path; printed to stdout when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SpectraArgs {
    /// CSV or PGM image.
    #[arg(long, short, conflicts_with = "fbf_hurst")]
    pub input: Option<PathBuf>,
    /// Analyse generated fractional Brownian fields with this Hurst exponent.
    #[arg(long, requires = "seed")]
    pub fbf_hurst: Option<f64>,
    /// Field shape for generated input.
    #[arg(long, default_value = "256x256")]
    pub size: String,
    /// Number of generated fields, seeds `seed..seed+seeds`.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "haar")]
    pub filter: String,
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
    /// Inclusive level range `a:b` for the regression.
    #[arg(long)]
    pub fit_range: Option<String>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompressArgs {
    /// CSV or PGM image; the built-in smooth test image when omitted.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Shape of the built-in test image.
    #[arg(long, default_value = "64x64")]
    pub size: String,
    #[arg(long, default_value = "haar")]
    pub filter: String,
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    /// Only print the d-type proportions for the depth.
    #[arg(long)]
    pub proportions: bool,
    #[arg(long, default_value_t = 101)]
    pub lorenz_samples: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Comma-separated shapes, e.g. `256x256,512`.
    #[arg(long, default_value = "256x256")]
    pub sizes: String,
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    /// Comma-separated filter names.
    #[arg(long, default_value = "haar")]
    pub filters: String,
    #[arg(long, default_value_t = 100)]
    pub repetitions: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DemoName {
    LenaLike,
    Doppler,
}

#[derive(Args, Debug)]
pub struct DemoArgs {
    #[arg(value_enum)]
    pub name: DemoName,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
    /// Noise seed for the Doppler demo.
    #[arg(long, default_value_t = commands::DOPPLER_DEMO_SEED)]
    pub seed: u64,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Core(NdwtError),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(NdwtError::ResourceLimit { .. }) => 4,
            CliError::Data(_) | CliError::Core(_) => 3,
        }
    }
}

impl From<NdwtError> for CliError {
    fn from(e: NdwtError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(NdwtError::Io(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(format!("JSON: {e}"))
    }
}

fn configure_threads(jobs: usize) -> Result<(), CliError> {
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    {
        // a second call in one process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    let result = configure_threads(cli.jobs).and_then(|_| commands::run(&cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
