//! Command-line surface, the flat key=value config file, and the resolution
//! order: command-line flags win over config file values, which win over
//! built-in defaults. Every resolved value is recorded for the manifest.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "fractal-walk",
    version,
    about = "Quantum walks with a Sierpinski-gasket coin pattern",
    after_help = "All angles are given in degrees. Every subcommand accepts \
                  --config FILE with flat `key = value` lines (keys match the \
                  long flag names with underscores); flags override the file."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Space-time probability carpet plus the coin-pattern bits
    Carpet(CarpetArgs),
    /// Second-moment series m2(t) with a power-law fit
    Spread(SpreadArgs),
    /// Spreading exponent alpha over a grid of coin angles
    AlphaDiagram(AlphaDiagramArgs),
    /// Degree-of-interference matrix mu(x, t)
    Interference(InterferenceArgs),
    /// Mean asymptotic entanglement entropy over a coin-angle grid
    EntropyMap(EntropyMapArgs),
    /// Trace distance between consecutive coin states, with decay fit
    TraceDistance(TraceDistanceArgs),
    /// Check simulated interference against closed-form small-t values
    OracleCheck(OracleCheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Fractal,
    UniformHadamard,
    UniformFourier,
}

impl ModeArg {
    pub fn to_mode(self) -> fractal_walk::Mode {
        match self {
            ModeArg::Fractal => fractal_walk::Mode::Fractal,
            ModeArg::UniformHadamard => fractal_walk::Mode::UniformHadamard,
            ModeArg::UniformFourier => fractal_walk::Mode::UniformFourier,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ModeArg::Fractal => "fractal",
            ModeArg::UniformHadamard => "uniform-hadamard",
            ModeArg::UniformFourier => "uniform-fourier",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Flat key=value config file; flags given here override it
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Directory the data files and manifest are written into
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Data file format
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Worker threads for sweeps and wide updates; 0 forces sequential
    #[arg(long)]
    pub workers: Option<usize>,
}

/// Coin operator selection.
#[derive(Debug, Args)]
pub struct CoinArgs {
    /// Coin assembly: the fractal pattern or one uniform coin everywhere
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Hadamard-family coin angle theta_H, degrees
    #[arg(long, value_name = "DEG")]
    pub theta_h_deg: Option<f64>,
    /// Fourier-family coin angle theta_F, degrees
    #[arg(long, value_name = "DEG")]
    pub theta_f_deg: Option<f64>,
}

/// Initial state and evolution horizon.
#[derive(Debug, Args)]
pub struct StartArgs {
    /// Initial coin polar angle gamma, degrees
    #[arg(long, value_name = "DEG")]
    pub gamma_deg: Option<f64>,
    /// Initial coin phase angle phi, degrees
    #[arg(long, value_name = "DEG")]
    pub phi_deg: Option<f64>,
    /// Starting site of the walker
    #[arg(long)]
    pub x0: Option<i64>,
    /// Number of time steps
    #[arg(long)]
    pub t_max: Option<u64>,
}

/// Power-law fit window and sample budget.
#[derive(Debug, Args)]
pub struct FitArgs {
    /// Lower edge of the fit window (default t_max/100)
    #[arg(long)]
    pub fit_lo: Option<u64>,
    /// Upper edge of the fit window (default t_max)
    #[arg(long)]
    pub fit_hi: Option<u64>,
    /// Logarithmically spaced sample times the fit draws
    #[arg(long)]
    pub fit_samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CarpetArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub coin: CoinArgs,
    #[command(flatten)]
    pub start: StartArgs,
    /// Largest t_max the matrix exporters accept
    #[arg(long)]
    pub cap: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SpreadArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub coin: CoinArgs,
    #[command(flatten)]
    pub start: StartArgs,
    #[command(flatten)]
    pub fit: FitArgs,
}

#[derive(Debug, Args)]
pub struct AlphaDiagramArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub start: StartArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    /// Comma-separated coin angles, degrees; each runs with theta_H=theta_F
    #[arg(long, value_name = "DEG,DEG,...")]
    pub thetas_deg: Option<String>,
}

#[derive(Debug, Args)]
pub struct InterferenceArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub coin: CoinArgs,
    #[command(flatten)]
    pub start: StartArgs,
    /// Largest t_max the matrix exporters accept
    #[arg(long)]
    pub cap: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EntropyMapArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub start: StartArgs,
    /// Coin assembly used at every grid point
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Comma-separated theta_H grid, degrees
    #[arg(long, value_name = "DEG,DEG,...")]
    pub theta_h_degs: Option<String>,
    /// Comma-separated theta_F grid, degrees
    #[arg(long, value_name = "DEG,DEG,...")]
    pub theta_f_degs: Option<String>,
    /// Start of the asymptotic averaging window (default t_max/2)
    #[arg(long)]
    pub t0: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TraceDistanceArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub coin: CoinArgs,
    #[command(flatten)]
    pub start: StartArgs,
    #[command(flatten)]
    pub fit: FitArgs,
}

#[derive(Debug, Args)]
pub struct OracleCheckArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated theta_H grid, degrees
    #[arg(long, value_name = "DEG,DEG,...")]
    pub thetas_deg: Option<String>,
    /// Largest time step compared (the closed forms stop at 5)
    #[arg(long)]
    pub t_max: Option<u64>,
    /// Largest per-site deviation accepted
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Test-harness hook: offset added to every simulated value
    #[arg(long, hide = true, default_value_t = 0.0)]
    pub perturb: f64,
}

/// Values loaded from a `key = value` file.
#[derive(Debug, Default)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::usage(format!("cannot read config file {}: {e}", path.display()))
        })?;
        let mut values = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::usage(format!(
                    "{}:{}: expected `key = value`, got `{line}`",
                    path.display(),
                    lineno + 1
                )));
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

/// Merges flag, file, and default values, keeping a manifest record of what
/// was resolved.
pub struct Resolver {
    file: FileConfig,
    pub manifest: Map<String, Value>,
}

impl Resolver {
    pub fn new(file: FileConfig) -> Self {
        Resolver {
            file,
            manifest: Map::new(),
        }
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, raw: &str) -> Result<T, CliError> {
        raw.parse()
            .map_err(|_| CliError::usage(format!("config key `{key}`: invalid value `{raw}`")))
    }

    /// Resolve one scalar and record it in the manifest.
    fn scalar<T>(&mut self, key: &str, cli: Option<T>, default: T) -> Result<T, CliError>
    where
        T: std::str::FromStr + Clone + Into<Value>,
    {
        let value = match cli {
            Some(v) => v,
            None => match self.file.raw(key) {
                Some(raw) => self.parse(key, raw)?,
                None => default,
            },
        };
        self.manifest.insert(key.to_string(), value.clone().into());
        Ok(value)
    }

    pub fn f64(&mut self, key: &str, cli: Option<f64>, default: f64) -> Result<f64, CliError> {
        self.scalar(key, cli, default)
    }

    pub fn u64(&mut self, key: &str, cli: Option<u64>, default: u64) -> Result<u64, CliError> {
        self.scalar(key, cli, default)
    }

    pub fn i64(&mut self, key: &str, cli: Option<i64>, default: i64) -> Result<i64, CliError> {
        self.scalar(key, cli, default)
    }

    pub fn usize(
        &mut self,
        key: &str,
        cli: Option<usize>,
        default: usize,
    ) -> Result<usize, CliError> {
        let v = match cli {
            Some(v) => v,
            None => match self.file.raw(key) {
                Some(raw) => self.parse(key, raw)?,
                None => default,
            },
        };
        self.manifest.insert(key.to_string(), Value::from(v as u64));
        Ok(v)
    }

    pub fn mode(
        &mut self,
        key: &str,
        cli: Option<ModeArg>,
        default: ModeArg,
    ) -> Result<ModeArg, CliError> {
        let v = match cli {
            Some(v) => v,
            None => match self.file.raw(key) {
                Some(raw) => <ModeArg as ValueEnum>::from_str(raw, true).map_err(|_| {
                    CliError::usage(format!("config key `{key}`: unknown mode `{raw}`"))
                })?,
                None => default,
            },
        };
        self.manifest.insert(key.to_string(), Value::from(v.name()));
        Ok(v)
    }

    pub fn format(
        &mut self,
        key: &str,
        cli: Option<OutputFormat>,
    ) -> Result<OutputFormat, CliError> {
        let v = match cli {
            Some(v) => v,
            None => match self.file.raw(key) {
                Some(raw) => <OutputFormat as ValueEnum>::from_str(raw, true).map_err(|_| {
                    CliError::usage(format!("config key `{key}`: unknown format `{raw}`"))
                })?,
                None => OutputFormat::Csv,
            },
        };
        self.manifest
            .insert(key.to_string(), Value::from(v.extension()));
        Ok(v)
    }

    /// A comma-separated list of angles in degrees.
    pub fn deg_list(
        &mut self,
        key: &str,
        cli: Option<&str>,
        default: &[f64],
    ) -> Result<Vec<f64>, CliError> {
        let parse_list = |raw: &str| -> Result<Vec<f64>, CliError> {
            raw.split(',')
                .map(|s| {
                    let s = s.trim();
                    s.parse::<f64>().map_err(|_| {
                        CliError::usage(format!("`{key}`: invalid angle `{s}` in `{raw}`"))
                    })
                })
                .collect()
        };
        let list = match cli {
            Some(raw) => parse_list(raw)?,
            None => match self.file.raw(key) {
                Some(raw) => parse_list(raw)?,
                None => default.to_vec(),
            },
        };
        if list.is_empty() {
            return Err(CliError::usage(format!("`{key}`: empty angle list")));
        }
        self.manifest
            .insert(key.to_string(), Value::from(list.clone()));
        Ok(list)
    }

    /// Worker count: absent means "use available parallelism".
    pub fn workers(&mut self, cli: Option<usize>) -> Result<fractal_walk::Parallelism, CliError> {
        let v = match cli {
            Some(v) => Some(v),
            None => match self.file.raw("workers") {
                Some(raw) => Some(self.parse("workers", raw)?),
                None => None,
            },
        };
        Ok(match v {
            None => fractal_walk::Parallelism::Auto,
            Some(0) => fractal_walk::Parallelism::Sequential,
            Some(n) => fractal_walk::Parallelism::Workers(n),
        })
    }

    /// Output directory: execution detail, not part of the manifest config.
    pub fn out_dir(&mut self, cli: Option<PathBuf>) -> PathBuf {
        match cli {
            Some(p) => p,
            None => match self.file.raw("out_dir") {
                Some(raw) => PathBuf::from(raw),
                None => PathBuf::from("out"),
            },
        }
    }
}
