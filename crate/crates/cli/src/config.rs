//! Argument parsing and the validated run configuration.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use foliation_core::SpinStructure;

#[derive(Debug, Parser)]
#[command(
    name = "foliation-lab",
    version,
    about = "Basic Dirac spectra and curvature bounds for Riemannian flows"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectrum of a basic operator on a torus flow.
    Spectrum(SpectrumArgs),
    /// Compare spinor and forms spectra of two bundle-like metrics.
    Invariance(InvarianceArgs),
    /// Eigenvalue lower bounds for the S³ flows.
    Bounds(BoundsArgs),
    /// Run residual checks and emit a verification bundle.
    Verify(VerifyArgs),
    /// Many spectra, bounds or seeded invariance checks, one file each.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Torus,
    S3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OperatorKind {
    /// `D_b` on basic spinors
    Spinor,
    /// `D_b` on basic forms
    Forms,
    /// `D_b²` on basic forms
    FormsSquared,
    /// `Δ_b` on functions
    Laplacian,
    /// `Δ_b` on 1-forms
    LaplacianOneForms,
}

impl OperatorKind {
    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::Spinor => "spinor",
            OperatorKind::Forms => "forms",
            OperatorKind::FormsSquared => "forms-squared",
            OperatorKind::Laplacian => "laplacian",
            OperatorKind::LaplacianOneForms => "laplacian-one-forms",
        }
    }

    /// Squared operators are trusted up to the square of the grid window.
    pub fn is_second_order(self) -> bool {
        !matches!(self, OperatorKind::Spinor | OperatorKind::Forms)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spin {
    Trivial,
    Nontrivial,
}

impl From<Spin> for SpinStructure {
    fn from(s: Spin) -> Self {
        match s {
            Spin::Trivial => SpinStructure::Trivial,
            Spin::Nontrivial => SpinStructure::Nontrivial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum CheckName {
    Invariance,
    Kappa,
    Conjugation,
    Scal,
    Lichnerowicz,
    Laplacian,
}

impl CheckName {
    pub fn needs_pair(self) -> bool {
        matches!(
            self,
            CheckName::Invariance
                | CheckName::Kappa
                | CheckName::Conjugation
                | CheckName::Laplacian
        )
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Directory for report files; reports go to stdout when omitted.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long, value_enum, default_value = "torus")]
    pub model: Model,
    #[arg(long)]
    pub profile: PathBuf,
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    /// Largest |λ| reported; defaults to the trusted window grid/8.
    #[arg(long)]
    pub window: Option<f64>,
    #[arg(long, value_enum, default_value = "spinor")]
    pub operator: OperatorKind,
    #[arg(long, value_enum, default_value = "trivial")]
    pub spin: Spin,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct InvarianceArgs {
    #[arg(long, value_enum, default_value = "torus")]
    pub model: Model,
    #[arg(long, num_args = 2, required = true)]
    pub profiles: Vec<PathBuf>,
    #[arg(long, default_value_t = 128)]
    pub grid: usize,
    #[arg(long)]
    pub window: Option<f64>,
    #[arg(long, value_enum, default_value = "trivial")]
    pub spin: Spin,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, value_enum, default_value = "s3")]
    pub model: Model,
    #[arg(long = "r", num_args = 1.., required = true)]
    pub r: Vec<f64>,
    /// Samples of `s ∈ [0,1]` before golden-section refinement.
    #[arg(long, default_value_t = 1000)]
    pub resolution: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "torus")]
    pub model: Model,
    /// Run every check that applies to the given profiles.
    #[arg(long, conflicts_with = "check")]
    pub all: bool,
    #[arg(long, value_enum, num_args = 1..)]
    pub check: Vec<CheckName>,
    #[arg(long, num_args = 1..=2, required = true)]
    pub profiles: Vec<PathBuf>,
    #[arg(long, default_value_t = 128)]
    pub grid: usize,
    #[arg(long)]
    pub window: Option<f64>,
    #[arg(long, value_enum, default_value = "trivial")]
    pub spin: Spin,
    #[arg(long, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub model: Model,
    /// Torus: profiles whose spectra are swept over `--grids`.
    #[arg(long, num_args = 1..)]
    pub profiles: Vec<PathBuf>,
    #[arg(long, num_args = 1.., default_values_t = [64usize])]
    pub grids: Vec<usize>,
    #[arg(long)]
    pub window: Option<f64>,
    #[arg(long, value_enum, default_value = "spinor")]
    pub operator: OperatorKind,
    #[arg(long, value_enum, default_value = "trivial")]
    pub spin: Spin,
    /// Torus: seeded random profile pairs run through the invariance checks.
    #[arg(long, default_value_t = 0)]
    pub random_pairs: usize,
    /// Overrides FOLIATION_LAB_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
    /// S3: explicit flow parameters.
    #[arg(long = "r", num_args = 1..)]
    pub r: Vec<f64>,
    /// S3: `MIN MAX COUNT` logarithmic grid of flow parameters.
    #[arg(long, num_args = 3, value_names = ["MIN", "MAX", "COUNT"])]
    pub r_log: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub resolution: usize,
    #[arg(long)]
    pub output_dir: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Spectrum,
    Invariance,
    Bounds,
    Verify,
    Sweep,
}

/// Everything a command needs, checked once up front.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub model: Model,
    pub grid_size: usize,
    /// Extra grid sizes for torus sweeps; always contains `grid_size`.
    pub grid_sizes: Vec<usize>,
    pub window: f64,
    pub profile_paths: Vec<PathBuf>,
    pub r_values: Vec<f64>,
    pub output_dir: Option<PathBuf>,
    pub format: Format,
    pub operator: OperatorKind,
    pub spin: SpinStructure,
    pub resolution: usize,
    pub checks: Vec<CheckName>,
    pub random_pairs: usize,
    pub seed: Option<u64>,
}

/// A configuration problem, reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn config_err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

impl RunConfig {
    fn base(command: CommandKind, model: Model, format: Format) -> Self {
        RunConfig {
            command,
            model,
            grid_size: 64,
            grid_sizes: vec![64],
            window: 8.0,
            profile_paths: Vec::new(),
            r_values: Vec::new(),
            output_dir: None,
            format,
            operator: OperatorKind::Spinor,
            spin: SpinStructure::Trivial,
            resolution: 1000,
            checks: Vec::new(),
            random_pairs: 0,
            seed: None,
        }
    }

    pub fn from_cli(cli: Cli) -> Result<Self, ConfigError> {
        let config = match cli.command {
            Command::Spectrum(a) => RunConfig {
                grid_size: a.grid,
                grid_sizes: vec![a.grid],
                window: a.window.unwrap_or(default_window(a.grid, a.operator)),
                profile_paths: vec![a.profile],
                output_dir: a.output.output_dir,
                operator: a.operator,
                spin: a.spin.into(),
                ..Self::base(CommandKind::Spectrum, a.model, a.output.format)
            },
            Command::Invariance(a) => RunConfig {
                grid_size: a.grid,
                grid_sizes: vec![a.grid],
                window: a
                    .window
                    .unwrap_or(default_window(a.grid, OperatorKind::Spinor)),
                profile_paths: a.profiles,
                output_dir: a.output.output_dir,
                spin: a.spin.into(),
                ..Self::base(CommandKind::Invariance, a.model, a.output.format)
            },
            Command::Bounds(a) => RunConfig {
                r_values: a.r,
                resolution: a.resolution,
                output_dir: a.output.output_dir,
                ..Self::base(CommandKind::Bounds, a.model, a.output.format)
            },
            Command::Verify(a) => {
                let mut checks = if a.all {
                    vec![
                        CheckName::Invariance,
                        CheckName::Kappa,
                        CheckName::Conjugation,
                        CheckName::Scal,
                        CheckName::Lichnerowicz,
                        CheckName::Laplacian,
                    ]
                } else {
                    a.check
                };
                checks.sort();
                checks.dedup();
                if checks.is_empty() {
                    return config_err("verify needs --all or at least one --check");
                }
                RunConfig {
                    grid_size: a.grid,
                    grid_sizes: vec![a.grid],
                    window: a
                        .window
                        .unwrap_or(default_window(a.grid, OperatorKind::Spinor)),
                    profile_paths: a.profiles,
                    output_dir: a.output_dir,
                    spin: a.spin.into(),
                    checks,
                    ..Self::base(CommandKind::Verify, a.model, a.format)
                }
            }
            Command::Sweep(a) => {
                let mut r_values = a.r;
                if !a.r_log.is_empty() {
                    r_values.extend(log_grid(a.r_log[0], a.r_log[1], a.r_log[2])?);
                }
                let grid_size = a.grids.iter().copied().max().unwrap_or(64);
                let smallest = a.grids.iter().copied().min().unwrap_or(64);
                RunConfig {
                    grid_size,
                    grid_sizes: a.grids,
                    window: a.window.unwrap_or(default_window(smallest, a.operator)),
                    profile_paths: a.profiles,
                    r_values,
                    output_dir: Some(a.output_dir),
                    operator: a.operator,
                    spin: a.spin.into(),
                    resolution: a.resolution,
                    random_pairs: a.random_pairs,
                    seed: a.seed,
                    ..Self::base(CommandKind::Sweep, a.model, a.format)
                }
            }
        };
        config.validate()?;
        Ok(config)
    }

    /// Largest `|λ|` the grid resolves for this configuration's operator.
    pub fn trusted_window(&self, grid_size: usize) -> f64 {
        default_window(grid_size, self.operator)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for &n in &self.grid_sizes {
            if n < 8 || n % 2 != 0 {
                return config_err(format!("--grid must be even and >= 8, got {n}"));
            }
        }
        if !(self.window.is_finite() && self.window > 0.0) {
            return config_err(format!("--window must be positive, got {}", self.window));
        }
        let uses_grid = self.model == Model::Torus
            && (self.command != CommandKind::Sweep
                || !self.profile_paths.is_empty()
                || self.random_pairs > 0);
        if uses_grid {
            for &n in &self.grid_sizes {
                let trusted = self.trusted_window(n);
                if self.window > trusted {
                    return config_err(format!(
                        "--window {} exceeds the trusted window {trusted} of a {n}-point grid",
                        self.window
                    ));
                }
            }
        }
        if let Some(r) = self.r_values.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return config_err(format!("--r values must be > 0, got {r}"));
        }
        if self.resolution < 100 {
            return config_err(format!(
                "--resolution must be >= 100, got {}",
                self.resolution
            ));
        }
        match (self.command, self.model) {
            (CommandKind::Bounds, Model::Torus) => {
                config_err("bounds are available for --model s3 only")
            }
            (CommandKind::Spectrum | CommandKind::Invariance | CommandKind::Verify, Model::S3) => {
                config_err("--model s3 supports the bounds and sweep commands only")
            }
            (CommandKind::Sweep, Model::S3) if self.r_values.is_empty() => {
                config_err("an s3 sweep needs --r or --r-log")
            }
            (CommandKind::Sweep, Model::Torus)
                if self.profile_paths.is_empty() && self.random_pairs == 0 =>
            {
                config_err("a torus sweep needs --profiles or --random-pairs")
            }
            (CommandKind::Verify, _)
                if self.profile_paths.len() < 2 && self.checks.iter().any(|c| c.needs_pair()) =>
            {
                config_err("pair checks need two --profiles")
            }
            _ => Ok(()),
        }
    }
}

fn default_window(grid: usize, operator: OperatorKind) -> f64 {
    let w = grid as f64 / 8.0;
    if operator.is_second_order() {
        w * w
    } else {
        w
    }
}

fn log_grid(min: f64, max: f64, count: f64) -> Result<Vec<f64>, ConfigError> {
    if !(min > 0.0 && max >= min && count >= 1.0 && count.fract() == 0.0) {
        return config_err(format!(
            "--r-log needs 0 < MIN <= MAX and an integer COUNT >= 1, got {min} {max} {count}"
        ));
    }
    let count = count as usize;
    if count == 1 {
        return Ok(vec![min]);
    }
    let ratio = (max / min).ln();
    Ok((0..count)
        .map(|i| min * (ratio * i as f64 / (count - 1) as f64).exp())
        .collect())
}
