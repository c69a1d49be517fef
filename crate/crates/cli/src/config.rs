//! Flags, the optional TOML config file, and their merge.
//!
//! Every flag can also be given as a top-level key in the config file, using
//! the flag name with dashes replaced by underscores. Flags win.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use volterra_core::{ClassifyConfig, LadderConfig, OperatorKind, SpacePair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "volterra", version, about = "Boundedness and compactness of Volterra-type operators on weighted H∞ spaces")]
pub struct Cli {
    /// TOML file supplying defaults for any flag
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output format
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output here instead of stdout
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Last rung of the radial ladder (at most 40)
    #[arg(long, global = true)]
    pub k_max: Option<usize>,
    /// Angles in the ladder sweep (power of two, at least 64)
    #[arg(long, global = true)]
    pub angles: Option<usize>,
    /// Gauss-Legendre nodes per quadrature panel
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every applicable criterion for one symbol and operator
    Classify(CaseArgs),
    /// Classify the ground-truth table with norm bounds and probes
    Report,
    /// Weighted sup norm of a symbol, optionally with its Bloch norm
    Norm(NormArgs),
    /// Empirical lower bound and split upper bound for the operator norm
    Opnorm(OpnormArgs),
    /// Images of normalized monomials under the operator
    Probe(ProbeArgs),
    /// Density constant of the sector map
    Lemma2(SectorArgs),
    /// Registered symbols and their metadata
    List,
}

#[derive(Debug, Clone, Args)]
pub struct CaseArgs {
    #[arg(long)]
    pub symbol: Option<String>,
    /// Tg or Sg
    #[arg(long)]
    pub op: Option<OperatorKind>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct NormArgs {
    #[arg(long)]
    pub symbol: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Also report the Bloch norm and the log-derivative surrogate
    #[arg(long)]
    pub bloch: bool,
}

#[derive(Debug, Clone, Args)]
pub struct OpnormArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    /// Split point of the upper bound
    #[arg(long)]
    pub t0: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    /// Largest monomial degree
    #[arg(long)]
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SectorArgs {
    /// Aperture of the sampled sector
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Aperture of the mapped sector
    #[arg(long)]
    pub eta: Option<f64>,
    /// Bisector angle
    #[arg(long)]
    pub theta: Option<f64>,
}

/// Contents of the config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub k_max: Option<usize>,
    pub angles: Option<usize>,
    pub nodes: Option<usize>,
    pub symbol: Option<String>,
    pub op: Option<String>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub t0: Option<f64>,
    pub n_max: Option<usize>,
    pub gamma: Option<f64>,
    pub eta: Option<f64>,
    pub theta: Option<f64>,
    pub bloch: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }
}

/// Flags merged over the config file.
#[derive(Debug, Clone)]
pub struct Settings {
    pub format: Format,
    pub output: Option<PathBuf>,
    pub classify: ClassifyConfig,
    pub file: FileConfig,
}

fn require<T>(value: Option<T>, name: &str) -> Result<T, String> {
    value.ok_or_else(|| format!("missing --{name}"))
}

impl Settings {
    pub fn resolve(cli: &Cli) -> Result<Self, String> {
        let file = match &cli.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let mut ladder = LadderConfig::default();
        if let Some(k) = cli.k_max.or(file.k_max) {
            if !(ladder.k_min..=40).contains(&k) {
                return Err(format!("k-max must lie in {}..=40, got {k}", ladder.k_min));
            }
            ladder.k_max = k;
        }
        if let Some(m) = cli.angles.or(file.angles) {
            if m < 64 || !m.is_power_of_two() {
                return Err(format!("angles must be a power of two of at least 64, got {m}"));
            }
            ladder.angles = m;
        }
        if let Some(n) = cli.nodes.or(file.nodes) {
            if !(2..=64).contains(&n) {
                return Err(format!("nodes must lie in 2..=64, got {n}"));
            }
            ladder.quad.nodes = n;
        }
        Ok(Settings {
            format: cli.format.or(file.format).unwrap_or(Format::Text),
            output: cli.output.clone().or(file.output.clone()),
            classify: ClassifyConfig {
                ladder,
                ..ClassifyConfig::default()
            },
            file,
        })
    }

    pub fn symbol(&self, flag: &Option<String>) -> Result<String, String> {
        require(flag.clone().or(self.file.symbol.clone()), "symbol")
    }

    pub fn op(&self, flag: Option<OperatorKind>) -> Result<OperatorKind, String> {
        match flag {
            Some(op) => Ok(op),
            None => require(self.file.op.as_deref(), "op")?.parse(),
        }
    }

    pub fn pair(&self, alpha: Option<f64>, beta: Option<f64>) -> Result<SpacePair, String> {
        let alpha = require(alpha.or(self.file.alpha), "alpha")?;
        let beta = require(beta.or(self.file.beta), "beta")?;
        SpacePair::new(alpha, beta).map_err(|e| e.to_string())
    }

    pub fn alpha(&self, flag: Option<f64>) -> Result<f64, String> {
        let alpha = require(flag.or(self.file.alpha), "alpha")?;
        SpacePair::new(alpha, 0.0).map(|p| p.alpha).map_err(|e| e.to_string())
    }

    pub fn case(&self, args: &CaseArgs) -> Result<(String, OperatorKind, SpacePair), String> {
        Ok((self.symbol(&args.symbol)?, self.op(args.op)?, self.pair(args.alpha, args.beta)?))
    }
}
