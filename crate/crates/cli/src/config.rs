use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to the defaults in [`Settings`].
#[derive(Clone, Debug, Default, Args)]
pub struct Common {
    /// Complex dimension n
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Largest |μ|, |ν| kept in the truncation
    #[arg(long, global = true)]
    pub kmax: Option<usize>,
    /// Grid points per real axis (even, at least 8)
    #[arg(long = "grid-m", global = true)]
    pub grid_m: Option<usize>,
    /// Grid half-width L (default grows with kmax)
    #[arg(long = "grid-l", global = true)]
    pub grid_l: Option<f64>,
    /// Time nodes on [−π, π)
    #[arg(long, global = true)]
    pub nt: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (standard output when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Clone, Debug)]
pub struct Settings {
    pub n: usize,
    pub kmax: usize,
    pub grid_m: usize,
    pub grid_l: Option<f64>,
    pub nt: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Common {
    pub fn resolve(&self, file: &Common) -> Settings {
        Settings {
            n: self.n.or(file.n).unwrap_or(1),
            kmax: self.kmax.or(file.kmax).unwrap_or(4),
            grid_m: self.grid_m.or(file.grid_m).unwrap_or(48),
            grid_l: self.grid_l.or(file.grid_l),
            nt: self.nt.or(file.nt).unwrap_or(32),
            seed: self.seed.or(file.seed).unwrap_or(0),
            out: self.out.clone().or_else(|| file.out.clone()),
            format: self.format.or(file.format).unwrap_or_default(),
        }
    }
}

#[derive(Clone, Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SchattenOpts {
    /// Number of random weights
    #[arg(long)]
    pub samples: Option<usize>,
    /// Schatten exponent (default 2(n+1))
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(Clone, Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SingularityOpts {
    #[arg(long = "z-re", allow_hyphen_values = true)]
    pub z_re: Option<f64>,
    #[arg(long = "z-im", allow_hyphen_values = true)]
    pub z_im: Option<f64>,
    /// Abel damping τ
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long = "t-min")]
    pub t_min: Option<f64>,
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    /// Number of log-spaced t samples
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SweepOpts {
    /// Comma-separated q values
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<f64>>,
    /// Comma-separated system sizes N
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// saturating or fixed
    #[arg(long)]
    pub support: Option<String>,
}

#[derive(Clone, Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct DualityOpts {
    /// Random weights and random systems, each
    #[arg(long)]
    pub samples: Option<usize>,
    /// Alternating pairing rounds from each start
    #[arg(long)]
    pub rounds: Option<usize>,
}

/// The TOML config: common keys at top level, subcommand keys in tables
/// named after the subcommand.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub n: Option<usize>,
    pub kmax: Option<usize>,
    pub grid_m: Option<usize>,
    pub grid_l: Option<f64>,
    pub nt: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    #[serde(default)]
    pub schatten_bound: SchattenOpts,
    #[serde(default)]
    pub singularity: SingularityOpts,
    #[serde(default)]
    pub strichartz_sweep: SweepOpts,
    #[serde(default)]
    pub duality_check: DualityOpts,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn common(&self) -> Common {
        Common {
            n: self.n,
            kmax: self.kmax,
            grid_m: self.grid_m,
            grid_l: self.grid_l,
            nt: self.nt,
            seed: self.seed,
            out: self.out.clone(),
            format: self.format,
        }
    }
}
