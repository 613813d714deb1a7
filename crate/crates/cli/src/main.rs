//! `twistlab` command-line front end.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Common, DualityOpts, FileConfig, Format, SchattenOpts, SingularityOpts, SweepOpts};

#[derive(Parser)]
#[command(name = "twistlab", version, about = "Numerical checks for the twisted Laplacian and its Schrödinger propagator")]
struct Cli {
    /// TOML file whose keys mirror the flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gram matrix and eigenrelation of the sampled basis
    VerifyBasis,
    /// Mehler kernel envelope, kernel vs spectral evolution, periodicity
    VerifyKernel,
    /// Schatten norms of W T_S W̄ for random weights W
    SchattenBound(SchattenOpts),
    /// Abel sums against their singular part, and the kernel blow-up rate
    Singularity(SingularityOpts),
    /// Orthonormal-system Strichartz quotients over q and N
    StrichartzSweep(SweepOpts),
    /// Constants on the Schatten and density sides of the duality
    DualityCheck(DualityOpts),
}

fn merge<T: Clone>(cli: Option<T>, file: Option<T>) -> Option<T> {
    cli.or(file)
}

fn run(cli: Cli) -> Result<commands::Outcome, String> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let s = cli.common.resolve(&file.common());
    match cli.command {
        Command::VerifyBasis => commands::verify_basis(&s),
        Command::VerifyKernel => commands::verify_kernel(&s),
        Command::SchattenBound(o) => {
            let f = file.schatten_bound;
            let o = SchattenOpts {
                samples: merge(o.samples, f.samples),
                r: merge(o.r, f.r),
            };
            commands::schatten_bound(&s, &o)
        }
        Command::Singularity(o) => {
            let f = file.singularity;
            let o = SingularityOpts {
                z_re: merge(o.z_re, f.z_re),
                z_im: merge(o.z_im, f.z_im),
                tau: merge(o.tau, f.tau),
                t_min: merge(o.t_min, f.t_min),
                t_max: merge(o.t_max, f.t_max),
                samples: merge(o.samples, f.samples),
            };
            commands::singularity(&s, &o)
        }
        Command::StrichartzSweep(o) => {
            let f = file.strichartz_sweep;
            let o = SweepOpts {
                q: merge(o.q, f.q),
                sizes: merge(o.sizes, f.sizes),
                trials: merge(o.trials, f.trials),
                support: merge(o.support, f.support),
            };
            commands::strichartz_sweep(&s, &o)
        }
        Command::DualityCheck(o) => {
            let f = file.duality_check;
            let o = DualityOpts {
                samples: merge(o.samples, f.samples),
                rounds: merge(o.rounds, f.rounds),
            };
            commands::duality(&s, &o)
        }
    }
    .and_then(|out| {
        let text = match s.format {
            Format::Json => serde_json::to_string_pretty(&out.json).map_err(|e| e.to_string())? + "\n",
            Format::Csv => out.csv.clone(),
        };
        match &s.out {
            Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display()))?,
            None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string())?,
        }
        Ok(out)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let failed: Vec<_> = out.checks.iter().filter(|c| !c.pass).collect();
            if failed.is_empty() {
                return ExitCode::SUCCESS;
            }
            for c in failed {
                eprintln!("check failed: {} = {:e} (limit {:e})", c.name, c.value, c.limit);
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
