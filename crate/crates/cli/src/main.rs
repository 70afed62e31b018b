//! `trispec`: command-line front end.
//!
//! Reports are JSON (stdout unless `--report` is given); figure data is CSV.
//! Exit status: 0 when every asserted check passes, 1 when one fails (the
//! failing checks are named on stderr), 2 on bad arguments.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::Sinks;

#[derive(Parser, Debug)]
#[command(name = "trispec", version, about = "Spectral verification toolkit for the equilateral triangle and rational twisted tori")]
struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Write figure data (CSV) here.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Record wall time in the manifest (reports are then no longer byte-reproducible).
    #[arg(long, global = true)]
    timing: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "TRISPEC_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Shells of a torus or the triangle eigenbasis.
    #[command(subcommand)]
    Spectrum(SpectrumCmd),
    /// The 18-tile correspondence between the triangle and the hexagonal torus.
    #[command(subcommand)]
    Tile(TileCmd),
    /// Resonance counts and the L4 bound on shells.
    #[command(subcommand)]
    Zygmund(ZygmundCmd),
    /// Strichartz constants and randomized checks.
    #[command(subcommand)]
    Strichartz(StrichartzCmd),
    /// One-dimensional reduction constants.
    #[command(subcommand)]
    Reduce(ReduceCmd),
    /// Gramian lower bounds for the observability inequality.
    Observe(ObserveArgs),
    /// Runs the invariant suite.
    Selftest(SelftestArgs),
}

#[derive(Subcommand, Debug)]
pub enum SpectrumCmd {
    /// Shells of a torus; CSV rows `n1,n2,level`.
    Torus {
        /// Preset name (identity, hexagonal, skew) or a JSON config file.
        #[arg(long, default_value = "hexagonal")]
        torus: String,
        #[arg(long, default_value_t = 30)]
        max_level: u64,
    },
    /// Triangle eigenfunctions; CSV mode table.
    Triangle {
        #[arg(long, default_value = "neumann")]
        bc: String,
        #[arg(long, default_value_t = 60)]
        max_level: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum TileCmd {
    /// Locates a point `a,b` (coordinates in the basis e, omega) in the tiling.
    Fold {
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        point: [f64; 2],
    },
    /// Norm-transfer and symmetry checks on random triangle fields.
    Check {
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fields use modes from this many lowest levels.
        #[arg(long, default_value_t = 6)]
        levels: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum ZygmundCmd {
    /// The equal-amplitude sequence on the shells `5^n` of the square torus.
    Sharpness {
        #[arg(long, default_value_t = 6)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        brute_force_max: u32,
    },
    /// Random fields on one shell against `(3 / det A) ||u||^4`.
    Bound {
        #[arg(long, default_value = "hexagonal")]
        torus: String,
        #[arg(long)]
        level: u64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Torus,
    Triangle,
}

#[derive(Subcommand, Debug)]
pub enum StrichartzCmd {
    /// Randomized homogeneous and forced runs.
    Check {
        #[arg(long, value_enum, default_value_t = Domain::Torus)]
        domain: Domain,
        /// Torus preset or JSON config (torus domain).
        #[arg(long, alias = "config", default_value = "hexagonal")]
        torus: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fields use frequencies up to this level (torus) or this many levels (triangle).
        #[arg(long, default_value_t = 10)]
        levels: u64,
    },
    /// Exact constant and window.
    Constants {
        #[arg(long, default_value = "hexagonal")]
        torus: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum ReduceCmd {
    /// Lambda, alpha, beta, mu and q0 as exact rationals.
    Constants {
        #[arg(long, default_value = "hexagonal")]
        torus: String,
    },
    /// Residual of the conjugated free equation for random data.
    Flow {
        #[arg(long, default_value = "hexagonal")]
        torus: String,
        /// Wavenumber in units of 2 pi.
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        k: i64,
        #[arg(long, default_value_t = 256)]
        grid: usize,
        #[arg(long, default_value_t = 5)]
        modes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
pub struct ObserveArgs {
    #[arg(long, value_enum, default_value_t = Domain::Triangle)]
    pub domain: Domain,
    #[arg(long, default_value = "hexagonal")]
    pub torus: String,
    #[arg(long, default_value = "neumann")]
    pub bc: String,
    /// Built-in localization: triangle {one, subtriangle, half}; torus {one, hexagon, fat-cantor}; or a preset JSON file.
    #[arg(long, conflicts_with = "a")]
    pub preset: Option<String>,
    /// Localization CSV `x,y,a` on the triangle rule nodes (see --export-nodes).
    #[arg(long)]
    pub a: Option<PathBuf>,
    /// Depth of the triangle rule; by default the shallowest that resolves the modes.
    #[arg(long)]
    pub depth: Option<u32>,
    /// Grid size for torus grid presets.
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    #[arg(long = "T", default_value_t = 1.0)]
    pub t: f64,
    /// Truncation: this many lowest levels.
    #[arg(long, default_value_t = 16)]
    pub levels: usize,
    /// Nested truncations for the profile (comma separated, increasing).
    #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
    pub profile: Vec<usize>,
    /// Writes the triangle rule nodes as a CSV template and exits.
    #[arg(long)]
    pub export_nodes: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SelftestArgs {
    /// Reduced sizes.
    #[arg(long)]
    pub quick: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected `a,b`, got {s:?}"));
    }
    let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok([p(parts[0])?, p(parts[1])?])
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let start = Instant::now();
    let out = match commands::dispatch(cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let sinks = Sinks {
        report: cli.report.as_deref(),
        csv: cli.csv.as_deref(),
        command: std::env::args().skip(1).collect(),
        wall_time: cli.timing.then(|| start.elapsed().as_secs_f64()),
    };
    match report::emit(out, &sinks) {
        Ok(failed) if failed.is_empty() => ExitCode::SUCCESS,
        Ok(failed) => {
            for f in failed {
                eprintln!("check failed: {f}");
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: writing output: {e}");
            ExitCode::from(2)
        }
    }
}
