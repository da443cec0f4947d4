use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use super::{
    parse_geometry, parse_norm_tag, read_json, read_matrix, write_approx_csv, write_hz_csv,
    write_jackson_csv, write_json, write_matrix, write_profile_csv, HzProbeRow,
};
use crate::approximation::{approx_profile, approx_space_norm_of, jackson_profile, PExponent};
use crate::error::{DecayError, Result};
use crate::experiments::{generate, run_experiment, ExperimentConfig, GeneratorKind, GeneratorSpec};
use crate::matrix_core::Metric;
use crate::norms::{diagonal_profile, norm, NormTag, PerDiagonal};
use crate::smoothness::{
    derivation_power, hz_norm, probe_values, HZParams, MultiIndex, TGrid, DEFAULT_DYADIC_LEVELS,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Perturbation size used by `generate` when no spec file is given.
const DEFAULT_EPSILON: f64 = 0.5;

#[derive(Debug, Parser)]
#[command(name = "offdiag", version, about = "Off-diagonal decay norms, smoothness and inversion experiments")]
pub struct Cli {
    /// Only print errors on the diagnostic stream.
    #[arg(long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    /// Norm tag, e.g. `jaffard:2.5`, `cd:0`, `weighted:schur:0:poly:1`.
    #[arg(long, value_parser = parse_norm_tag)]
    pub norm: NormTag,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the norm of a matrix.
    Norm {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        norm: NormArgs,
    },
    /// Write the side-diagonal profile (largest entry per diagonal) as CSV.
    Profile {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the banded approximation errors `E_N` as CSV.
    Approx {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        norm: NormArgs,
        #[arg(long, default_value = "inf", value_parser = parse_metric)]
        metric: Metric,
        /// Largest bandwidth written.
        #[arg(long)]
        max_band: Option<usize>,
        /// Also print the approximation-space norm of order `r`.
        #[arg(long)]
        r: Option<f64>,
        /// Exponent `p` of that norm (`inf` allowed).
        #[arg(long, default_value = "inf")]
        p: PExponent,
        /// Also write `<stem>_jackson.csv` using a dyadic grid of this depth.
        #[arg(long)]
        grid_levels: Option<u32>,
    },
    /// Print the Hölder-Zygmund norm and optionally write the probe breakdown.
    Hz {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        norm: NormArgs,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = DEFAULT_DYADIC_LEVELS)]
        grid_levels: u32,
    },
    /// Invert a matrix and write the inverse.
    Invert {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a matrix from a generator spec, or a random Jaffard-class
    /// perturbation of the identity from the geometry flags.
    Generate {
        #[arg(long, conflicts_with_all = ["geometry", "r"])]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// `torus:<N>` or `window:<n>`.
        #[arg(long, required_unless_present = "config")]
        geometry: Option<String>,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, required_unless_present = "config")]
        r: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run an experiment config and write its report.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Replace the configured seed list by this single seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn parse_metric(s: &str) -> std::result::Result<Metric, String> {
    match s {
        "one" => Ok(Metric::OneNorm),
        "inf" => Ok(Metric::InfNorm),
        other => Err(format!("expected one or inf, found {other:?}")),
    }
}

/// Execute a parsed command line and return the process exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_computational() {
                EXIT_COMPUTATION
            } else {
                EXIT_USAGE
            }
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Norm { input, norm } => cmd_norm(&input, &norm.norm),
        Command::Profile { input, out } => cmd_profile(&input, &out),
        Command::Approx {
            input,
            out,
            norm,
            metric,
            max_band,
            r,
            p,
            grid_levels,
        } => cmd_approx(&input, &out, &norm.norm, metric, max_band, r, p, grid_levels),
        Command::Hz {
            input,
            out,
            norm,
            r,
            grid_levels,
        } => cmd_hz(&input, out.as_deref(), &norm.norm, r, grid_levels),
        Command::Invert { input, out } => cmd_invert(&input, &out),
        Command::Generate {
            config,
            out,
            geometry,
            d,
            r,
            seed,
        } => {
            let spec = match config {
                Some(path) => read_json(&path)?,
                None => {
                    let g = parse_geometry(geometry.as_deref().unwrap_or_default(), d)?;
                    GeneratorSpec::new(
                        g,
                        GeneratorKind::JaffardRandom {
                            r: r.unwrap_or_default(),
                            seed,
                            epsilon: DEFAULT_EPSILON,
                        },
                    )
                }
            };
            cmd_generate(&spec, &out)
        }
        Command::Experiment { config, out, seed } => {
            let mut cfg: ExperimentConfig = read_json(&config)?;
            if let Some(s) = seed {
                override_seed(&mut cfg, s);
            }
            cmd_experiment(&cfg, &out)
        }
    }
}

fn override_seed(cfg: &mut ExperimentConfig, seed: u64) {
    let seeds = match cfg {
        ExperimentConfig::Jaffard(c) => &mut c.seeds,
        ExperimentConfig::Anisotropic(c) => &mut c.seeds,
        ExperimentConfig::BandedApproxInverse(c) => &mut c.seeds,
        ExperimentConfig::HzCd(c) => &mut c.seeds,
        ExperimentConfig::QuotientRule(_) | ExperimentConfig::JacksonBernstein(_) => {
            warn!("--seed has no effect on {} experiments", cfg.kind());
            return;
        }
    };
    *seeds = vec![seed];
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn cmd_norm(input: &Path, tag: &NormTag) -> Result<()> {
    let a = read_matrix(input)?;
    println!("{}", norm(&a, tag)?);
    Ok(())
}

pub fn cmd_profile(input: &Path, out: &Path) -> Result<()> {
    let a = read_matrix(input)?;
    let profile = diagonal_profile(&a, PerDiagonal::MaxEntry)?;
    write_profile_csv(create(out)?, &profile)?;
    info!("wrote {} diagonals to {}", profile.iter().count(), out.display());
    Ok(())
}

fn jackson_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}_jackson.csv"))
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_approx(
    input: &Path,
    out: &Path,
    tag: &NormTag,
    metric: Metric,
    max_band: Option<usize>,
    r: Option<f64>,
    p: PExponent,
    grid_levels: Option<u32>,
) -> Result<()> {
    let a = read_matrix(input)?;
    let mut profile = approx_profile(&a, tag, metric)?;
    if let Some(r) = r {
        println!("{}", approx_space_norm_of(&profile, r, p)?);
    }
    if let Some(limit) = max_band {
        let range = a.geometry().band_range(metric);
        if limit > range {
            return Err(DecayError::BandRange {
                requested: limit,
                range,
            });
        }
        profile.errors.truncate(limit + 1);
    }
    write_approx_csv(create(out)?, &profile)?;
    info!("wrote {} errors ({}) to {}", profile.errors.len(), profile.flag, out.display());
    if let Some(levels) = grid_levels {
        let rows = jackson_profile(&a, tag, &TGrid::dyadic(levels))?;
        let path = jackson_path(out);
        write_jackson_csv(create(&path)?, &rows)?;
        info!("wrote {} Jackson rows to {}", rows.len(), path.display());
    }
    Ok(())
}

pub fn cmd_hz(input: &Path, out: Option<&Path>, tag: &NormTag, r: f64, grid_levels: u32) -> Result<()> {
    let a = read_matrix(input)?;
    let grid = TGrid::targeted(&a, grid_levels);
    let params = HZParams::new(r, tag.clone(), grid)?;
    println!("{}", hz_norm(&a, &params)?);
    if let Some(out) = out {
        let mut rows = Vec::new();
        for alpha in MultiIndex::of_order(a.geometry().dim(), params.k())? {
            let da = derivation_power(&a, &alpha)?;
            for (probe, value) in probe_values(&da, 2, tag, &params.grid)? {
                let scaled = value * probe.norm1.powf(-params.eta());
                rows.push(HzProbeRow {
                    alpha: alpha.to_string(),
                    probe,
                    value,
                    scaled,
                });
            }
        }
        write_hz_csv(create(out)?, a.geometry().dim(), &rows)?;
        info!("wrote {} probes to {}", rows.len(), out.display());
    }
    Ok(())
}

pub fn cmd_invert(input: &Path, out: &Path) -> Result<()> {
    let a = read_matrix(input)?;
    write_matrix(out, &a.invert()?)?;
    info!("wrote inverse to {}", out.display());
    Ok(())
}

pub fn cmd_generate(spec: &GeneratorSpec, out: &Path) -> Result<()> {
    write_matrix(out, &generate(spec)?)?;
    info!("wrote {} matrix to {}", spec.geometry, out.display());
    Ok(())
}

pub fn cmd_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let report = run_experiment(cfg)?;
    write_json(out, &report)?;
    match &report.reason {
        Some(reason) => warn!("{}: failed ({reason})", report.kind),
        None => info!(
            "{}: pass={} in {} ms",
            report.kind, report.pass, report.runtime_ms
        ),
    }
    Ok(())
}
