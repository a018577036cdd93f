use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use extremal_whittle::experiment::{run_experiment, ExperimentConfig};
use extremal_whittle::extremal::{choose_threshold, empirical_extremogram, extremal_periodogram, indicators};
use extremal_whittle::field::{format_float, LatticeField};
use extremal_whittle::gaussian::{VariogramMode, VariogramSpec};
use extremal_whittle::model::{Family, SpectralModel};
use extremal_whittle::pairwise::{pairwise_estimate, DEFAULT_DMAX};
use extremal_whittle::simulate::{simulate_mma, BrSimConfig, BrSimulator, WeightKernel};
use extremal_whittle::stats::RandomStream;
use extremal_whittle::whittle::whittle_estimate;
use extremal_whittle::{Error, Result};

#[derive(Parser)]
#[command(name = "extremal-whittle", version, about = "Extremal spectral estimation for heavy-tailed lattice fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a field and write it as CSV (or binary for a `.bin` path).
    Simulate {
        #[arg(long, value_enum)]
        model: SimModel,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        params: ModelParams,
        /// Poisson terms for the truncated Brown–Resnick simulator.
        #[arg(long, default_value_t = 1000)]
        terms: usize,
        #[arg(long, default_value = "isotropic")]
        mode: VariogramMode,
        #[arg(long)]
        out: PathBuf,
    },
    /// Empirical extremogram on lags with `|h|∞ ≤ hmax`.
    Extremogram {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        hmax: usize,
        /// Report the centered estimator instead of the uncentered one.
        #[arg(long)]
        centered: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extremal periodogram at the Fourier frequencies.
    Periodogram {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Whittle (or pairwise) estimate of the family parameter.
    Estimate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        family: FamilyName,
        #[arg(long, default_value_t = 10)]
        m: u32,
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
        #[command(flatten)]
        params: ModelParams,
        #[arg(long)]
        pairwise: bool,
        #[arg(long, default_value_t = DEFAULT_DMAX)]
        dmax: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a replication study from a TOML config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Minimum of the spectral density over an `R × R` frequency grid.
    CheckSpectral {
        #[arg(long, value_enum)]
        family: FamilyName,
        #[command(flatten)]
        params: ModelParams,
        #[arg(long, default_value_t = 128)]
        resolution: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SimModel {
    Mma,
    BrTruncated,
    BrExact,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyName {
    Br,
    Mma,
}

#[derive(Args)]
struct ModelParams {
    #[arg(long, default_value_t = 0.5)]
    hurst: f64,
    #[arg(long, default_value_t = 2.0)]
    scale: f64,
    #[arg(long, default_value_t = 0.5)]
    phi: f64,
    #[arg(long, default_value_t = 5)]
    k0: u32,
}

impl ModelParams {
    fn family(&self, name: FamilyName) -> Family {
        match name {
            FamilyName::Br => Family::brown_resnick(self.hurst, self.scale),
            FamilyName::Mma => Family::mma(self.phi, self.k0),
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => Ok(std::fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            model,
            n,
            seed,
            params,
            terms,
            mode,
            out,
        } => {
            let mut stream = RandomStream::new(seed);
            let spec = || match mode {
                VariogramMode::BrownianSheet => Ok(VariogramSpec::brownian_sheet()),
                VariogramMode::IsotropicFbm => VariogramSpec::isotropic(params.hurst, params.scale),
            };
            let field = match model {
                SimModel::Mma => simulate_mma(n, &WeightKernel::diamond(params.phi, params.k0)?, &mut stream)?,
                SimModel::BrTruncated => BrSimulator::new(n, BrSimConfig::truncated(spec()?, terms))?.simulate(&mut stream)?,
                SimModel::BrExact => BrSimulator::new(n, BrSimConfig::exact(spec()?))?.simulate(&mut stream)?,
            };
            field.save(&out)
        }
        Command::Extremogram {
            input,
            m,
            hmax,
            centered,
            out,
        } => {
            let field = LatticeField::load(&input)?;
            let est = empirical_extremogram(&field, &choose_threshold(&field, m)?, hmax)?;
            emit(out.as_deref(), &est.to_csv_string(centered))
        }
        Command::Periodogram { input, m, out } => {
            let field = LatticeField::load(&input)?;
            let grid = indicators(&field, &choose_threshold(&field, m)?)?;
            emit(out.as_deref(), &extremal_periodogram(&grid, m).to_csv_string())
        }
        Command::Estimate {
            input,
            family,
            m,
            lo,
            hi,
            params,
            pairwise,
            dmax,
            out,
        } => {
            let field = LatticeField::load(&input)?;
            let family = params.family(family);
            let (dlo, dhi) = family.default_bounds();
            let bounds = Some((lo.unwrap_or(dlo), hi.unwrap_or(dhi)));
            let mut text = String::from("estimator,family,m,theta_hat,objective,converged,boundary\n");
            if pairwise {
                let fit = pairwise_estimate(&field, family, bounds, dmax)?;
                text += &format!(
                    "pairwise,{},0,{},{},{},{}\n",
                    family.name(),
                    format_float(fit.theta_hat),
                    format_float(-fit.loglik),
                    fit.converged,
                    fit.boundary
                );
            } else {
                let fit = whittle_estimate(&field, m, family, bounds)?;
                text += &format!(
                    "whittle,{},{m},{},{},{},{}\n",
                    family.name(),
                    format_float(fit.theta_hat),
                    format_float(fit.objective),
                    fit.converged,
                    fit.boundary
                );
                if let Some(flag) = fit.flag() {
                    eprintln!("warning: {flag}");
                }
            }
            emit(out.as_deref(), &text)
        }
        Command::Experiment { config, workers, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let workers = workers.or(cfg.workers).unwrap_or(1);
            let summary = run_experiment(&cfg, workers)?;
            summary.write(&out, &cfg)?;
            print!("{}", summary.summary_csv());
            Ok(())
        }
        Command::CheckSpectral {
            family,
            params,
            resolution,
        } => {
            let report = SpectralModel::new(params.family(family))?.positivity_check(resolution)?;
            println!(
                "min={} at ({}, {})",
                format_float(report.min),
                format_float(report.argmin[0]),
                format_float(report.argmin[1])
            );
            if report.min > 0.0 {
                Ok(())
            } else {
                Err(Error::SpectralDensityNotPositive {
                    value: report.min,
                    w1: report.argmin[0],
                    w2: report.argmin[1],
                })
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
