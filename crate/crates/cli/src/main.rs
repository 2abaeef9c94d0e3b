use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use minimax_core::harness::{run_checks, run_experiment, write_csv, CheckOptions, ExperimentConfig, Suite};
use minimax_core::problems::io::write_problem;
use minimax_core::{gen_bilinear, gen_scsc_quadratic};

#[derive(Parser)]
#[command(name = "minimax", version, about = "Stochastic extragradient experiments on smooth minimax problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file and write its CSV.
    Run {
        config: PathBuf,
        /// Write the CSV here instead of the config's `output` (or stdout).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a validator suite; exits non-zero if any check fails.
    Check {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Noise level for the oracle suite.
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Oracle draws for the oracle suite.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
    /// Generate a problem and write it in the text problem format.
    Gen {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        d_x: usize,
        #[arg(long)]
        d_y: usize,
        /// Strong-monotonicity modulus (scsc only).
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        lipschitz: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Lemmas,
    Oracle,
    Schedule,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Scsc,
    Bilinear,
}

fn sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(config_path: PathBuf, output: Option<PathBuf>) -> Result<ExitCode> {
    let text = fs::read_to_string(&config_path)
        .with_context(|| format!("cannot read config {}", config_path.display()))?;
    let config = ExperimentConfig::parse(&text).with_context(|| format!("invalid config {}", config_path.display()))?;
    let result = run_experiment(&config).context("experiment failed")?;
    let mut out = sink(output.as_ref().or(config.output.as_ref()))?;
    write_csv(&result, &mut out)?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn check(suite: SuiteArg, options: CheckOptions) -> Result<ExitCode> {
    if !(options.sigma >= 0.0 && options.sigma.is_finite()) {
        bail!("--sigma must be finite and >= 0");
    }
    let suite = match suite {
        SuiteArg::Lemmas => Suite::Lemmas,
        SuiteArg::Oracle => Suite::Oracle,
        SuiteArg::Schedule => Suite::Schedule,
        SuiteArg::All => Suite::All,
    };
    let lines = run_checks(suite, &options)?;
    let failed = lines.iter().filter(|l| !l.passed).count();
    for l in &lines {
        println!("{l}");
    }
    if failed > 0 {
        let names: Vec<String> = lines
            .iter()
            .filter(|l| !l.passed)
            .map(|l| format!("{}/{}", l.suite, l.name))
            .collect();
        eprintln!("{failed} check(s) failed: {}", names.join(", "));
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, output } => run(config, output),
        Command::Check {
            suite,
            seed,
            sigma,
            samples,
        } => check(suite, CheckOptions { seed, sigma, samples }),
        Command::Gen {
            family,
            d_x,
            d_y,
            mu,
            lipschitz,
            seed,
            out,
        } => (|| {
            let problem = match family {
                FamilyArg::Scsc => {
                    let mu = mu.context("--mu is required for --family scsc")?;
                    gen_scsc_quadratic(d_x, d_y, mu, lipschitz, seed)?
                }
                FamilyArg::Bilinear => {
                    if mu.is_some_and(|m| m != 0.0) {
                        bail!("bilinear problems have mu = 0");
                    }
                    gen_bilinear(d_x, d_y, lipschitz, seed)?
                }
            };
            let mut sink = sink(out.as_ref())?;
            write_problem(&problem, &mut sink)?;
            sink.flush()?;
            Ok(ExitCode::SUCCESS)
        })(),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
