//! Command-line front end over the experiment layer.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nvdb::experiment::{self, ConfigError, ExperimentConfig};
use nvdb::Error;

#[derive(Parser)]
#[command(name = "nvdb", version, about = "NV / dangling-bond relay sequence simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print pairwise couplings with distances and angles.
    Couplings(Common),
    /// Simulate, sample, and fit one configuration.
    Run(Common),
    /// Evaluate the configured parameter sweep.
    Sweep(Common),
    /// SNR of both protocols against the number of shots.
    SnrCurve {
        #[command(flatten)]
        common: Common,
        /// Shot counts.
        #[arg(long, value_delimiter = ',', default_value = "10000,50000,100000")]
        shots: Vec<u64>,
        /// Number of seeds, counted up from --seed.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
    },
    /// Check a configuration without simulating.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset name.
    #[arg(long)]
    preset: Option<String>,
    /// Override the sampling seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for result tables; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, Error> {
        if let Some(jobs) = self.jobs {
            // Only fails if a pool already exists, which keeps the earlier one.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global();
        }
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                ExperimentConfig::from_toml(&text)?
            }
            (None, Some(name)) => experiment::preset(name)?,
            (None, None) => {
                return Err(Error::Config(ConfigError::Invalid {
                    path: "--config".into(),
                    reason: "one of --config or --preset is required".into(),
                }))
            }
        };
        if let Some(seed) = self.seed {
            cfg.sampling.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(out: &Option<PathBuf>, files: &[(&str, String)]) -> Result<(), Error> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            for (name, body) in files {
                let path = dir.join(name);
                std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            }
        }
        None => {
            for (_, body) in files {
                print!("{body}");
            }
        }
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Couplings(c) => {
            let cfg = c.load()?;
            let rows = experiment::couplings(&cfg)?;
            emit(&c.out, &[("couplings.csv", experiment::couplings_table(&rows))])
        }
        Command::Run(c) => {
            let cfg = c.load()?;
            let artifacts = experiment::run(&cfg)?;
            match &c.out {
                Some(dir) => artifacts.write(dir),
                None => {
                    print!("{}", artifacts.fits_table());
                    Ok(())
                }
            }
        }
        Command::Sweep(c) => {
            let cfg = c.load()?;
            let table = experiment::sweep(&cfg)?;
            let medians = table.medians(1);
            emit(&c.out, &[("sweep.csv", table.to_csv()), ("sweep_median.csv", medians.to_csv())])
        }
        Command::SnrCurve { common, shots, seeds } => {
            let cfg = common.load()?;
            let list: Vec<u64> = (0..seeds).map(|i| cfg.sampling.seed + i).collect();
            let table = experiment::snr_curve(&cfg, &shots, &list)?;
            emit(&common.out, &[("snr_curve.csv", table.to_csv())])
        }
        Command::Validate(c) => {
            let cfg = c.load()?;
            let report = experiment::validate(&cfg)?;
            print!("{report}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
