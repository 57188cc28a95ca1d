use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nac_sesav::experiment::{run_convergence, run_simulation, verify, RunConfig};

#[derive(Parser)]
#[command(name = "nac", version, about = "sESAV solvers for the periodic nonlocal Allen-Cahn equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time-step a configured experiment and write diagnostics.
    Run(Common),
    /// Temporal self-convergence study of both schemes.
    Converge(Common),
    /// Kernel, operator, resolvent and potential checks.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    config: PathBuf,
    /// Overrides `run.output_dir`.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Overrides `init.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Reject second-order time steps above the bound-preserving limit.
    #[arg(long)]
    strict_mbp_tau: bool,
    /// Also write a snapshot every `DT` time units.
    #[arg(long, value_name = "DT")]
    snapshot_every: Option<f64>,
}

impl Common {
    fn load(&self) -> nac_sesav::Result<RunConfig> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(dir) = &self.output_dir {
            cfg.run.output_dir = dir.clone();
        }
        if let Some(seed) = self.seed {
            cfg.init.seed = seed;
        }
        if self.strict_mbp_tau {
            cfg.scheme.strict_mbp_tau = true;
        }
        if let Some(dt) = self.snapshot_every {
            cfg.run.snapshot_every = Some(dt);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> nac_sesav::Result<bool> {
    match cli.command {
        Command::Run(c) => {
            let cfg = c.load()?;
            let summary = run_simulation(&cfg)?;
            print!("{}", summary.to_text());
            println!("output written to {}", cfg.run.output_dir.display());
            Ok(!summary.mbp_violated)
        }
        Command::Converge(c) => {
            let cfg = c.load()?;
            let table = run_convergence(&cfg, &cfg.convergence.k_list)?;
            let csv = table.to_csv();
            std::fs::create_dir_all(&cfg.run.output_dir)?;
            let path = cfg.run.output_dir.join("convergence.csv");
            std::fs::write(&path, &csv)?;
            print!("{csv}");
            println!("written to {}", path.display());
            Ok(true)
        }
        Command::Verify(c) => {
            let report = verify(&c.load()?)?;
            print!("{report}");
            Ok(report.all_passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
