use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use distsl_cli::{run_eigenfunctions, run_spectrum, run_verify, CliError, Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "distsl", version, about = "Dirichlet spectra for -y'' + u'y on [0, pi]")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides the config)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Number of eigenpairs (overrides the config)
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Seed for rough_fourier (overrides the config)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Shift u to mean zero before solving
    #[arg(long, global = true)]
    mean_zero: bool,

    /// Worker threads; defaults to all cores
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues with remainder columns
    Spectrum,
    /// Eigenfunctions, biorthogonal functions and approximants on grids
    Eigenfunctions,
    /// Run the verification checks and write a JSON report
    Verify,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let over = Overrides { n: cli.n, seed: cli.seed, mean_zero: cli.mean_zero, out: cli.out.clone() };
    let cfg = RunConfig::load(path, &over)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        pool = pool.num_threads(k);
    }
    let pool = pool.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Spectrum => {
            let path = run_spectrum(&cfg)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Eigenfunctions => {
            let r = run_eigenfunctions(&cfg)?;
            println!("wrote {} eigenfunction files to {}", r.written.len(), cfg.out.display());
            if !r.skipped.is_empty() {
                eprintln!("skipped non-simple indices {:?}", r.skipped);
            }
            Ok(())
        }
        Command::Verify => {
            let r = run_verify(&cfg)?;
            println!("{} checks passed, report at {}", r.total, r.path.display());
            Ok(())
        }
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
