use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use zeno_cli::commands::{self, Context};
use zeno_cli::config::{self, OutputFormat};
use zeno_cli::output::Timestamp;
use zeno_cli::CliError;

#[derive(Parser)]
#[command(
    name = "zeno",
    version,
    about = "Survival-probability statistics under stochastic projective measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration (TOML)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override the master seed from the config
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Cap the rayon worker count
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Output directory
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,

    /// Override the output format from the config
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Omit the generation-timestamp line so reruns are byte-identical
    #[arg(long, global = true)]
    no_header_timestamp: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Survival probability of periodic sequences as a function of the interval
    Decay,
    /// Geometric/arithmetic/ensemble averages vs the second bimodal interval
    Sweep,
    /// Monte Carlo histogram of P with exact and Gaussian overlays
    Histogram,
    /// One-shot report of all closed-form statistics
    Analyze,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config_path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("missing required flag --config <PATH>".into()))?;
    let mut experiment = config::load(config_path)?;
    if let Some(seed) = cli.seed {
        experiment.seed = seed;
    }
    if let Some(format) = cli.format {
        experiment.format = match format {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        };
    }

    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", cli.out.display())))?;

    let ctx = Context {
        experiment,
        out_dir: cli.out.clone(),
        timestamp: if cli.no_header_timestamp {
            Timestamp::Suppress
        } else {
            Timestamp::Include
        },
    };

    let dispatch = || -> Result<Vec<PathBuf>, CliError> {
        match cli.command {
            Command::Decay => Ok(vec![commands::cmd_decay(&ctx)?]),
            Command::Sweep => Ok(vec![commands::cmd_sweep(&ctx)?]),
            Command::Histogram => {
                let files = commands::cmd_histogram(&ctx)?;
                let mut out = vec![files.histogram];
                out.extend(files.overlay);
                Ok(out)
            }
            Command::Analyze => Ok(vec![commands::cmd_analyze(&ctx)?]),
        }
    };

    let written = match cli.threads {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io(format!("cannot build thread pool: {e}")))?
            .install(dispatch),
        _ => dispatch(),
    }?;

    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}
