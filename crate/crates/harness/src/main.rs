use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ultradeco::error::EXIT_COMPARISON;
use ultradeco::{load_config, run_experiment, ExperimentKind, Overrides};

/// Run one ultradeco experiment from a JSON config.
#[derive(Parser, Debug)]
#[command(name = "ultradeco", version)]
struct Cli {
    /// reduce-check, chain-stationary, arrival-times, persistent-times,
    /// growth-phase, photon-demo or equilibrium-uniformity
    experiment: ExperimentKind,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to the config's `output_dir` or out/<experiment>.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the trajectory or sample count.
    #[arg(long)]
    n_samples: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let overrides = Overrides {
        experiment: Some(cli.experiment),
        seed: cli.seed,
        output_dir: cli.out,
        n_samples: cli.n_samples,
    };
    let result = load_config(&cli.config, &overrides).and_then(|c| run_experiment(&c).map(|r| (c, r)));
    match result {
        Ok((config, (manifest, summary))) => {
            println!("{}: {summary}", cli.experiment);
            println!("wrote {} files to {}", manifest.outputs.len() + 1, config.output_dir.display());
            if manifest.verdict == Some(false) {
                eprintln!("comparison failed");
                return ExitCode::from(EXIT_COMPARISON);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
