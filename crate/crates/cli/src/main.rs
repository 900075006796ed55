use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kt_measure_cli::{acceptance, run_scenario, CliError, Kind, RunOptions, Scenario};

#[derive(Parser)]
#[command(name = "ktm", version, about = "Measurement coupling, amplification and Stern-Gerlach runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pentagonal, intertwining and Fourier residuals
    Relations(Common),
    /// Outcome probabilities and conditional expectations
    Measure(Common),
    /// The instrument through an amplification cascade
    Amplify(Common),
    /// Wave-packet simulation in an inhomogeneous field
    Sterngerlach(Common),
    /// Stern-Gerlach runs over a parameter grid
    Sweep(Common),
    /// Run the acceptance suite
    Selftest {
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
}

fn run(kind: Kind, c: Common) -> Result<(), CliError> {
    let s = Scenario::load(&c.scenario)?;
    if s.kind != kind {
        return Err(CliError::input(format!(
            "kind: scenario is \"{}\" but the subcommand is `{}`",
            s.kind.name(),
            kind.name()
        )));
    }
    let opts = RunOptions { out: c.out, seed: c.seed, jobs: c.jobs };
    for path in run_scenario(&s, &opts)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Relations(c) => run(Kind::Relations, c),
        Command::Measure(c) => run(Kind::Measure, c),
        Command::Amplify(c) => run(Kind::Amplify, c),
        Command::Sterngerlach(c) => run(Kind::Sterngerlach, c),
        Command::Sweep(c) => run(Kind::Sweep, c),
        Command::Selftest { jobs } => {
            let results = acceptance::run_all(jobs);
            for r in &results {
                println!("{r}");
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            println!("{} of {} criteria passed", results.len() - failed, results.len());
            if failed > 0 {
                return ExitCode::from(2);
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
