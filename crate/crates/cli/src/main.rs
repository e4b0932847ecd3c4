use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use containment::commands::{self, VerifySource};
use containment::CliError;

/// Leader-follower containment control: simulate, reproduce the worked
/// examples and verify the convergence results.
#[derive(Parser)]
#[command(name = "containment", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Horizon {
    /// Override the step size.
    #[arg(long)]
    dt: Option<f64>,
    /// Override the final time (rounded up to the step grid).
    #[arg(long = "t-final")]
    t_final: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario file and write the trajectory CSV.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        horizon: Horizon,
    },
    /// Write scenario, trajectory and plot data for a built-in example.
    Paper {
        #[arg(long)]
        example: u8,
        #[arg(long, default_value = "base")]
        variant: String,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a check and write `<out>/<check>.txt` and `<out>/<check>.json`.
    Verify {
        /// lemma1, lemma2, theorem1, theorem2, row-stochastic or leader-pull.
        #[arg(value_name = "CHECK", required_unless_present = "check")]
        name: Option<String>,
        #[arg(long, conflicts_with = "name")]
        check: Option<String>,
        #[arg(long, group = "source")]
        scenario: Option<PathBuf>,
        /// Number of random trials.
        #[arg(long, group = "source")]
        random: Option<usize>,
        #[arg(long, default_value_t = 0, requires = "random")]
        seed: u64,
        #[arg(long, group = "source")]
        example: Option<u8>,
        #[arg(long, requires = "example", default_value = "base")]
        variant: String,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        horizon: Horizon,
    },
    /// Turn a trajectory CSV into gnuplot-ready blocks.
    Plotdata {
        trajectory: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Scenario whose leaders and hull are added to the plot.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let stdout = &mut std::io::stdout().lock();
    match cli.command {
        Command::Simulate { scenario, out, horizon } => {
            commands::cmd_simulate(&scenario, &out, horizon.dt, horizon.t_final, stdout)
        }
        Command::Paper { example, variant, out } => commands::cmd_paper(example, &variant, &out, stdout),
        Command::Verify {
            name,
            check,
            scenario,
            random,
            seed,
            example,
            variant,
            out,
            horizon,
        } => {
            let check = name.or(check).expect("clap requires a check");
            let source = match (scenario, random, example) {
                (Some(path), _, _) => VerifySource::Scenario(path),
                (_, Some(trials), _) => VerifySource::Random { trials, seed },
                (_, _, Some(example)) => VerifySource::Builtin { example, variant },
                _ => {
                    return Err(CliError::Usage(
                        "one of --scenario, --random or --example is required".into(),
                    ))
                }
            };
            commands::cmd_verify(&check, &source, &out, horizon.dt, horizon.t_final, stdout)
        }
        Command::Plotdata {
            trajectory,
            out,
            scenario,
        } => commands::cmd_plotdata(&trajectory, &out, scenario.as_deref(), stdout),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
