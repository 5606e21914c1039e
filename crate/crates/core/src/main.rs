use clap::{Parser, Subcommand};
use geoflow::cli::{self, CliError, ExitStatus, ScenarioConfig, ScenarioKind};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "geoflow", version, about = "Soliton backgrounds, mean curvature flow and the checks that tie them together")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file.
    Run {
        config: PathBuf,
        /// Output root; defaults to $GEOFLOW_OUTPUT, then ./geoflow-out.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every acceptance check.
    Suite {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the named backgrounds.
    ListProfiles,
}

fn exit(status: ExitStatus) -> ExitCode {
    ExitCode::from(status as u8)
}

fn execute(cfg: &ScenarioConfig, out: Option<PathBuf>) -> ExitCode {
    let root = out.unwrap_or_else(cli::output_root);
    match cli::run_scenario(cfg, &root) {
        Ok(outcome) => {
            print!("{}", outcome.summary_text(cfg.kind));
            println!("output: {}", root.join(&cfg.output_dir).display());
            if outcome.pass() {
                exit(ExitStatus::Pass)
            } else {
                eprintln!("failed checks: {}", outcome.failures().join(", "));
                exit(ExitStatus::CheckFailure)
            }
        }
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("error: {e}");
    exit(e.status())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match args.command {
        Command::Run { config, out } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => return fail(CliError::Io { path: config, msg: e.to_string() }),
            };
            match ScenarioConfig::parse(&text) {
                Ok(cfg) => execute(&cfg, out),
                Err(e) => fail(e.into()),
            }
        }
        Command::Suite { out } => execute(&ScenarioConfig::defaults(ScenarioKind::FullSuite), out),
        Command::ListProfiles => {
            print!("{}", cli::list_profiles());
            exit(ExitStatus::Pass)
        }
    }
}
