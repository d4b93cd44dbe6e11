use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rmppi_cli::{commands, CliError, Config};

/// Planar pushing with a recurrent dynamics model and sampling-based control.
///
/// Exit codes: 0 success, 2 config error, 3 I/O error, 4 numeric divergence.
#[derive(Parser)]
#[command(name = "rmppi", version)]
struct Cli {
    /// TOML config file; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config's global seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for collection and benchmarks; outputs do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Record pushing episodes on randomized objects.
    Collect {
        #[arg(long)]
        out: PathBuf,
        /// Agent file, required when dataset.generator = "policy".
        #[arg(long)]
        agent: Option<PathBuf>,
    },
    /// Train the recurrent dynamics model; also writes <out>.curve.
    TrainModel {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the model-free DDPG baseline on the prototype object; also writes <out>.curve.
    TrainPolicy {
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the default left/middle/right goals file.
    Goals {
        #[arg(long)]
        out: PathBuf,
    },
    /// Run RMPPI on every task of a goals file for every eval.objects fixture.
    Push {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        goals: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Also write every control step's sampled rollouts.
        #[arg(long)]
        dump_rollouts: bool,
    },
    /// Score grid over eval.sweep_k x eval.sweep_t from <models>/model_k<K>.bin.
    Sweep {
        #[arg(long)]
        models: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare RMPPI with the model-free policy on the fixture objects.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        agent: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.jobs == 0 {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    let jobs = cli.jobs;
    match cli.command {
        Command::Collect { out, agent } => commands::collect(&cfg, &out, agent.as_deref(), jobs),
        Command::TrainModel { dataset, out } => commands::train_model(&cfg, &dataset, &out),
        Command::TrainPolicy { out } => commands::train_policy_cmd(&cfg, &out),
        Command::Goals { out } => commands::goals(&cfg, &out),
        Command::Push { model, goals, out, dump_rollouts } => commands::push(&cfg, &model, &goals, &out, dump_rollouts, jobs),
        Command::Sweep { models, out } => commands::sweep(&cfg, &models, &out, jobs),
        Command::Eval { model, agent, out } => commands::eval(&cfg, &model, &agent, &out, jobs),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("rmppi: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
