use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use netecon::cli::{parse_param, parse_scenarios, run_command, CliError, Command};
use netecon::config::{parse_config, parse_flag};
use netecon::scenario::{ScenarioKind, SweepSpec};

/// Equilibrium prices and welfare of an access ISP and a two-sided platform.
#[derive(Parser)]
#[command(name = "netecon", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set delta=1.5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one scenario.
    Solve {
        #[arg(long)]
        scenario: ScenarioKind,
    },
    /// Solve all four scenarios and rank them.
    Compare,
    /// Sweep one parameter over a grid.
    Sweep {
        #[arg(long)]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        points: usize,
        #[arg(long, default_value = "pnn,pn,ann,an")]
        scenarios: String,
    },
}

fn init_threads() {
    let threads = match std::env::var("NETECON_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) => n,
            Err(_) => {
                log::warn!("ignoring NETECON_THREADS={v}: not a nonnegative integer");
                0
            }
        },
        Err(_) => 0,
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        log::warn!("thread pool: {e}");
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let text = match &cli.common.config {
        Some(path) => std::fs::read_to_string(path).map_err(|source| netecon::output::OutputError::Io {
            path: path.clone(),
            source,
        })?,
        None => String::new(),
    };
    let flags = cli.common.set.iter().map(|f| parse_flag(f)).collect::<Result<Vec<_>, _>>()?;
    let mut cfg = parse_config(&text, &flags)?;
    if let Some(out) = cli.common.out {
        cfg.out_dir = out;
    }
    for w in cfg.params.validate()? {
        log::warn!("{w}");
    }
    let command = match cli.command {
        Cmd::Solve { scenario } => Command::Solve { scenario },
        Cmd::Compare => Command::Compare,
        Cmd::Sweep { param, from, to, points, scenarios } => Command::Sweep {
            spec: SweepSpec::new(parse_param(&param)?, from, to, points),
            scenarios: parse_scenarios(&scenarios)?,
        },
    };
    let report = run_command(&command, &cfg)?;
    print!("{}", report.summary);
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    init_threads();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
