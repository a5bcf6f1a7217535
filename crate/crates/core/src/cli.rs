//! Command dispatch behind the `netecon` binary.

use std::fs;
use std::path::PathBuf;

use thiserror::Error;

use crate::config::{ConfigError, OutputFormat, RunConfig};
use crate::error::Error;
use crate::model::ParamName;
use crate::output::{self, OutputError};
use crate::scenario::{compare_scenarios, solve_scenario, sweep, ScenarioKind, SweepSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Solve { scenario: ScenarioKind },
    Compare,
    Sweep { spec: SweepSpec<f64>, scenarios: Vec<ScenarioKind> },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] Error),
    #[error(transparent)]
    Output(#[from] OutputError),
}

/// Files written and a short human summary.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Runs one command and writes its files under `cfg.out_dir`.
///
/// `solve` and `compare` fail on any platform-stage diagnostic; `sweep`
/// records them in the CSV `flag` column and succeeds.
pub fn run_command(command: &Command, cfg: &RunConfig) -> Result<Report, CliError> {
    let dir = &cfg.out_dir;
    fs::create_dir_all(dir).map_err(|source| OutputError::Io { path: dir.clone(), source })?;
    let mut report = Report::default();
    match command {
        Command::Solve { scenario } => {
            let result = solve_scenario(&cfg.params, *scenario, &cfg.optimizer)?;
            let path = match cfg.format {
                OutputFormat::Text => {
                    let path = dir.join(format!("solve_{scenario}.txt"));
                    output::write_text(&path, &output::result_text(&result))?;
                    path
                }
                OutputFormat::Csv => {
                    let path = dir.join(format!("solve_{scenario}.csv"));
                    output::write_csv(&output::result_rows(std::slice::from_ref(&result)), &path)?;
                    path
                }
            };
            report.summary = output::result_text(&result);
            report.files.push(path);
        }
        Command::Compare => {
            let table = compare_scenarios(&cfg.params, &cfg.optimizer)?;
            let text = output::table_text(&table);
            let path = dir.join("compare.txt");
            output::write_text(&path, &text)?;
            report.files.push(path);
            if cfg.format == OutputFormat::Csv {
                let path = dir.join("compare.csv");
                output::write_csv(&output::result_rows(&table.results), &path)?;
                report.files.push(path);
            }
            report.summary = text;
        }
        Command::Sweep { spec, scenarios } => {
            let result = sweep(&cfg.params, spec, scenarios, &cfg.optimizer)?;
            let param = spec.param.key();
            let csv_name = format!("sweep_{param}.csv");
            let path = dir.join(&csv_name);
            let rows = output::sweep_rows(&result);
            output::write_csv(&rows, &path)?;
            report.files.push(path);
            report.files.extend(output::write_plot_scripts(dir, &csv_name, param)?);
            let flagged = rows.iter().filter(|r| !r.flag.is_empty()).count();
            report.summary = format!("{} rows, {flagged} flagged\n", rows.len());
        }
    }
    Ok(report)
}

/// Parses a comma-separated scenario list such as `pnn,an`.
pub fn parse_scenarios(list: &str) -> Result<Vec<ScenarioKind>, Error> {
    list.split(',').map(|s| s.trim().parse()).collect()
}

pub fn parse_param(name: &str) -> Result<ParamName, Error> {
    name.parse()
}
