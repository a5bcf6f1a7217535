//! CSV rows, structured-text reports and gnuplot scripts.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::isp::ScenarioResult;
use crate::scalar::Scalar;
use crate::scenario::{span_label, ComparisonTable, Metric, ScenarioKind, SweepResult};

pub const CSV_HEADER: [&str; 17] = [
    "param_name",
    "param_value",
    "scenario",
    "alpha",
    "beta",
    "b",
    "c",
    "n_u",
    "n_c",
    "profit_platform",
    "profit_isp",
    "user_utility",
    "cp_profit",
    "CS",
    "CPS",
    "SW",
    "flag",
];

/// Columns that get a plot script, one each.
pub const PLOT_METRICS: [&str; 7] = ["profit_isp", "profit_platform", "n_u", "n_c", "CS", "CPS", "SW"];

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("nothing to write")]
    Empty,
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> OutputError + '_ {
    move |source| OutputError::Io { path: path.to_path_buf(), source }
}

/// One CSV line. `param_name`/`param_value` are empty outside sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub param_name: String,
    pub param_value: Option<f64>,
    pub kind: ScenarioKind,
    pub result: Option<ScenarioResult<f64>>,
    pub flag: String,
}

impl CsvRow {
    fn from_result(result: &ScenarioResult<f64>) -> Self {
        Self {
            param_name: String::new(),
            param_value: None,
            kind: result.kind,
            flag: flag_text(result),
            result: Some(result.clone()),
        }
    }

    fn fields(&self) -> Vec<String> {
        let mut out = vec![
            self.param_name.clone(),
            self.param_value.map(|v| v.to_string()).unwrap_or_default(),
            self.kind.name().to_string(),
        ];
        let numbers = match &self.result {
            Some(r) => {
                let (p, n, o) = (&r.prices, &r.participation, &r.outcome);
                vec![
                    p.platform_cp_fee,
                    p.platform_user_fee,
                    p.isp_user_price,
                    p.isp_cp_price,
                    n.n_u,
                    n.n_c,
                    o.platform_profit,
                    o.access_isp_profit,
                    o.user_utility,
                    o.cp_profit,
                    o.consumer_surplus,
                    o.cp_surplus,
                    o.social_welfare,
                ]
            }
            None => vec![f64::NAN; 13],
        };
        out.extend(numbers.into_iter().map(|v| v.to_string()));
        out.push(self.flag.clone());
        out
    }
}

fn flag_text<T>(result: &ScenarioResult<T>) -> String {
    result.diagnostics.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

pub fn sweep_rows(sweep: &SweepResult<f64>) -> Vec<CsvRow> {
    sweep
        .rows
        .iter()
        .map(|r| CsvRow {
            param_name: sweep.param.key().to_string(),
            param_value: Some(r.param_value),
            kind: r.kind,
            result: r.result.clone(),
            flag: r.flag.clone(),
        })
        .collect()
}

pub fn result_rows(results: &[ScenarioResult<f64>]) -> Vec<CsvRow> {
    results.iter().map(CsvRow::from_result).collect()
}

/// Writes `rows` sorted by parameter value, then scenario order. Numbers use
/// the shortest decimal that reads back to the same `f64`.
pub fn write_csv(rows: &[CsvRow], path: &Path) -> Result<(), OutputError> {
    if rows.is_empty() {
        return Err(OutputError::Empty);
    }
    let mut sorted: Vec<&CsvRow> = rows.iter().collect();
    sorted.sort_by(|x, y| {
        let (a, b) = (x.param_value.unwrap_or(f64::NEG_INFINITY), y.param_value.unwrap_or(f64::NEG_INFINITY));
        a.total_cmp(&b).then(x.kind.cmp(&y.kind))
    });
    let csv_err = |source| OutputError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for row in sorted {
        w.write_record(row.fields()).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

/// Indented `key: value` tree for one scenario.
pub fn result_text<T: Scalar>(r: &ScenarioResult<T>) -> String {
    let (p, n, o) = (&r.prices, &r.participation, &r.outcome);
    let mut s = String::new();
    let _ = writeln!(s, "scenario: {}", r.kind);
    let _ = writeln!(s, "  platform: {}", r.kind.mode());
    let _ = writeln!(s, "  isp_regime: {}", r.kind.regime());
    let _ = writeln!(s, "  prices:");
    for (k, v) in [
        ("alpha", p.platform_cp_fee),
        ("beta", p.platform_user_fee),
        ("b", p.isp_user_price),
        ("c", p.isp_cp_price),
    ] {
        let _ = writeln!(s, "    {k}: {v}");
    }
    let _ = writeln!(s, "  participation:");
    let _ = writeln!(s, "    n_u: {}", n.n_u);
    let _ = writeln!(s, "    n_c: {}", n.n_c);
    let _ = writeln!(s, "    regime_u: {}", n.regime_u);
    let _ = writeln!(s, "    regime_c: {}", n.regime_c);
    let _ = writeln!(s, "  outcome:");
    for (k, v) in [
        ("user_utility", o.user_utility),
        ("cp_profit", o.cp_profit),
        ("profit_platform", o.platform_profit),
        ("profit_isp", o.access_isp_profit),
        ("CS", o.consumer_surplus),
        ("CPS", o.cp_surplus),
        ("SW", o.social_welfare),
        ("cp_isp_revenue", o.cp_isp_revenue),
    ] {
        let _ = writeln!(s, "    {k}: {v}");
    }
    if r.diagnostics.is_empty() {
        let _ = writeln!(s, "  diagnostics: none");
    } else {
        let _ = writeln!(s, "  diagnostics:");
        for d in &r.diagnostics {
            let _ = writeln!(s, "    - {d}");
        }
    }
    s
}

/// Rank table (metric rows, scenario columns) followed by each result.
pub fn table_text<T: Scalar>(t: &ComparisonTable<T>) -> String {
    let mut s = String::new();
    let _ = write!(s, "{:<16}", "ranking");
    for k in ScenarioKind::ALL {
        let _ = write!(s, "{:>10}", k.name());
    }
    let _ = writeln!(s, "  reference");
    for m in Metric::ALL {
        let r = t.ranking(m);
        let _ = write!(s, "{:<16}", m.label());
        for k in ScenarioKind::ALL {
            let label = r.span(k).map(span_label).unwrap_or_else(|| "-".into());
            let _ = write!(s, "{label:>10}");
        }
        let _ = writeln!(s, "  {}", if r.matches_reference() { "match" } else { "MISMATCH" });
    }
    let _ = writeln!(s);
    for r in &t.results {
        s.push_str(&result_text(r));
    }
    s
}

/// A gnuplot script drawing `metric` against the swept parameter, one line
/// per scenario, reading columns by header name.
pub fn plot_script(csv_file: &str, param: &str, metric: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set terminal pngcairo size 800,600");
    let _ = writeln!(s, "set output '{param}_{metric}.png'");
    let _ = writeln!(s, "set xlabel '{param}'");
    let _ = writeln!(s, "set ylabel '{metric}'");
    let plots: Vec<String> = ScenarioKind::ALL
        .iter()
        .map(|k| {
            format!(
                "'{csv_file}' using (column(\"param_value\")):(strcol(\"scenario\") eq \"{k}\" ? column(\"{metric}\") : 1/0) with linespoints title '{k}'"
            )
        })
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}

/// Writes one plot script per entry of [`PLOT_METRICS`] into `dir`.
pub fn write_plot_scripts(dir: &Path, csv_file: &str, param: &str) -> Result<Vec<PathBuf>, OutputError> {
    PLOT_METRICS
        .iter()
        .map(|m| {
            let path = dir.join(format!("{param}_{m}.gp"));
            fs::write(&path, plot_script(csv_file, param, m)).map_err(io_err(&path))?;
            Ok(path)
        })
        .collect()
}

pub fn write_text(path: &Path, text: &str) -> Result<(), OutputError> {
    fs::write(path, text).map_err(io_err(path))
}
