//! `key = value` run configuration with command-line overrides.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::model::{MarketParams, ParamName};
use crate::platform::OptimizerConfig;

/// Where a configuration entry came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Line(usize),
    Flag,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Line(n) => write!(f, "line {n}"),
            Source::Flag => f.write_str("--set flag"),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{at}: expected `key = value`, got `{text}`")]
    Syntax { at: Source, text: String },
    #[error("{at}: unknown key `{key}`")]
    UnknownKey { at: Source, key: String },
    #[error("{at}: malformed value `{value}` for `{key}`")]
    Malformed { at: Source, key: String, value: String },
    #[error("{at}: value for `{key}` must be finite")]
    NonFinite { at: Source, key: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    Csv,
    #[default]
    Text,
}

impl OutputFormat {
    pub fn name(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Text => "text",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "text" | "structured-text" => Ok(OutputFormat::Text),
            _ => Err(()),
        }
    }
}

/// Fully resolved settings for one CLI run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: MarketParams<f64>,
    pub optimizer: OptimizerConfig<f64>,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: MarketParams::default(),
            optimizer: OptimizerConfig::default(),
            out_dir: PathBuf::from("out"),
            format: OutputFormat::default(),
        }
    }
}

const OPTIMIZER_KEYS: [&str; 8] = [
    "search_halfwidth",
    "coarse_grid",
    "refine_rounds",
    "zoom_factor",
    "value_tie_tol",
    "isp_grid",
    "isp_refine_rounds",
    "isp_keep",
];

impl RunConfig {
    fn apply(&mut self, key: &str, value: &str, at: Source) -> Result<(), ConfigError> {
        let malformed = || ConfigError::Malformed {
            at,
            key: key.to_string(),
            value: value.to_string(),
        };
        let real = || -> Result<f64, ConfigError> {
            let v: f64 = value.parse().map_err(|_| malformed())?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(ConfigError::NonFinite { at, key: key.to_string() })
            }
        };
        let count = || value.parse::<usize>().map_err(|_| malformed());

        if let Ok(name) = key.parse::<ParamName>() {
            self.params.set(name, real()?);
            return Ok(());
        }
        let opt = &mut self.optimizer;
        match key {
            "search_halfwidth" => opt.search_halfwidth = real()?,
            "coarse_grid" => opt.coarse_grid = count()?,
            "refine_rounds" => opt.refine_rounds = count()?,
            "zoom_factor" => opt.zoom_factor = real()?,
            "value_tie_tol" => opt.value_tie_tol = real()?,
            "isp_grid" => opt.isp_grid = count()?,
            "isp_refine_rounds" => opt.isp_refine_rounds = count()?,
            "isp_keep" => opt.isp_keep = count()?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "format" => self.format = value.parse().map_err(|_| malformed())?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    at,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Writes every key, in a form [`parse_config`] reads back exactly.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for name in ParamName::ALL {
            out.push_str(&format!("{} = {}\n", name.key(), self.params.get(name)));
        }
        let o = &self.optimizer;
        let values = [
            o.search_halfwidth.to_string(),
            o.coarse_grid.to_string(),
            o.refine_rounds.to_string(),
            o.zoom_factor.to_string(),
            o.value_tie_tol.to_string(),
            o.isp_grid.to_string(),
            o.isp_refine_rounds.to_string(),
            o.isp_keep.to_string(),
        ];
        for (k, v) in OPTIMIZER_KEYS.iter().zip(values) {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out.push_str(&format!("out_dir = {}\n", self.out_dir.display()));
        out.push_str(&format!("format = {}\n", self.format.name()));
        out
    }
}

/// Parses `key = value` lines (blank lines and `#` comments ignored), then
/// applies `flags` on top. Anything not set keeps the reference calibration.
pub fn parse_config(text: &str, flags: &[(String, String)]) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let source = Source::Line(idx + 1);
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            at: source,
            text: raw.to_string(),
        })?;
        cfg.apply(key.trim(), value.trim(), source)?;
    }
    for (key, value) in flags {
        cfg.apply(key.trim(), value.trim(), Source::Flag)?;
    }
    cfg.params.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
    cfg.optimizer.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
    Ok(cfg)
}

/// Splits a `key=value` flag.
pub fn parse_flag(flag: &str) -> Result<(String, String), ConfigError> {
    flag.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| ConfigError::Syntax {
            at: Source::Flag,
            text: flag.to_string(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn flag(k: &str, v: &str) -> (String, String) {
        (k.to_string(), v.to_string())
    }

    #[test]
    fn empty_input_gives_reference_calibration() {
        let cfg = parse_config("", &[]).unwrap();
        let p = cfg.params;
        assert_eq!(
            (p.n_users_total, p.n_cps_total, p.standalone_user, p.standalone_cp),
            (10.0, 1.0, 0.9, 0.9)
        );
        assert_eq!((p.cp_to_user_effect, p.ad_revenue_per_user, p.cp_isp_price), (2.0, 4.0, 0.5));
    }

    #[test]
    fn flags_override_file() {
        let cfg = parse_config("gamma = 3.0\n", &[flag("gamma", "2.0")]).unwrap();
        assert_eq!(cfg.params.ad_revenue_per_user, 2.0);
    }

    #[test]
    fn comments_and_long_names() {
        let text = "# header\n\n cp_to_user_effect = 1.5   # trailing\nformat = csv\ncoarse_grid=51\n";
        let cfg = parse_config(text, &[]).unwrap();
        assert_eq!(cfg.params.cp_to_user_effect, 1.5);
        assert_eq!(cfg.format, OutputFormat::Csv);
        assert_eq!(cfg.optimizer.coarse_grid, 51);
    }

    #[test]
    fn malformed_number_names_key_and_line() {
        let err = parse_config("N_u = 10\ndelta = abc\n", &[]).unwrap_err();
        assert_eq!(
            err,
            ConfigError::Malformed {
                at: Source::Line(2),
                key: "delta".into(),
                value: "abc".into()
            }
        );
        assert!(err.to_string().contains("delta") && err.to_string().contains("line 2"));
    }

    #[test]
    fn unknown_and_non_finite_rejected() {
        assert!(matches!(
            parse_config("omega = 1\n", &[]),
            Err(ConfigError::UnknownKey { at: Source::Line(1), .. })
        ));
        assert!(matches!(
            parse_config("", &[flag("r_u", "inf")]),
            Err(ConfigError::NonFinite { at: Source::Flag, .. })
        ));
        assert!(matches!(parse_config("just words\n", &[]), Err(ConfigError::Syntax { .. })));
        assert!(matches!(parse_config("N_c = -1\n", &[]), Err(ConfigError::Invalid(_))));
        assert!(matches!(parse_config("coarse_grid = 2.5\n", &[]), Err(ConfigError::Malformed { .. })));
    }

    proptest! {
        #[test]
        fn serialize_round_trips(
            nu in 0.1f64..100.0, nc in 0.1f64..10.0,
            ru in -1.0f64..2.0, rc in -1.0f64..2.0,
            delta in -5.0f64..5.0, gamma in -5.0f64..5.0, a in -2.0f64..2.0,
            k in 1.0f64..100.0, grid in 3usize..400, rounds in 0usize..10,
            zoom in 0.01f64..0.99, tie in 0.0f64..1e-3, csv in any::<bool>(),
        ) {
            let mut cfg = RunConfig::default();
            cfg.params = MarketParams {
                n_users_total: nu, n_cps_total: nc, standalone_user: ru, standalone_cp: rc,
                cp_to_user_effect: delta, ad_revenue_per_user: gamma, cp_isp_price: a,
            };
            cfg.optimizer.search_halfwidth = k;
            cfg.optimizer.coarse_grid = grid;
            cfg.optimizer.isp_refine_rounds = rounds;
            cfg.optimizer.zoom_factor = zoom;
            cfg.optimizer.value_tie_tol = tie;
            cfg.out_dir = PathBuf::from("results/run 1");
            cfg.format = if csv { OutputFormat::Csv } else { OutputFormat::Text };
            let back = parse_config(&cfg.serialize(), &[]).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
