use std::fmt;

use thiserror::Error;

/// Disagreement between the two platform search routes at some ISP price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostic {
    /// ISP prices `(b, c)` the platform was replying to.
    pub isp_prices: (f64, f64),
    pub candidate_value: f64,
    pub grid_value: f64,
}

impl Diagnostic {
    pub fn relative_gap(&self) -> f64 {
        let scale = self.candidate_value.abs().max(self.grid_value.abs()).max(1.0);
        (self.candidate_value - self.grid_value).abs() / scale
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "platform search did not converge at b={}, c={}: candidate {} vs grid {} (rel gap {:.3e})",
            self.isp_prices.0,
            self.isp_prices.1,
            self.candidate_value,
            self.grid_value,
            self.relative_gap()
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid market parameter `{field}` = {value}: {reason}")]
    InvalidParams {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("invalid optimizer setting `{field}`: {reason}")]
    InvalidOptimizer {
        field: &'static str,
        reason: &'static str,
    },
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("unknown parameter name `{0}`")]
    UnknownParam(String),
    #[error("internal consistency: no participation fixed point found (u0={u0}, c0={c0}, p={p}, q={q})")]
    NoFixedPoint { u0: f64, c0: f64, p: f64, q: f64 },
    #[error("{0}")]
    NonConvergence(Diagnostic),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
