//! Stage one: the access ISP picks `(b, c)` (or `b` alone under neutrality)
//! anticipating the platform's reply and the participation it induces.

use std::fmt;

use crate::error::{Diagnostic, Error, Result};
use crate::model::{access_isp_revenue, welfare, MarketParams, Outcome, Participation, PriceVector};
use crate::participation::solve_participation;
use crate::platform::{best_candidate, platform_best_response, OptimizerConfig, PlatformMode};
use crate::scalar::Scalar;
use crate::scenario::ScenarioKind;
use crate::search::maximize_on_box;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NeutralityRegime {
    /// The ISP may not charge CPs: `c = 0`.
    Neutral,
    NonNeutral,
}

impl fmt::Display for NeutralityRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NeutralityRegime::Neutral => "neutral",
            NeutralityRegime::NonNeutral => "non_neutral",
        })
    }
}

/// Subgame-perfect outcome of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult<T> {
    pub kind: ScenarioKind,
    pub prices: PriceVector<T>,
    pub participation: Participation<T>,
    pub outcome: Outcome<T>,
    /// Non-convergence reports from the platform stage at the chosen `(b, c)`.
    pub diagnostics: Vec<Diagnostic>,
}

impl<T: Scalar> ScenarioResult<T> {
    /// Turns a flagged result into an error.
    pub fn strict(self) -> Result<Self> {
        match self.diagnostics.first() {
            Some(d) => Err(Error::NonConvergence(d.clone())),
            None => Ok(self),
        }
    }
}

/// ISP revenue at `(b, c)` with the platform answering through its
/// enumerated candidates. `-∞` if participation cannot be solved.
fn isp_objective<T: Scalar>(params: &MarketParams<T>, b: T, c: T, mode: PlatformMode, cfg: &OptimizerConfig<T>) -> T {
    let (alpha, beta) = match mode {
        PlatformMode::Absent => (T::zero(), T::zero()),
        PlatformMode::Present => {
            let reply = best_candidate(params, b, c, cfg);
            (reply.point[0], reply.point[1])
        }
    };
    let prices = PriceVector::new(alpha, beta, b, c);
    match solve_participation(params, &prices) {
        Ok(part) => access_isp_revenue(&prices, &part),
        Err(_) => T::neg_infinity(),
    }
}

/// Maximizes `Π_u = (b + c)·n_u·n_c` over the ISP's price box by backward
/// induction.
///
/// The outer zooming grid keeps `isp_keep` incumbents per round because `Π_u`
/// jumps wherever the platform's best reply switches regime. At each grid
/// point the platform answers with its best enumerated candidate; at the
/// winning `(b, c)` the full [`platform_best_response`] (candidates plus grid)
/// is re-run and its reply is the one stored. Its diagnostics, if any, travel
/// in [`ScenarioResult::diagnostics`].
pub fn isp_optimize<T: Scalar>(
    params: &MarketParams<T>,
    regime: NeutralityRegime,
    mode: PlatformMode,
    cfg: &OptimizerConfig<T>,
) -> Result<ScenarioResult<T>> {
    params.validate()?;
    cfg.validate()?;
    let (lo, hi) = cfg.price_box();
    let search = cfg.isp_grid_search();
    let (b, c) = match regime {
        NeutralityRegime::Neutral => {
            let best = maximize_on_box(
                |[b]: [T; 1]| isp_objective(params, b, T::zero(), mode, cfg),
                [(lo, hi)],
                &search,
            );
            (best.point[0], T::zero())
        }
        NeutralityRegime::NonNeutral => {
            let best = maximize_on_box(
                |[b, c]: [T; 2]| isp_objective(params, b, c, mode, cfg),
                [(lo, hi), (lo, hi)],
                &search,
            );
            (best.point[0], best.point[1])
        }
    };
    let reply = platform_best_response(params, (b, c), mode, cfg)?;
    Ok(ScenarioResult {
        kind: ScenarioKind::from_parts(mode, regime),
        prices: reply.prices,
        participation: reply.participation,
        outcome: welfare(params, &reply.prices, &reply.participation),
        diagnostics: reply.diagnostic.into_iter().collect(),
    })
}
