//! The four regulatory scenarios, their comparison and one-parameter sweeps.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::isp::{isp_optimize, NeutralityRegime, ScenarioResult};
use crate::model::{MarketParams, ParamName};
use crate::platform::{OptimizerConfig, PlatformMode};
use crate::scalar::Scalar;

/// Relative tolerance under which two scenario values are tied.
pub const TIE_REL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioKind {
    /// Platform present, non-neutral ISP.
    Pnn,
    /// Platform present, neutral ISP.
    Pn,
    /// Platform absent, non-neutral ISP.
    Ann,
    /// Platform absent, neutral ISP.
    An,
}

impl ScenarioKind {
    /// Canonical order, also the CSV row order within a parameter value.
    pub const ALL: [ScenarioKind; 4] = [ScenarioKind::Pnn, ScenarioKind::Pn, ScenarioKind::Ann, ScenarioKind::An];

    pub fn from_parts(mode: PlatformMode, regime: NeutralityRegime) -> Self {
        match (mode, regime) {
            (PlatformMode::Present, NeutralityRegime::NonNeutral) => ScenarioKind::Pnn,
            (PlatformMode::Present, NeutralityRegime::Neutral) => ScenarioKind::Pn,
            (PlatformMode::Absent, NeutralityRegime::NonNeutral) => ScenarioKind::Ann,
            (PlatformMode::Absent, NeutralityRegime::Neutral) => ScenarioKind::An,
        }
    }

    pub fn mode(self) -> PlatformMode {
        match self {
            ScenarioKind::Pnn | ScenarioKind::Pn => PlatformMode::Present,
            ScenarioKind::Ann | ScenarioKind::An => PlatformMode::Absent,
        }
    }

    pub fn regime(self) -> NeutralityRegime {
        match self {
            ScenarioKind::Pnn | ScenarioKind::Ann => NeutralityRegime::NonNeutral,
            ScenarioKind::Pn | ScenarioKind::An => NeutralityRegime::Neutral,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Pnn => "pnn",
            ScenarioKind::Pn => "pn",
            ScenarioKind::Ann => "ann",
            ScenarioKind::An => "an",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidSweep(format!("unknown scenario `{s}` (expected pnn, pn, ann or an)")))
    }
}

/// Quantities the scenarios are ranked on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    IspProfit,
    PlatformProfit,
    ConsumerSurplus,
    CpSurplus,
    SocialWelfare,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::IspProfit,
        Metric::PlatformProfit,
        Metric::ConsumerSurplus,
        Metric::CpSurplus,
        Metric::SocialWelfare,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Metric::IspProfit => "Access ISP",
            Metric::PlatformProfit => "Platform",
            Metric::ConsumerSurplus => "Users",
            Metric::CpSurplus => "CPs",
            Metric::SocialWelfare => "Social welfare",
        }
    }

    pub fn of<T: Scalar>(self, r: &ScenarioResult<T>) -> T {
        let o = &r.outcome;
        match self {
            Metric::IspProfit => o.access_isp_profit,
            Metric::PlatformProfit => o.platform_profit,
            Metric::ConsumerSurplus => o.consumer_surplus,
            Metric::CpSurplus => o.cp_surplus,
            Metric::SocialWelfare => o.social_welfare,
        }
    }

    /// The reference preference order: best group first, ties grouped.
    pub fn reference_groups(self) -> Vec<Vec<ScenarioKind>> {
        use ScenarioKind::*;
        match self {
            Metric::IspProfit => vec![vec![Ann], vec![Pnn, Pn], vec![An]],
            Metric::PlatformProfit => vec![vec![Pnn, Pn], vec![Ann, An]],
            Metric::ConsumerSurplus => vec![vec![Pnn, Pn, Ann, An]],
            Metric::CpSurplus => vec![vec![An], vec![Pnn, Pn, Ann]],
            Metric::SocialWelfare => vec![vec![Pnn, Pn, Ann], vec![An]],
        }
    }
}

/// `|a - b| <= tol·max(|a|, |b|, 1)`.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// One metric's ranking: groups of tied scenarios, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub metric: Metric,
    pub groups: Vec<Vec<ScenarioKind>>,
}

impl Ranking {
    /// Sorts by value (descending) and merges neighbours within `tol`.
    pub fn build(metric: Metric, values: &[(ScenarioKind, f64)], tol: f64) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0)));
        let mut groups: Vec<Vec<ScenarioKind>> = Vec::new();
        let mut last: Option<f64> = None;
        for (kind, v) in sorted {
            match last {
                Some(prev) if rel_close(prev, v, tol) => groups.last_mut().unwrap().push(kind),
                _ => groups.push(vec![kind]),
            }
            last = Some(v);
        }
        for g in &mut groups {
            g.sort();
        }
        Self { metric, groups }
    }

    /// Rank span `(first, last)`, 1-based, of `kind`.
    pub fn span(&self, kind: ScenarioKind) -> Option<(usize, usize)> {
        let mut pos = 0;
        for g in &self.groups {
            if g.contains(&kind) {
                return Some((pos + 1, pos + g.len()));
            }
            pos += g.len();
        }
        None
    }

    pub fn matches_reference(&self) -> bool {
        let mut expected = self.metric.reference_groups();
        for g in &mut expected {
            g.sort();
        }
        expected == self.groups
    }
}

fn ordinal(n: usize) -> String {
    let suffix = match (n % 10, n % 100) {
        (1, 11) | (2, 12) | (3, 13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{n}{suffix}")
}

/// Rank label like `1st` or `2nd-3rd`.
pub fn span_label((first, last): (usize, usize)) -> String {
    if first == last {
        ordinal(first)
    } else {
        format!("{}-{}", ordinal(first), ordinal(last))
    }
}

/// The four scenario results and the ranking of each metric across them.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable<T> {
    /// One result per scenario, in [`ScenarioKind::ALL`] order.
    pub results: Vec<ScenarioResult<T>>,
    pub rankings: Vec<Ranking>,
}

impl<T: Scalar> ComparisonTable<T> {
    pub fn from_results(results: Vec<ScenarioResult<T>>, tol: f64) -> Self {
        let rankings = Metric::ALL
            .into_iter()
            .map(|m| {
                let values: Vec<(ScenarioKind, f64)> = results
                    .iter()
                    .map(|r| (r.kind, m.of(r).to_f64().unwrap_or(f64::NAN)))
                    .collect();
                Ranking::build(m, &values, tol)
            })
            .collect();
        Self { results, rankings }
    }

    pub fn ranking(&self, metric: Metric) -> &Ranking {
        self.rankings.iter().find(|r| r.metric == metric).expect("every metric ranked")
    }

    pub fn result(&self, kind: ScenarioKind) -> &ScenarioResult<T> {
        self.results.iter().find(|r| r.kind == kind).expect("every scenario solved")
    }

    /// Metrics whose ranking departs from the reference ordering.
    pub fn reference_mismatches(&self) -> Vec<Metric> {
        self.rankings.iter().filter(|r| !r.matches_reference()).map(|r| r.metric).collect()
    }
}

/// Solves one scenario; a flagged platform stage is an error.
pub fn solve_scenario<T: Scalar>(
    params: &MarketParams<T>,
    kind: ScenarioKind,
    cfg: &OptimizerConfig<T>,
) -> Result<ScenarioResult<T>> {
    isp_optimize(params, kind.regime(), kind.mode(), cfg)?.strict()
}

/// Solves all four scenarios and ranks every metric, ties within
/// [`TIE_REL_TOL`].
pub fn compare_scenarios<T: Scalar>(params: &MarketParams<T>, cfg: &OptimizerConfig<T>) -> Result<ComparisonTable<T>> {
    let results = ScenarioKind::ALL
        .par_iter()
        .map(|&k| solve_scenario(params, k, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonTable::from_results(results, TIE_REL_TOL))
}

/// A one-parameter sweep; all other parameters stay at their base values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec<T> {
    pub param: ParamName,
    pub lo: T,
    pub hi: T,
    pub points: usize,
}

impl<T: Scalar> SweepSpec<T> {
    pub fn new(param: ParamName, lo: T, hi: T, points: usize) -> Self {
        Self { param, lo, hi, points }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(Error::InvalidSweep("range bounds must be finite".into()));
        }
        if self.lo > self.hi {
            return Err(Error::InvalidSweep(format!("lo ({}) exceeds hi ({})", self.lo, self.hi)));
        }
        if self.points < 2 {
            return Err(Error::InvalidSweep("need at least 2 points".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<T> {
        let n = self.points;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * T::of(i as f64) / T::of((n - 1) as f64)
                }
            })
            .collect()
    }
}

/// One `(parameter value, scenario)` cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub param_value: T,
    pub kind: ScenarioKind,
    /// `None` only if the point could not be solved at all.
    pub result: Option<ScenarioResult<T>>,
    /// Diagnostics or the error text; empty for a clean row.
    pub flag: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T> {
    pub param: ParamName,
    /// Sorted by parameter value, then scenario in [`ScenarioKind::ALL`] order.
    pub rows: Vec<SweepRow<T>>,
}

impl<T: Scalar> SweepResult<T> {
    pub fn rows_for(&self, kind: ScenarioKind) -> impl Iterator<Item = &SweepRow<T>> {
        self.rows.iter().filter(move |r| r.kind == kind)
    }

    /// Comparison table at the `index`-th parameter value, if every scenario
    /// was requested and solved there.
    pub fn table_at(&self, index: usize) -> Option<ComparisonTable<T>> {
        let value = self.rows.get(index * ScenarioKind::ALL.len())?.param_value;
        let results: Option<Vec<ScenarioResult<T>>> = ScenarioKind::ALL
            .iter()
            .map(|k| {
                self.rows
                    .iter()
                    .find(|r| r.kind == *k && r.param_value == value)
                    .and_then(|r| r.result.clone())
            })
            .collect();
        Some(ComparisonTable::from_results(results?, TIE_REL_TOL))
    }
}

/// Evaluates each requested scenario at every grid value of the swept
/// parameter. Failures are recorded in the row's flag and do not stop the
/// sweep.
pub fn sweep<T: Scalar>(
    params: &MarketParams<T>,
    spec: &SweepSpec<T>,
    kinds: &[ScenarioKind],
    cfg: &OptimizerConfig<T>,
) -> Result<SweepResult<T>> {
    spec.validate()?;
    cfg.validate()?;
    let mut kinds = kinds.to_vec();
    kinds.sort();
    kinds.dedup();
    let cells: Vec<(T, ScenarioKind)> = spec
        .values()
        .into_iter()
        .flat_map(|v| kinds.iter().map(move |&k| (v, k)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(value, kind)| {
            let point = params.with(spec.param, value);
            match isp_optimize(&point, kind.regime(), kind.mode(), cfg) {
                Ok(result) => {
                    let flag = result.diagnostics.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ");
                    SweepRow { param_value: value, kind, result: Some(result), flag }
                }
                Err(e) => SweepRow { param_value: value, kind, result: None, flag: e.to_string() },
            }
        })
        .collect();
    Ok(SweepResult { param: spec.param, rows })
}
