//! Subgame-perfect pricing equilibria of an access ISP, a two-sided platform
//! and the users and content providers (CPs) they serve.
//!
//! The access ISP moves first and sets a per-CP price `b` to users and, unless
//! neutrality forbids it, a per-subscriber price `c` to CPs. The platform then
//! sets its fees `(α, β)`. Finally users and CPs join under fulfilled
//! expectations. [`scenario`] runs the four regulatory scenarios and the
//! comparative statics built on top of that game.
//!
//! Everything numeric is generic over [`Scalar`] (`f32`/`f64`); the aliases
//! below fix the scalar to `f64`, which is what the CLI uses.

pub mod cli;
pub mod config;
pub mod error;
pub mod isp;
pub mod model;
pub mod output;
pub mod participation;
pub mod platform;
pub mod scalar;
pub mod scenario;
pub mod search;

pub use error::{Diagnostic, Error, Result};
pub use isp::{isp_optimize, NeutralityRegime};
pub use model::{
    access_isp_revenue, cp_profit, platform_revenue, user_utility, welfare, ParamName, Regime,
};
pub use participation::{clipped_map, enumerate_fixed_points, residual, solve_participation};
pub use platform::{enumerate_platform_candidates, platform_best_response, PlatformMode};
pub use scalar::Scalar;
pub use scenario::{compare_scenarios, solve_scenario, sweep, Metric, ScenarioKind};
pub use search::maximize_on_box;

pub type MarketParams = model::MarketParams<f64>;
pub type PriceVector = model::PriceVector<f64>;
pub type Participation = model::Participation<f64>;
pub type Outcome = model::Outcome<f64>;
pub type FixedPointSet = participation::FixedPointSet<f64>;
pub type OptimizerConfig = platform::OptimizerConfig<f64>;
pub type PlatformReply = platform::PlatformReply<f64>;
pub type ScenarioResult = isp::ScenarioResult<f64>;
pub type ComparisonTable = scenario::ComparisonTable<f64>;
pub type SweepSpec = scenario::SweepSpec<f64>;
pub type SweepResult = scenario::SweepResult<f64>;

pub type MarketParams32 = model::MarketParams<f32>;
pub type OptimizerConfig32 = platform::OptimizerConfig<f32>;
