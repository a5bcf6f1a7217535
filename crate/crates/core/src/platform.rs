//! Stage two: the platform's two-sided price `(α, β)` given the access ISP's
//! prices `(b, c)`.
//!
//! Inside each participation regime the selected masses are affine in the
//! platform's fees, so revenue `α·n_c + β·n_u` is a quadratic. Regime
//! boundaries are straight lines in fee space. The maximum over the search box
//! therefore sits at a stationary point of some regime's quadratic, at a 1-D
//! maximizer along a boundary line, or at a vertex where two lines cross.
//! [`enumerate_platform_candidates`] lists all of those points and
//! [`platform_best_response`] scores them with the actual objective, then
//! cross-checks against a zooming grid search.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Diagnostic, Error, Result};
use crate::model::{platform_revenue, MarketParams, Participation, PriceVector};
use crate::participation::{solve_participation, Reduced};
use crate::scalar::Scalar;
use crate::search::{maximize_on_box, Evaluated, GridSearch};

/// Relative gap between the candidate and grid optima above which the reply
/// is flagged.
pub const NONCONVERGENCE_REL_GAP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlatformMode {
    Present,
    /// No platform: both fees are zero.
    Absent,
}

impl fmt::Display for PlatformMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlatformMode::Present => "present",
            PlatformMode::Absent => "absent",
        })
    }
}

/// Search settings shared by the platform and ISP stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig<T> {
    /// Every price is searched in `[-K, K]`.
    pub search_halfwidth: T,
    /// Platform grid points per axis.
    pub coarse_grid: usize,
    /// Platform zoom rounds.
    pub refine_rounds: usize,
    pub zoom_factor: T,
    pub value_tie_tol: T,
    /// ISP grid points per axis.
    pub isp_grid: usize,
    pub isp_refine_rounds: usize,
    /// ISP incumbents refined each round.
    pub isp_keep: usize,
}

impl<T: Scalar> Default for OptimizerConfig<T> {
    fn default() -> Self {
        Self {
            search_halfwidth: T::of(50.0),
            coarse_grid: 201,
            refine_rounds: 6,
            zoom_factor: T::of(0.2),
            value_tie_tol: T::of(1e-9),
            isp_grid: 101,
            isp_refine_rounds: 9,
            isp_keep: 3,
        }
    }
}

impl<T: Scalar> OptimizerConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason| Err(Error::InvalidOptimizer { field, reason });
        if !(self.search_halfwidth.is_finite() && self.search_halfwidth > T::zero()) {
            return bad("search_halfwidth", "must be positive and finite");
        }
        if self.coarse_grid < 3 {
            return bad("coarse_grid", "must be at least 3");
        }
        if self.isp_grid < 3 {
            return bad("isp_grid", "must be at least 3");
        }
        if !(self.zoom_factor > T::zero() && self.zoom_factor < T::one()) {
            return bad("zoom_factor", "must lie strictly between 0 and 1");
        }
        if !(self.value_tie_tol.is_finite() && self.value_tie_tol >= T::zero()) {
            return bad("value_tie_tol", "must be finite and nonnegative");
        }
        if self.isp_keep == 0 {
            return bad("isp_keep", "must be at least 1");
        }
        Ok(())
    }

    pub(crate) fn platform_grid(&self) -> GridSearch<T> {
        GridSearch {
            points: self.coarse_grid,
            rounds: self.refine_rounds,
            zoom: self.zoom_factor,
            keep: 1,
            tie_tol: self.value_tie_tol,
        }
    }

    pub(crate) fn isp_grid_search(&self) -> GridSearch<T> {
        GridSearch {
            points: self.isp_grid,
            rounds: self.isp_refine_rounds,
            zoom: self.zoom_factor,
            keep: self.isp_keep,
            tie_tol: self.value_tie_tol,
        }
    }

    pub(crate) fn price_box(&self) -> (T, T) {
        (-self.search_halfwidth, self.search_halfwidth)
    }
}

/// The platform's reply to a pair of ISP prices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlatformReply<T> {
    /// All four prices; `b` and `c` are the ISP's.
    pub prices: PriceVector<T>,
    pub participation: Participation<T>,
    pub profit: T,
    /// Set when the candidate and grid optima disagree.
    pub diagnostic: Option<Diagnostic>,
}

/// Affine map `k + u·u0 + c·c0` of the shifted intercepts `u0 = r_u - β`,
/// `c0 = r_c - α`.
#[derive(Debug, Clone, Copy)]
struct Affine<T> {
    k: T,
    u: T,
    c: T,
}

impl<T: Scalar> Affine<T> {
    fn new(k: T, u: T, c: T) -> Self {
        Self { k, u, c }
    }
    fn constant(k: T) -> Self {
        Self::new(k, T::zero(), T::zero())
    }
}

/// `Π(z) = k + g·z + ½·zᵀHz` over `z = (u0, c0)`.
#[derive(Debug, Clone, Copy)]
struct Quadratic<T> {
    g: [T; 2],
    h: [[T; 2]; 2],
}

impl<T: Scalar> Quadratic<T> {
    /// Revenue `N_c·(r_c - c0)·y + N_u·(r_u - u0)·x` for affine `x`, `y`.
    fn revenue(params: &MarketParams<T>, x: Affine<T>, y: Affine<T>) -> Self {
        let (nu, nc) = (params.n_users_total, params.n_cps_total);
        let (ru, rc) = (params.standalone_user, params.standalone_cp);
        let two = T::two();
        let huc = -(nc * y.u + nu * x.c);
        Self {
            g: [nc * rc * y.u + nu * (ru * x.u - x.k), nc * (rc * y.c - y.k) + nu * ru * x.c],
            h: [[-two * nu * x.u, huc], [huc, -two * nc * y.c]],
        }
    }

    fn gradient_at(&self, z: [T; 2]) -> [T; 2] {
        [
            self.g[0] + self.h[0][0] * z[0] + self.h[0][1] * z[1],
            self.g[1] + self.h[1][0] * z[0] + self.h[1][1] * z[1],
        ]
    }

    fn stationary(&self) -> Option<[T; 2]> {
        solve2(self.h, [-self.g[0], -self.g[1]])
    }

    /// Maximizer along `line`, if the quadratic is strictly concave on it.
    fn line_max(&self, line: &Line<T>) -> Option<[T; 2]> {
        let (z0, d) = line.parametrize()?;
        let grad = self.gradient_at(z0);
        let slope = grad[0] * d[0] + grad[1] * d[1];
        let hd = [
            self.h[0][0] * d[0] + self.h[0][1] * d[1],
            self.h[1][0] * d[0] + self.h[1][1] * d[1],
        ];
        let curvature = d[0] * hd[0] + d[1] * hd[1];
        if curvature < -T::singular_tol() {
            let t = -slope / curvature;
            Some([z0[0] + t * d[0], z0[1] + t * d[1]])
        } else {
            None
        }
    }
}

/// `a·z = rhs` in `(u0, c0)` space.
#[derive(Debug, Clone, Copy)]
struct Line<T> {
    a: [T; 2],
    rhs: T,
}

impl<T: Scalar> Line<T> {
    fn new(au: T, ac: T, rhs: T) -> Self {
        Self { a: [au, ac], rhs }
    }

    fn parametrize(&self) -> Option<([T; 2], [T; 2])> {
        let norm2 = self.a[0] * self.a[0] + self.a[1] * self.a[1];
        if norm2 <= T::singular_tol() {
            return None;
        }
        let s = self.rhs / norm2;
        Some(([self.a[0] * s, self.a[1] * s], [-self.a[1], self.a[0]]))
    }

    fn intersect(&self, other: &Line<T>) -> Option<[T; 2]> {
        solve2([self.a, other.a], [self.rhs, other.rhs])
    }
}

fn solve2<T: Scalar>(m: [[T; 2]; 2], rhs: [T; 2]) -> Option<[T; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m[0][0].abs().max(m[0][1].abs()).max(m[1][0].abs()).max(m[1][1].abs());
    if det.abs() <= T::singular_tol() * scale.max(T::one()) * scale.max(T::one()) {
        return None;
    }
    Some([
        (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det,
        (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
    ])
}

/// Visits every candidate `(α, β)` inside the search box.
fn for_each_candidate<T: Scalar>(
    params: &MarketParams<T>,
    b: T,
    c: T,
    halfwidth: T,
    mut visit: impl FnMut(T, T),
) {
    let (zero, one) = (T::zero(), T::one());
    let probe = PriceVector::new(zero, zero, b, c);
    let Reduced { p, q, .. } = Reduced::new(params, &probe);
    let d = one - p * q;
    let (ru, rc) = (params.standalone_user, params.standalone_cp);

    // Every boundary between regimes, plus the box edges.
    let lines = [
        Line::new(one, zero, zero),
        Line::new(one, zero, one),
        Line::new(one, zero, -p),
        Line::new(one, zero, one - p),
        Line::new(zero, one, zero),
        Line::new(zero, one, one),
        Line::new(zero, one, -q),
        Line::new(zero, one, one - q),
        Line::new(one, p, zero),
        Line::new(one, p, d),
        Line::new(q, one, zero),
        Line::new(q, one, d),
        Line::new(one, zero, ru - halfwidth),
        Line::new(one, zero, ru + halfwidth),
        Line::new(zero, one, rc - halfwidth),
        Line::new(zero, one, rc + halfwidth),
    ];

    let tol = T::consistency_tol() * halfwidth.max(one);
    let mut emit = |z: [T; 2]| {
        let (alpha, beta) = (rc - z[1], ru - z[0]);
        if !(alpha.is_finite() && beta.is_finite()) {
            return;
        }
        if alpha.abs() > halfwidth + tol || beta.abs() > halfwidth + tol {
            return;
        }
        visit(alpha.max(-halfwidth).min(halfwidth), beta.max(-halfwidth).min(halfwidth));
    };

    emit([ru, rc]);
    for (i, l1) in lines.iter().enumerate() {
        for l2 in &lines[i + 1..] {
            if let Some(z) = l1.intersect(l2) {
                emit(z);
            }
        }
    }

    // (x, y) as affine maps of (u0, c0) in each regime with a non-constant
    // revenue quadratic.
    let mut regimes: Vec<(Affine<T>, Affine<T>)> = Vec::with_capacity(9);
    let (x0, x1) = (Affine::constant(zero), Affine::constant(one));
    regimes.push((x0, Affine::new(zero, zero, one))); // (zero, interior)
    regimes.push((x0, x1)); // (zero, full)
    regimes.push((Affine::new(zero, one, zero), x0)); // (interior, zero)
    regimes.push((Affine::new(p, one, zero), x1)); // (interior, full)
    regimes.push((x1, x0)); // (full, zero)
    regimes.push((x1, Affine::new(q, zero, one))); // (full, interior)
    regimes.push((x1, x1)); // (full, full)
    if d.abs() > T::singular_tol() {
        regimes.push((Affine::new(zero, one / d, p / d), Affine::new(zero, q / d, one / d)));
    }
    for (x, y) in regimes {
        let quad = Quadratic::revenue(params, x, y);
        if let Some(z) = quad.stationary() {
            emit(z);
        }
        for line in &lines {
            if let Some(z) = quad.line_max(line) {
                emit(z);
            }
        }
    }
}

/// Candidate platform prices `(α, β)` for ISP prices `(b, c)`; see the module
/// docs. Candidates are clamped into `[-halfwidth, halfwidth]²`.
pub fn enumerate_platform_candidates<T: Scalar>(
    params: &MarketParams<T>,
    isp_prices: (T, T),
    halfwidth: T,
) -> Vec<(T, T)> {
    let mut out = Vec::new();
    for_each_candidate(params, isp_prices.0, isp_prices.1, halfwidth, |a, b| {
        if !out.contains(&(a, b)) {
            out.push((a, b))
        }
    });
    out
}

/// Platform revenue at fees `(α, β)` under the selected equilibrium, or
/// `-∞` if no equilibrium is found.
#[inline]
pub(crate) fn platform_objective<T: Scalar>(params: &MarketParams<T>, b: T, c: T, alpha: T, beta: T) -> T {
    let prices = PriceVector::new(alpha, beta, b, c);
    match solve_participation(params, &prices) {
        Ok(part) => platform_revenue(&prices, &part),
        Err(_) => T::neg_infinity(),
    }
}

/// Best candidate only, with no grid cross-check. Used inside the ISP's
/// search where the reply is needed at many thousands of `(b, c)`.
pub(crate) fn best_candidate<T: Scalar>(params: &MarketParams<T>, b: T, c: T, cfg: &OptimizerConfig<T>) -> Evaluated<T, 2> {
    let mut best = Evaluated {
        point: [T::zero(), T::zero()],
        value: T::neg_infinity(),
    };
    for_each_candidate(params, b, c, cfg.search_halfwidth, |alpha, beta| {
        let cand = Evaluated {
            point: [alpha, beta],
            value: platform_objective(params, b, c, alpha, beta),
        };
        if cand.preference(&best, cfg.value_tie_tol) == Ordering::Less {
            best = cand;
        }
    });
    best
}

/// The platform's profit-maximizing fees against ISP prices `(b, c)`.
///
/// With the platform present, the best enumerated candidate and the best
/// point of a zooming grid over `[-K, K]²` are compared; the better one is
/// returned (ties go to the smaller `(α, β)`). A gap above
/// [`NONCONVERGENCE_REL_GAP`] is recorded in `diagnostic`.
pub fn platform_best_response<T: Scalar>(
    params: &MarketParams<T>,
    isp_prices: (T, T),
    mode: PlatformMode,
    cfg: &OptimizerConfig<T>,
) -> Result<PlatformReply<T>> {
    let (b, c) = isp_prices;
    let (alpha, beta, diagnostic) = match mode {
        PlatformMode::Absent => (T::zero(), T::zero(), None),
        PlatformMode::Present => {
            let cand = best_candidate(params, b, c, cfg);
            let (lo, hi) = cfg.price_box();
            let grid = maximize_on_box(
                |[alpha, beta]: [T; 2]| platform_objective(params, b, c, alpha, beta),
                [(lo, hi), (lo, hi)],
                &cfg.platform_grid(),
            );
            let best = match cand.preference(&grid, cfg.value_tie_tol) {
                Ordering::Greater => grid,
                _ => cand,
            };
            let diag = Diagnostic {
                isp_prices: (b.to_f64().unwrap_or(f64::NAN), c.to_f64().unwrap_or(f64::NAN)),
                candidate_value: cand.value.to_f64().unwrap_or(f64::NAN),
                grid_value: grid.value.to_f64().unwrap_or(f64::NAN),
            };
            let flagged = !(diag.relative_gap() <= NONCONVERGENCE_REL_GAP);
            (best.point[0], best.point[1], flagged.then_some(diag))
        }
    };
    let prices = PriceVector::new(alpha, beta, b, c);
    let participation = solve_participation(params, &prices)?;
    Ok(PlatformReply {
        prices,
        participation,
        profit: platform_revenue(&prices, &participation),
        diagnostic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> MarketParams<f64> {
        MarketParams::default()
    }

    #[test]
    fn zero_value_market_charges_nothing() {
        let params = MarketParams {
            n_users_total: 10.0,
            n_cps_total: 1.0,
            standalone_user: 0.0,
            standalone_cp: 0.0,
            cp_to_user_effect: 0.0,
            ad_revenue_per_user: 0.0,
            cp_isp_price: 0.0,
        };
        let r = platform_best_response(&params, (0.0, 0.0), PlatformMode::Present, &OptimizerConfig::default()).unwrap();
        assert_eq!(r.profit, 0.0);
        assert_eq!((r.prices.platform_cp_fee, r.prices.platform_user_fee), (0.0, 0.0));
        assert!(r.diagnostic.is_none());
    }

    #[test]
    fn absent_platform_leaves_full_market_at_zero_prices() {
        let r = platform_best_response(&defaults(), (0.0, 0.0), PlatformMode::Absent, &OptimizerConfig::default()).unwrap();
        assert_eq!(r.profit, 0.0);
        assert_eq!((r.participation.n_u, r.participation.n_c), (10.0, 1.0));
    }

    #[test]
    fn decoupled_sides_price_at_half_the_standalone_value() {
        // N_u = N_c = 1, no cross effects: each side is a monopoly (r - p)·p.
        let r = 0.6_f64;
        let params = MarketParams {
            n_users_total: 1.0,
            n_cps_total: 1.0,
            standalone_user: r,
            standalone_cp: r,
            cp_to_user_effect: 0.0,
            ad_revenue_per_user: 0.0,
            cp_isp_price: 0.0,
        };
        let cands = enumerate_platform_candidates(&params, (0.0, 0.0), 10.0);
        assert!(cands.iter().any(|&(a, b)| (a - r / 2.0).abs() < 1e-12 && (b - r / 2.0).abs() < 1e-12));
        let reply = platform_best_response(&params, (0.0, 0.0), PlatformMode::Present, &OptimizerConfig::default()).unwrap();
        assert!((reply.profit - 2.0 * (r / 2.0) * (r / 2.0)).abs() < 1e-12);
        assert!((reply.prices.platform_cp_fee - 0.3).abs() < 1e-9);
    }

    #[test]
    fn full_full_candidates_sit_on_the_participation_boundary() {
        // Revenue is increasing in both fees while both sides are full, so the
        // best full/full candidate makes both marginal agents indifferent.
        let params = defaults();
        let best = best_candidate(&params, 0.0, 0.0, &OptimizerConfig::default());
        let prices = PriceVector::new(best.point[0], best.point[1], 0.0, 0.0);
        let part = solve_participation(&params, &prices).unwrap();
        assert_eq!((part.n_u, part.n_c), (10.0, 1.0));
        let u = crate::model::user_utility(&params, &prices, part.n_c);
        let pi = crate::model::cp_profit(&params, &prices, part.n_u);
        assert!((u - 1.0).abs() < 1e-9 && (pi - 1.0).abs() < 1e-9, "u={u} pi={pi}");
    }

    #[test]
    fn candidates_and_grid_agree_at_defaults() {
        let cfg = OptimizerConfig::default();
        let reply = platform_best_response(&defaults(), (0.0, 0.0), PlatformMode::Present, &cfg).unwrap();
        assert!(reply.diagnostic.is_none());
        // The full/full vertex sits at α = r_c - 1 + (γ - a)·N_u = 34.9.
        let bounds = cfg.price_box();
        let grid = maximize_on_box(
            |[a, b]: [f64; 2]| platform_objective(&defaults(), 0.0, 0.0, a, b),
            [bounds, bounds],
            &cfg.platform_grid(),
        );
        assert!((reply.profit - grid.value).abs() <= 1e-3 * reply.profit.abs());
    }

    #[test]
    fn config_validation() {
        let mut c = OptimizerConfig::<f64>::default();
        assert!(c.validate().is_ok());
        c.zoom_factor = 1.0;
        assert!(c.validate().is_err());
        let mut c = OptimizerConfig::<f64>::default();
        c.coarse_grid = 2;
        assert!(c.validate().is_err());
    }
}
