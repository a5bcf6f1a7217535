//! Fulfilled-expectations participation.
//!
//! Working in fractions `x = n_u / N_u`, `y = n_c / N_c`, the participation
//! system is
//!
//! ```text
//! x = clip01(u0 + p·y),   u0 = r_u - β,  p = (δ - b)·N_c
//! y = clip01(c0 + q·x),   c0 = r_c - α,  q = (γ - c - a)·N_u
//! ```
//!
//! Each side is in one of three regimes (zero, interior, full), so every fixed
//! point solves one of nine linear systems. We solve all nine and keep the
//! solutions that reproduce themselves under the clipped map.

use crate::error::{Error, Result};
use crate::model::{MarketParams, Participation, PriceVector, Regime};
use crate::scalar::Scalar;

/// All participation equilibria at given prices.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointSet<T> {
    /// Distinct fixed points, sorted descending by `(n_u, n_c)`.
    pub points: Vec<Participation<T>>,
    /// True when the doubly-interior system is singular and consistent, i.e.
    /// a continuum of equilibria exists. `points` then holds its endpoints.
    pub degenerate: bool,
}

impl<T: Scalar> FixedPointSet<T> {
    /// The selected equilibrium: highest `n_u`, then highest `n_c`.
    pub fn selected(&self) -> Option<&Participation<T>> {
        self.points.first()
    }
}

/// The participation system reduced to intercepts and cross slopes in
/// fraction space.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Reduced<T> {
    pub u0: T,
    pub c0: T,
    pub p: T,
    pub q: T,
}

impl<T: Scalar> Reduced<T> {
    #[inline]
    pub fn new(params: &MarketParams<T>, prices: &PriceVector<T>) -> Self {
        Self {
            u0: params.standalone_user - prices.platform_user_fee,
            c0: params.standalone_cp - prices.platform_cp_fee,
            p: params.user_slope(prices),
            q: params.cp_slope(prices),
        }
    }

    #[inline]
    fn is_fixed(&self, x: T, y: T) -> bool {
        let tol = T::consistency_tol();
        (x - (self.u0 + self.p * y).clip01()).abs() <= tol
            && (y - (self.c0 + self.q * x).clip01()).abs() <= tol
    }

    /// Calls `visit(x, y)` for every regime whose solution is a fixed point.
    /// Points can repeat when they sit on a regime boundary. Returns whether
    /// the interior system was a degenerate continuum.
    #[inline]
    pub fn for_each_fixed_point(&self, mut visit: impl FnMut(T, T)) -> bool {
        let (zero, one) = (T::zero(), T::one());
        let Reduced { u0, c0, p, q } = *self;
        let mut degenerate = false;
        for rx in Regime::ALL {
            for ry in Regime::ALL {
                let (x, y) = match (rx, ry) {
                    (Regime::Interior, Regime::Interior) => {
                        let d = one - p * q;
                        if d.abs() > T::singular_tol() {
                            ((u0 + p * c0) / d, (c0 + q * u0) / d)
                        } else {
                            if (u0 + p * c0).abs() <= T::consistency_tol() {
                                degenerate |= self.visit_continuum(&mut visit);
                            }
                            continue;
                        }
                    }
                    (Regime::Interior, fixed_y) => {
                        let y = if fixed_y == Regime::Full { one } else { zero };
                        (u0 + p * y, y)
                    }
                    (fixed_x, Regime::Interior) => {
                        let x = if fixed_x == Regime::Full { one } else { zero };
                        (x, c0 + q * x)
                    }
                    (fx, fy) => (
                        if fx == Regime::Full { one } else { zero },
                        if fy == Regime::Full { one } else { zero },
                    ),
                };
                if x.is_finite() && y.is_finite() && self.is_fixed(x, y) {
                    visit(x.clip01(), y.clip01());
                }
            }
        }
        degenerate
    }

    /// With `p·q = 1` and `u0 + p·c0 = 0` the line `x = u0 + p·y` is made of
    /// fixed points wherever it stays inside the unit square. Visits the two
    /// ends of that segment.
    fn visit_continuum(&self, visit: &mut impl FnMut(T, T)) -> bool {
        let (zero, one) = (T::zero(), T::one());
        let Reduced { u0, p, .. } = *self;
        // p != 0 because p·q ≈ 1. Bounds on y from 0 <= u0 + p·y <= 1.
        let (a, b) = ((zero - u0) / p, (one - u0) / p);
        let lo = a.min(b).max(zero);
        let hi = a.max(b).min(one);
        if lo > hi + T::consistency_tol() {
            return false;
        }
        let mut any = false;
        for y in [lo, hi] {
            let x = u0 + p * y;
            if self.is_fixed(x, y) {
                visit(x.clip01(), y.clip01());
                any = true;
            }
        }
        any
    }

    /// Lexicographically largest fixed point `(x, y)`, without allocating.
    #[inline]
    pub fn max_fixed_point(&self) -> Option<(T, T)> {
        let mut best: Option<(T, T)> = None;
        self.for_each_fixed_point(|x, y| {
            let better = match best {
                None => true,
                Some((bx, by)) => x > bx || (x == bx && y > by),
            };
            if better {
                best = Some((x, y));
            }
        });
        best
    }
}

/// One application of the clipped best-response map to a participation guess.
pub fn clipped_map<T: Scalar>(
    params: &MarketParams<T>,
    prices: &PriceVector<T>,
    guess: &Participation<T>,
) -> Participation<T> {
    let (x, y) = raw_map(params, prices, guess.n_u, guess.n_c);
    Participation::from_fractions(params, x, y)
}

/// The clipped map in fraction space, without snapping.
fn raw_map<T: Scalar>(params: &MarketParams<T>, prices: &PriceVector<T>, n_u: T, n_c: T) -> (T, T) {
    let r = Reduced::new(params, prices);
    let x = (r.u0 + r.p * (n_c / params.n_cps_total)).clip01();
    let y = (r.c0 + r.q * (n_u / params.n_users_total)).clip01();
    (x, y)
}

/// Largest mass discrepancy between a point and its image under the map.
pub fn residual<T: Scalar>(params: &MarketParams<T>, prices: &PriceVector<T>, part: &Participation<T>) -> T {
    let (x, y) = raw_map(params, prices, part.n_u, part.n_c);
    let du = (x * params.n_users_total - part.n_u).abs();
    let dc = (y * params.n_cps_total - part.n_c).abs();
    du.max(dc)
}

/// Enumerates every participation equilibrium across the nine regime pairs.
pub fn enumerate_fixed_points<T: Scalar>(params: &MarketParams<T>, prices: &PriceVector<T>) -> FixedPointSet<T> {
    let reduced = Reduced::new(params, prices);
    let mut points: Vec<Participation<T>> = Vec::with_capacity(4);
    let degenerate = reduced.for_each_fixed_point(|x, y| {
        let candidate = Participation::from_fractions(params, x, y);
        let dup = points.iter().any(|p| {
            (p.n_u - candidate.n_u).abs() <= T::distinct_tol() && (p.n_c - candidate.n_c).abs() <= T::distinct_tol()
        });
        if !dup {
            points.push(candidate);
        }
    });
    points.sort_by(|a, b| {
        b.n_u
            .partial_cmp(&a.n_u)
            .unwrap()
            .then(b.n_c.partial_cmp(&a.n_c).unwrap())
    });
    FixedPointSet { points, degenerate }
}

/// The equilibrium agents coordinate on: the largest subscriber mass, and
/// among those the largest CP mass.
pub fn solve_participation<T: Scalar>(params: &MarketParams<T>, prices: &PriceVector<T>) -> Result<Participation<T>> {
    let reduced = Reduced::new(params, prices);
    match reduced.max_fixed_point() {
        Some((x, y)) => Ok(Participation::from_fractions(params, x, y)),
        None => Err(Error::NoFixedPoint {
            u0: reduced.u0.to_f64().unwrap_or(f64::NAN),
            c0: reduced.c0.to_f64().unwrap_or(f64::NAN),
            p: reduced.p.to_f64().unwrap_or(f64::NAN),
            q: reduced.q.to_f64().unwrap_or(f64::NAN),
        }),
    }
}
