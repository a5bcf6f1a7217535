//! Market primitives: parameters, prices, participation and the closed-form
//! payoff and welfare expressions of the users/CPs/platform/access ISP game.
//!
//! Users value the combined platform + access ISP service at
//! `u = r_u - β + (δ - b)·n_c`, CPs earn `Π_c = r_c - α + (γ - c - a)·n_u`.
//! Both sides have outside options uniform on `[0, 1]`, so participation is
//! the clipped value times the side's total mass.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Exogenous environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams<T> {
    /// Total user mass `N_u`.
    pub n_users_total: T,
    /// Total CP mass `N_c`.
    pub n_cps_total: T,
    /// Stand-alone user value `r_u`.
    pub standalone_user: T,
    /// Stand-alone CP benefit `r_c`.
    pub standalone_cp: T,
    /// Value a user gets per joined CP, `δ`.
    pub cp_to_user_effect: T,
    /// Advertising revenue a CP gets per subscriber, `γ`.
    pub ad_revenue_per_user: T,
    /// Price per subscriber the CP's own ISP charges, `a`.
    pub cp_isp_price: T,
}

impl<T: Scalar> Default for MarketParams<T> {
    /// The reference calibration: `N_u=10, N_c=1, r_u=r_c=0.9, δ=2, γ=4, a=0.5`.
    fn default() -> Self {
        Self {
            n_users_total: T::of(10.0),
            n_cps_total: T::one(),
            standalone_user: T::of(0.9),
            standalone_cp: T::of(0.9),
            cp_to_user_effect: T::two(),
            ad_revenue_per_user: T::of(4.0),
            cp_isp_price: T::of(0.5),
        }
    }
}

/// Names of the [`MarketParams`] fields, used by configs and sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParamName {
    UsersTotal,
    CpsTotal,
    StandaloneUser,
    StandaloneCp,
    Delta,
    Gamma,
    CpIspPrice,
}

impl ParamName {
    pub const ALL: [ParamName; 7] = [
        ParamName::UsersTotal,
        ParamName::CpsTotal,
        ParamName::StandaloneUser,
        ParamName::StandaloneCp,
        ParamName::Delta,
        ParamName::Gamma,
        ParamName::CpIspPrice,
    ];

    /// Short key used in config files and CSV output.
    pub fn key(self) -> &'static str {
        match self {
            ParamName::UsersTotal => "N_u",
            ParamName::CpsTotal => "N_c",
            ParamName::StandaloneUser => "r_u",
            ParamName::StandaloneCp => "r_c",
            ParamName::Delta => "delta",
            ParamName::Gamma => "gamma",
            ParamName::CpIspPrice => "a",
        }
    }

    pub fn field_name(self) -> &'static str {
        match self {
            ParamName::UsersTotal => "n_users_total",
            ParamName::CpsTotal => "n_cps_total",
            ParamName::StandaloneUser => "standalone_user",
            ParamName::StandaloneCp => "standalone_cp",
            ParamName::Delta => "cp_to_user_effect",
            ParamName::Gamma => "ad_revenue_per_user",
            ParamName::CpIspPrice => "cp_isp_price",
        }
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ParamName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ParamName::ALL
            .into_iter()
            .find(|p| p.key() == s || p.field_name() == s)
            .ok_or_else(|| Error::UnknownParam(s.to_string()))
    }
}

impl<T: Scalar> MarketParams<T> {
    pub fn get(&self, name: ParamName) -> T {
        match name {
            ParamName::UsersTotal => self.n_users_total,
            ParamName::CpsTotal => self.n_cps_total,
            ParamName::StandaloneUser => self.standalone_user,
            ParamName::StandaloneCp => self.standalone_cp,
            ParamName::Delta => self.cp_to_user_effect,
            ParamName::Gamma => self.ad_revenue_per_user,
            ParamName::CpIspPrice => self.cp_isp_price,
        }
    }

    pub fn set(&mut self, name: ParamName, value: T) {
        let slot = match name {
            ParamName::UsersTotal => &mut self.n_users_total,
            ParamName::CpsTotal => &mut self.n_cps_total,
            ParamName::StandaloneUser => &mut self.standalone_user,
            ParamName::StandaloneCp => &mut self.standalone_cp,
            ParamName::Delta => &mut self.cp_to_user_effect,
            ParamName::Gamma => &mut self.ad_revenue_per_user,
            ParamName::CpIspPrice => &mut self.cp_isp_price,
        };
        *slot = value;
    }

    pub fn with(mut self, name: ParamName, value: T) -> Self {
        self.set(name, value);
        self
    }

    /// Checks hard invariants and returns soft calibration warnings.
    ///
    /// Masses must be positive and every field finite. Stand-alone values
    /// outside `[0, 1]` are legal but outside the reference calibration.
    pub fn validate(&self) -> Result<Vec<String>> {
        for name in ParamName::ALL {
            let v = self.get(name);
            if !v.is_finite() {
                return Err(Error::InvalidParams {
                    field: name.field_name(),
                    value: v.to_f64().unwrap_or(f64::NAN),
                    reason: "must be finite",
                });
            }
        }
        for name in [ParamName::UsersTotal, ParamName::CpsTotal] {
            let v = self.get(name);
            if v <= T::zero() {
                return Err(Error::InvalidParams {
                    field: name.field_name(),
                    value: v.to_f64().unwrap_or(f64::NAN),
                    reason: "mass must be positive",
                });
            }
        }
        let mut warnings = Vec::new();
        for name in [ParamName::StandaloneUser, ParamName::StandaloneCp] {
            let v = self.get(name);
            if v < T::zero() || v > T::one() {
                warnings.push(format!("{} = {} lies outside the calibrated range [0, 1]", name.key(), v));
            }
        }
        Ok(warnings)
    }

    /// Slope of user utility in the CP *fraction*: `(δ - b)·N_c`.
    #[inline]
    pub(crate) fn user_slope(&self, prices: &PriceVector<T>) -> T {
        (self.cp_to_user_effect - prices.isp_user_price) * self.n_cps_total
    }

    /// Slope of CP profit in the user *fraction*: `(γ - c - a)·N_u`.
    #[inline]
    pub(crate) fn cp_slope(&self, prices: &PriceVector<T>) -> T {
        (self.ad_revenue_per_user - prices.isp_cp_price - self.cp_isp_price) * self.n_users_total
    }
}

/// The four strategic prices. Negative values are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PriceVector<T> {
    /// Platform fee per joined CP, `α`.
    pub platform_cp_fee: T,
    /// Platform fee per subscriber, `β`.
    pub platform_user_fee: T,
    /// Access ISP price to users per CP, `b`.
    pub isp_user_price: T,
    /// Access ISP price to CPs per subscriber, `c`.
    pub isp_cp_price: T,
}

impl<T: Scalar> PriceVector<T> {
    pub fn new(alpha: T, beta: T, b: T, c: T) -> Self {
        Self {
            platform_cp_fee: alpha,
            platform_user_fee: beta,
            isp_user_price: b,
            isp_cp_price: c,
        }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.platform_cp_fee.is_finite()
            && self.platform_user_fee.is_finite()
            && self.isp_user_price.is_finite()
            && self.isp_cp_price.is_finite()
    }
}

/// Which piece of the clipped participation response a side sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    Zero,
    Interior,
    Full,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Zero, Regime::Interior, Regime::Full];

    /// Classifies a fraction that has already been snapped to exact 0 / 1.
    pub fn of_fraction<T: Scalar>(f: T) -> Self {
        if f <= T::zero() {
            Regime::Zero
        } else if f >= T::one() {
            Regime::Full
        } else {
            Regime::Interior
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Zero => "zero",
            Regime::Interior => "interior",
            Regime::Full => "full",
        })
    }
}

/// Equilibrium masses of subscribers and joined CPs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Participation<T> {
    pub n_u: T,
    pub n_c: T,
    pub regime_u: Regime,
    pub regime_c: Regime,
}

impl<T: Scalar> Participation<T> {
    /// Builds from participation fractions. Fractions within the consistency
    /// tolerance of 0 or 1 (or beyond) are snapped, so regime tags are exact.
    pub(crate) fn from_fractions(params: &MarketParams<T>, x: T, y: T) -> Self {
        let x = snap01(x);
        let y = snap01(y);
        Self {
            n_u: x * params.n_users_total,
            n_c: y * params.n_cps_total,
            regime_u: Regime::of_fraction(x),
            regime_c: Regime::of_fraction(y),
        }
    }

    /// Builds from masses (clamped into range); regimes follow the values.
    pub fn from_masses(params: &MarketParams<T>, n_u: T, n_c: T) -> Self {
        Self::from_fractions(params, n_u / params.n_users_total, n_c / params.n_cps_total)
    }

    pub fn empty() -> Self {
        Self {
            n_u: T::zero(),
            n_c: T::zero(),
            regime_u: Regime::Zero,
            regime_c: Regime::Zero,
        }
    }
}

fn snap01<T: Scalar>(f: T) -> T {
    let tol = T::consistency_tol();
    if f <= tol {
        T::zero()
    } else if f >= T::one() - tol {
        T::one()
    } else {
        f
    }
}

/// Payoffs and welfare at a participation equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome<T> {
    pub user_utility: T,
    pub cp_profit: T,
    pub platform_profit: T,
    pub access_isp_profit: T,
    pub consumer_surplus: T,
    pub cp_surplus: T,
    pub social_welfare: T,
    /// Revenue of the CPs' own ISP, `a·n_u·n_c`. Reported only; not part of
    /// social welfare.
    pub cp_isp_revenue: T,
}

/// `u = r_u - β + (δ - b)·n_c`.
pub fn user_utility<T: Scalar>(params: &MarketParams<T>, prices: &PriceVector<T>, n_c: T) -> T {
    params.standalone_user - prices.platform_user_fee
        + (params.cp_to_user_effect - prices.isp_user_price) * n_c
}

/// `Π_c = r_c - α + (γ - c - a)·n_u`.
pub fn cp_profit<T: Scalar>(params: &MarketParams<T>, prices: &PriceVector<T>, n_u: T) -> T {
    params.standalone_cp - prices.platform_cp_fee
        + (params.ad_revenue_per_user - prices.isp_cp_price - params.cp_isp_price) * n_u
}

/// `Π_p = α·n_c + β·n_u`.
pub fn platform_revenue<T: Scalar>(prices: &PriceVector<T>, part: &Participation<T>) -> T {
    prices.platform_cp_fee * part.n_c + prices.platform_user_fee * part.n_u
}

/// `Π_u = (b + c)·n_u·n_c`.
pub fn access_isp_revenue<T: Scalar>(prices: &PriceVector<T>, part: &Participation<T>) -> T {
    (prices.isp_user_price + prices.isp_cp_price) * part.n_u * part.n_c
}

/// Evaluates every payoff and the surplus measures at a participation point.
///
/// Surplus integrates the gross payoff over the joining agents' outside
/// options, so `CS = max(u, 0)·n_u` and `CPS = max(Π_c, 0)·n_c`.
pub fn welfare<T: Scalar>(
    params: &MarketParams<T>,
    prices: &PriceVector<T>,
    part: &Participation<T>,
) -> Outcome<T> {
    let u = user_utility(params, prices, part.n_c);
    let pi_c = cp_profit(params, prices, part.n_u);
    let consumer_surplus = u.max(T::zero()) * part.n_u;
    let cp_surplus = pi_c.max(T::zero()) * part.n_c;
    let platform_profit = platform_revenue(prices, part);
    let access_isp_profit = access_isp_revenue(prices, part);
    Outcome {
        user_utility: u,
        cp_profit: pi_c,
        platform_profit,
        access_isp_profit,
        consumer_surplus,
        cp_surplus,
        social_welfare: consumer_surplus + cp_surplus + platform_profit + access_isp_profit,
        cp_isp_revenue: params.cp_isp_price * part.n_u * part.n_c,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> MarketParams<f64> {
        MarketParams::default()
    }

    fn part(n_u: f64, n_c: f64) -> Participation<f64> {
        Participation::from_masses(&defaults(), n_u, n_c)
    }

    #[test]
    fn utility_examples() {
        let p = defaults();
        assert_eq!(user_utility(&p, &PriceVector::zero(), 0.0), 0.9);
        let prices = PriceVector::new(0.0, 0.5, 1.0, 0.0);
        assert!((user_utility(&p, &prices, 0.8) - 1.2).abs() < 1e-12);
        let cancel = PriceVector::new(0.0, p.standalone_user, p.cp_to_user_effect, 0.0);
        for n_c in [0.0, 0.3, 1.0] {
            assert_eq!(user_utility(&p, &cancel, n_c), 0.0);
        }
    }

    #[test]
    fn cp_profit_examples() {
        let p = defaults();
        assert_eq!(cp_profit(&p, &PriceVector::zero(), 0.0), 0.9);
        assert!((cp_profit(&p, &PriceVector::zero(), 10.0) - 35.9).abs() < 1e-12);
        let cancel = PriceVector::new(p.standalone_cp, 0.0, 0.0, p.ad_revenue_per_user - p.cp_isp_price);
        for n_u in [0.0, 2.5, 10.0] {
            assert_eq!(cp_profit(&p, &cancel, n_u), 0.0);
        }
    }

    #[test]
    fn revenue_examples() {
        let any = part(3.0, 0.4);
        assert_eq!(platform_revenue(&PriceVector::zero(), &any), 0.0);
        let full = part(10.0, 1.0);
        assert!((platform_revenue(&PriceVector::new(1.0, 0.2, 0.0, 0.0), &full) - 3.0).abs() < 1e-12);
        assert!((platform_revenue(&PriceVector::new(-1.0, 0.5, 0.0, 0.0), &full) - 4.0).abs() < 1e-12);

        assert!((access_isp_revenue(&PriceVector::new(0.0, 0.0, 0.5, 0.0), &full) - 5.0).abs() < 1e-12);
        assert_eq!(access_isp_revenue(&PriceVector::new(0.0, 0.0, 0.5, 0.5), &part(0.0, 1.0)), 0.0);
        let p = PriceVector::new(0.0, 0.0, 1.0, -0.5);
        assert!((access_isp_revenue(&p, &part(4.0, 0.5)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn welfare_at_full_participation() {
        let prices = PriceVector::new(0.0, 0.0, 0.5, 0.0);
        let o = welfare(&defaults(), &prices, &part(10.0, 1.0));
        assert!((o.user_utility - 2.4).abs() < 1e-12);
        assert!((o.consumer_surplus - 24.0).abs() < 1e-12);
        assert!((o.cp_profit - 35.9).abs() < 1e-12);
        assert!((o.cp_surplus - 35.9).abs() < 1e-12);
        assert!((o.access_isp_profit - 5.0).abs() < 1e-12);
        assert_eq!(o.platform_profit, 0.0);
        assert!((o.social_welfare - 64.9).abs() < 1e-12);
        assert!((o.cp_isp_revenue - 5.0).abs() < 1e-12);
    }

    #[test]
    fn welfare_of_empty_market() {
        let prices = PriceVector::new(2.0, 2.0, 0.3, 0.1);
        let o = welfare(&defaults(), &prices, &Participation::empty());
        assert_eq!(o.consumer_surplus, 0.0);
        assert_eq!(o.cp_surplus, 0.0);
        assert_eq!(o.social_welfare, 0.0);
    }

    #[test]
    fn negative_utility_gives_zero_surplus() {
        let prices = PriceVector::new(0.0, 5.0, 0.0, 0.0);
        let o = welfare(&defaults(), &prices, &part(0.0, 1.0));
        assert!(o.user_utility < 0.0);
        assert_eq!(o.consumer_surplus, 0.0);
    }

    #[test]
    fn regimes_follow_snapped_values() {
        let p = defaults();
        let pt = Participation::from_masses(&p, 10.0 - 1e-13, 1e-13);
        assert_eq!(pt.n_u, 10.0);
        assert_eq!(pt.n_c, 0.0);
        assert_eq!(pt.regime_u, Regime::Full);
        assert_eq!(pt.regime_c, Regime::Zero);
    }

    #[test]
    fn validate_rejects_bad_masses_and_warns_out_of_calibration() {
        let mut p = defaults();
        assert!(p.validate().unwrap().is_empty());
        p.standalone_user = 1.4;
        assert_eq!(p.validate().unwrap().len(), 1);
        p.n_cps_total = 0.0;
        assert!(matches!(p.validate(), Err(Error::InvalidParams { field: "n_cps_total", .. })));
        let q = defaults().with(ParamName::Gamma, f64::INFINITY);
        assert!(q.validate().is_err());
    }

    #[test]
    fn param_names_parse_both_spellings() {
        assert_eq!("delta".parse::<ParamName>().unwrap(), ParamName::Delta);
        assert_eq!("ad_revenue_per_user".parse::<ParamName>().unwrap(), ParamName::Gamma);
        assert!("omega".parse::<ParamName>().is_err());
    }
}
