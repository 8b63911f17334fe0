//! Demand, residual demand and profit for the capacity-constrained price duopoly.
//!
//! Market demand is linear, `D(p) = max(0, a - p)`. The firm posting the lower
//! price serves demand up to its capacity `k`; what the higher-priced firm can
//! still sell depends on the [`RationingRule`]. Everything here is a pure
//! function of its arguments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Demand intercept `a` and per-firm capacity `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    pub a: f64,
    pub k: f64,
}

impl MarketParams {
    /// Both values must be finite and positive. Feasibility (`k < a/2`) is
    /// checked separately so that infeasible markets can still be described.
    pub fn new(a: f64, k: f64) -> Result<Self> {
        if !(a.is_finite() && k.is_finite() && a > 0.0 && k > 0.0) {
            return Err(Error::InvalidParams { a, k });
        }
        Ok(Self { a, k })
    }

    /// Like [`MarketParams::new`] but additionally requires `k < a/2`.
    pub fn feasible_new(a: f64, k: f64) -> Result<Self> {
        Self::new(a, k)?.ensure_feasible()
    }

    /// Total capacity falls short of demand at price zero.
    pub fn feasible(&self) -> bool {
        self.k < self.a / 2.0
    }

    pub fn ensure_feasible(self) -> Result<Self> {
        if self.feasible() {
            Ok(self)
        } else {
            Err(Error::Infeasible {
                a: self.a,
                k: self.k,
            })
        }
    }

    /// Competitive-equilibrium price `a - 2k`, where joint capacity meets demand.
    pub fn ce_price(&self) -> f64 {
        self.a - 2.0 * self.k
    }
}

/// How the higher-priced firm's residual demand is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RationingRule {
    /// Consumers are served at the low price in random order; the high-price
    /// firm keeps the fraction `1 - k/D(p_low)` of its own demand.
    Proportional,
    /// Highest-value consumers are served first (equivalently, costless
    /// resale); the high-price firm faces `D(p_high) - k`.
    Efficient,
}

impl RationingRule {
    pub const ALL: [RationingRule; 2] = [RationingRule::Proportional, RationingRule::Efficient];

    pub fn name(self) -> &'static str {
        match self {
            RationingRule::Proportional => "proportional",
            RationingRule::Efficient => "efficient",
        }
    }
}

impl std::fmt::Display for RationingRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RationingRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "proportional" => Ok(RationingRule::Proportional),
            "efficient" => Ok(RationingRule::Efficient),
            other => Err(Error::InvalidRange(format!("unknown rationing rule '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Firm {
    One,
    Two,
}

impl Firm {
    pub fn other(self) -> Firm {
        match self {
            Firm::One => Firm::Two,
            Firm::Two => Firm::One,
        }
    }
}

/// Posted prices `(p1, p2)`. Any finite value is allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceProfile {
    pub p1: f64,
    pub p2: f64,
}

impl PriceProfile {
    pub fn new(p1: f64, p2: f64) -> Self {
        Self { p1, p2 }
    }

    pub fn symmetric(p: f64) -> Self {
        Self { p1: p, p2: p }
    }

    /// `(own, opponent)` from the point of view of `firm`.
    pub fn split(&self, firm: Firm) -> (f64, f64) {
        match firm {
            Firm::One => (self.p1, self.p2),
            Firm::Two => (self.p2, self.p1),
        }
    }

    pub fn swapped(&self) -> Self {
        Self {
            p1: self.p2,
            p2: self.p1,
        }
    }
}

/// `max(0, a - p)`; linear for negative prices.
pub fn demand(params: &MarketParams, p: f64) -> f64 {
    (params.a - p).max(0.0)
}

/// Demand left for `firm` given both posted prices.
///
/// Ties split market demand equally. A strictly higher price leaves
/// `max(0, D(p_i)(1 - k/D(p_j)))` under proportional rationing and
/// `max(0, D(p_i) - k)` under efficient rationing; when the cheaper firm
/// faces no demand at all, nothing is left for the dearer one.
pub fn residual_demand(
    params: &MarketParams,
    rule: RationingRule,
    prices: &PriceProfile,
    firm: Firm,
) -> f64 {
    let (own, rival) = prices.split(firm);
    let d_own = demand(params, own);
    if own < rival {
        return d_own;
    }
    if own == rival {
        return d_own / 2.0;
    }
    match rule {
        RationingRule::Proportional => {
            let d_rival = demand(params, rival);
            if d_rival <= 0.0 {
                return 0.0;
            }
            (d_own * (1.0 - params.k / d_rival)).max(0.0)
        }
        RationingRule::Efficient => (d_own - params.k).max(0.0),
    }
}

/// Units actually sold: residual demand capped at capacity.
pub fn sales(params: &MarketParams, rule: RationingRule, prices: &PriceProfile, firm: Firm) -> f64 {
    params.k.min(residual_demand(params, rule, prices, firm))
}

/// Revenue `p_i * min(k, R_i)`; production is costless.
pub fn profit(params: &MarketParams, rule: RationingRule, prices: &PriceProfile, firm: Firm) -> f64 {
    let (own, _) = prices.split(firm);
    own * sales(params, rule, prices, firm)
}
