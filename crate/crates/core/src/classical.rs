//! Closed-form deviation analysis for the classical price game.
//!
//! With the rival fixed at the competitive price `p̂ = a - 2k`, raising one's
//! own price to `p ∈ [p̂, a)` yields `p(a-p)/2` under proportional rationing
//! and `p(a-p-k)` under efficient rationing. The symmetric profile `(p̂, p̂)`
//! is an equilibrium exactly when the right derivative at `p̂` is not
//! positive, i.e. `k ≤ a/4` (proportional) or `k ≤ a/3` (efficient).

use serde::{Deserialize, Serialize};

use crate::equilibrium::{Candidate, Deviation, EquilibriumReport, Verdict};
use crate::error::{Error, Result};
use crate::market::{MarketParams, PriceProfile, RationingRule};

/// Payoff of a firm that raises its price to `price` against a rival at `p̂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationProfit {
    pub price: f64,
    pub value: f64,
    pub derivative: f64,
}

/// Deviation payoff and its slope for `p ∈ [p̂, a)`.
///
/// The efficient payoff is clamped at zero once `a - p - k` turns negative,
/// matching the `max{0, ·}` in the residual demand; the slope is then zero.
pub fn deviation_profit(
    params: &MarketParams,
    rule: RationingRule,
    p: f64,
) -> Result<DeviationProfit> {
    let params = params.ensure_feasible()?;
    let (a, k) = (params.a, params.k);
    let lo = params.ce_price();
    if !(p >= lo && p < a) {
        return Err(Error::OutOfDomain {
            what: "price",
            value: p,
            lo,
            hi: a,
        });
    }
    let (value, derivative) = match rule {
        RationingRule::Proportional => (p * (a - p) / 2.0, (a - 2.0 * p) / 2.0),
        RationingRule::Efficient => {
            let residual = a - p - k;
            if residual > 0.0 {
                (p * residual, a - k - 2.0 * p)
            } else {
                (0.0, 0.0)
            }
        }
    };
    Ok(DeviationProfit {
        price: p,
        value,
        derivative,
    })
}

/// Largest capacity for which `(p̂, p̂)` survives: `a/4` or `a/3`.
pub fn classical_threshold(rule: RationingRule, a: f64) -> f64 {
    match rule {
        RationingRule::Proportional => a / 4.0,
        RationingRule::Efficient => a / 3.0,
    }
}

/// Unconstrained maximiser of the deviation payoff: `a/2` or `(a-k)/2`.
pub fn best_deviation_price(params: &MarketParams, rule: RationingRule) -> f64 {
    match rule {
        RationingRule::Proportional => params.a / 2.0,
        RationingRule::Efficient => (params.a - params.k) / 2.0,
    }
}

pub fn classical_equilibrium_exists(
    params: &MarketParams,
    rule: RationingRule,
) -> Result<EquilibriumReport> {
    let params = params.ensure_feasible()?;
    let ce = params.ce_price();
    let threshold = classical_threshold(rule, params.a);
    let at_ce = deviation_profit(&params, rule, ce)?;
    let verdict = Verdict::from_bool(params.k <= threshold);

    let worst_deviation = match verdict {
        Verdict::Exists => Deviation {
            action: ce,
            gain: 0.0,
        },
        Verdict::NotExists => {
            // k above the threshold puts the maximiser strictly inside (p̂, a)
            let best = best_deviation_price(&params, rule);
            let gain = deviation_profit(&params, rule, best)?.value - ce * params.k;
            Deviation { action: best, gain }
        }
    };

    Ok(EquilibriumReport {
        verdict,
        candidate: Candidate::Classical(PriceProfile::symmetric(ce)),
        threshold: Some(threshold),
        deviation_derivative: Some(at_ce.derivative),
        worst_deviation: Some(worst_deviation),
        epsilon: None,
    })
}
