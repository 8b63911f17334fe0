//! The entangled price game.
//!
//! Firms choose actions `x1, x2`; entanglement `γ ≥ 0` mixes them into posted
//! prices `p1 = x1 cosh γ + x2 sinh γ`, `p2 = x2 cosh γ + x1 sinh γ`. At
//! `γ = 0` this is the classical game. The symmetric candidate is
//! `x̂ = p̂ e^{-γ}`, which maps to the competitive price for both firms.
//!
//! Under proportional rationing a firm raising its action above `x̂` also
//! raises the rival's price, shrinking its own share to
//! `g(x) = 1 - k / (a - x̂ cosh γ - x sinh γ)`. The candidate is an
//! equilibrium iff `k ≤ k(γ) = a e^γ / (2 (cosh γ + e^γ)) = a / (3 + e^{-2γ})`.

use serde::{Deserialize, Serialize};

use crate::equilibrium::{Candidate, Deviation, EquilibriumReport, Verdict};
use crate::error::{Error, Result};
use crate::market::{MarketParams, PriceProfile};
use crate::numdiff;

/// Beyond this entanglement `e^{-2γ}` underflows and `k(γ)` is `a/3`.
pub const GAMMA_SATURATION: f64 = 700.0 / 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumProfile {
    pub x1: f64,
    pub x2: f64,
    pub gamma: f64,
}

impl QuantumProfile {
    pub fn new(x1: f64, x2: f64, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(Self { x1, x2, gamma })
    }

    pub fn symmetric(x: f64, gamma: f64) -> Result<Self> {
        Self::new(x, x, gamma)
    }
}

pub fn check_gamma(gamma: f64) -> Result<f64> {
    if gamma.is_finite() && gamma >= 0.0 {
        Ok(gamma)
    } else {
        Err(Error::InvalidGamma(gamma))
    }
}

pub fn induced_prices(profile: &QuantumProfile) -> PriceProfile {
    let (c, s) = (profile.gamma.cosh(), profile.gamma.sinh());
    PriceProfile {
        p1: profile.x1 * c + profile.x2 * s,
        p2: profile.x2 * c + profile.x1 * s,
    }
}

/// `x̂ = (a - 2k) e^{-γ}`.
pub fn equilibrium_action(params: &MarketParams, gamma: f64) -> Result<f64> {
    let params = params.ensure_feasible()?;
    check_gamma(gamma)?;
    Ok(params.ce_price() * (-gamma).exp())
}

/// Own action that yields price `price` when the rival plays `x̂`.
pub fn action_for_price(params: &MarketParams, gamma: f64, price: f64) -> Result<f64> {
    let x_hat = equilibrium_action(params, gamma)?;
    Ok((price - x_hat * gamma.sinh()) / gamma.cosh())
}

/// One firm's deviation to `x` against a rival fixed at `x̂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumDeviation {
    pub x: f64,
    pub induced_price: f64,
    pub share: f64,
    pub value: f64,
}

impl QuantumDeviation {
    /// `D(p̃) · g`, the units the deviating firm sells.
    pub fn residual_demand(&self, params: &MarketParams) -> f64 {
        (params.a - self.induced_price) * self.share
    }
}

/// Closed-form deviation payoff `π(p̃(x)) · g(x)` on `p̃(x) ∈ [p̂, a)`.
///
/// At `x = x̂` both prices coincide and the tie split applies (share 1/2,
/// value `p̂ k`); `g(x̂) = 1/2` as well, so the payoff is continuous there.
/// The share is clamped at zero once the rival's demand drops below `k`.
pub fn quantum_deviation(params: &MarketParams, gamma: f64, x: f64) -> Result<QuantumDeviation> {
    let params = params.ensure_feasible()?;
    let x_hat = equilibrium_action(&params, gamma)?;
    let (a, k) = (params.a, params.k);
    let (c, s) = (gamma.cosh(), gamma.sinh());

    let x_max = (a - x_hat * s) / c;
    if !(x >= x_hat && x < x_max) {
        return Err(Error::OutOfDomain {
            what: "quantum action",
            value: x,
            lo: x_hat,
            hi: x_max,
        });
    }
    if x == x_hat {
        let p = params.ce_price();
        return Ok(QuantumDeviation {
            x,
            induced_price: p,
            share: 0.5,
            value: p * k,
        });
    }

    let price = x * c + x_hat * s;
    let rival_demand = a - x_hat * c - x * s;
    let share = if rival_demand > 0.0 {
        (1.0 - k / rival_demand).max(0.0)
    } else {
        0.0
    };
    Ok(QuantumDeviation {
        x,
        induced_price: price,
        share,
        value: price * (a - price) * share,
    })
}

/// `k(γ)`, evaluated as `a / (3 + e^{-2γ})`.
pub fn quantum_threshold(a: f64, gamma: f64) -> f64 {
    if gamma > GAMMA_SATURATION {
        return a / 3.0;
    }
    a / (3.0 + (-2.0 * gamma).exp())
}

/// `k(γ)` in its hyperbolic form `a e^γ / (2 (cosh γ + e^γ))`. Overflows for
/// very large `γ`; [`quantum_threshold`] is the stable evaluation.
pub fn quantum_threshold_hyperbolic(a: f64, gamma: f64) -> f64 {
    let e = gamma.exp();
    a * e / (2.0 * (gamma.cosh() + e))
}

/// Right derivative of the deviation payoff at `x̂`:
/// `k cosh γ - (a - 2k) e^γ / 2`.
pub fn deviation_slope_at_candidate(params: &MarketParams, gamma: f64) -> f64 {
    params.k * gamma.cosh() - params.ce_price() * gamma.exp() / 2.0
}

pub fn quantum_equilibrium_exists(params: &MarketParams, gamma: f64) -> Result<EquilibriumReport> {
    let params = params.ensure_feasible()?;
    let x_hat = equilibrium_action(&params, gamma)?;
    let threshold = quantum_threshold(params.a, gamma);
    let verdict = Verdict::from_bool(params.k <= threshold);
    let worst = match verdict {
        Verdict::Exists => Deviation {
            action: x_hat,
            gain: 0.0,
        },
        Verdict::NotExists => best_deviation(&params, gamma)?,
    };
    Ok(EquilibriumReport {
        verdict,
        candidate: Candidate::Quantum(QuantumProfile::symmetric(x_hat, gamma)?),
        threshold: Some(threshold),
        deviation_derivative: Some(deviation_slope_at_candidate(&params, gamma)),
        worst_deviation: Some(worst),
        epsilon: None,
    })
}

/// Maximiser of the deviation payoff by golden-section search on the actions
/// whose price lies in `[p̂, max(p̂, a/2)]`, where the payoff is concave; above
/// `a/2` it only decreases.
pub fn best_deviation(params: &MarketParams, gamma: f64) -> Result<Deviation> {
    let x_hat = equilibrium_action(params, gamma)?;
    let base = params.ce_price() * params.k;
    let half = params.a / 2.0;
    if params.ce_price() >= half {
        return Ok(Deviation {
            action: x_hat,
            gain: 0.0,
        });
    }
    let f = |x: f64| quantum_deviation(params, gamma, x).map(|d| d.value);
    let (mut lo, mut hi) = (x_hat, action_for_price(params, gamma, half)?.max(x_hat));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
        let m1 = hi - ratio * (hi - lo);
        let m2 = lo + ratio * (hi - lo);
        if f(m1)? < f(m2)? {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let x = 0.5 * (lo + hi);
    let (x, value) = [(x_hat, base), (x, f(x)?)]
        .into_iter()
        .fold((x_hat, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    Ok(Deviation {
        action: x,
        gain: value - base,
    })
}

/// Result of a finite-difference sweep over part of the deviation domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCheck {
    pub samples: usize,
    /// Largest finite-difference estimate seen (`-inf` when vacuous).
    pub max_value: f64,
    /// Induced price at which `max_value` was attained.
    pub at_price: f64,
    pub vacuous: bool,
}

impl RegionCheck {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.vacuous || self.max_value <= tolerance
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        return Err(Error::InvalidRange("sample count must be positive".into()));
    }
    Ok(())
}

/// Largest first finite difference of the deviation payoff over induced
/// prices in `[max(a/2, p̂), a)`. The payoff is non-increasing there, so the
/// result should not exceed round-off.
pub fn sign_check_high_region(params: &MarketParams, gamma: f64, samples: usize) -> Result<RegionCheck> {
    check_samples(samples)?;
    let params = params.ensure_feasible()?;
    let x_lo = equilibrium_action(&params, gamma)?;
    let x_top = action_for_price(&params, gamma, params.a)?;
    let lo = (params.a / 2.0).max(params.ce_price());
    let hi = params.a;
    let f = |x: f64| {
        quantum_deviation(&params, gamma, x)
            .map(|d| d.value)
            .expect("stencil kept inside the deviation domain")
    };

    let mut check = RegionCheck {
        samples,
        max_value: f64::NEG_INFINITY,
        at_price: lo,
        vacuous: false,
    };
    for j in 0..samples {
        let price = lo + (hi - lo) * j as f64 / samples as f64;
        let x = action_for_price(&params, gamma, price)?.clamp(x_lo, x_top);
        let room_below = x - x_lo;
        let room_above = x_top - x;
        let mut h = numdiff::first_step(x);
        let slope = if room_below >= h && room_above > h {
            numdiff::central(f, x, h)
        } else if room_above > h {
            numdiff::forward(f, x, h)
        } else {
            h = h.min(0.5 * room_below);
            numdiff::backward(f, x, h)
        };
        if slope > check.max_value {
            check.max_value = slope;
            check.at_price = price;
        }
    }
    Ok(check)
}

/// Largest second finite difference of the deviation payoff over induced
/// prices in `[p̂, a/2)`. Empty (and vacuously passing) when `k ≤ a/4`.
pub fn concavity_check_low_region(
    params: &MarketParams,
    gamma: f64,
    samples: usize,
) -> Result<RegionCheck> {
    check_samples(samples)?;
    let params = params.ensure_feasible()?;
    let x_lo = equilibrium_action(&params, gamma)?;
    let x_top = action_for_price(&params, gamma, params.a)?;
    let lo = params.ce_price();
    let hi = params.a / 2.0;
    if lo >= hi {
        return Ok(RegionCheck {
            samples: 0,
            max_value: f64::NEG_INFINITY,
            at_price: lo,
            vacuous: true,
        });
    }
    let f = |x: f64| {
        quantum_deviation(&params, gamma, x)
            .map(|d| d.value)
            .expect("stencil kept inside the deviation domain")
    };

    let mut check = RegionCheck {
        samples,
        max_value: f64::NEG_INFINITY,
        at_price: lo,
        vacuous: false,
    };
    for j in 0..samples {
        // interior points only; the lower edge is the tie at x̂
        let price = lo + (hi - lo) * (j + 1) as f64 / (samples + 1) as f64;
        let x = action_for_price(&params, gamma, price)?;
        let h = numdiff::second_step(x)
            .min(0.5 * (x - x_lo))
            .min(0.5 * (x_top - x));
        let curvature = numdiff::second(f, x, h);
        if curvature > check.max_value {
            check.max_value = curvature;
            check.at_price = price;
        }
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{profit, Firm, RationingRule};
    use proptest::prelude::*;

    fn m(a: f64, k: f64) -> MarketParams {
        MarketParams::new(a, k).unwrap()
    }

    #[test]
    fn induced_price_examples() {
        let p = induced_prices(&QuantumProfile::new(0.3, 0.7, 0.0).unwrap());
        assert_eq!((p.p1, p.p2), (0.3, 0.7));

        let p = induced_prices(&QuantumProfile::new(0.2, 0.1, 1.0).unwrap());
        // 0.2 cosh 1 + 0.1 sinh 1, 0.1 cosh 1 + 0.2 sinh 1
        assert!((p.p1 - 0.42613624632742886).abs() < 1e-15);
        assert!((p.p2 - 0.38934830221028466).abs() < 1e-15);
        assert!((p.p1 + p.p2 - 0.3 * 1f64.exp()).abs() < 1e-15);

        assert!(QuantumProfile::new(0.1, 0.1, -0.5).is_err());
    }

    #[test]
    fn equilibrium_action_examples() {
        let p = m(1.0, 0.24);
        assert!((equilibrium_action(&p, 0.0).unwrap() - 0.52).abs() < 1e-15);
        assert!((equilibrium_action(&p, 2f64.ln()).unwrap() - 0.26).abs() < 1e-15);
        assert!(equilibrium_action(&m(1.0, 0.5), 0.3).is_err());
        assert!(equilibrium_action(&p, f64::NAN).is_err());
    }

    #[test]
    fn deviation_at_candidate_sells_capacity() {
        let p = m(1.0, 0.24);
        let x_hat = equilibrium_action(&p, 1.0).unwrap();
        let d = quantum_deviation(&p, 1.0, x_hat).unwrap();
        assert!((d.induced_price - 0.52).abs() < 1e-15);
        assert!((d.residual_demand(&p) - 0.24).abs() < 1e-15);
    }

    #[test]
    fn deviation_without_entanglement_is_classical() {
        let p = m(1.0, 0.24);
        let d = quantum_deviation(&p, 0.0, 0.6).unwrap();
        assert!((d.value - 0.12).abs() < 1e-15);
        let kernel = profit(&p, RationingRule::Proportional, &PriceProfile::new(0.6, 0.52), Firm::One);
        assert!((d.value - kernel).abs() < 1e-15);
    }

    #[test]
    fn deviation_domain() {
        let p = m(1.0, 0.24);
        let x_hat = equilibrium_action(&p, 0.5).unwrap();
        assert!(quantum_deviation(&p, 0.5, x_hat - 1e-3).is_err());
        let x_top = action_for_price(&p, 0.5, 1.0).unwrap();
        assert!(quantum_deviation(&p, 0.5, x_top).is_err());
        assert!(quantum_deviation(&p, 0.5, 0.5 * (x_hat + x_top)).is_ok());
    }

    #[test]
    fn residual_slope_at_candidate() {
        // slope of D(p̃)·g at x̂ is -e^γ/2
        let p = m(1.0, 0.2);
        let gamma = 0.7;
        let x_hat = equilibrium_action(&p, gamma).unwrap();
        let h = numdiff::first_step(x_hat);
        let r = |x: f64| quantum_deviation(&p, gamma, x).unwrap().residual_demand(&p);
        let slope = numdiff::forward(r, x_hat, h);
        assert!((slope + 1.0068763537352383).abs() < 1e-4, "{slope}");
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(quantum_threshold(1.0, 0.0), 0.25);
        assert!((quantum_threshold(1.0, 1.0) - 0.3189451556733346).abs() < 1e-15);
        assert!((quantum_threshold_hyperbolic(1.0, 1.0) - 0.3189451556733346).abs() < 1e-15);
        assert!((quantum_threshold(1.0, 20.0) - 1.0 / 3.0).abs() < 1e-8);
        assert_eq!(quantum_threshold(3.0, 1e6), 1.0);
        assert_eq!(quantum_threshold(3.0, f64::INFINITY), 1.0);
    }

    #[test]
    fn existence_examples() {
        let r = quantum_equilibrium_exists(&m(1.0, 0.3), 0.0).unwrap();
        assert_eq!(r.verdict, Verdict::NotExists);
        assert!(r.worst_deviation.unwrap().gain > 0.0);
        // at γ = 0 the best deviation is the classical a/2
        assert!((r.worst_deviation.unwrap().action - 0.5).abs() < 1e-7);

        let r = quantum_equilibrium_exists(&m(1.0, 0.3), 1.0).unwrap();
        assert_eq!(r.verdict, Verdict::Exists);
        assert!(r.deviation_derivative.unwrap() < 0.0);

        for gamma in [0.0, 0.3, 1.0, 4.0] {
            let k = quantum_threshold(1.0, gamma);
            let r = quantum_equilibrium_exists(&m(1.0, k), gamma).unwrap();
            assert!(r.verdict.exists());
            assert!(r.deviation_derivative.unwrap().abs() < 1e-12, "{gamma}");
        }
    }

    #[test]
    fn high_region_examples() {
        let c = sign_check_high_region(&m(1.0, 0.2), 0.5, 100).unwrap();
        assert!(c.passes(1e-6), "{c:?}");
        let c = sign_check_high_region(&m(1.0, 0.1), 0.0, 100).unwrap();
        assert!(c.passes(1e-6), "{c:?}");
        // a single sample sits at p̃ = a/2, where only π·g' contributes
        let c = sign_check_high_region(&m(1.0, 0.3), 0.8, 1).unwrap();
        assert_eq!(c.at_price, 0.5);
        assert!(c.max_value < 0.0);
        assert!(sign_check_high_region(&m(1.0, 0.3), 0.8, 0).is_err());
    }

    #[test]
    fn low_region_examples() {
        let c = concavity_check_low_region(&m(1.0, 0.3), 0.5, 100).unwrap();
        assert!(!c.vacuous && c.passes(1e-5), "{c:?}");
        let c = concavity_check_low_region(&m(1.0, 0.2), 1.0, 100).unwrap();
        assert!(c.vacuous && c.passes(1e-5));
        // at γ = 0 the share is constant and the curvature is π''·g = -1
        let c = concavity_check_low_region(&m(1.0, 0.26), 0.0, 5).unwrap();
        assert!((c.max_value + 1.0).abs() < 1e-4, "{c:?}");
    }

    fn sample() -> impl Strategy<Value = (f64, f64, f64)> {
        (0.5f64..2.0, 0.02f64..0.48, 0.0f64..5.0).prop_map(|(a, kf, g)| (a, kf * a, g))
    }

    proptest! {
        #[test]
        fn diagonal_maps_to_exp(x in -3.0f64..3.0, gamma in 0.0f64..5.0) {
            let p = induced_prices(&QuantumProfile::symmetric(x, gamma).unwrap());
            let expect = x * gamma.exp();
            prop_assert!((p.p1 - expect).abs() <= 1e-12 * expect.abs().max(1.0));
            prop_assert_eq!(p.p1, p.p2);
        }

        #[test]
        fn candidate_maps_to_ce_price((a, k, gamma) in sample()) {
            let params = m(a, k);
            let x_hat = equilibrium_action(&params, gamma).unwrap();
            let p = induced_prices(&QuantumProfile::symmetric(x_hat, gamma).unwrap());
            prop_assert!((p.p1 - params.ce_price()).abs() <= 1e-12 * a);
        }

        #[test]
        fn share_formula_matches_kernel((a, k, gamma) in sample(), t in 0.001f64..0.999) {
            let params = m(a, k);
            let x_hat = equilibrium_action(&params, gamma).unwrap();
            let x_top = action_for_price(&params, gamma, a).unwrap();
            let x = x_hat + t * (x_top - x_hat);
            let dev = quantum_deviation(&params, gamma, x).unwrap();
            let prices = induced_prices(&QuantumProfile::new(x, x_hat, gamma).unwrap());
            let kernel = profit(&params, RationingRule::Proportional, &prices, Firm::One);
            prop_assert!((dev.value - kernel).abs() <= 1e-10 * a * a, "{} vs {}", dev.value, kernel);
        }

        #[test]
        fn entanglement_shrinks_share((a, k, gamma) in sample(), t in 0.01f64..0.99) {
            prop_assume!(gamma > 1e-3);
            let params = m(a, k);
            let x_hat = equilibrium_action(&params, gamma).unwrap();
            let x_top = action_for_price(&params, gamma, a).unwrap();
            let x = x_hat + t * (x_top - x_hat);
            let classical_share = 1.0 - k / (a - params.ce_price());
            prop_assert!(quantum_deviation(&params, gamma, x).unwrap().share < classical_share);
        }

        #[test]
        fn threshold_forms_agree(a in 0.1f64..10.0, gamma in 0.0f64..300.0) {
            let stable = quantum_threshold(a, gamma);
            let hyper = quantum_threshold_hyperbolic(a, gamma);
            prop_assert!((stable - hyper).abs() <= 1e-14 * a);
            // e^{-2γ} is lost against 3 in double precision beyond γ ≈ 17
            prop_assert!(stable < a / 3.0 || gamma > 15.0);
        }

        #[test]
        fn threshold_increases(a in 0.1f64..10.0, g1 in 0.0f64..8.0, dg in 1e-3f64..1.0) {
            prop_assert!(quantum_threshold(a, g1) < quantum_threshold(a, g1 + dg));
        }

        #[test]
        fn slope_at_candidate_matches_finite_difference((a, k, gamma) in sample()) {
            let params = m(a, k);
            let x_hat = equilibrium_action(&params, gamma).unwrap();
            let closed = deviation_slope_at_candidate(&params, gamma);
            let f = |x: f64| quantum_deviation(&params, gamma, x).unwrap().value;
            // forward difference error ~ h|u''|/2, so shrink h as curvature grows with cosh²
            let h = 1e-7 * x_hat.abs().max(1e-3) / gamma.cosh();
            let fd = numdiff::forward(f, x_hat, h);
            let scale = (params.k * gamma.cosh()).max(1e-3);
            prop_assert!((fd - closed).abs() <= 1e-5 * scale, "{fd} vs {closed}");
        }

        #[test]
        fn slope_sign_tracks_threshold((a, k, gamma) in sample()) {
            let params = m(a, k);
            let gap = k - quantum_threshold(a, gamma);
            prop_assume!(gap.abs() > 1e-9 * a);
            prop_assert_eq!(deviation_slope_at_candidate(&params, gamma) > 0.0, gap > 0.0);
        }
    }
}
