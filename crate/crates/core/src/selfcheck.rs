//! A quick run of the library's invariants, meant for `edgeworth self-check`.

use serde::{Deserialize, Serialize};

use crate::classical::{classical_threshold, deviation_profit};
use crate::market::{profit, Firm, MarketParams, PriceProfile, RationingRule};
use crate::oracle::{find_all_pure_equilibria, undercut_check, verify_candidate, Duopoly, DEFAULT_GRID_CAP};
use crate::quantum::{
    concavity_check_low_region, deviation_slope_at_candidate, equilibrium_action, induced_prices,
    quantum_deviation, quantum_threshold, quantum_threshold_hyperbolic, sign_check_high_region, QuantumProfile,
};
use crate::{numdiff, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Deterministic points in `[0, 1)^3` (additive recurrence on the plastic
/// number), so the check needs no random number generator.
fn samples(count: usize) -> impl Iterator<Item = (f64, f64, f64)> {
    let g = 1.324_717_957_244_746_f64;
    let (s1, s2, s3) = (1.0 / g, 1.0 / (g * g), 1.0 / (g * g * g));
    (1..=count).map(move |i| {
        let i = i as f64;
        ((0.5 + s1 * i).fract(), (0.5 + s2 * i).fract(), (0.5 + s3 * i).fract())
    })
}

fn market(u: f64, v: f64) -> MarketParams {
    let a = 0.5 + 1.5 * u;
    MarketParams::new(a, a * (0.005 + 0.49 * v)).expect("sampled market is valid")
}

fn outcome(name: &str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        passed,
        detail,
    }
}

pub fn self_check() -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();

    let k_end = quantum_threshold(1.0, 20.0);
    out.push(outcome(
        "threshold endpoints",
        classical_threshold(RationingRule::Proportional, 1.0) == 0.25
            && classical_threshold(RationingRule::Efficient, 1.0) == 1.0 / 3.0
            && quantum_threshold(1.0, 0.0) == 0.25
            && (k_end - 1.0 / 3.0).abs() < 1e-8,
        format!("k(0) = {}, k(20) = {k_end}", quantum_threshold(1.0, 0.0)),
    ));

    let curve: Vec<f64> = (0..501).map(|j| quantum_threshold(1.0, j as f64 * 0.01)).collect();
    let forms = (0..501).all(|j| {
        let g = j as f64 * 0.01;
        (quantum_threshold(1.0, g) - quantum_threshold_hyperbolic(1.0, g)).abs() < 1e-14
    });
    out.push(outcome(
        "threshold curve monotone",
        curve.windows(2).all(|w| w[0] < w[1]) && forms,
        "501 points on [0, 5]".into(),
    ));

    let mut worst = 0.0f64;
    for (u, v, w) in samples(500) {
        let params = market(u, v);
        let p = params.ce_price() + w * (params.a - params.ce_price());
        for rule in RationingRule::ALL {
            let closed = deviation_profit(&params, rule, p)?.value;
            let kernel = profit(&params, rule, &PriceProfile::new(p, params.ce_price()), Firm::One);
            worst = worst.max((closed - kernel).abs());
        }
    }
    out.push(outcome(
        "classical deviation formulas match kernel",
        worst < 1e-12,
        format!("max gap {worst:e}"),
    ));

    let mut worst = 0.0f64;
    for (u, v, w) in samples(1000) {
        let params = market(u, v);
        let (x1, x2) = (2.0 * u * params.a - 0.2, 1.3 * w * params.a);
        let quantum = profit(
            &params,
            RationingRule::Proportional,
            &induced_prices(&QuantumProfile::new(x1, x2, 0.0)?),
            Firm::One,
        );
        let classical = profit(&params, RationingRule::Proportional, &PriceProfile::new(x1, x2), Firm::One);
        worst = worst.max((quantum - classical).abs());
    }
    out.push(outcome("classical recovery at gamma = 0", worst <= 1e-12, format!("max gap {worst:e}")));

    let mut mismatches = 0;
    let mut fd_mismatches = 0;
    let mut counted = 0;
    for (u, v, w) in samples(200) {
        let params = market(u, v);
        let gamma = 5.0 * w;
        let game = Duopoly::quantum(params, RationingRule::Proportional, gamma)?;
        let gap = params.k - quantum_threshold(params.a, gamma);
        if gap.abs() < game.margin_band(&game.default_grid(2001)?) {
            continue;
        }
        counted += 1;
        let slope = deviation_slope_at_candidate(&params, gamma);
        if (slope > 0.0) != (gap > 0.0) {
            mismatches += 1;
        }
        let x_hat = game.ce_action();
        let h = numdiff::first_step(x_hat);
        let fd = numdiff::forward(|x| game.payoff(Firm::One, x, x_hat), x_hat, h);
        if (fd > 0.0) != (gap > 0.0) {
            fd_mismatches += 1;
        }
    }
    out.push(outcome(
        "deviation slope sign equals sign(k - k(gamma))",
        mismatches == 0 && fd_mismatches == 0,
        format!("{counted} samples, {mismatches} closed-form and {fd_mismatches} oracle mismatches"),
    ));

    let mut high = f64::NEG_INFINITY;
    let mut low = f64::NEG_INFINITY;
    for (u, v, w) in samples(50) {
        let params = market(u, v);
        let gamma = 5.0 * w;
        high = high.max(sign_check_high_region(&params, gamma, 100)?.max_value);
        low = low.max(concavity_check_low_region(&params, gamma, 100)?.max_value);
    }
    out.push(outcome(
        "payoff decreasing above a/2",
        high <= 1e-6,
        format!("max first difference {high:e}"),
    ));
    out.push(outcome(
        "payoff concave on [p_hat, a/2)",
        low <= 1e-5,
        format!("max second difference {low:e}"),
    ));

    let mut residual_gap = 0.0f64;
    for (u, v, w) in samples(50) {
        let params = market(u, v);
        let gamma = 5.0 * w;
        let x_hat = equilibrium_action(&params, gamma)?;
        let at = quantum_deviation(&params, gamma, x_hat)?.residual_demand(&params);
        let h = numdiff::first_step(x_hat) * 1e-2 / gamma.cosh();
        let slope = numdiff::forward(
            |x| quantum_deviation(&params, gamma, x).unwrap().residual_demand(&params),
            x_hat,
            h,
        );
        let expect = -gamma.exp() / 2.0;
        residual_gap = residual_gap.max(((slope - expect) / expect).abs()).max((at - params.k).abs());
    }
    out.push(outcome(
        "residual demand at candidate",
        residual_gap <= 1e-4,
        format!("max relative error {residual_gap:e}"),
    ));

    let mut disagreements = Vec::new();
    for (u, v, w) in samples(60) {
        let params = market(u, v);
        for rule in RationingRule::ALL {
            for gamma in [None, Some(5.0 * w)] {
                let game = Duopoly::new(params, rule, gamma)?;
                let threshold = match (rule, gamma) {
                    (RationingRule::Proportional, Some(g)) => quantum_threshold(params.a, g),
                    _ => classical_threshold(rule, params.a),
                };
                if (params.k - threshold).abs() < game.margin_band(&game.default_grid(2001)?) {
                    continue;
                }
                let report = verify_candidate(&game, 2001, 1e-9 * params.a * params.a)?;
                let undercut = undercut_check(&game, &game.default_grid(2001)?);
                if report.verdict.exists() != (params.k <= threshold) || !undercut.holds {
                    disagreements.push(format!("{rule} gamma={gamma:?} {params:?}"));
                }
            }
        }
    }
    out.push(outcome(
        "oracle agrees with closed forms",
        disagreements.is_empty(),
        if disagreements.is_empty() {
            "240 games".into()
        } else {
            disagreements.join("; ")
        },
    ));

    let mut unexpected = Vec::new();
    for rule in RationingRule::ALL {
        for gamma in [None, Some(1.0)] {
            for k in [0.2, 0.35] {
                let game = Duopoly::new(MarketParams::new(1.0, k)?, rule, gamma)?;
                let found = find_all_pure_equilibria(&game, &game.default_grid(201)?, 1e-9, DEFAULT_GRID_CAP)?;
                let ce = game.ce_action();
                let ok = if k < 0.25 {
                    found.len() == 1 && found[0].actions == (ce, ce)
                } else {
                    found.is_empty()
                };
                if !ok {
                    unexpected.push(format!("{rule} gamma={gamma:?} k={k}: {found:?}"));
                }
            }
        }
    }
    out.push(outcome(
        "exhaustive search finds only the competitive profile",
        unexpected.is_empty(),
        if unexpected.is_empty() {
            "8 games on a 201-point grid".into()
        } else {
            unexpected.join("; ")
        },
    ));

    Ok(out)
}
