//! Brute-force equilibrium checks on discretised strategy spaces.
//!
//! Payoffs are always evaluated through the general kernel
//! ([`crate::market::profit`]) on the posted prices, never through the
//! closed-form deviation formulas, so the oracle can be used to check them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{Candidate, Deviation, EquilibriumReport, Verdict};
use crate::error::{Error, Result};
use crate::market::{profit, Firm, MarketParams, PriceProfile, RationingRule};
use crate::quantum::{check_gamma, induced_prices, QuantumProfile};

/// Default cap on points per axis for the exhaustive search.
pub const DEFAULT_GRID_CAP: usize = 801;

/// Evenly spaced points `lo + j (hi - lo) / (n - 1)`, optionally with one
/// exact anchor (the candidate action) spliced in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub anchor: Option<f64>,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi && n >= 2) {
            return Err(Error::InvalidGrid { lo, hi, n });
        }
        Ok(Self {
            lo,
            hi,
            n,
            anchor: None,
        })
    }

    pub fn with_anchor(mut self, anchor: f64) -> Self {
        self.anchor = Some(anchor);
        self
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    /// Grid points followed by their left limits `x - η·step`.
    ///
    /// Payoffs jump where prices tie, and the best deviation against a rival
    /// often sits just below the rival's price. Deviations range over this
    /// set; candidate profiles stay on [`GridSpec::points`].
    pub fn deviation_actions(&self) -> Vec<f64> {
        let eta = LEFT_LIMIT * self.step();
        let points = self.points();
        let mut out = Vec::with_capacity(2 * points.len());
        for x in points {
            out.push(x - eta);
            out.push(x);
        }
        out
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Sorted grid points. An anchor inside `[lo, hi]` either replaces a grid
    /// point that only differs from it by rounding or is inserted in order.
    pub fn points(&self) -> Vec<f64> {
        let span = self.hi - self.lo;
        let last = (self.n - 1) as f64;
        let mut points: Vec<f64> = (0..self.n)
            .map(|j| self.lo + span * j as f64 / last)
            .collect();
        if let Some(anchor) = self.anchor.filter(|&x| self.contains(x)) {
            let at = points.partition_point(|&p| p < anchor);
            let near = |i: usize| points.get(i).is_some_and(|&p| (p - anchor).abs() <= 1e-9 * self.step());
            if near(at) {
                points[at] = anchor;
            } else if at > 0 && near(at - 1) {
                points[at - 1] = anchor;
            } else {
                points.insert(at, anchor);
            }
        }
        points
    }
}

/// The duopoly as a two-player game over actions: prices when `gamma` is
/// `None`, entangled actions otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Duopoly {
    pub params: MarketParams,
    pub rule: RationingRule,
    pub gamma: Option<f64>,
}

impl Duopoly {
    pub fn classical(params: MarketParams, rule: RationingRule) -> Result<Self> {
        Ok(Self {
            params: params.ensure_feasible()?,
            rule,
            gamma: None,
        })
    }

    pub fn quantum(params: MarketParams, rule: RationingRule, gamma: f64) -> Result<Self> {
        Ok(Self {
            params: params.ensure_feasible()?,
            rule,
            gamma: Some(check_gamma(gamma)?),
        })
    }

    pub fn new(params: MarketParams, rule: RationingRule, gamma: Option<f64>) -> Result<Self> {
        match gamma {
            Some(g) => Self::quantum(params, rule, g),
            None => Self::classical(params, rule),
        }
    }

    pub fn prices(&self, a1: f64, a2: f64) -> PriceProfile {
        match self.gamma {
            None => PriceProfile::new(a1, a2),
            Some(gamma) => induced_prices(&QuantumProfile { x1: a1, x2: a2, gamma }),
        }
    }

    pub fn payoff(&self, firm: Firm, a1: f64, a2: f64) -> f64 {
        profit(&self.params, self.rule, &self.prices(a1, a2), firm)
    }

    /// The symmetric candidate action: `p̂`, or `p̂ e^{-γ}` with entanglement.
    pub fn ce_action(&self) -> f64 {
        let p = self.params.ce_price();
        match self.gamma {
            None => p,
            Some(gamma) => p * (-gamma).exp(),
        }
    }

    /// Sensitivity of a firm's own price to its own action.
    pub fn price_slope(&self) -> f64 {
        self.gamma.map_or(1.0, f64::cosh)
    }

    /// `[0, a]` for prices; `[0, a / cosh γ]` for actions, which keeps the
    /// price resolution at `a / (n - 1)`. The candidate is anchored.
    pub fn default_grid(&self, n: usize) -> Result<GridSpec> {
        Ok(GridSpec::new(0.0, self.params.a / self.price_slope(), n)?.with_anchor(self.ce_action()))
    }

    /// Capacity band around a threshold inside which a grid of this step
    /// cannot be trusted to resolve the verdict: `2 · step · L`, with the
    /// step measured in price units and `L = 1`.
    pub fn margin_band(&self, grid: &GridSpec) -> f64 {
        2.0 * grid.step() * self.price_slope() * LIPSCHITZ
    }

    pub fn candidate(&self, a1: f64, a2: f64) -> Candidate {
        match self.gamma {
            None => Candidate::Classical(PriceProfile::new(a1, a2)),
            Some(gamma) => Candidate::Quantum(QuantumProfile { x1: a1, x2: a2, gamma }),
        }
    }

    fn own_payoff(&self, firm: Firm, own: f64, rival: f64) -> f64 {
        match firm {
            Firm::One => self.payoff(firm, own, rival),
            Firm::Two => self.payoff(firm, rival, own),
        }
    }
}

/// Capacity gap resolved per unit of price step.
const LIPSCHITZ: f64 = 1.0;

/// Offset of the left-limit deviations, as a fraction of the grid step.
const LEFT_LIMIT: f64 = 1e-6;

/// Grid point maximising `payoff(own, opponent)`; ties go to the lowest action.
pub fn best_response<F>(payoff: F, opponent: f64, grid: &GridSpec) -> (f64, f64)
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    best_response_over(payoff, opponent, &grid.points())
}

pub fn best_response_over<F>(payoff: F, opponent: f64, actions: &[f64]) -> (f64, f64)
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let values: Vec<f64> = actions.par_iter().map(|&x| payoff(x, opponent)).collect();
    argmax_lowest(actions, &values)
}

fn argmax_lowest(actions: &[f64], values: &[f64]) -> (f64, f64) {
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for (&x, &v) in actions.iter().zip(values) {
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Checks every unilateral deviation in [`GridSpec::deviation_actions`] from
/// `candidate`, for both firms. Each firm's own candidate action is anchored
/// into its deviation grid, so gains are never negative.
pub fn verify_equilibrium(
    game: &Duopoly,
    candidate: (f64, f64),
    grid: &GridSpec,
    epsilon: f64,
) -> EquilibriumReport {
    let (c1, c2) = candidate;
    let mut worst = Deviation {
        action: c1,
        gain: f64::NEG_INFINITY,
    };
    for (firm, own, rival) in [(Firm::One, c1, c2), (Firm::Two, c2, c1)] {
        let current = game.own_payoff(firm, own, rival);
        let actions = grid.with_anchor(own).deviation_actions();
        let (action, value) = best_response_over(|x, r| game.own_payoff(firm, x, r), rival, &actions);
        let gain = value - current;
        if gain > worst.gain {
            worst = Deviation { action, gain };
        }
    }
    EquilibriumReport {
        verdict: Verdict::from_bool(worst.gain <= epsilon),
        candidate: game.candidate(c1, c2),
        threshold: None,
        deviation_derivative: None,
        worst_deviation: Some(worst),
        epsilon: Some(epsilon),
    }
}

/// [`verify_equilibrium`] at the symmetric candidate on the default grid.
pub fn verify_candidate(game: &Duopoly, n: usize, epsilon: f64) -> Result<EquilibriumReport> {
    let grid = game.default_grid(n)?;
    let x = game.ce_action();
    Ok(verify_equilibrium(game, (x, x), &grid, epsilon))
}

/// One pruned ε-equilibrium of the discretised game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PureEquilibrium {
    pub actions: (f64, f64),
    pub payoffs: (f64, f64),
    /// Largest unilateral gain at the representative profile.
    pub gain: f64,
    /// Number of ε-equilibrium grid profiles merged into this one.
    pub cluster_size: usize,
}

/// Every ε-Nash profile of the grid game, pruned into clusters.
///
/// Profiles range over the grid (with the candidate anchored); deviations
/// range over [`GridSpec::deviation_actions`].
///
/// Profiles are grouped into connected components of grid neighbours (one
/// index step in either direction, diagonals included). A component is kept
/// only if it contains a profile that is also an `ε/10` equilibrium, and is
/// reported at its strictest member with the largest joint payoff.
pub fn find_all_pure_equilibria(
    game: &Duopoly,
    grid: &GridSpec,
    epsilon: f64,
    cap: usize,
) -> Result<Vec<PureEquilibrium>> {
    if grid.n > cap {
        return Err(Error::GridTooLarge { n: grid.n, cap });
    }
    let grid = grid.with_anchor(game.ce_action());
    let actions = grid.points();
    let deviations = grid.deviation_actions();
    let n = actions.len();

    // u[i * n + j] = payoff with firm 1 at actions[i] and firm 2 at actions[j]
    let table = |firm: Firm| -> Vec<f64> {
        (0..n * n)
            .into_par_iter()
            .map(|ij| game.payoff(firm, actions[ij / n], actions[ij % n]))
            .collect()
    };
    let u1 = table(Firm::One);
    let u2 = table(Firm::Two);

    // best reply values: firm 1 against column j, firm 2 against row i
    let best1: Vec<f64> = actions
        .par_iter()
        .map(|&rival| best_response_value(|x| game.payoff(Firm::One, x, rival), &deviations))
        .collect();
    let best2: Vec<f64> = actions
        .par_iter()
        .map(|&rival| best_response_value(|x| game.payoff(Firm::Two, rival, x), &deviations))
        .collect();
    let gain = |ij: usize| {
        let (i, j) = (ij / n, ij % n);
        (best1[j] - u1[ij]).max(best2[i] - u2[ij])
    };

    let members: Vec<usize> = (0..n * n).filter(|&ij| gain(ij) <= epsilon).collect();
    let strict = epsilon / 10.0;

    let mut seen = std::collections::HashSet::new();
    let in_set: std::collections::HashSet<usize> = members.iter().copied().collect();
    let mut found = Vec::new();
    for &start in &members {
        if !seen.insert(start) {
            continue;
        }
        let mut stack = vec![start];
        let mut size = 0;
        let mut best: Option<(usize, f64)> = None;
        while let Some(ij) = stack.pop() {
            size += 1;
            if gain(ij) <= strict {
                let joint = u1[ij] + u2[ij];
                match best {
                    Some((b, v)) if v > joint || (v == joint && b < ij) => {}
                    _ => best = Some((ij, joint)),
                }
            }
            let (i, j) = ((ij / n) as isize, (ij % n) as isize);
            for di in -1..=1 {
                for dj in -1..=1 {
                    let (ni, nj) = (i + di, j + dj);
                    if ni < 0 || nj < 0 || ni >= n as isize || nj >= n as isize {
                        continue;
                    }
                    let next = ni as usize * n + nj as usize;
                    if in_set.contains(&next) && seen.insert(next) {
                        stack.push(next);
                    }
                }
            }
        }
        if let Some((ij, _)) = best {
            found.push(PureEquilibrium {
                actions: (actions[ij / n], actions[ij % n]),
                payoffs: (u1[ij], u2[ij]),
                gain: gain(ij),
                cluster_size: size,
            });
        }
    }
    found.sort_by(|x, y| x.actions.partial_cmp(&y.actions).expect("finite actions"));
    Ok(found)
}

fn best_response_value<F: Fn(f64) -> f64>(payoff: F, actions: &[f64]) -> f64 {
    actions.iter().map(|&x| payoff(x)).fold(f64::NEG_INFINITY, f64::max)
}

/// Payoffs from undercutting a rival who stays at the candidate action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UndercutCheck {
    pub samples: usize,
    pub ce_payoff: f64,
    pub max_payoff: f64,
    pub at_action: f64,
    pub holds: bool,
}

/// Every grid action strictly below the candidate earns at most the
/// candidate payoff `p̂ k`.
pub fn undercut_check(game: &Duopoly, grid: &GridSpec) -> UndercutCheck {
    let ce = game.ce_action();
    let ce_payoff = game.payoff(Firm::One, ce, ce);
    let below: Vec<f64> = grid.points().into_iter().filter(|&x| x < ce).collect();
    let values: Vec<f64> = below.par_iter().map(|&x| game.payoff(Firm::One, x, ce)).collect();
    let (at_action, max_payoff) = if below.is_empty() {
        (ce, f64::NEG_INFINITY)
    } else {
        argmax_lowest(&below, &values)
    };
    UndercutCheck {
        samples: below.len(),
        ce_payoff,
        max_payoff,
        at_action,
        holds: max_payoff <= ce_payoff,
    }
}
