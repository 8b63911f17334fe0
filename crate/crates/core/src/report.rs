//! Tabular and JSON output: threshold curves, deviation profiles and
//! closed-form versus oracle analyses.
//!
//! Numbers are written in fixed decimal notation with 12 significant digits,
//! so identical inputs give byte-identical files.

use serde::{Deserialize, Serialize};

use crate::classical::{self, classical_equilibrium_exists, classical_threshold};
use crate::equilibrium::{Candidate, Deviation, EquilibriumReport, Verdict};
use crate::error::{Error, Result};
use crate::market::{Firm, MarketParams, RationingRule};
use crate::oracle::{verify_candidate, Duopoly};
use crate::quantum::{self, action_for_price, equilibrium_action, quantum_deviation, QuantumProfile};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidRange(format!("unknown format '{other}'"))),
        }
    }
}

/// Fixed-point rendering with `digits` significant digits.
pub fn format_sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let magnitude = v.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).clamp(0, 40) as usize;
    format!("{v:.decimals$}")
}

fn num(v: f64) -> String {
    format_sig(v, 12)
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn csv_string(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    writer.write_record(header).map_err(io)?;
    for row in rows {
        writer.write_record(&row).map_err(io)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn json_string<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::Io(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub k_threshold: f64,
    pub classical_proportional_threshold: f64,
    pub efficient_threshold: f64,
}

/// `k(γ)` on an even grid of entanglement values, next to the classical
/// reference capacities `a/4` and `a/3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub a: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub steps: usize,
    pub version: String,
    pub rows: Vec<SweepRow>,
}

pub fn threshold_sweep(a: f64, gamma_min: f64, gamma_max: f64, steps: usize) -> Result<SweepResult> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidRange(format!("demand intercept a={a} must be positive")));
    }
    if !(gamma_min.is_finite() && gamma_max.is_finite() && gamma_min >= 0.0 && gamma_max > gamma_min) {
        return Err(Error::InvalidRange(format!(
            "need 0 <= gamma_min < gamma_max, got [{gamma_min}, {gamma_max}]"
        )));
    }
    if steps < 2 {
        return Err(Error::InvalidRange(format!("need at least 2 steps, got {steps}")));
    }
    let span = gamma_max - gamma_min;
    let rows = (0..steps)
        .map(|j| {
            let gamma = gamma_min + span * j as f64 / (steps - 1) as f64;
            SweepRow {
                gamma,
                k_threshold: quantum::quantum_threshold(a, gamma),
                classical_proportional_threshold: classical_threshold(RationingRule::Proportional, a),
                efficient_threshold: classical_threshold(RationingRule::Efficient, a),
            }
        })
        .collect();
    Ok(SweepResult {
        a,
        gamma_min,
        gamma_max,
        steps,
        version: VERSION.to_string(),
        rows,
    })
}

impl SweepResult {
    pub fn to_csv(&self) -> Result<String> {
        csv_string(
            &["gamma", "k_threshold", "classical_proportional_threshold", "efficient_threshold"],
            self.rows.iter().map(|r| {
                vec![
                    num(r.gamma),
                    num(r.k_threshold),
                    num(r.classical_proportional_threshold),
                    num(r.efficient_threshold),
                ]
            }),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        json_string(self)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub x: f64,
    pub induced_price: f64,
    /// Closed-form share and payoff; `None` outside `p̃(x) ∈ [p̂, a)`.
    pub share: Option<f64>,
    pub payoff: Option<f64>,
    pub payoff_from_kernel: f64,
}

/// Payoff of firm 1 as it moves its action against a rival held at the
/// candidate, from the closed forms and from the general payoff kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationTable {
    pub params: MarketParams,
    pub rule: RationingRule,
    pub gamma: f64,
    pub version: String,
    pub rows: Vec<DeviationRow>,
}

/// Default action range for [`deviation_profile`]: from the candidate up to
/// the action that prices the firm out of the market.
pub fn deviation_range(params: &MarketParams, gamma: f64) -> Result<(f64, f64)> {
    Ok((equilibrium_action(params, gamma)?, action_for_price(params, gamma, params.a)?))
}

fn closed_form_point(params: &MarketParams, rule: RationingRule, gamma: f64, x: f64) -> Option<(f64, f64)> {
    match rule {
        RationingRule::Proportional => quantum_deviation(params, gamma, x).ok().map(|d| (d.share, d.value)),
        RationingRule::Efficient => {
            let x_hat = equilibrium_action(params, gamma).ok()?;
            if x < x_hat {
                return None;
            }
            let price = if x == x_hat {
                params.ce_price()
            } else {
                x * gamma.cosh() + x_hat * gamma.sinh()
            };
            let dev = classical::deviation_profit(params, rule, price).ok()?;
            let share = if x == x_hat { 0.5 } else { dev.value / (price * (params.a - price)) };
            Some((share, dev.value))
        }
    }
}

pub fn deviation_profile(
    params: &MarketParams,
    rule: RationingRule,
    gamma: f64,
    x_min: f64,
    x_max: f64,
    steps: usize,
) -> Result<DeviationTable> {
    let game = Duopoly::quantum(*params, rule, gamma)?;
    if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
        return Err(Error::InvalidRange(format!("need x_min < x_max, got [{x_min}, {x_max}]")));
    }
    if steps < 2 {
        return Err(Error::InvalidRange(format!("need at least 2 steps, got {steps}")));
    }
    let rival = game.ce_action();
    let rows = (0..steps)
        .map(|j| {
            let x = x_min + (x_max - x_min) * j as f64 / (steps - 1) as f64;
            let closed = closed_form_point(params, rule, gamma, x);
            DeviationRow {
                x,
                induced_price: game.prices(x, rival).p1,
                share: closed.map(|c| c.0),
                payoff: closed.map(|c| c.1),
                payoff_from_kernel: game.payoff(Firm::One, x, rival),
            }
        })
        .collect();
    Ok(DeviationTable {
        params: *params,
        rule,
        gamma,
        version: VERSION.to_string(),
        rows,
    })
}

impl DeviationTable {
    pub fn to_csv(&self) -> Result<String> {
        csv_string(
            &["x", "induced_price", "share", "payoff", "payoff_from_kernel"],
            self.rows.iter().map(|r| {
                vec![
                    num(r.x),
                    num(r.induced_price),
                    opt_num(r.share),
                    opt_num(r.payoff),
                    num(r.payoff_from_kernel),
                ]
            }),
        )
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => json_string(self),
        }
    }

    /// Largest gap between the two payoff columns where both are defined.
    pub fn max_payoff_gap(&self) -> f64 {
        self.rows
            .iter()
            .filter_map(|r| r.payoff.map(|p| (p - r.payoff_from_kernel).abs()))
            .fold(0.0, f64::max)
    }
}

/// Closed-form verdict for any rule, with or without entanglement.
///
/// With entanglement and efficient rationing the rival's price does not enter
/// the residual demand, so the classical bound `a/3` applies to `(x̂, x̂)`.
pub fn closed_form_report(
    params: &MarketParams,
    rule: RationingRule,
    gamma: Option<f64>,
) -> Result<EquilibriumReport> {
    let Some(gamma) = gamma else {
        return classical_equilibrium_exists(params, rule);
    };
    if rule == RationingRule::Proportional {
        return quantum::quantum_equilibrium_exists(params, gamma);
    }
    let params = params.ensure_feasible()?;
    let x_hat = equilibrium_action(&params, gamma)?;
    let ce = params.ce_price();
    let threshold = classical_threshold(rule, params.a);
    let verdict = Verdict::from_bool(params.k <= threshold);
    let worst = match verdict {
        Verdict::Exists => Deviation {
            action: x_hat,
            gain: 0.0,
        },
        Verdict::NotExists => {
            let best = classical::best_deviation_price(&params, rule);
            Deviation {
                action: action_for_price(&params, gamma, best)?,
                gain: classical::deviation_profit(&params, rule, best)?.value - ce * params.k,
            }
        }
    };
    Ok(EquilibriumReport {
        verdict,
        candidate: Candidate::Quantum(QuantumProfile::symmetric(x_hat, gamma)?),
        threshold: Some(threshold),
        deviation_derivative: Some(gamma.cosh() * (params.a - params.k - 2.0 * ce)),
        worst_deviation: Some(worst),
        epsilon: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    Agree,
    /// Verdicts differ but `k` is within the grid's margin band.
    WithinMargin,
    Disagree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub grid_n: usize,
    pub margin: f64,
    pub report: EquilibriumReport,
    pub agreement: Agreement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub params: MarketParams,
    pub rule: RationingRule,
    pub gamma: Option<f64>,
    pub ce_price: f64,
    pub ce_action: f64,
    pub closed_form: EquilibriumReport,
    pub oracle: Option<OracleCheck>,
    pub version: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    pub grid_n: usize,
    pub epsilon: f64,
}

pub fn analyze(
    params: &MarketParams,
    rule: RationingRule,
    gamma: Option<f64>,
    oracle: Option<OracleSettings>,
) -> Result<Analysis> {
    let closed_form = closed_form_report(params, rule, gamma)?;
    let game = Duopoly::new(*params, rule, gamma)?;
    let oracle = match oracle {
        None => None,
        Some(settings) => {
            let report = verify_candidate(&game, settings.grid_n, settings.epsilon)?;
            let margin = game.margin_band(&game.default_grid(settings.grid_n)?);
            let threshold = closed_form.threshold.expect("closed forms carry a threshold");
            let agreement = if report.verdict == closed_form.verdict {
                Agreement::Agree
            } else if (params.k - threshold).abs() < margin {
                Agreement::WithinMargin
            } else {
                Agreement::Disagree
            };
            Some(OracleCheck {
                grid_n: settings.grid_n,
                margin,
                report,
                agreement,
            })
        }
    };
    Ok(Analysis {
        params: *params,
        rule,
        gamma,
        ce_price: params.ce_price(),
        ce_action: game.ce_action(),
        closed_form,
        oracle,
        version: VERSION.to_string(),
    })
}

impl Analysis {
    pub fn to_json(&self) -> Result<String> {
        json_string(self)
    }

    pub fn agrees(&self) -> bool {
        self.oracle.as_ref().is_none_or(|o| o.agreement != Agreement::Disagree)
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let game = match self.gamma {
            Some(g) => format!("entangled game (gamma = {g})"),
            None => "classical game".to_string(),
        };
        let cf = &self.closed_form;
        out.push_str(&format!(
            "{game}, {} rationing, a = {}, k = {}\n",
            self.rule, self.params.a, self.params.k
        ));
        out.push_str(&format!(
            "competitive price {} (action {})\n",
            num(self.ce_price),
            num(self.ce_action)
        ));
        out.push_str(&format!(
            "closed form: equilibrium {} (threshold k <= {}, deviation slope {})\n",
            cf.verdict,
            opt_num(cf.threshold),
            opt_num(cf.deviation_derivative)
        ));
        if let Some(o) = &self.oracle {
            let gain = o.report.worst_deviation.map(|d| d.gain).unwrap_or(0.0);
            out.push_str(&format!(
                "oracle ({} points): equilibrium {} (best deviation gain {}), agreement: {:?}\n",
                o.grid_n, o.report.verdict, num(gain), o.agreement
            ));
        }
        out
    }
}
