//! Capacity-constrained price competition between two firms, in its
//! classical form and with entangled strategies.
//!
//! The crate provides the payoff kernel ([`market`]), closed-form existence
//! thresholds for the symmetric competitive-price equilibrium ([`classical`],
//! [`quantum`]), and a grid-search oracle ([`oracle`]) that re-derives every
//! verdict by brute force. [`report`] renders threshold curves, deviation
//! profiles and analyses as CSV or JSON.

pub mod classical;
pub mod equilibrium;
pub mod error;
pub mod market;
pub mod numdiff;
pub mod oracle;
pub mod quantum;
pub mod report;
pub mod selfcheck;

pub use classical::{classical_equilibrium_exists, classical_threshold, deviation_profit, DeviationProfit};
pub use equilibrium::{Candidate, Deviation, EquilibriumReport, Verdict};
pub use error::{Error, Result};
pub use market::{demand, profit, residual_demand, Firm, MarketParams, PriceProfile, RationingRule};
pub use oracle::{
    best_response, find_all_pure_equilibria, undercut_check, verify_candidate, verify_equilibrium, Duopoly,
    GridSpec, PureEquilibrium,
};
pub use quantum::{
    equilibrium_action, induced_prices, quantum_deviation, quantum_equilibrium_exists, quantum_threshold,
    QuantumDeviation, QuantumProfile,
};
