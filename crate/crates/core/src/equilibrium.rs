use serde::{Deserialize, Serialize};

use crate::market::PriceProfile;
use crate::quantum::QuantumProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Exists,
    NotExists,
}

impl Verdict {
    pub fn from_bool(exists: bool) -> Self {
        if exists {
            Verdict::Exists
        } else {
            Verdict::NotExists
        }
    }

    pub fn exists(self) -> bool {
        self == Verdict::Exists
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Exists => "exists",
            Verdict::NotExists => "does not exist",
        })
    }
}

/// The profile whose equilibrium status is being reported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Candidate {
    Classical(PriceProfile),
    Quantum(QuantumProfile),
}

impl Candidate {
    /// Strategic actions `(firm 1, firm 2)`: prices or quantum actions.
    pub fn actions(&self) -> (f64, f64) {
        match self {
            Candidate::Classical(p) => (p.p1, p.p2),
            Candidate::Quantum(q) => (q.x1, q.x2),
        }
    }
}

/// A unilateral deviation and what it gains over the candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub action: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub verdict: Verdict,
    pub candidate: Candidate,
    /// Capacity bound from the closed form, when one applies.
    pub threshold: Option<f64>,
    /// Right derivative of the deviation payoff at the candidate action.
    pub deviation_derivative: Option<f64>,
    pub worst_deviation: Option<Deviation>,
    /// Tolerance on deviation gains; `None` for exact closed-form verdicts.
    pub epsilon: Option<f64>,
}
