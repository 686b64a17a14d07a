use serde::{Deserialize, Serialize};

/// One failed sampled inequality `lhs ≥ rhs` (or `lhs ≤ rhs`, as the checker
/// states), with the inputs that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// The mixing weight: λ for concavity checks, t for p-convex combinations.
    pub weight: f64,
    #[serde(with = "crate::serde_ext")]
    pub lhs: f64,
    #[serde(with = "crate::serde_ext")]
    pub rhs: f64,
    /// How far the inequality is violated, after the allowed slack.
    #[serde(with = "crate::serde_ext")]
    pub excess: f64,
}

/// Outcome of a sampled inequality check. Deterministic for a fixed seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub trials: usize,
    pub violations: usize,
    pub worst: Option<Violation>,
    pub seed: u64,
}

impl ViolationReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    /// Reduces per-trial outcomes in trial order; ties keep the earliest.
    pub(crate) fn collect(seed: u64, outcomes: Vec<Option<Option<Violation>>>) -> Self {
        let mut trials = 0;
        let mut violations = 0;
        let mut worst: Option<Violation> = None;
        for outcome in outcomes.into_iter().flatten() {
            trials += 1;
            if let Some(v) = outcome {
                violations += 1;
                if worst.as_ref().is_none_or(|w| v.excess > w.excess) {
                    worst = Some(v);
                }
            }
        }
        Self { trials, violations, worst, seed }
    }
}
