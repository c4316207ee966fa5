//! Solver budgets and bounds, shared across the pipeline.

use serde::Serialize;

/// Tunable limits for the decision pipeline. All limits are deterministic
/// work bounds except `time_budget_secs`, which is a coarse wall-clock
/// ceiling checked between pipeline stages.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolverConfig {
    /// Largest max-norm shell exhausted when searching for small solutions
    /// of a quadratic.
    pub search_bound: u64,
    /// Largest modulus scanned for modular obstructions.
    pub modulus_limit: u64,
    /// Maximum number of torsion branches per equation.
    pub branch_budget: u64,
    /// Maximum number of points visited by any single exhaustive
    /// enumeration (residue classes, obstruction scans, box searches).
    pub residue_budget: u64,
    /// Wall-clock ceiling in seconds; exceeding it yields an Unknown
    /// verdict. Verdicts are deterministic whenever the run finishes
    /// comfortably inside this ceiling.
    pub time_budget_secs: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            search_bound: 64,
            modulus_limit: 64,
            branch_budget: 1_000_000,
            residue_budget: 10_000_000,
            time_budget_secs: 60,
        }
    }
}
