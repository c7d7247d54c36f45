//! Solver library for infinite-horizon discounted zero-sum repeated games in
//! which one player (the jammer) knows the true system state and the other
//! (the eNode B) only knows a prior over states.
//!
//! The crate has three layers:
//!
//! * Game primitives: [`game`] holds the state-dependent payoff model and the
//!   scenario file format, [`lp`] a dense two-phase simplex solver plus the
//!   matrix-game minimax reduction, and [`history`] the positional indexing of
//!   jammer action histories that the tree-structured LPs are built over.
//! * Strategy computation: [`informed`] (belief state, Bayesian updates and
//!   the receding-horizon realization-plan LP for the jammer), [`uninformed`]
//!   (anti-discounted regret and the primal/dual security LPs for the
//!   eNode B), and [`expected`] (the monitoring-free prior mixture baseline).
//! * Experiments: [`engine`] plays out matches and prior sweeps and exports
//!   CSV, while [`lte`] synthesizes payoff matrices for a single LTE cell
//!   from a Monte-Carlo physical-layer model.
//!
//! The bundled `cheater_saboteur` scenario ships with the crate and is the
//! regression ground truth used across the test suite.

pub mod engine;
pub mod expected;
pub mod game;
pub mod history;
pub mod informed;
pub mod lp;
pub mod lte;
mod mat;
pub mod uninformed;

pub use engine::{play_match, sweep_prior, MatchConfig, Trajectory};
pub use game::{expected_payoff, ActionSet, GameSpec, MixedAction, StateDependentStrategy};
pub use informed::{belief_update, BeliefState, InformedPolicy};
pub use lp::{solve_lp, solve_matrix_game, LinearProgram, LpSolution, LpStatus};
pub use mat::Mat;
pub use uninformed::{regret_update, RegretVector, UninformedPolicy};

use thiserror::Error;

/// Tolerance for validating probability vectors supplied by callers or files.
pub const PROB_TOL: f64 = 1e-9;
/// Tolerance applied when adopting solver output as a probability vector;
/// LP solvers return approximate vertices.
pub const SOLVER_PROB_TOL: f64 = 1e-6;
/// Belief components below this are truncated to zero and the vector
/// renormalized, so long runs do not churn on denormals.
pub const BELIEF_TRUNCATION: f64 = 1e-12;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("prior not normalized: {0}")]
    Distribution(String),
    #[error("lambda out of range: {0} (must lie strictly inside (0,1))")]
    Discount(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("history: {0}")]
    History(String),
    #[error("horizon too large: {0}")]
    Horizon(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Lp(#[from] lp::LpError),
    #[error("lp failure at stage {stage}: {source}")]
    StageLp {
        stage: usize,
        #[source]
        source: lp::LpError,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
