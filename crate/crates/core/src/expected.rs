//! Monitoring-free baseline for the eNode B: a prior-weighted mixture of its
//! complete-information single-shot security strategies.
//!
//! `y = Σ_θ p₀^θ y*_θ` where `y*_θ` is the minimizer's optimal mix of the
//! state-θ matrix game. The mixture is computed once from the prior and
//! never updated, so it needs no observation of the jammer at all; the
//! obliviousness is the point of the baseline.

use crate::game::{validate_prior, GameSpec, MixedAction};
use crate::lp::solve_matrix_game;
use crate::uninformed::UninformedPolicy;
use crate::Result;

/// The minimizer's optimal single-shot mix per state, from one deterministic
/// solve each; degenerate alternative optima are pinned by the fixed pivot
/// rule so repeated calls agree within and across runs.
pub fn single_shot_column_strategies(game: &GameSpec) -> Result<Vec<MixedAction>> {
    (0..game.num_states())
        .map(|theta| Ok(solve_matrix_game(game.payoff(theta))?.col_mix))
        .collect()
}

/// Prior mixture of the per-state single-shot security strategies.
pub fn expected_policy(game: &GameSpec, p0: &[f64]) -> Result<UninformedPolicy> {
    validate_prior(p0, game.num_states())?;
    let per_state = single_shot_column_strategies(game)?;
    mix(p0, &per_state)
}

/// `Σ_θ p₀^θ y_θ`, exposed so callers holding cached per-state strategies
/// can re-mix without re-solving.
pub fn mix(p0: &[f64], per_state: &[MixedAction]) -> Result<UninformedPolicy> {
    let n = per_state[0].len();
    let mut probs = vec![0.0; n];
    for (weight, strategy) in p0.iter().zip(per_state) {
        for (acc, v) in probs.iter_mut().zip(strategy.probs()) {
            *acc += weight * v;
        }
    }
    MixedAction::new(probs)
}
