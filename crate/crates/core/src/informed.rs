//! The jammer's side: belief state, Bayesian updates, and the
//! receding-horizon security strategy LP.
//!
//! Knowing the true state, the jammer tracks the posterior the opponent
//! would hold about that state given the jammer's public action history. The
//! posterior is a fixed-size sufficient statistic: the optimal stationary
//! strategy is a function of the belief alone.
//!
//! The value of the `T`-stage discounted lookahead game is computed by one
//! LP in sequence form. Per state θ, realization weights `q(H; θ)` span the
//! action-history tree (root 1, flow conservation to children, nonnegative),
//! and each history node carries the value `l_H` of the stage played there.
//! The maximizer earns `Σ_t λ(1-λ)^(t-1) Σ_H l_H` subject to the security
//! rows `Σ_θ p^θ Σ_a q((H,a); θ) U^θ(a,:) ≥ l_H · 1ᵀ`.
//!
//! Two reductions pin this construction down: with a single state it
//! collapses to the matrix game scaled by the discount mass `1-(1-λ)^T`, and
//! with `T = 1` it is exactly the asymmetric single-shot LP scaled by `λ`.
//! The first-stage weights `q_2*` are already per-state distributions by the
//! flow constraints and form the policy that is actually played.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::game::{GameSpec, MixedAction, StateDependentStrategy};
use crate::history::HistoryIndex;
use crate::lp::{solve_lp, LinearProgram, LpError, LpStatus, Sense};
use crate::{Error, Result, BELIEF_TRUNCATION, PROB_TOL, SOLVER_PROB_TOL};

/// Posterior distribution over states; the informed player's sufficient
/// statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState {
    probs: Vec<f64>,
}

impl BeliefState {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(probs, PROB_TOL)
    }

    pub fn from_solver(probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(probs, SOLVER_PROB_TOL)
    }

    fn with_tolerance(mut probs: Vec<f64>, tol: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Distribution("empty belief".into()));
        }
        for p in &mut probs {
            if !p.is_finite() || *p < -tol {
                return Err(Error::Distribution(format!("belief entry {p}")));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::Distribution(format!("belief sums to {sum}")));
        }
        for p in &mut probs {
            *p /= sum;
        }
        Ok(BeliefState { probs })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, theta: usize) -> f64 {
        self.probs[theta]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Zeroes out components below the truncation threshold and
    /// renormalizes, so long runs do not churn on denormals.
    fn truncated(mut probs: Vec<f64>) -> Vec<f64> {
        for p in &mut probs {
            if *p < BELIEF_TRUNCATION {
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= sum;
        }
        probs
    }

    /// Quantized key for policy caches.
    pub(crate) fn cache_key(&self) -> Vec<u64> {
        self.probs
            .iter()
            .map(|p| (p * 1e12).round() as u64)
            .collect()
    }
}

/// Outcome of a Bayesian update; `off_support` flags an observation the
/// profile assigns zero probability (belief kept unchanged).
#[derive(Debug, Clone)]
pub struct BeliefUpdate {
    pub belief: BeliefState,
    pub off_support: bool,
}

/// Posterior after observing the informed player's action `observed` under
/// the commonly known stage profile `x`:
/// `p'^θ = p^θ x^θ(a) / Σ_θ' p^θ' x^θ'(a)`.
///
/// An off-support observation (zero denominator) cannot occur in self-play,
/// where actions are sampled from `x` itself; for replayed logs the belief
/// is returned unchanged with the flag set.
pub fn belief_update(
    p: &BeliefState,
    x: &StateDependentStrategy,
    observed: usize,
) -> Result<BeliefUpdate> {
    if x.num_states() != p.len() {
        return Err(Error::Dimension("strategy states do not match belief".into()));
    }
    if observed >= x.num_actions() {
        return Err(Error::Dimension(format!("observed action {observed} out of range")));
    }
    // Non-revealing observation: every supported state assigns the action
    // the same probability, so the posterior IS the prior (returned without
    // arithmetic, keeping the identity bit-exact).
    let support_probs: Vec<f64> = (0..p.len())
        .filter(|&theta| p.get(theta) > 0.0)
        .map(|theta| x.column(theta).get(observed))
        .collect();
    if let Some((&first, rest)) = support_probs.split_first() {
        if first > 0.0 && rest.iter().all(|&v| v == first) {
            return Ok(BeliefUpdate { belief: p.clone(), off_support: false });
        }
    }

    let weights: Vec<f64> = (0..p.len())
        .map(|theta| p.get(theta) * x.column(theta).get(observed))
        .collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Ok(BeliefUpdate { belief: p.clone(), off_support: true });
    }
    let probs = BeliefState::truncated(weights.iter().map(|w| w / total).collect());
    Ok(BeliefUpdate { belief: BeliefState { probs }, off_support: false })
}

/// The informed player's stage policy: one mixed action over `A_j` per
/// state, the state column being what gets sampled when that state is true.
pub type InformedPolicy = StateDependentStrategy;

/// Sequence-form LP for the `T`-stage discounted lookahead, plus the layout
/// needed to read strategies back out of the solution.
pub struct InformedLp {
    pub lp: LinearProgram,
    layout: InformedLayout,
}

struct InformedLayout {
    tree: HistoryIndex,
    stages: usize,
    num_states: usize,
    /// first q column of each stage layer
    q_offset: Vec<usize>,
    /// first l column of each stage layer
    l_offset: Vec<usize>,
    num_vars: usize,
}

impl InformedLayout {
    fn new(tree: HistoryIndex, stages: usize, num_states: usize) -> Self {
        // q spans layers 1..=stages+1, l spans layers 1..=stages
        let mut q_offset = vec![0usize; stages + 2];
        let mut next = 0usize;
        for t in 1..=stages + 1 {
            q_offset[t] = next;
            next += tree.layer_len(t) * num_states;
        }
        let mut l_offset = vec![0usize; stages + 1];
        for t in 1..=stages {
            l_offset[t] = next;
            next += tree.layer_len(t);
        }
        InformedLayout { tree, stages, num_states, q_offset, l_offset, num_vars: next }
    }

    fn q_var(&self, stage: usize, node: usize, theta: usize) -> usize {
        self.q_offset[stage] + node * self.num_states + theta
    }

    fn l_var(&self, stage: usize, node: usize) -> usize {
        self.l_offset[stage] + node
    }
}

/// Upper bound on tree size before LP assembly is refused.
const MAX_TREE_NODES: usize = 2_000_000;

/// Builds the lookahead LP at belief `p` over `horizon` stages of play.
///
/// Variable count: `Σ_{t=1..horizon+1} |A_j|^(t-1) · |Θ|` realization
/// weights plus `Σ_{t=1..horizon} |A_j|^(t-1)` stage values.
pub fn build_informed_lp(game: &GameSpec, p: &BeliefState, horizon: usize) -> Result<InformedLp> {
    if horizon == 0 {
        return Err(Error::Horizon("lookahead must be at least one stage".into()));
    }
    if p.len() != game.num_states() {
        return Err(Error::Dimension("belief does not match game states".into()));
    }
    let n_actions = game.jammer_actions().len();
    let n_states = game.num_states();
    let tree = HistoryIndex::new(n_actions, horizon)?;
    if tree.total_nodes(horizon + 1) > MAX_TREE_NODES {
        return Err(Error::Horizon(format!(
            "{} tree nodes exceed the configured budget",
            tree.total_nodes(horizon + 1)
        )));
    }

    let layout = InformedLayout::new(tree, horizon, n_states);
    let mut lp = LinearProgram::new(Sense::Maximize, layout.num_vars);
    let lambda = game.discount();

    // objective: Σ_t λ(1-λ)^(t-1) Σ_H l_H ; l is free, q ≥ 0 (default bounds)
    for t in 1..=horizon {
        let weight = lambda * (1.0 - lambda).powi(t as i32 - 1);
        for node in 0..layout.tree.layer_len(t) {
            let v = layout.l_var(t, node);
            lp.set_objective(v, weight);
            lp.set_free(v);
        }
    }

    // roots: q_1(∅; θ) = 1
    for theta in 0..n_states {
        lp.add_eq(&[(layout.q_var(1, 0, theta), 1.0)], 1.0);
    }

    // flow: Σ_a q_{t+1}((H,a); θ) = q_t(H; θ)
    for t in 1..=horizon {
        for node in 0..layout.tree.layer_len(t) {
            for theta in 0..n_states {
                let mut terms: Vec<(usize, f64)> = (0..n_actions)
                    .map(|a| (layout.q_var(t + 1, layout.tree.child(t, node, a), theta), 1.0))
                    .collect();
                terms.push((layout.q_var(t, node, theta), -1.0));
                lp.add_eq(&terms, 0.0);
            }
        }
    }

    // security rows, prior-weighted:
    //   l_H - Σ_θ p^θ Σ_a q((H,a); θ) U^θ(a, col) ≤ 0  for every column
    for t in 1..=horizon {
        for node in 0..layout.tree.layer_len(t) {
            for col in 0..game.enb_actions().len() {
                let mut terms = Vec::with_capacity(n_states * n_actions + 1);
                terms.push((layout.l_var(t, node), 1.0));
                for theta in 0..n_states {
                    let weight = p.get(theta);
                    if weight == 0.0 {
                        continue;
                    }
                    let u = game.payoff(theta);
                    for a in 0..n_actions {
                        terms.push((
                            layout.q_var(t + 1, layout.tree.child(t, node, a), theta),
                            -weight * u.get(a, col),
                        ));
                    }
                }
                lp.add_ineq(&terms, 0.0);
            }
        }
    }

    Ok(InformedLp { lp, layout })
}

/// A solved lookahead: the game value, the first-stage policy, and the full
/// realization tree (behavior weights per node) for diagnostics and tests.
pub struct InformedSolution {
    pub value: f64,
    pub policy: InformedPolicy,
    /// `q(H; θ)` for every node, stage-major layout mirroring the LP.
    realization: Vec<f64>,
    tree: HistoryIndex,
    stages: usize,
    num_states: usize,
}

impl InformedSolution {
    /// Realization weight of a history node for a given state.
    pub fn realization_weight(&self, stage: usize, node: usize, theta: usize) -> f64 {
        let mut off = 0;
        for t in 1..stage {
            off += self.tree.layer_len(t) * self.num_states;
        }
        self.realization[off + node * self.num_states + theta]
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn tree(&self) -> &HistoryIndex {
        &self.tree
    }
}

/// Solves the lookahead game through the minimizer's tree LP and reads the
/// maximizer's realization plan off the duals of the pure-path rows.
///
/// Both formulations have the lookahead value as their optimum, but the
/// minimizer side carries far less primal degeneracy (the realization-plan
/// LP is all zero right-hand sides, which grinds a tableau simplex to a
/// halt at deeper horizons). The dual of path row `(θ, a_1..a_T)` is the
/// prior-scaled probability that the maximizer walks exactly that action
/// sequence when the state is θ; entire-tree weights follow by summing
/// descendants. [`solve_informed_primal`] keeps the direct route alive as
/// an independent cross-check at small horizons.
pub fn solve_informed(game: &GameSpec, p: &BeliefState, horizon: usize) -> Result<InformedSolution> {
    let (lp, _layout) = crate::uninformed::build_security_lp_internal(game, p, horizon)?;
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(LpError::Certificate(format!(
            "lookahead LP ended {:?}; it is always feasible and bounded",
            sol.status
        ))));
    }

    let n_actions = game.jammer_actions().len();
    let n_states = game.num_states();
    let tree = HistoryIndex::new(n_actions, horizon)?;
    let n_leaves = tree.layer_len(horizon + 1);

    // path rows are the only inequalities, leaf-major with θ innermost;
    // the minimize-form multiplier is the negated sensitivity
    let mut leaf_q = vec![vec![0.0; n_leaves]; n_states];
    for leaf in 0..n_leaves {
        for theta in 0..n_states {
            let mu = -sol.dual_point[leaf * n_states + theta];
            if mu < -1e-6 {
                return Err(Error::Lp(LpError::Certificate(format!(
                    "negative path multiplier {mu}"
                ))));
            }
            leaf_q[theta][leaf] = mu.max(0.0);
        }
    }
    for (theta, leaves) in leaf_q.iter_mut().enumerate() {
        let weight = p.get(theta);
        let total: f64 = leaves.iter().sum();
        if weight > 0.0 {
            if (total - weight).abs() > 1e-5 * weight.max(1.0) {
                return Err(Error::Lp(LpError::Certificate(format!(
                    "path multipliers for state {theta} sum to {total}, prior {weight}"
                ))));
            }
            for q in leaves.iter_mut() {
                *q /= total;
            }
        } else {
            // a zero-prior state never constrains the value; give it the
            // stationary single-state optimum so the column stays meaningful
            let mix = crate::lp::solve_matrix_game(game.payoff(theta))?.row_mix;
            for (leaf, q) in leaves.iter_mut().enumerate() {
                let path = tree.decode(horizon + 1, leaf);
                *q = path.iter().map(|&a| mix.get(a)).product();
            }
        }
    }

    // roll leaf weights up the tree: q(H; θ) = Σ over descendants
    let mut realization = Vec::new();
    let mut per_layer: Vec<Vec<Vec<f64>>> = vec![leaf_q];
    for t in (1..=horizon).rev() {
        let child_layer = &per_layer[per_layer.len() - 1];
        let nodes = tree.layer_len(t);
        let mut layer = vec![vec![0.0; nodes]; n_states];
        for (theta, row) in layer.iter_mut().enumerate() {
            for (node, slot) in row.iter_mut().enumerate() {
                *slot = (0..n_actions)
                    .map(|a| child_layer[theta][tree.child(t, node, a)])
                    .sum();
            }
        }
        per_layer.push(layer);
    }
    per_layer.reverse(); // now layer index 0 is the root layer
    for (t, layer) in per_layer.iter().enumerate() {
        for node in 0..tree.layer_len(t + 1) {
            for state_row in layer {
                realization.push(state_row[node]);
            }
        }
    }

    // first-stage behavior strategy: the stage-2 weights, normalized only
    // against solver round-off (flow makes them a distribution already)
    let mut columns = Vec::with_capacity(n_states);
    for theta in 0..n_states {
        let raw: Vec<f64> = (0..n_actions).map(|a| per_layer[1][theta][a]).collect();
        columns.push(MixedAction::from_solver(raw).map_err(|e| {
            Error::Lp(LpError::Certificate(format!("stage-1 weights for state {theta}: {e}")))
        })?);
    }

    Ok(InformedSolution {
        value: sol.value,
        policy: InformedPolicy::new(columns)?,
        realization,
        tree,
        stages: horizon,
        num_states: n_states,
    })
}

/// Direct solve of the realization-plan LP; the independent route used to
/// cross-check [`solve_informed`] at small horizons.
pub fn solve_informed_primal(
    game: &GameSpec,
    p: &BeliefState,
    horizon: usize,
) -> Result<InformedSolution> {
    let InformedLp { lp, layout } = build_informed_lp(game, p, horizon)?;
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(LpError::Certificate(format!(
            "lookahead LP ended {:?}; it is always feasible and bounded",
            sol.status
        ))));
    }

    let n_actions = game.jammer_actions().len();
    let n_states = game.num_states();
    let mut columns = Vec::with_capacity(n_states);
    for theta in 0..n_states {
        let raw: Vec<f64> = (0..n_actions)
            .map(|a| sol.point[layout.q_var(2, a, theta)])
            .collect();
        columns.push(MixedAction::from_solver(raw).map_err(|e| {
            Error::Lp(LpError::Certificate(format!("stage-1 weights for state {theta}: {e}")))
        })?);
    }

    let q_len = layout.l_offset[1];
    Ok(InformedSolution {
        value: sol.value,
        policy: InformedPolicy::new(columns)?,
        realization: sol.point[..q_len].to_vec(),
        tree: layout.tree,
        stages: layout.stages,
        num_states: n_states,
    })
}

/// Value `V_{λ,T}(p)` of the `T`-stage discounted lookahead.
pub fn informed_game_value(game: &GameSpec, p: &BeliefState, horizon: usize) -> Result<f64> {
    Ok(solve_informed(game, p, horizon)?.value)
}

/// The belief-stationary policy actually played at belief `p`.
pub fn approx_informed_strategy(
    game: &GameSpec,
    p: &BeliefState,
    horizon: usize,
) -> Result<InformedPolicy> {
    Ok(solve_informed(game, p, horizon)?.policy)
}

/// Undiscounted single-shot value of the asymmetric game at prior `p`,
/// assembled directly (not through the history tree). Serves as the
/// independent cross-check for the `T = 1` lookahead and backs the CLI.
pub fn single_shot_value(game: &GameSpec, p: &BeliefState) -> Result<SingleShot> {
    let n_actions = game.jammer_actions().len();
    let n_states = game.num_states();
    let n_cols = game.enb_actions().len();
    // variables: x^θ(a) per (θ, a), then the value v
    let x_var = |theta: usize, a: usize| theta * n_actions + a;
    let v_var = n_states * n_actions;
    let mut lp = LinearProgram::new(Sense::Maximize, v_var + 1);
    lp.set_objective(v_var, 1.0);
    lp.set_free(v_var);
    for col in 0..n_cols {
        let mut terms = vec![(v_var, 1.0)];
        for theta in 0..n_states {
            for a in 0..n_actions {
                terms.push((x_var(theta, a), -p.get(theta) * game.payoff(theta).get(a, col)));
            }
        }
        lp.add_ineq(&terms, 0.0);
    }
    for theta in 0..n_states {
        let ones: Vec<(usize, f64)> = (0..n_actions).map(|a| (x_var(theta, a), 1.0)).collect();
        lp.add_eq(&ones, 1.0);
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(LpError::Certificate(format!(
            "single-shot LP ended {:?}",
            sol.status
        ))));
    }
    let mut columns = Vec::with_capacity(n_states);
    for theta in 0..n_states {
        let raw: Vec<f64> = (0..n_actions).map(|a| sol.point[x_var(theta, a)]).collect();
        columns.push(MixedAction::from_solver(raw)?);
    }
    Ok(SingleShot { value: sol.value, strategy: StateDependentStrategy::new(columns)? })
}

/// Single-shot asymmetric game value and the maximizer's optimal profile.
pub struct SingleShot {
    pub value: f64,
    pub strategy: StateDependentStrategy,
}

/// Caches lookahead solves keyed by quantized belief; non-revealing play
/// makes repeated queries at the same belief the common case, and sweeps
/// share one cache across grid points.
pub struct InformedAgent<'g> {
    game: &'g GameSpec,
    horizon: usize,
    belief: BeliefState,
    cache: Arc<Mutex<HashMap<Vec<u64>, InformedPolicy>>>,
    pub off_support_seen: bool,
}

impl<'g> InformedAgent<'g> {
    pub fn new(game: &'g GameSpec, p0: BeliefState, horizon: usize) -> Self {
        Self::with_shared_cache(game, p0, horizon, Arc::new(Mutex::new(HashMap::new())))
    }

    pub fn with_shared_cache(
        game: &'g GameSpec,
        p0: BeliefState,
        horizon: usize,
        cache: Arc<Mutex<HashMap<Vec<u64>, InformedPolicy>>>,
    ) -> Self {
        InformedAgent { game, horizon, belief: p0, cache, off_support_seen: false }
    }

    pub fn belief(&self) -> &BeliefState {
        &self.belief
    }

    /// Policy at the current belief (solves the LP on cache miss).
    pub fn policy(&mut self) -> Result<InformedPolicy> {
        let key = self.belief.cache_key();
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let policy = approx_informed_strategy(self.game, &self.belief, self.horizon)?;
        self.cache.lock().unwrap().insert(key, policy.clone());
        Ok(policy)
    }

    /// One stage: sample the true-state column, then advance the public
    /// belief with the full profile and the realized action.
    pub fn step<R: rand::Rng + ?Sized>(
        &mut self,
        true_state: usize,
        rng: &mut R,
    ) -> Result<(usize, InformedPolicy)> {
        let policy = self.policy()?;
        let action = policy.column(true_state).sample(rng);
        let update = belief_update(&self.belief, &policy, action)?;
        self.off_support_seen |= update.off_support;
        self.belief = update.belief;
        Ok((action, policy))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameSpec;
    use proptest::prelude::*;

    fn bundled() -> GameSpec {
        GameSpec::bundled_cheater_saboteur()
    }

    fn b(v: Vec<f64>) -> BeliefState {
        BeliefState::new(v).unwrap()
    }

    #[test]
    fn state_independent_profile_leaves_belief_unchanged() {
        let p = b(vec![0.3, 0.7]);
        let col = MixedAction::new(vec![0.2, 0.5, 0.3, 0.0, 0.0]).unwrap();
        let x = StateDependentStrategy::new(vec![col.clone(), col]).unwrap();
        for a in 0..3 {
            let upd = belief_update(&p, &x, a).unwrap();
            assert!(!upd.off_support);
            assert_eq!(upd.belief.probs(), p.probs(), "action {a}");
        }
    }

    #[test]
    fn fully_revealing_action_collapses_belief() {
        let p = b(vec![0.5, 0.5]);
        let x = StateDependentStrategy::new(vec![
            MixedAction::point_mass(0, 2),
            MixedAction::point_mass(1, 2),
        ])
        .unwrap();
        let upd = belief_update(&p, &x, 0).unwrap();
        assert_eq!(upd.belief.probs(), &[1.0, 0.0]);
    }

    #[test]
    fn off_support_observation_flags_and_keeps_belief() {
        let p = b(vec![0.5, 0.5]);
        let x = StateDependentStrategy::new(vec![
            MixedAction::point_mass(0, 2),
            MixedAction::point_mass(0, 2),
        ])
        .unwrap();
        let upd = belief_update(&p, &x, 1).unwrap();
        assert!(upd.off_support);
        assert_eq!(upd.belief.probs(), p.probs());
    }

    #[test]
    fn posterior_support_never_grows() {
        let p = b(vec![0.0, 1.0]);
        let x = StateDependentStrategy::new(vec![
            MixedAction::uniform(5),
            MixedAction::uniform(5),
        ])
        .unwrap();
        for a in 0..5 {
            let upd = belief_update(&p, &x, a).unwrap();
            assert_eq!(upd.belief.get(0), 0.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        // martingale: the expected posterior under the action marginal is the prior
        #[test]
        fn belief_martingale(
            p1 in 0.0f64..1.0,
            c1 in proptest::collection::vec(0.01f64..1.0, 4),
            c2 in proptest::collection::vec(0.01f64..1.0, 4),
        ) {
            let norm = |v: &[f64]| {
                let s: f64 = v.iter().sum();
                MixedAction::new(v.iter().map(|x| x / s).collect()).unwrap()
            };
            let p = b(vec![p1, 1.0 - p1]);
            let x = StateDependentStrategy::new(vec![norm(&c1), norm(&c2)]).unwrap();
            let mut mixed = [0.0; 2];
            for a in 0..4 {
                let marginal: f64 = (0..2).map(|t| p.get(t) * x.column(t).get(a)).sum();
                let upd = belief_update(&p, &x, a).unwrap();
                for t in 0..2 {
                    mixed[t] += marginal * upd.belief.get(t);
                }
            }
            for t in 0..2 {
                prop_assert!((mixed[t] - p.get(t)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_state_lookahead_is_discount_scaled_matrix_game() {
        let doc = r#"
states = ["only"]
jammer_actions = ["a", "b", "c"]
enb_actions = ["x", "y", "z"]
prior = [1.0]
lambda = 0.9
[payoff]
only = [[3.0, -1.0, 2.0], [1.0, 2.0, -2.0], [0.0, 1.0, 1.0]]
"#;
        let g = GameSpec::from_toml_str(doc).unwrap();
        let stage = crate::lp::solve_matrix_game(g.payoff(0)).unwrap().value;
        for t in 1..=3 {
            let mass = 1.0 - (1.0 - 0.9f64).powi(t as i32);
            let v = informed_game_value(&g, &b(vec![1.0]), t).unwrap();
            assert!((v - mass * stage).abs() < 1e-7, "T={t}: {v} vs {}", mass * stage);
        }
    }

    #[test]
    fn one_stage_lookahead_matches_direct_single_shot_lp() {
        let g = bundled();
        for p1 in [0.0, 0.25, 0.5, 0.8, 1.0] {
            let p = b(vec![p1, 1.0 - p1]);
            let tree = informed_game_value(&g, &p, 1).unwrap();
            let direct = single_shot_value(&g, &p).unwrap().value;
            assert!(
                (tree - g.discount() * direct).abs() < 1e-8,
                "p1={p1}: tree {tree} vs scaled direct {}",
                g.discount() * direct
            );
        }
    }

    #[test]
    fn oversized_horizon_is_refused() {
        let g = bundled();
        match build_informed_lp(&g, &b(vec![0.5, 0.5]), 12) {
            Err(Error::Horizon(_)) => {}
            Err(other) => panic!("unexpected error: {other}"),
            Ok(_) => panic!("a 5^13-node tree should be refused"),
        }
    }

    #[test]
    fn lookahead_variable_count_follows_geometric_series() {
        let g = bundled();
        let built = build_informed_lp(&g, &b(vec![0.5, 0.5]), 4).unwrap();
        // q over layers 1..=5 (781 nodes x 2 states) + l over layers 1..=4
        assert_eq!(built.lp.num_vars(), 781 * 2 + 156);
        assert_eq!(built.lp.num_eq(), 2 + 156 * 2);
        assert_eq!(built.lp.num_ineq(), 156 * 5);
    }

    #[test]
    fn complete_information_vertex_prior_reaches_stage_value() {
        let g = bundled();
        let mass = 1.0 - 0.1f64.powi(4);
        let v = informed_game_value(&g, &b(vec![1.0, 0.0]), 4).unwrap();
        assert!((v / mass - (-2.0553)).abs() < 1e-5, "{v}");
    }

    #[test]
    fn lookahead_values_approach_fixed_point_monotonically() {
        // normalized values on a grid of beliefs, T = 1..3: successive
        // approximations must not cross (monotone toward the fixed point)
        let g = bundled();
        for p1 in [0.1, 0.35, 0.6, 0.9] {
            let p = b(vec![p1, 1.0 - p1]);
            let mut vals = Vec::new();
            for t in 1..=3usize {
                let mass = 1.0 - 0.1f64.powi(t as i32);
                vals.push(informed_game_value(&g, &p, t).unwrap() / mass);
            }
            let up = vals[1] >= vals[0] - 1e-7 && vals[2] >= vals[1] - 1e-7;
            let down = vals[1] <= vals[0] + 1e-7 && vals[2] <= vals[1] + 1e-7;
            assert!(up || down, "p1={p1}: {vals:?}");
        }
    }

    /// Best response of the minimizer against a realization tree: walk every
    /// node, pick the minimizing column of the prior-weighted stage payoff.
    fn best_response_value(g: &GameSpec, p: &BeliefState, sol: &InformedSolution) -> f64 {
        let lambda = g.discount();
        let mut total = 0.0;
        for t in 1..=sol.stages() {
            let weight = lambda * (1.0 - lambda).powi(t as i32 - 1);
            for node in 0..sol.tree().layer_len(t) {
                let mut best = f64::INFINITY;
                for col in 0..g.enb_actions().len() {
                    let mut v = 0.0;
                    for theta in 0..g.num_states() {
                        for a in 0..g.jammer_actions().len() {
                            let child = sol.tree().child(t, node, a);
                            v += p.get(theta)
                                * sol.realization_weight(t + 1, child, theta)
                                * g.payoff(theta).get(a, col);
                        }
                    }
                    best = best.min(v);
                }
                total += weight * best;
            }
        }
        total
    }

    #[test]
    fn returned_tree_guarantees_the_lp_optimum() {
        let g = bundled();
        for p1 in [0.2, 0.5, 0.95] {
            let p = b(vec![p1, 1.0 - p1]);
            let sol = solve_informed(&g, &p, 3).unwrap();
            let guaranteed = best_response_value(&g, &p, &sol);
            assert!(
                (guaranteed - sol.value).abs() < 1e-5,
                "p1={p1}: guarantee {guaranteed} vs value {}",
                sol.value
            );
        }
    }

    #[test]
    fn realization_tree_flow_holds_at_all_781_nodes() {
        // full-depth walk: roots are 1, children sum to their parent
        let g = bundled();
        let p = b(vec![0.6, 0.4]);
        let sol = solve_informed(&g, &p, 4).unwrap();
        assert_eq!(sol.tree().total_nodes(5), 781);
        for theta in 0..2 {
            assert!((sol.realization_weight(1, 0, theta) - 1.0).abs() < 1e-7);
            for stage in 1..=4 {
                for node in 0..sol.tree().layer_len(stage) {
                    let parent = sol.realization_weight(stage, node, theta);
                    let kids: f64 = (0..5)
                        .map(|a| {
                            sol.realization_weight(
                                stage + 1,
                                sol.tree().child(stage, node, a),
                                theta,
                            )
                        })
                        .sum();
                    assert!(
                        (kids - parent).abs() <= 1e-9 * parent.abs().max(1.0),
                        "state {theta} stage {stage} node {node}: {kids} vs {parent}"
                    );
                }
            }
        }
    }

    #[test]
    fn dual_route_agrees_with_direct_realization_lp() {
        let g = bundled();
        for (t, p1) in [(1, 0.3), (2, 0.5), (2, 0.05), (3, 0.75)] {
            let p = b(vec![p1, 1.0 - p1]);
            let via_dual = solve_informed(&g, &p, t).unwrap();
            let via_primal = solve_informed_primal(&g, &p, t).unwrap();
            assert!(
                (via_dual.value - via_primal.value).abs() < 1e-7,
                "T={t} p1={p1}: {} vs {}",
                via_dual.value,
                via_primal.value
            );
            // optimal faces may differ; both trees must still certify the value
            for sol in [&via_dual, &via_primal] {
                let guaranteed = best_response_value(&g, &p, sol);
                assert!((guaranteed - sol.value).abs() < 1e-6, "T={t} p1={p1}");
            }
        }
    }

    #[test]
    fn revealed_saboteur_plays_near_even_two_action_mix() {
        let g = bundled();
        let p = b(vec![0.0, 1.0]);
        let policy = approx_informed_strategy(&g, &p, 4).unwrap();
        let col = policy.column(1);
        assert!(col.get(1) > 0.4 && col.get(4) > 0.4, "{:?}", col.probs());
        assert!((col.get(1) - col.get(4)).abs() < 0.1);
    }

    #[test]
    fn vertex_belief_is_absorbing_in_steps() {
        use rand::SeedableRng;
        let g = bundled();
        let mut agent = InformedAgent::new(&g, b(vec![1.0, 0.0]), 2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            agent.step(0, &mut rng).unwrap();
            assert_eq!(agent.belief().probs(), &[1.0, 0.0]);
        }
    }

    #[test]
    fn fixed_seed_reproduces_action_sequence() {
        use rand::SeedableRng;
        let g = bundled();
        let run = |seed: u64| -> Vec<usize> {
            let mut agent = InformedAgent::new(&g, b(vec![0.4, 0.6]), 2);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            (0..6).map(|_| agent.step(1, &mut rng).unwrap().0).collect()
        };
        assert_eq!(run(11), run(11));
    }

    #[test]
    fn deterministic_state_independent_policy_forces_action() {
        // hand-driven step logic on a forced profile
        let p = b(vec![0.5, 0.5]);
        let x = StateDependentStrategy::new(vec![
            MixedAction::point_mass(3, 5),
            MixedAction::point_mass(3, 5),
        ])
        .unwrap();
        let upd = belief_update(&p, &x, 3).unwrap();
        assert_eq!(upd.belief.probs(), p.probs());
    }
}
