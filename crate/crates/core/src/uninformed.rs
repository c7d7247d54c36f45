//! The eNode B's side: anti-discounted regret and the primal/dual security
//! LPs.
//!
//! The uninformed player cannot see the opponent's belief, so it keeps a
//! different fixed-size statistic: one regret value per state, the realized
//! discounted payoff so far minus the security level of its own strategy,
//! rescaled by `(1-λ)^-(t-1)` so the update is stationary:
//!
//! `w'^θ = (w^θ + λ·U^θ(a,:)·τ) / (1-λ)`
//!
//! where `a` is the observed jammer action and `τ` the mixed action the
//! eNode B itself just played (the recursion is an expectation over its own
//! randomization, not the sampled outcome). Observing `a` requires full
//! monitoring; the engine enforces that before this strategy may be used.
//!
//! The primal LP computes the per-state security level of the best `T`-stage
//! tree strategy at a prior: minimize `Σ_θ p^θ l^θ` where, for every pure
//! jammer path, the discounted payoff collected along the path stays below
//! `l^θ`. Stage-`t` payoffs are evaluated at the path's length-`(t-1)`
//! prefix, which is what makes the row a proper evaluation of a behavior
//! strategy. The dual game then turns regret into play: minimize `L` with
//! `w + l ≤ L·1` over the same path rows; the optimizing tree's root mix is
//! the stage policy, a function of `w` alone.

use std::collections::HashMap;

use crate::game::{GameSpec, MixedAction};
use crate::history::HistoryIndex;
use crate::informed::BeliefState;
use crate::lp::{solve_lp, LinearProgram, LpError, LpStatus, Sense};
use crate::{Error, Result};

/// Anti-discounted regret, one entry per state, in units of discounted
/// utility.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretVector {
    w: Vec<f64>,
}

impl RegretVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::Dimension("empty regret vector".into()));
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Dimension("regret entries must be finite".into()));
        }
        Ok(RegretVector { w })
    }

    /// Initialization `w₁ = -μ*` from the primal security levels.
    pub fn from_negated_levels(levels: &[f64]) -> Result<Self> {
        Self::new(levels.iter().map(|l| -l).collect())
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn get(&self, theta: usize) -> f64 {
        self.w[theta]
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }
}

/// Worst-case magnitude of the regret after `updates` applications of the
/// recursion, starting from `|w| ≤ start`: the explicit growth bound
/// `B_{k+1} = (B_k + λ·max|U|) / (1-λ)`.
pub fn regret_growth_bound(start: f64, max_abs_payoff: f64, lambda: f64, updates: usize) -> f64 {
    let mut bound = start;
    for _ in 0..updates {
        bound = (bound + lambda * max_abs_payoff) / (1.0 - lambda);
    }
    bound
}

/// One application of the anti-discounted recursion.
pub fn regret_update(
    w: &RegretVector,
    observed: usize,
    played: &MixedAction,
    game: &GameSpec,
    lambda: f64,
) -> Result<RegretVector> {
    if w.len() != game.num_states() {
        return Err(Error::Dimension("regret entries do not match states".into()));
    }
    if observed >= game.jammer_actions().len() {
        return Err(Error::Dimension(format!("observed action {observed} out of range")));
    }
    if played.len() != game.enb_actions().len() {
        return Err(Error::Dimension("played mix does not match action set".into()));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Discount(lambda));
    }
    let next = (0..game.num_states())
        .map(|theta| {
            let stage = game.payoff(theta).row_dot(observed, played.probs());
            (w.get(theta) + lambda * stage) / (1.0 - lambda)
        })
        .collect();
    RegretVector::new(next)
}

/// The eNode B's stage policy.
pub type UninformedPolicy = MixedAction;

/// A behavior strategy over the jammer-history tree: one mix per node,
/// layers `1..=stages`.
#[derive(Debug, Clone)]
pub struct BehaviorTree {
    tree: HistoryIndex,
    stages: usize,
    offsets: Vec<usize>,
    nodes: Vec<MixedAction>,
}

impl BehaviorTree {
    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn tree(&self) -> &HistoryIndex {
        &self.tree
    }

    pub fn node(&self, stage: usize, index: usize) -> &MixedAction {
        &self.nodes[self.offsets[stage] + index]
    }

    pub fn root(&self) -> &MixedAction {
        &self.nodes[0]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }
}

pub(crate) struct UninformedLayout {
    pub(crate) tree: HistoryIndex,
    pub(crate) stages: usize,
    n_enb: usize,
    /// first y column of each stage layer
    y_offset: Vec<usize>,
    /// l^θ columns start here
    l_offset: usize,
    num_y_nodes: usize,
}

impl UninformedLayout {
    pub(crate) fn new(tree: HistoryIndex, stages: usize, n_enb: usize) -> Self {
        let mut y_offset = vec![0usize; stages + 1];
        let mut next = 0usize;
        for t in 1..=stages {
            y_offset[t] = next;
            next += tree.layer_len(t) * n_enb;
        }
        let num_y_nodes = next / n_enb;
        UninformedLayout { tree, stages, n_enb, y_offset, l_offset: next, num_y_nodes }
    }

    fn y_var(&self, stage: usize, node: usize, a0: usize) -> usize {
        self.y_offset[stage] + node * self.n_enb + a0
    }

    fn l_var(&self, theta: usize) -> usize {
        self.l_offset + theta
    }
}

/// Adds, for every state in `states` and every pure jammer path of length
/// `stages`, the row `Σ_t λ(1-λ)^(t-1) U^θ(a_t,:)·y_prefix(t) - l^θ ≤ 0`.
fn add_path_rows(
    lp: &mut LinearProgram,
    layout: &UninformedLayout,
    game: &GameSpec,
    lambda: f64,
    states: &[usize],
) {
    let n_j = game.jammer_actions().len();
    let n_0 = game.enb_actions().len();
    let stages = layout.stages;
    let weights: Vec<f64> = (1..=stages)
        .map(|t| lambda * (1.0 - lambda).powi(t as i32 - 1))
        .collect();

    // odometer over paths; prefix node indices are rebuilt incrementally
    let mut path = vec![0usize; stages];
    loop {
        let mut prefix_nodes = Vec::with_capacity(stages);
        let mut node = 0usize;
        for (t, &a) in path.iter().enumerate() {
            prefix_nodes.push(node);
            if t + 1 < stages {
                node = layout.tree.child(t + 1, node, a);
            }
        }
        for &theta in states {
            let u = game.payoff(theta);
            let mut terms = Vec::with_capacity(stages * n_0 + 1);
            for t in 1..=stages {
                let a_t = path[t - 1];
                let node_t = prefix_nodes[t - 1];
                for a0 in 0..n_0 {
                    terms.push((layout.y_var(t, node_t, a0), weights[t - 1] * u.get(a_t, a0)));
                }
            }
            terms.push((layout.l_var(theta), -1.0));
            lp.add_ineq(&terms, 0.0);
        }
        // advance the odometer
        let mut t = stages;
        loop {
            if t == 0 {
                return;
            }
            path[t - 1] += 1;
            if path[t - 1] < n_j {
                break;
            }
            path[t - 1] = 0;
            t -= 1;
        }
    }
}

fn add_simplex_rows(lp: &mut LinearProgram, layout: &UninformedLayout) {
    for t in 1..=layout.stages {
        for node in 0..layout.tree.layer_len(t) {
            let ones: Vec<(usize, f64)> =
                (0..layout.n_enb).map(|a0| (layout.y_var(t, node, a0), 1.0)).collect();
            lp.add_eq(&ones, 1.0);
        }
    }
}

fn extract_tree(layout: &UninformedLayout, point: &[f64]) -> Result<BehaviorTree> {
    let mut nodes = Vec::with_capacity(layout.num_y_nodes);
    let mut offsets = vec![0usize; layout.stages + 1];
    for t in 1..=layout.stages {
        offsets[t] = nodes.len();
        for node in 0..layout.tree.layer_len(t) {
            let raw: Vec<f64> =
                (0..layout.n_enb).map(|a0| point[layout.y_var(t, node, a0)]).collect();
            nodes.push(MixedAction::from_solver(raw)?);
        }
    }
    Ok(BehaviorTree { tree: layout.tree, stages: layout.stages, offsets, nodes })
}

/// The primal security-level LP at prior `p`, exposed for structural tests.
pub fn build_security_lp(
    game: &GameSpec,
    p: &BeliefState,
    horizon: usize,
) -> Result<(LinearProgram, usize)> {
    let (lp, layout) = build_security_lp_internal(game, p, horizon)?;
    Ok((lp, layout.l_offset))
}

/// As [`build_security_lp`], also handing back the variable layout. Path
/// rows come first among the inequalities, ordered leaf-major with the
/// state index innermost, which is what the dual-side extraction of the
/// maximizer's realization weights relies on.
pub(crate) fn build_security_lp_internal(
    game: &GameSpec,
    p: &BeliefState,
    horizon: usize,
) -> Result<(LinearProgram, UninformedLayout)> {
    if horizon == 0 {
        return Err(Error::Horizon("lookahead must be at least one stage".into()));
    }
    if p.len() != game.num_states() {
        return Err(Error::Dimension("prior does not match game states".into()));
    }
    let layout = UninformedLayout::new(
        HistoryIndex::new(game.jammer_actions().len(), horizon)?,
        horizon,
        game.enb_actions().len(),
    );
    let n_states = game.num_states();
    let mut lp = LinearProgram::new(Sense::Minimize, layout.l_offset + n_states);
    for theta in 0..n_states {
        lp.set_free(layout.l_var(theta));
        lp.set_objective(layout.l_var(theta), p.get(theta));
    }
    let states: Vec<usize> = (0..n_states).collect();
    add_path_rows(&mut lp, &layout, game, game.discount(), &states);
    add_simplex_rows(&mut lp, &layout);
    Ok((lp, layout))
}

/// Per-state approximated security levels `μ^θ⋆` with the minimizing
/// behavior tree.
pub struct SecurityLevels {
    pub levels: Vec<f64>,
    pub tree: BehaviorTree,
    /// `Σ_θ p^θ l^θ` at the optimum.
    pub objective: f64,
}

/// Security level of the best `T`-stage tree strategy at prior `p`.
pub fn approx_security_level(
    game: &GameSpec,
    p: &BeliefState,
    horizon: usize,
) -> Result<SecurityLevels> {
    let (lp, layout) = build_security_lp_internal(game, p, horizon)?;
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(LpError::Certificate(format!(
            "security LP ended {:?}; it is always feasible and bounded",
            sol.status
        ))));
    }
    // l^θ with p^θ = 0 has no objective pressure; pin it to the worst path
    // value of the returned tree so the level is meaningful for every state.
    let tree = extract_tree(&layout, &sol.point)?;
    let levels: Vec<f64> = (0..game.num_states())
        .map(|theta| {
            if p.get(theta) > 0.0 {
                sol.point[layout.l_var(theta)]
            } else {
                worst_path_value(game, theta, &tree)
            }
        })
        .collect();
    Ok(SecurityLevels { levels, tree, objective: sol.value })
}

/// `max` over pure jammer paths of the discounted payoff against `tree`;
/// computed by backward induction, used to pin unpriced levels and in tests.
pub fn worst_path_value(game: &GameSpec, theta: usize, tree: &BehaviorTree) -> f64 {
    let lambda = game.discount();
    let n_j = game.jammer_actions().len();
    fn rec(
        game: &GameSpec,
        theta: usize,
        tree: &BehaviorTree,
        lambda: f64,
        stage: usize,
        node: usize,
        n_j: usize,
    ) -> f64 {
        if stage > tree.stages() {
            return 0.0;
        }
        let weight = lambda * (1.0 - lambda).powi(stage as i32 - 1);
        let y = tree.node(stage, node);
        (0..n_j)
            .map(|a| {
                let stage_u = weight * game.payoff(theta).row_dot(a, y.probs());
                let tail = if stage == tree.stages() {
                    0.0
                } else {
                    rec(game, theta, tree, lambda, stage + 1, tree.tree().child(stage, node, a), n_j)
                };
                stage_u + tail
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
    rec(game, theta, tree, lambda, 1, 0, n_j)
}

/// Dual-game solution: the stage policy (root of the optimizing tree), the
/// objective `L*`, and the full tree for certificates and diagnostics.
pub struct DualSolution {
    pub policy: UninformedPolicy,
    pub objective: f64,
    pub tree: BehaviorTree,
}

/// Regret gap beyond which a single state dominates the dual objective for
/// every strategy, letting the LP collapse to that state's security problem.
fn dominance_gap(game: &GameSpec) -> f64 {
    2.0 * game.max_abs_payoff() + 1e-6
}

/// The regret-indexed stage policy: minimize `L` subject to `w + l ≤ L·1`
/// and the per-state path rows; the root mix of the optimizing tree is the
/// policy.
pub fn approx_uninformed_strategy(
    game: &GameSpec,
    w: &RegretVector,
    horizon: usize,
) -> Result<DualSolution> {
    if w.len() != game.num_states() {
        return Err(Error::Dimension("regret entries do not match states".into()));
    }
    // Dominated states cannot bind: solve the leader state's problem alone.
    let leader = (0..w.len()).max_by(|&a, &b| w.get(a).total_cmp(&w.get(b))).unwrap();
    let runner_up = (0..w.len())
        .filter(|&t| t != leader)
        .map(|t| w.get(t))
        .fold(f64::NEG_INFINITY, f64::max);
    if w.len() > 1 && w.get(leader) - runner_up > dominance_gap(game) {
        let single = solve_single_state_security(game, leader, horizon)?;
        return Ok(DualSolution {
            policy: single.policy,
            objective: w.get(leader) + single.level,
            tree: single.tree,
        });
    }

    let layout = UninformedLayout::new(
        HistoryIndex::new(game.jammer_actions().len(), horizon)?,
        horizon,
        game.enb_actions().len(),
    );
    let n_states = game.num_states();
    let big_l = layout.l_offset + n_states;
    let mut lp = LinearProgram::new(Sense::Minimize, big_l + 1);
    lp.set_objective(big_l, 1.0);
    lp.set_free(big_l);
    for theta in 0..n_states {
        lp.set_free(layout.l_var(theta));
        // w^θ + l^θ ≤ L
        lp.add_ineq(&[(layout.l_var(theta), 1.0), (big_l, -1.0)], -w.get(theta));
    }
    let states: Vec<usize> = (0..n_states).collect();
    add_path_rows(&mut lp, &layout, game, game.discount(), &states);
    add_simplex_rows(&mut lp, &layout);

    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(LpError::Certificate(format!(
            "dual LP ended {:?}; it is always feasible and bounded",
            sol.status
        ))));
    }
    let tree = extract_tree(&layout, &sol.point)?;
    Ok(DualSolution { policy: tree.root().clone(), objective: sol.value, tree })
}

struct SingleStateSecurity {
    policy: MixedAction,
    level: f64,
    tree: BehaviorTree,
}

/// `min_y` of the worst-path discounted payoff against one state only.
fn solve_single_state_security(
    game: &GameSpec,
    theta: usize,
    horizon: usize,
) -> Result<SingleStateSecurity> {
    let layout = UninformedLayout::new(
        HistoryIndex::new(game.jammer_actions().len(), horizon)?,
        horizon,
        game.enb_actions().len(),
    );
    let mut lp = LinearProgram::new(Sense::Minimize, layout.l_offset + game.num_states());
    lp.set_free(layout.l_var(theta));
    lp.set_objective(layout.l_var(theta), 1.0);
    // unused l variables for other states stay fixed at zero
    for other in 0..game.num_states() {
        if other != theta {
            lp.set_bounds(layout.l_var(other), 0.0, 0.0);
        }
    }
    add_path_rows(&mut lp, &layout, game, game.discount(), &[theta]);
    add_simplex_rows(&mut lp, &layout);
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(LpError::Certificate(format!(
            "single-state security LP ended {:?}",
            sol.status
        ))));
    }
    let tree = extract_tree(&layout, &sol.point)?;
    Ok(SingleStateSecurity { policy: tree.root().clone(), level: sol.value, tree })
}

/// Carries the regret state across stages; policies are recomputed from `w`
/// alone each stage and the regret advances on every observed jammer action.
///
/// The raw recursion multiplies the whole vector by `(1-λ)^-1` per stage, so
/// after a few dozen stages the components dwarf their differences and the
/// policy-relevant gap dissolves into float cancellation. The agent instead
/// carries the max-shifted vector (exact, bounded dynamics) plus a scalar
/// offset that restores the raw values for reporting; shift equivariance of
/// the dual LP makes the two representations play identically.
pub struct UninformedAgent<'g> {
    game: &'g GameSpec,
    horizon: usize,
    /// max-shifted regret: one component is always zero
    centered: Vec<f64>,
    /// `raw w = centered + offset`
    offset: f64,
    /// levels from the initialization primal (`w₁ = -μ*`)
    pub initial_levels: Vec<f64>,
    /// Dual solves keyed by the quantized centered regret; entries below
    /// the dominance gap never bind and clamp to one saturated key, which
    /// turns every post-divergence stage into a cache hit.
    cache: HashMap<Vec<i64>, UninformedPolicy>,
}

impl<'g> UninformedAgent<'g> {
    /// Solves the primal at the prior and initializes `w₁ = -μ*`.
    pub fn initialize(game: &'g GameSpec, p0: &BeliefState, horizon: usize) -> Result<Self> {
        let security = approx_security_level(game, p0, horizon)?;
        let w = RegretVector::from_negated_levels(&security.levels)?;
        let offset = w.values().iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let centered = w.values().iter().map(|v| v - offset).collect();
        Ok(UninformedAgent {
            game,
            horizon,
            centered,
            offset,
            initial_levels: security.levels,
            cache: HashMap::new(),
        })
    }

    /// The anti-discounted regret, reassembled from the centered state.
    /// Entries saturate once the offset outgrows the float range.
    pub fn regret(&self) -> RegretVector {
        let raw: Vec<f64> = self
            .centered
            .iter()
            .map(|c| {
                let v = c + self.offset;
                if v.is_finite() {
                    v
                } else {
                    self.offset.signum() * f64::MAX
                }
            })
            .collect();
        RegretVector { w: raw }
    }

    fn cache_key(&self) -> Vec<i64> {
        let floor = -(dominance_gap(self.game) + 1.0);
        self.centered.iter().map(|v| ((v.max(floor)) * 1e9).round() as i64).collect()
    }

    pub fn policy(&mut self) -> Result<UninformedPolicy> {
        let key = self.cache_key();
        if let Some(hit) = self.cache.get(&key) {
            return Ok(hit.clone());
        }
        let shifted = RegretVector::new(self.centered.clone())?;
        let policy = approx_uninformed_strategy(self.game, &shifted, self.horizon)?.policy;
        self.cache.insert(key, policy.clone());
        Ok(policy)
    }

    /// Full-monitoring update after a stage: the jammer's realized action
    /// and the mixed action this agent itself just played. Applies the
    /// recursion to the centered vector and accumulates the shift.
    pub fn observe(&mut self, observed: usize, played: &MixedAction) -> Result<()> {
        let shifted = RegretVector::new(self.centered.clone())?;
        let next = regret_update(&shifted, observed, played, self.game, self.game.discount())?;
        let m = next.values().iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        self.centered = next.values().iter().map(|v| v - m).collect();
        self.offset = self.offset / (1.0 - self.game.discount()) + m;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameSpec;
    use crate::lp::solve_matrix_game;
    use rand::Rng;
    use rand::SeedableRng;

    fn bundled() -> GameSpec {
        GameSpec::bundled_cheater_saboteur()
    }

    fn b(v: Vec<f64>) -> BeliefState {
        BeliefState::new(v).unwrap()
    }

    #[test]
    fn regret_update_hand_example() {
        // from zero regret: (0 + 0.9 * U(1,1)) / 0.1, both matrices have -1 there
        let g = bundled();
        let w = RegretVector::new(vec![0.0, 0.0]).unwrap();
        let played = MixedAction::point_mass(0, 5);
        let next = regret_update(&w, 0, &played, &g, 0.9).unwrap();
        assert!((next.get(0) + 9.0).abs() < 1e-12);
        assert!((next.get(1) + 9.0).abs() < 1e-12);
    }

    #[test]
    fn zero_payoffs_pure_antidiscounting() {
        let doc = r#"
states = ["s1", "s2"]
jammer_actions = ["a", "b"]
enb_actions = ["x", "y"]
prior = [0.5, 0.5]
lambda = 0.3
[payoff]
s1 = [[0.0, 0.0], [0.0, 0.0]]
s2 = [[0.0, 0.0], [0.0, 0.0]]
"#;
        let g = GameSpec::from_toml_str(doc).unwrap();
        let w = RegretVector::new(vec![2.0, -4.0]).unwrap();
        let next = regret_update(&w, 1, &MixedAction::uniform(2), &g, 0.3).unwrap();
        assert!((next.get(0) - 2.0 / 0.7).abs() < 1e-12);
        assert!((next.get(1) + 4.0 / 0.7).abs() < 1e-12);
    }

    #[test]
    fn three_updates_match_closed_form_expansion() {
        let g = bundled();
        let lambda = g.discount();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let w1 =
                RegretVector::new((0..2).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap();
            let actions: Vec<usize> = (0..3).map(|_| rng.gen_range(0..5)).collect();
            let mixes: Vec<MixedAction> = (0..3)
                .map(|_| {
                    let raw: Vec<f64> = (0..5).map(|_| rng.gen_range(0.01..1.0)).collect();
                    let s: f64 = raw.iter().sum();
                    MixedAction::new(raw.iter().map(|v| v / s).collect()).unwrap()
                })
                .collect();

            let mut w = w1.clone();
            for s in 0..3 {
                w = regret_update(&w, actions[s], &mixes[s], &g, lambda).unwrap();
            }

            // w_4 = [w_1 + Σ_s λ(1-λ)^(s-1) U(a_s,:)·y_s] / (1-λ)^3
            for theta in 0..2 {
                let mut acc = w1.get(theta);
                for s in 0..3 {
                    let u = g.payoff(theta).row_dot(actions[s], mixes[s].probs());
                    acc += lambda * (1.0 - lambda).powi(s as i32) * u;
                }
                let expect = acc / (1.0 - lambda).powi(3);
                assert!(
                    (w.get(theta) - expect).abs() <= 1e-12 * expect.abs().max(1.0),
                    "theta {theta}: {} vs {expect}",
                    w.get(theta)
                );
            }
        }
    }

    #[test]
    fn fixed_point_of_recursion_is_negated_stage_payoff() {
        let g = bundled();
        let y = MixedAction::uniform(5);
        let a = 2;
        let w = RegretVector::new(
            (0..2).map(|t| -g.payoff(t).row_dot(a, y.probs())).collect(),
        )
        .unwrap();
        let next = regret_update(&w, a, &y, &g, 0.05).unwrap();
        for t in 0..2 {
            assert!((next.get(t) - w.get(t)).abs() < 1e-9);
        }
    }

    #[test]
    fn growth_bound_holds_along_random_runs() {
        let g = bundled();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut w = RegretVector::new(vec![1.0, -1.0]).unwrap();
        let start = 1.0;
        for k in 1..=12 {
            let a = rng.gen_range(0..5);
            w = regret_update(&w, a, &MixedAction::uniform(5), &g, 0.9).unwrap();
            let bound = regret_growth_bound(start, g.max_abs_payoff(), 0.9, k);
            assert!(w.values().iter().all(|v| v.abs() <= bound));
        }
    }

    #[test]
    fn single_state_security_level_is_scaled_stage_value() {
        let doc = r#"
states = ["only"]
jammer_actions = ["a", "b", "c"]
enb_actions = ["x", "y"]
prior = [1.0]
lambda = 0.9
[payoff]
only = [[2.0, -1.0], [0.5, 1.0], [-1.0, 3.0]]
"#;
        let g = GameSpec::from_toml_str(doc).unwrap();
        let stage = solve_matrix_game(g.payoff(0)).unwrap().value;
        for t in 1..=3usize {
            let mass = 1.0 - 0.1f64.powi(t as i32);
            let sec = approx_security_level(&g, &b(vec![1.0]), t).unwrap();
            assert!(
                (sec.levels[0] - mass * stage).abs() < 1e-7,
                "T={t}: {} vs {}",
                sec.levels[0],
                mass * stage
            );
        }
    }

    #[test]
    fn one_stage_primal_matches_direct_assembly() {
        // direct: min Σ_θ p^θ l^θ  s.t.  λ U^θ(a,:)·y ≤ l^θ, y a distribution
        let g = bundled();
        let p = b(vec![0.3, 0.7]);
        let lambda = g.discount();
        let mut lp = LinearProgram::new(Sense::Minimize, 5 + 2);
        for theta in 0..2 {
            lp.set_free(5 + theta);
            lp.set_objective(5 + theta, p.get(theta));
            for a in 0..5 {
                let mut terms: Vec<(usize, f64)> =
                    (0..5).map(|a0| (a0, lambda * g.payoff(theta).get(a, a0))).collect();
                terms.push((5 + theta, -1.0));
                lp.add_ineq(&terms, 0.0);
            }
        }
        lp.add_eq(&[(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0), (4, 1.0)], 1.0);
        let direct = solve_lp(&lp).unwrap();

        let sec = approx_security_level(&g, &p, 1).unwrap();
        assert!((sec.objective - direct.value).abs() < 1e-8);
    }

    #[test]
    fn path_row_count_at_t2() {
        let g = bundled();
        let (lp, _) = build_security_lp(&g, &b(vec![0.5, 0.5]), 2).unwrap();
        // 2·5² pure-path rows, one simplex row per tree node (1 + 5)
        assert_eq!(lp.num_ineq(), 2 * 25);
        assert_eq!(lp.num_eq(), 6);
    }

    #[test]
    fn security_tree_satisfies_simplex_at_every_node() {
        let g = bundled();
        for horizon in [3usize, 4] {
            let sec = approx_security_level(&g, &b(vec![0.4, 0.6]), horizon).unwrap();
            let expect: usize = (0..horizon).map(|t| 5usize.pow(t as u32)).sum();
            assert_eq!(sec.tree.num_nodes(), expect);
            for t in 1..=horizon {
                for node in 0..sec.tree.tree().layer_len(t) {
                    let sum: f64 = sec.tree.node(t, node).probs().iter().sum();
                    assert!((sum - 1.0).abs() < 1e-9, "stage {t} node {node}");
                }
            }
        }
    }

    #[test]
    fn security_levels_bound_worst_paths() {
        let g = bundled();
        let p = b(vec![0.5, 0.5]);
        let sec = approx_security_level(&g, &p, 3).unwrap();
        for theta in 0..2 {
            let worst = worst_path_value(&g, theta, &sec.tree);
            assert!(worst <= sec.levels[theta] + 1e-7, "state {theta}");
        }
    }

    #[test]
    fn dual_objective_monotone_in_regret() {
        let g = bundled();
        let w0 = RegretVector::new(vec![0.5, -0.25]).unwrap();
        let base = approx_uninformed_strategy(&g, &w0, 2).unwrap().objective;
        for theta in 0..2 {
            let mut bumped = w0.values().to_vec();
            bumped[theta] += 0.2;
            let v = approx_uninformed_strategy(&g, &RegretVector::new(bumped).unwrap(), 2)
                .unwrap()
                .objective;
            assert!(v >= base - 1e-9, "coordinate {theta}: {v} < {base}");
        }
    }

    #[test]
    fn dual_shift_equivariance() {
        let g = bundled();
        let w0 = RegretVector::new(vec![0.8, -0.1]).unwrap();
        let base = approx_uninformed_strategy(&g, &w0, 2).unwrap();
        for c in [-2.0, 0.7, 5.0] {
            let shifted =
                RegretVector::new(w0.values().iter().map(|v| v + c).collect()).unwrap();
            let s = approx_uninformed_strategy(&g, &shifted, 2).unwrap();
            assert!(
                (s.objective - (base.objective + c)).abs() < 1e-7,
                "c={c}: {} vs {}",
                s.objective,
                base.objective + c
            );
            // the unshifted optimal tree still attains the shifted optimum
            let attained = (0..2)
                .map(|t| shifted.get(t) + worst_path_value(&g, t, &base.tree))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((attained - s.objective).abs() < 1e-6, "c={c}: {attained}");
        }
    }

    #[test]
    fn indistinguishable_states_reduce_to_matrix_game() {
        let doc = r#"
states = ["s1", "s2"]
jammer_actions = ["h", "t"]
enb_actions = ["h", "t"]
prior = [0.5, 0.5]
lambda = 0.9
[payoff]
s1 = [[1.0, -1.0], [-1.0, 1.0]]
s2 = [[1.0, -1.0], [-1.0, 1.0]]
"#;
        let g = GameSpec::from_toml_str(doc).unwrap();
        let w = RegretVector::new(vec![0.3, 0.3]).unwrap();
        let dual = approx_uninformed_strategy(&g, &w, 2).unwrap();
        // matching pennies: the unique security mix is uniform at every node
        assert!((dual.policy.get(0) - 0.5).abs() < 1e-6);
        // L* = w + discounted-mass-scaled game value (value is 0 here)
        assert!((dual.objective - 0.3).abs() < 1e-6);
    }

    #[test]
    fn dominant_regret_gap_collapses_to_single_state_security() {
        let g = bundled();
        // gap far beyond any achievable payoff spread: saboteur leads
        let w = RegretVector::new(vec![-100.0, 0.0]).unwrap();
        let dual = approx_uninformed_strategy(&g, &w, 2).unwrap();
        let single = solve_single_state_security(&g, 1, 2).unwrap();
        assert_eq!(dual.policy.probs(), single.policy.probs());
        assert!((dual.objective - single.level).abs() < 1e-9);
        // the saboteur-dominant policy mixes Normal and Change-Timing
        assert!(dual.policy.get(0) > 0.5 && dual.policy.get(4) > 0.35, "{:?}", dual.policy.probs());
        // the collapse is sandwiched by the full LP at a sub-threshold gap:
        // lower bound w_max + min-level, upper bound the single-state tree
        let w = RegretVector::new(vec![-4.0, 0.0]).unwrap();
        let full = approx_uninformed_strategy(&g, &w, 2).unwrap();
        assert!(full.objective >= single.level - 1e-7);
        let upper = (0..2)
            .map(|t| w.get(t) + worst_path_value(&g, t, &single.tree))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(full.objective <= upper + 1e-7);
    }

    #[test]
    fn initialization_sets_negated_levels() {
        let g = bundled();
        let p = b(vec![0.5, 0.5]);
        let agent = UninformedAgent::initialize(&g, &p, 2).unwrap();
        // the reporting path reassembles raw values from the centered state,
        // which costs the last bit; the gap between entries stays exact
        for theta in 0..2 {
            let got = agent.regret().get(theta);
            let want = -agent.initial_levels[theta];
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{got} vs {want}");
        }
        let gap = agent.regret().get(0) - agent.regret().get(1);
        assert_eq!(gap, agent.initial_levels[1] - agent.initial_levels[0]);
    }
}
