//! Repeated-game playout: alternating simultaneous stages, discounted
//! utility accounting, trajectory capture, and the prior-sweep driver.
//!
//! Each match runs `N` stages. Both players sample from their current
//! policies; the jammer advances its belief with its own profile and realized
//! action, and (under full monitoring) the eNode B advances its regret with
//! the observed jammer action and the mix it just played. Every stage is
//! recorded, so a trajectory can be replayed, exported or audited.
//!
//! Randomness: one 64-bit seed, split into independent ChaCha substreams per
//! role. Adding or changing one player's strategy never perturbs the other's
//! draws, and a fixed seed reproduces a match bit-for-bit.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::expected::expected_policy;
use crate::game::{validate_prior, GameSpec, MixedAction};
use crate::informed::{BeliefState, InformedAgent, InformedPolicy};
use crate::uninformed::{RegretVector, UninformedAgent};
use crate::{Error, Result};

/// Which strategy the eNode B runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnbStrategyKind {
    /// Regret-indexed LP strategy; requires full monitoring.
    Approximated,
    /// Prior mixture of single-shot security strategies; needs no monitoring.
    Expected,
}

/// Whether players observe each other's realized actions after each stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monitoring {
    Full,
    None,
}

/// Everything a match needs beyond the game itself.
#[derive(Debug, Clone)]
pub struct MatchConfig {
    pub true_state: usize,
    pub prior: Vec<f64>,
    pub enb_strategy: EnbStrategyKind,
    /// Lookahead depth of the strategy LPs.
    pub horizon: usize,
    /// Number of stages to play.
    pub stages: usize,
    pub seed: u64,
    pub monitoring: Monitoring,
}

impl MatchConfig {
    /// Defaults drawn from the scenario file: its prior, horizon, and full
    /// monitoring with the approximated eNode B.
    pub fn new(game: &GameSpec, true_state: usize, seed: u64) -> Self {
        MatchConfig {
            true_state,
            prior: game.prior().to_vec(),
            enb_strategy: EnbStrategyKind::Approximated,
            horizon: game.horizon(),
            stages: 30,
            seed,
            monitoring: Monitoring::Full,
        }
    }

    fn validate(&self, game: &GameSpec) -> Result<()> {
        if self.true_state >= game.num_states() {
            return Err(Error::Config(format!("true state {} out of range", self.true_state)));
        }
        validate_prior(&self.prior, game.num_states())?;
        if self.stages == 0 {
            return Err(Error::Config("a match needs at least one stage".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.enb_strategy == EnbStrategyKind::Approximated
            && self.monitoring != Monitoring::Full
        {
            return Err(Error::Config(
                "the approximated eNode B strategy requires full monitoring".into(),
            ));
        }
        Ok(())
    }
}

/// One stage of a played match; `belief` and `regret` are the decision-time
/// statistics `p_t` and `w_t`.
#[derive(Debug, Clone)]
pub struct StageRecord {
    pub stage: usize,
    pub jammer_action: usize,
    pub enb_action: usize,
    pub jammer_policy: InformedPolicy,
    pub enb_policy: MixedAction,
    pub belief: BeliefState,
    pub regret: Option<RegretVector>,
    pub stage_payoff: f64,
    pub cumulative_discounted: f64,
}

/// A full match record, jammer's perspective for all utilities.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub true_state: usize,
    pub lambda: f64,
    pub num_states: usize,
    pub stages: Vec<StageRecord>,
    /// `(1-λ)^N · max|U|`: what the truncation can still hide.
    pub tail_bound: f64,
}

/// Total discounted utility with its truncation bound.
#[derive(Debug, Clone, Copy)]
pub struct DiscountedUtility {
    pub value: f64,
    pub tail_bound: f64,
}

/// `Σ_t λ(1-λ)^(t-1) u_t` recomputed from the stage payoffs, plus the tail
/// bound carried by the trajectory.
pub fn discounted_utility(trajectory: &Trajectory) -> DiscountedUtility {
    DiscountedUtility {
        value: recompute_cumulative(trajectory).last().copied().unwrap_or(0.0),
        tail_bound: trajectory.tail_bound,
    }
}

/// Per-stage running sums, in the exact operation order the engine used, so
/// equality against the stored column is bit-exact.
pub fn recompute_cumulative(trajectory: &Trajectory) -> Vec<f64> {
    let lambda = trajectory.lambda;
    let mut acc = 0.0;
    trajectory
        .stages
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            acc += lambda * (1.0 - lambda).powi(i as i32) * rec.stage_payoff;
            acc
        })
        .collect()
}

impl Trajectory {
    /// Jammer's total discounted utility over the played stages.
    pub fn jammer_utility(&self) -> f64 {
        self.stages.last().map_or(0.0, |r| r.cumulative_discounted)
    }

    /// Zero-sum bookkeeping: the eNode B's utility is the negation.
    pub fn enb_utility(&self) -> f64 {
        -self.jammer_utility()
    }

    /// First stage from which every successive eNode B policy step stays
    /// within `tol` in infinity norm.
    pub fn enb_convergence_stage(&self, tol: f64) -> Option<usize> {
        let n = self.stages.len();
        if n < 2 {
            return Some(1);
        }
        let mut converged_from = 1;
        for t in 1..n {
            let d = self.stages[t].enb_policy.linf_distance(&self.stages[t - 1].enb_policy);
            if d >= tol {
                converged_from = t + 2; // distance at stage t+1 was too big
            }
        }
        if converged_from <= n {
            Some(converged_from)
        } else {
            None
        }
    }

    /// Average eNode B policy over the final `window` stages.
    pub fn steady_enb_policy(&self, window: usize) -> Vec<f64> {
        average_policies(self.stages.iter().map(|r| r.enb_policy.probs()), window)
    }

    /// Average jammer policy column for the true state over the final
    /// `window` stages.
    pub fn steady_jammer_policy(&self, window: usize) -> Vec<f64> {
        average_policies(
            self.stages.iter().map(|r| r.jammer_policy.column(self.true_state).probs()),
            window,
        )
    }

    /// CSV export, one row per stage, columns
    /// `t, a_j, a_0, p_1..p_n, w_1..w_n, stage_u, disc_u`.
    /// Actions are 1-based indices; regret columns are zero when the match
    /// ran without monitoring.
    pub fn to_csv(&self) -> String {
        let n = self.num_states;
        let mut out = String::new();
        out.push_str("t,a_j,a_0");
        for i in 1..=n {
            out.push_str(&format!(",p_{i}"));
        }
        for i in 1..=n {
            out.push_str(&format!(",w_{i}"));
        }
        out.push_str(",stage_u,disc_u\n");
        for rec in &self.stages {
            out.push_str(&format!(
                "{},{},{}",
                rec.stage,
                rec.jammer_action + 1,
                rec.enb_action + 1
            ));
            for i in 0..n {
                out.push_str(&format!(",{}", fmt(rec.belief.get(i))));
            }
            for i in 0..n {
                let w = rec.regret.as_ref().map_or(0.0, |w| w.get(i));
                out.push_str(&format!(",{}", fmt(w)));
            }
            out.push_str(&format!(",{},{}\n", fmt(rec.stage_payoff), fmt(rec.cumulative_discounted)));
        }
        out
    }
}

fn average_policies<'a>(rows: impl Iterator<Item = &'a [f64]>, window: usize) -> Vec<f64> {
    let rows: Vec<&[f64]> = rows.collect();
    let take = window.min(rows.len()).max(1);
    let slice = &rows[rows.len() - take..];
    let mut avg = vec![0.0; slice[0].len()];
    for row in slice {
        for (a, v) in avg.iter_mut().zip(*row) {
            *a += v / take as f64;
        }
    }
    avg
}

/// Locale-independent fixed decimal formatting for all CSV numerics.
fn fmt(v: f64) -> String {
    format!("{v:.9}")
}

/// Shared cache of informed-player policies keyed by quantized belief; a
/// sweep reuses solves across grid points because non-revealing play keeps
/// hitting the same beliefs.
pub type PolicyCache = Arc<Mutex<HashMap<Vec<u64>, InformedPolicy>>>;

pub fn new_policy_cache() -> PolicyCache {
    Arc::new(Mutex::new(HashMap::new()))
}

enum EnbAgent<'g> {
    /// Full monitoring: sees the jammer's realized action every stage.
    Approximated(UninformedAgent<'g>),
    /// No monitoring: the policy is fixed before stage 1 and the jammer's
    /// actions are never handed over (there is no channel for them).
    Expected(MixedAction),
}

/// Plays a match to completion.
pub fn play_match(game: &GameSpec, config: &MatchConfig) -> Result<Trajectory> {
    play_match_cached(game, config, &new_policy_cache())
}

/// As [`play_match`], reusing a shared informed-policy cache.
pub fn play_match_cached(
    game: &GameSpec,
    config: &MatchConfig,
    cache: &PolicyCache,
) -> Result<Trajectory> {
    config.validate(game)?;
    let p0 = BeliefState::new(config.prior.clone())?;
    let lambda = game.discount();

    let mut jammer_rng = ChaCha8Rng::seed_from_u64(config.seed);
    jammer_rng.set_stream(1);
    let mut enb_rng = ChaCha8Rng::seed_from_u64(config.seed);
    enb_rng.set_stream(2);

    let mut jammer = InformedAgent::with_shared_cache(game, p0.clone(), config.horizon, cache.clone());
    let mut enb = match config.enb_strategy {
        EnbStrategyKind::Approximated => EnbAgent::Approximated(
            UninformedAgent::initialize(game, &p0, config.horizon).map_err(|e| at_stage(e, 1))?,
        ),
        EnbStrategyKind::Expected => EnbAgent::Expected(expected_policy(game, &config.prior)?),
    };

    let mut cumulative = 0.0;
    let mut stages = Vec::with_capacity(config.stages);
    for t in 1..=config.stages {
        let belief = jammer.belief().clone();
        let regret = match &enb {
            EnbAgent::Approximated(agent) => Some(agent.regret()),
            EnbAgent::Expected(_) => None,
        };

        let (a_j, jammer_policy) =
            jammer.step(config.true_state, &mut jammer_rng).map_err(|e| at_stage(e, t))?;

        let (a_0, enb_policy) = match &mut enb {
            EnbAgent::Approximated(agent) => {
                let policy = agent.policy().map_err(|e| at_stage(e, t))?;
                (policy.sample(&mut enb_rng), policy)
            }
            EnbAgent::Expected(policy) => (policy.sample(&mut enb_rng), policy.clone()),
        };

        let stage_payoff = game.payoff(config.true_state).get(a_j, a_0);
        cumulative += lambda * (1.0 - lambda).powi(t as i32 - 1) * stage_payoff;

        if let EnbAgent::Approximated(agent) = &mut enb {
            agent.observe(a_j, &enb_policy).map_err(|e| at_stage(e, t))?;
        }

        stages.push(StageRecord {
            stage: t,
            jammer_action: a_j,
            enb_action: a_0,
            jammer_policy,
            enb_policy,
            belief,
            regret,
            stage_payoff,
            cumulative_discounted: cumulative,
        });
    }

    Ok(Trajectory {
        true_state: config.true_state,
        lambda,
        num_states: game.num_states(),
        stages,
        tail_bound: (1.0 - lambda).powi(config.stages as i32) * game.max_abs_payoff(),
    })
}

fn at_stage(e: Error, stage: usize) -> Error {
    match e {
        Error::Lp(source) => Error::StageLp { stage, source },
        other => other,
    }
}

/// Sweep template: everything but the prior, which comes from the grid.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub true_state: usize,
    pub enb_strategy: EnbStrategyKind,
    pub horizon: usize,
    pub stages: usize,
    /// Final stages averaged into the steady-state policies.
    pub tail_window: usize,
    pub seed: u64,
    pub monitoring: Monitoring,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl SweepConfig {
    pub fn new(game: &GameSpec, true_state: usize, seed: u64) -> Self {
        SweepConfig {
            true_state,
            enb_strategy: EnbStrategyKind::Approximated,
            horizon: game.horizon(),
            stages: 30,
            tail_window: 10,
            seed,
            monitoring: Monitoring::Full,
            jobs: None,
        }
    }
}

/// One grid point's steady-state summary.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub prior: Vec<f64>,
    /// Average jammer policy column for the true state, final window.
    pub jammer_policy: Vec<f64>,
    /// Average eNode B policy, final window.
    pub enb_policy: Vec<f64>,
    pub final_belief: Vec<f64>,
    pub discounted_utility: f64,
    pub convergence_stage: Option<usize>,
}

/// Runs one match per grid prior and summarizes steady-state behavior.
/// Rows come back in grid order regardless of scheduling.
pub fn sweep_prior(
    game: &GameSpec,
    grid: &[Vec<f64>],
    config: &SweepConfig,
) -> Result<Vec<SweepRow>> {
    use rayon::prelude::*;

    let cache = new_policy_cache();
    let run_point = |(i, prior): (usize, &Vec<f64>)| -> Result<SweepRow> {
        let match_config = MatchConfig {
            true_state: config.true_state,
            prior: prior.clone(),
            enb_strategy: config.enb_strategy,
            horizon: config.horizon,
            stages: config.stages,
            seed: config.seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            monitoring: config.monitoring,
        };
        let trajectory = play_match_cached(game, &match_config, &cache)?;
        Ok(SweepRow {
            prior: prior.clone(),
            jammer_policy: trajectory.steady_jammer_policy(config.tail_window),
            enb_policy: trajectory.steady_enb_policy(config.tail_window),
            final_belief: trajectory.stages.last().unwrap().belief.probs().to_vec(),
            discounted_utility: trajectory.jammer_utility(),
            convergence_stage: trajectory.enb_convergence_stage(1e-3),
        })
    };

    let indexed: Vec<(usize, &Vec<f64>)> = grid.iter().enumerate().collect();
    match config.jobs {
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| indexed.par_iter().map(|p| run_point(*p)).collect())
        }
        None => indexed.par_iter().map(|p| run_point(*p)).collect(),
    }
}

/// Sweep CSV, one row per grid point, columns
/// `p0_1..p0_n, x_1..x_m, y_1..y_k, pT_1..pT_n, u_disc, conv_stage`.
pub fn sweep_csv(game: &GameSpec, rows: &[SweepRow]) -> String {
    let n = game.num_states();
    let m = game.jammer_actions().len();
    let k = game.enb_actions().len();
    let mut out = String::new();
    for i in 1..=n {
        out.push_str(&format!("p0_{i},"));
    }
    for i in 1..=m {
        out.push_str(&format!("x_{i},"));
    }
    for i in 1..=k {
        out.push_str(&format!("y_{i},"));
    }
    for i in 1..=n {
        out.push_str(&format!("pT_{i},"));
    }
    out.push_str("u_disc,conv_stage\n");
    for row in rows {
        for v in &row.prior {
            out.push_str(&format!("{},", fmt(*v)));
        }
        for v in &row.jammer_policy {
            out.push_str(&format!("{},", fmt(*v)));
        }
        for v in &row.enb_policy {
            out.push_str(&format!("{},", fmt(*v)));
        }
        for v in &row.final_belief {
            out.push_str(&format!("{},", fmt(*v)));
        }
        out.push_str(&format!(
            "{},{}\n",
            fmt(row.discounted_utility),
            row.convergence_stage.map_or(0, |s| s)
        ));
    }
    out
}
