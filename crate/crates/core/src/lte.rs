//! Monte-Carlo model of one LTE cell that synthesizes payoff matrices from
//! physical-layer and scheduler abstractions.
//!
//! Users arrive by a spatial Poisson process and sit uniformly on the disk.
//! Large-scale loss follows the simplified path-loss model
//! `P_r = P_t + K - 10γ·log10(d/d0)`; small-scale fading is unit-mean
//! exponential per channel (per resource block on the data channel). The
//! scheduler is proportional-fair over connected users.
//!
//! Jamming and countermeasures are a declarative effect table: each jammer
//! action names the control channels it hits and splits its power across
//! them; each eNode B action either rescales channel powers, caps grants, or
//! evades jamming at the cost of an outage window or reduced bandwidth.
//! Effect strengths are [`CellConfig`] data, not code.
//!
//! Per action pair, the simulation estimates three KPIs (the designated
//! heavy user's throughput, the connected-UE count, and per-UE cell
//! throughput), normalized against the no-jamming/default-action baseline
//! run with identical random substreams, so the baseline cell is exactly 1.
//! The two payoff matrices weight those KPIs and are rescaled so their
//! baseline entry is exactly -1. The bundled scenario matrices remain the
//! regression ground truth for the game modules; this generator is the
//! alternative path for producing new scenario files.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::game::GameSpec;
use crate::mat::Mat;
use crate::{Error, Result};

/// Cell, propagation, scheduler, action-effect and Monte-Carlo parameters.
/// Geometry and arrival defaults are ordinary macro-cell values, not
/// calibrated to any particular measurement campaign.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CellConfig {
    pub cell_radius_m: f64,
    /// Arrival intensity Λ, users per square meter.
    pub user_intensity_per_m2: f64,
    pub pathloss_exponent: f64,
    pub reference_distance_m: f64,
    /// Path-loss constant K in dB.
    pub constant_k_db: f64,
    /// Receiver noise plus residual inter-cell interference, watts.
    pub noise_variance_w: f64,
    pub enb_power_w: f64,
    pub ue_power_w: f64,
    /// Jammer transmit power; ignored when `c_over_j_db` is set.
    pub jammer_power_w: f64,
    /// Carrier-to-jammer power ratio in dB; overrides `jammer_power_w`.
    pub c_over_j_db: Option<f64>,
    /// Probability the jammer is on in a given subframe.
    pub jamming_probability: f64,
    /// Distance from the eNode B to the jammer, meters.
    pub jammer_distance_m: f64,
    /// The designated heavy user's distance as a fraction of the radius.
    pub cheater_radius_fraction: f64,
    /// Proportional-fair averaging window, subframes.
    pub fairness_window: f64,
    pub rb_count: usize,
    pub rb_bandwidth_hz: f64,
    /// Fraction ε of AWGN capacity the link attains.
    pub capacity_fraction: f64,
    /// Control-channel demodulation threshold, dB.
    pub demod_threshold_db: f64,
    pub weight_cheater_throughput: f64,
    pub weight_cheater_connected: f64,
    pub weight_saboteur_connected: f64,
    pub weight_enb_throughput: f64,
    pub drops: usize,
    pub subframes_per_drop: usize,
    // action effect strengths
    pub pilot_boost_gain: f64,
    pub pilot_boost_data_scale: f64,
    pub throttle_scale: f64,
    pub fc_change_rb_scale: f64,
    pub fc_change_outage_fraction: f64,
    pub timing_change_outage_fraction: f64,
    // defaults written into emitted scenario files
    pub emit_prior: Vec<f64>,
    pub emit_lambda: f64,
    pub emit_horizon: usize,
}

impl Default for CellConfig {
    fn default() -> Self {
        CellConfig {
            cell_radius_m: 500.0,
            user_intensity_per_m2: 1.2e-5,
            pathloss_exponent: 3.5,
            reference_distance_m: 10.0,
            constant_k_db: -31.54,
            noise_variance_w: 1e-11,
            enb_power_w: 40.0,
            ue_power_w: 0.2,
            jammer_power_w: 40.0,
            c_over_j_db: Some(0.0),
            jamming_probability: 1.0,
            jammer_distance_m: 250.0,
            cheater_radius_fraction: 0.1,
            fairness_window: 50.0,
            rb_count: 50,
            rb_bandwidth_hz: 180_000.0,
            capacity_fraction: 1.0,
            demod_threshold_db: 0.0,
            weight_cheater_throughput: 5.0,
            weight_cheater_connected: 4.0,
            weight_saboteur_connected: 5.0,
            weight_enb_throughput: 4.0,
            drops: 200,
            subframes_per_drop: 20,
            pilot_boost_gain: 2.0,
            pilot_boost_data_scale: 0.6,
            throttle_scale: 0.03,
            fc_change_rb_scale: 0.8,
            fc_change_outage_fraction: 0.10,
            timing_change_outage_fraction: 0.05,
            emit_prior: vec![0.5, 0.5],
            emit_lambda: 0.9,
            emit_horizon: 4,
        }
    }
}

impl CellConfig {
    pub fn from_toml_str(document: &str) -> Result<Self> {
        let cfg: CellConfig =
            toml::from_str(document).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("cell config serialization cannot fail")
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("cell_radius_m", self.cell_radius_m),
            ("pathloss_exponent", self.pathloss_exponent),
            ("reference_distance_m", self.reference_distance_m),
            ("fairness_window", self.fairness_window),
            ("rb_bandwidth_hz", self.rb_bandwidth_hz),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        let nonneg = [
            ("user_intensity_per_m2", self.user_intensity_per_m2),
            ("noise_variance_w", self.noise_variance_w),
            ("enb_power_w", self.enb_power_w),
            ("ue_power_w", self.ue_power_w),
            ("jammer_power_w", self.jammer_power_w),
            ("weight_cheater_throughput", self.weight_cheater_throughput),
            ("weight_cheater_connected", self.weight_cheater_connected),
            ("weight_saboteur_connected", self.weight_saboteur_connected),
            ("weight_enb_throughput", self.weight_enb_throughput),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) {
                return Err(Error::Config(format!("{name} must be nonnegative")));
            }
        }
        if !(self.capacity_fraction > 0.0 && self.capacity_fraction <= 1.0) {
            return Err(Error::Config("capacity_fraction must lie in (0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.jamming_probability) {
            return Err(Error::Config("jamming_probability must lie in [0, 1]".into()));
        }
        if self.rb_count == 0 || self.subframes_per_drop == 0 {
            return Err(Error::Config("rb_count and subframes_per_drop must be positive".into()));
        }
        Ok(())
    }

    /// Jammer total power, honoring a configured carrier-to-jammer ratio.
    pub fn jammer_power(&self) -> f64 {
        match self.c_over_j_db {
            Some(cj) => self.enb_power_w / 10f64.powf(cj / 10.0),
            None => self.jammer_power_w,
        }
    }
}

/// Channels the effect table speaks about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    CsRs,
    Pcfich,
    Pbch,
    Prach,
    Pucch,
}

const JAMMER_TARGETS: [&[Channel]; 5] = [
    &[],
    &[Channel::CsRs],
    &[Channel::CsRs, Channel::Pucch],
    &[Channel::CsRs, Channel::Pbch, Channel::Prach],
    &[Channel::CsRs, Channel::Pcfich, Channel::Pucch, Channel::Prach],
];

/// Resolved per-pair effects: what is jammed after mitigation, power scales,
/// grant caps and outage windows.
#[derive(Debug, Clone)]
pub struct ActionEffects {
    /// Channels actually receiving jam energy this pair.
    pub jammed: Vec<Channel>,
    /// Jammer per-channel power share (split over its intended targets).
    pub jam_share: f64,
    pub csrs_power_scale: f64,
    pub data_power_scale: f64,
    pub throughput_scale: f64,
    pub rb_scale: f64,
    pub outage_subframes: usize,
    /// Reattachment blocked for the rest of the drop once disconnected.
    pub sticky_outage: bool,
}

/// The declarative action-effect table for a jammer/eNode B action pair.
pub fn action_effects(config: &CellConfig, a_j: usize, a_0: usize) -> ActionEffects {
    let targets = JAMMER_TARGETS[a_j];
    let jam_share = if targets.is_empty() { 0.0 } else { 1.0 / targets.len() as f64 };

    let mut fx = ActionEffects {
        jammed: targets.to_vec(),
        jam_share,
        csrs_power_scale: 1.0,
        data_power_scale: 1.0,
        throughput_scale: 1.0,
        rb_scale: 1.0,
        outage_subframes: 0,
        sticky_outage: false,
    };
    let window = config.subframes_per_drop as f64;
    match a_0 {
        0 => {}
        1 => {
            fx.csrs_power_scale = config.pilot_boost_gain;
            fx.data_power_scale = config.pilot_boost_data_scale;
        }
        2 => fx.throughput_scale = config.throttle_scale,
        3 => {
            // carrier relocation with a SIB2 change: jamming lands on the
            // old carrier, at the cost of bandwidth and a transition window
            fx.jammed.clear();
            fx.rb_scale = config.fc_change_rb_scale;
            fx.outage_subframes = (config.fc_change_outage_fraction * window).ceil() as usize;
        }
        4 => {
            // timing reset: the synchronized jammer misses its symbols
            fx.jammed.clear();
            fx.outage_subframes = (config.timing_change_outage_fraction * window).ceil() as usize;
        }
        _ => unreachable!("five countermeasures"),
    }
    fx.sticky_outage =
        fx.jammed.contains(&Channel::Pbch) || fx.jammed.contains(&Channel::Prach);
    fx
}

/// One spatial realization: user distances and scheduler state.
#[derive(Debug, Clone)]
pub struct UserDrop {
    /// Distance to the eNode B per user.
    pub enb_distance: Vec<f64>,
    /// Distance to the jammer per user.
    pub jammer_distance: Vec<f64>,
    /// Long-term average throughput per user (scheduler state).
    pub avg_throughput: Vec<f64>,
}

impl UserDrop {
    pub fn num_users(&self) -> usize {
        self.enb_distance.len()
    }
}

/// Samples `N ~ Poisson(Λ·area)` ordinary users uniformly on the disk.
pub fn drop_users<R: Rng + ?Sized>(config: &CellConfig, rng: &mut R) -> UserDrop {
    let area = std::f64::consts::PI * config.cell_radius_m * config.cell_radius_m;
    let mean = config.user_intensity_per_m2 * area;
    let n = if mean > 0.0 {
        Poisson::new(mean).expect("positive mean").sample(rng) as usize
    } else {
        0
    };
    let mut drop = UserDrop {
        enb_distance: Vec::with_capacity(n),
        jammer_distance: Vec::with_capacity(n),
        avg_throughput: Vec::with_capacity(n),
    };
    for _ in 0..n {
        let r = config.cell_radius_m * rng.gen::<f64>().sqrt();
        let phi = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
        push_user(config, &mut drop, r, phi);
    }
    drop
}

fn push_user(config: &CellConfig, drop: &mut UserDrop, r: f64, phi: f64) {
    let d_j = config.jammer_distance_m;
    let to_jammer = (r * r + d_j * d_j - 2.0 * r * d_j * phi.cos()).sqrt();
    drop.enb_distance.push(r);
    drop.jammer_distance.push(to_jammer);
    drop.avg_throughput.push(0.0);
}

/// Simplified path loss: received dBm at distance `d` (clamped to the
/// far-field boundary `d0` from below).
pub fn path_loss_db(config: &CellConfig, p_t_dbm: f64, d: f64) -> f64 {
    let d = d.max(config.reference_distance_m);
    p_t_dbm + config.constant_k_db
        - 10.0 * config.pathloss_exponent * (d / config.reference_distance_m).log10()
}

/// Instantaneous SINR of a narrowband flat-faded channel:
/// `Γ = P0·|h|²·K·(R0/d0)^-γ / (σ² + Pj·|g|²·K·(Rj/d0)^-γ)`.
pub fn sinr(config: &CellConfig, h2: f64, g2: f64, r0: f64, r_j: f64, p0: f64, p_j: f64) -> f64 {
    let k_lin = 10f64.powf(config.constant_k_db / 10.0);
    let gamma = config.pathloss_exponent;
    let d0 = config.reference_distance_m;
    let num = p0 * h2 * k_lin * (r0.max(d0) / d0).powf(-gamma);
    let den = config.noise_variance_w + p_j * g2 * k_lin * (r_j.max(d0) / d0).powf(-gamma);
    num / den
}

/// The same SINR written through the carrier-to-jammer ratio:
/// `Γ = (C/J)·|h|²·K·(R0/d0)^-γ / (σ²/Pj + |g|²·K·(Rj/d0)^-γ)`.
/// Algebraically identical to [`sinr`] whenever `P_j > 0`.
pub fn sinr_cj_form(
    config: &CellConfig,
    h2: f64,
    g2: f64,
    r0: f64,
    r_j: f64,
    p0: f64,
    p_j: f64,
) -> f64 {
    let k_lin = 10f64.powf(config.constant_k_db / 10.0);
    let gamma = config.pathloss_exponent;
    let d0 = config.reference_distance_m;
    let cj = p0 / p_j;
    let num = cj * h2 * k_lin * (r0.max(d0) / d0).powf(-gamma);
    let den = config.noise_variance_w / p_j + g2 * k_lin * (r_j.max(d0) / d0).powf(-gamma);
    num / den
}

/// Shannon-capacity resource-block throughput `ε·180000·log2(1+Γ)` bits/s.
pub fn rb_throughput(gamma: f64, epsilon: f64) -> f64 {
    rb_throughput_w(gamma, epsilon, 180_000.0)
}

pub fn rb_throughput_w(gamma: f64, epsilon: f64, w_rb: f64) -> f64 {
    epsilon * w_rb * (1.0 + gamma).log2()
}

/// Proportional-fair allocation: per resource block, the user maximizing
/// instantaneous rate over long-term average wins (ties to the lowest user
/// index); averages then advance by the exponential window recursion with
/// the winner indicator.
pub fn pfs_allocate(rates: &Mat, averages: &mut [f64], t_c: f64) -> Vec<usize> {
    let users = rates.rows();
    let rbs = rates.cols();
    debug_assert_eq!(averages.len(), users);
    let mut winners = vec![0usize; rbs];
    let mut granted = vec![0.0; users];
    for k in 0..rbs {
        let mut best = 0usize;
        let mut best_metric = f64::NEG_INFINITY;
        for m in 0..users {
            // starved users (avg -> 0) dominate, realizing the fairness limit
            let metric = if averages[m] > 0.0 {
                rates.get(m, k) / averages[m]
            } else if rates.get(m, k) > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            if metric > best_metric {
                best_metric = metric;
                best = m;
            }
        }
        winners[k] = best;
        granted[best] += rates.get(best, k);
    }
    for m in 0..users {
        averages[m] = (1.0 - 1.0 / t_c) * averages[m] + granted[m] / t_c;
    }
    winners
}

/// Raw (unnormalized) KPI estimates for one `(θ, a_j, a_0)` cell.
#[derive(Debug, Clone, Copy)]
pub struct KpiStats {
    /// Designated heavy user's mean throughput (cheater state only).
    pub cheater_rate: f64,
    pub cheater_rate_stderr: f64,
    /// Mean connected-UE count per subframe.
    pub connected: f64,
    pub connected_stderr: f64,
    /// Mean per-UE delivered throughput.
    pub enb_rate: f64,
    pub enb_rate_stderr: f64,
}

/// Normalized KPI record for one action pair (baseline run ≡ 1).
#[derive(Debug, Clone, Copy)]
pub struct KpiRecord {
    /// Change of the heavy user's normalized throughput from baseline.
    pub cheater_rate_delta: f64,
    pub connected_norm: f64,
    pub enb_rate_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JammerType {
    Cheater,
    Saboteur,
}

struct DropKpis {
    cheater_rate: f64,
    connected: f64,
    enb_rate: f64,
}

fn simulate_drop(
    config: &CellConfig,
    jammer_type: JammerType,
    fx: &ActionEffects,
    drop_index: u64,
    seed: u64,
) -> DropKpis {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(drop_index);
    let exp = Exp::new(1.0).expect("unit rate");

    let mut drop = drop_users(config, &mut rng);
    if jammer_type == JammerType::Cheater {
        // the colluding heavy user sits close to the eNode B, index 0
        let r = config.cheater_radius_fraction * config.cell_radius_m;
        let phi = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
        let mut with_cheater = UserDrop {
            enb_distance: Vec::with_capacity(drop.num_users() + 1),
            jammer_distance: Vec::with_capacity(drop.num_users() + 1),
            avg_throughput: Vec::with_capacity(drop.num_users() + 1),
        };
        push_user(config, &mut with_cheater, r, phi);
        with_cheater.enb_distance.extend_from_slice(&drop.enb_distance);
        with_cheater.jammer_distance.extend_from_slice(&drop.jammer_distance);
        with_cheater.avg_throughput.extend_from_slice(&drop.avg_throughput);
        drop = with_cheater;
    }

    let users = drop.num_users();
    let subframes = config.subframes_per_drop;
    let rbs = ((config.rb_count as f64) * fx.rb_scale).round().max(1.0) as usize;
    // jammer spreads over the band and splits across its targets
    let jam_per_channel = config.jammer_power() / config.rb_count as f64 * fx.jam_share;
    let p_rb = config.enb_power_w / config.rb_count as f64;
    let thr_lin = 10f64.powf(config.demod_threshold_db / 10.0);

    let jam_on = |ch: Channel, fx: &ActionEffects, active: bool| -> f64 {
        if active && fx.jammed.contains(&ch) {
            jam_per_channel
        } else {
            0.0
        }
    };

    let mut attached = vec![true; users];
    let mut cheater_sum = 0.0;
    let mut connected_sum = 0.0;
    let mut delivered_sum = 0.0;
    for sf in 0..subframes {
        let jam_active = rng.gen::<f64>() < config.jamming_probability;
        let in_outage = sf < fx.outage_subframes;

        // control-channel SINRs and connectivity
        let mut connected = vec![false; users];
        let mut csrs_gamma = vec![0.0; users];
        for m in 0..users {
            let r0 = drop.enb_distance[m];
            let rj = drop.jammer_distance[m];
            // downlink control draws (unit-mean exponential per channel)
            let h_csrs = exp.sample(&mut rng);
            let g_csrs = exp.sample(&mut rng);
            let h_pcfich = exp.sample(&mut rng);
            let g_pcfich = exp.sample(&mut rng);
            // uplink control received at the eNode B: the jammer sits at a
            // fixed distance from the receiver
            let h_pucch = exp.sample(&mut rng);
            let g_pucch = exp.sample(&mut rng);

            let csrs = sinr(
                config,
                h_csrs,
                g_csrs,
                r0,
                rj,
                p_rb * fx.csrs_power_scale,
                jam_on(Channel::CsRs, fx, jam_active),
            );
            let pcfich = sinr(
                config,
                h_pcfich,
                g_pcfich,
                r0,
                rj,
                p_rb * fx.data_power_scale,
                jam_on(Channel::Pcfich, fx, jam_active),
            );
            let pucch = sinr(
                config,
                h_pucch,
                g_pucch,
                r0,
                config.jammer_distance_m,
                config.ue_power_w,
                jam_on(Channel::Pucch, fx, jam_active),
            );
            csrs_gamma[m] = csrs;
            let demod_ok = csrs >= thr_lin && pcfich >= thr_lin && pucch >= thr_lin;
            let ok = !in_outage && demod_ok && attached[m];
            connected[m] = ok;
            if fx.sticky_outage && !in_outage && !demod_ok {
                attached[m] = false;
            }
        }
        connected_sum += connected.iter().filter(|&&c| c).count() as f64;

        // data rates for connected users, estimation quality tied to pilots
        let mut rates = Mat::zeros(users, rbs);
        for m in 0..users {
            if !connected[m] {
                continue;
            }
            let quality = csrs_gamma[m] / (1.0 + csrs_gamma[m]);
            for k in 0..rbs {
                let h = exp.sample(&mut rng);
                let g = exp.sample(&mut rng);
                let pdsch = sinr(
                    config,
                    h,
                    g,
                    drop.enb_distance[m],
                    drop.jammer_distance[m],
                    p_rb * fx.data_power_scale,
                    // data REs see jamming only through degraded channel
                    // estimation, folded into `quality`
                    0.0,
                );
                rates.set(
                    m,
                    k,
                    rb_throughput_w(pdsch * quality, config.capacity_fraction, config.rb_bandwidth_hz),
                );
            }
        }
        let winners = pfs_allocate(&rates, &mut drop.avg_throughput, config.fairness_window);
        let mut per_user = vec![0.0; users];
        for (k, &m) in winners.iter().enumerate() {
            per_user[m] += rates.get(m, k) * fx.throughput_scale;
        }
        if jammer_type == JammerType::Cheater && users > 0 {
            cheater_sum += per_user[0];
        }
        delivered_sum += per_user.iter().sum::<f64>();
    }

    let per_sf = subframes as f64;
    DropKpis {
        cheater_rate: cheater_sum / per_sf,
        connected: connected_sum / per_sf,
        enb_rate: if users > 0 { delivered_sum / per_sf / users as f64 } else { 0.0 },
    }
}

/// Neumaier-compensated mean over drop order; deterministic no matter how
/// the drops were scheduled.
fn compensated_mean(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    (sum + comp) / values.len() as f64
}

fn stderr_of(values: &[f64], mean: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let var: f64 =
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() - 1) as f64;
    (var / values.len() as f64).sqrt()
}

/// Unnormalized Monte-Carlo KPI estimates for one cell of the table.
/// Drops fan out across workers with per-drop substreams and aggregate in
/// drop order.
pub fn raw_kpi_stats(
    config: &CellConfig,
    jammer_type: JammerType,
    a_j: usize,
    a_0: usize,
    seed: u64,
) -> Result<KpiStats> {
    config.validate()?;
    if config.drops == 0 {
        return Err(Error::Config("drops must be positive".into()));
    }
    if a_j >= JAMMER_TARGETS.len() || a_0 >= 5 {
        return Err(Error::Config("action index out of range".into()));
    }
    let fx = action_effects(config, a_j, a_0);
    let per_drop: Vec<DropKpis> = (0..config.drops as u64)
        .into_par_iter()
        .map(|i| simulate_drop(config, jammer_type, &fx, i, seed))
        .collect();

    let series = |f: fn(&DropKpis) -> f64| -> (f64, f64) {
        let vals: Vec<f64> = per_drop.iter().map(f).collect();
        let mean = compensated_mean(&vals);
        (mean, stderr_of(&vals, mean))
    };
    let (cheater_rate, cheater_rate_stderr) = series(|d| d.cheater_rate);
    let (connected, connected_stderr) = series(|d| d.connected);
    let (enb_rate, enb_rate_stderr) = series(|d| d.enb_rate);
    Ok(KpiStats {
        cheater_rate,
        cheater_rate_stderr,
        connected,
        connected_stderr,
        enb_rate,
        enb_rate_stderr,
    })
}

/// Normalized KPI record against the baseline pair `(inactive, normal)`,
/// run with identical per-drop substreams so the baseline cell is exactly 1.
pub fn simulate_pair(
    config: &CellConfig,
    jammer_type: JammerType,
    a_j: usize,
    a_0: usize,
    seed: u64,
) -> Result<KpiRecord> {
    let base = raw_kpi_stats(config, jammer_type, 0, 0, seed)?;
    let target = raw_kpi_stats(config, jammer_type, a_j, a_0, seed)?;
    Ok(normalize(&target, &base, jammer_type))
}

fn normalize(target: &KpiStats, base: &KpiStats, jammer_type: JammerType) -> KpiRecord {
    let ratio = |t: f64, b: f64| if b > 0.0 { t / b } else { 0.0 };
    KpiRecord {
        cheater_rate_delta: if jammer_type == JammerType::Cheater {
            ratio(target.cheater_rate, base.cheater_rate) - 1.0
        } else {
            0.0
        },
        connected_norm: ratio(target.connected, base.connected),
        enb_rate_norm: ratio(target.enb_rate, base.enb_rate),
    }
}

/// The synthesized per-state payoff matrices, baseline entry exactly -1.
pub struct GeneratedPayoffs {
    pub cheater: Mat,
    pub saboteur: Mat,
}

/// Monte-Carlo estimate of both payoff matrices over all 25 action pairs.
///
/// The cheater matrix weighs the heavy user's throughput change against the
/// connected count; the saboteur matrix weighs the connected count against
/// per-UE throughput. Both are rescaled by their baseline magnitude so the
/// `(inactive, normal)` entry is exactly -1.
pub fn build_payoff_matrices(config: &CellConfig, seed: u64) -> Result<GeneratedPayoffs> {
    config.validate()?;
    let n_j = JAMMER_TARGETS.len();
    let n_0 = 5;
    let mut cheater = Mat::zeros(n_j, n_0);
    let mut saboteur = Mat::zeros(n_j, n_0);
    for (jammer_type, mat) in
        [(JammerType::Cheater, &mut cheater), (JammerType::Saboteur, &mut saboteur)]
    {
        let base = raw_kpi_stats(config, jammer_type, 0, 0, seed)?;
        for a_j in 0..n_j {
            for a_0 in 0..n_0 {
                let stats = raw_kpi_stats(config, jammer_type, a_j, a_0, seed)?;
                let kpi = normalize(&stats, &base, jammer_type);
                let raw = match jammer_type {
                    JammerType::Cheater => {
                        config.weight_cheater_throughput * kpi.cheater_rate_delta
                            - config.weight_cheater_connected * kpi.connected_norm
                    }
                    JammerType::Saboteur => {
                        -config.weight_saboteur_connected * kpi.connected_norm
                            - config.weight_enb_throughput * kpi.enb_rate_norm
                    }
                };
                mat.set(a_j, a_0, raw);
            }
        }
        let scale = mat.get(0, 0).abs();
        if scale == 0.0 {
            return Err(Error::Config("degenerate baseline: zero utility".into()));
        }
        for a_j in 0..n_j {
            for a_0 in 0..n_0 {
                let v = mat.get(a_j, a_0) / scale;
                mat.set(a_j, a_0, v);
            }
        }
    }
    Ok(GeneratedPayoffs { cheater, saboteur })
}

/// Wraps generated matrices into a scenario document loadable by the game
/// layer.
pub fn emit_scenario(config: &CellConfig, payoffs: &GeneratedPayoffs) -> Result<String> {
    let doc = format!(
        "states = [\"cheater\", \"saboteur\"]\n\
         jammer_actions = [\"inactive\", \"jam-csrs\", \"jam-csrs-pucch\", \"jam-csrs-pbch-prach\", \"jam-csrs-pcfich-pucch-prach\"]\n\
         enb_actions = [\"normal\", \"boost-csrs-power\", \"throttle\", \"change-fc-sib2\", \"change-timing\"]\n\
         prior = {:?}\n\
         lambda = {}\n\
         horizon = {}\n\n\
         [payoff]\n\
         cheater = [\n{}]\n\
         saboteur = [\n{}]\n",
        config.emit_prior,
        config.emit_lambda,
        config.emit_horizon,
        matrix_rows(&payoffs.cheater),
        matrix_rows(&payoffs.saboteur),
    );
    // must round-trip through the loader
    GameSpec::from_toml_str(&doc)?;
    Ok(doc)
}

fn matrix_rows(m: &Mat) -> String {
    (0..m.rows())
        .map(|r| {
            let cells: Vec<String> = m.row(r).iter().map(|v| format!("{v}")).collect();
            format!("    [{}],\n", cells.join(", "))
        })
        .collect()
}
