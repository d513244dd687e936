//! Slotted discrete-event simulator of saturated senders contending for one
//! channel.
//!
//! Nodes count down backoff slots while the medium is idle. A node whose
//! counter hits zero alone takes a transmission opportunity: one frame under
//! DCF and DCF*, a burst bounded by the TXOP limit under EDCF. Counters that
//! hit zero in the same slot collide and every frame involved fails. Failed
//! opportunities double the contention window; successful ones reset it to
//! the node's effective minimum, which the DCF* controller adapts so that
//! long-run channel-time shares track their targets.
//!
//! Time is kept in integer nanoseconds so that the accounting identity
//! `sum(node channel time) + idle + collisions == elapsed` holds exactly.

mod dcf_star;
mod engine;
mod report;
mod txop;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::channel::{ChannelError, LinkModel};
use crate::game::Discipline;
use crate::phy::{frame_airtime, PhyError, PhyProfile, Strategy};

pub use dcf_star::{dcf_star_update, DcfStarConfig};
pub use report::{BestResponseOutcome, EpochRecord, IntervalRow, NodeSummary, SimReport};
pub use txop::{execute_txop, TxopResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Phy(#[from] PhyError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, SimError> {
    Err(SimError::Invalid(msg.into()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum StrategyPolicy {
    Fixed(Strategy),
    /// Receiver-based auto rate: the rate is picked per TXOP from the
    /// received power at its start. Requires a fading link.
    AutoRate { payload_bits: u32 },
    /// Periodically probes every candidate and keeps the one with the best
    /// measured throughput.
    BestResponse {
        candidates: Vec<Strategy>,
        initial: Strategy,
    },
}

impl StrategyPolicy {
    fn initial(&self, phy: &PhyProfile) -> Strategy {
        match self {
            StrategyPolicy::Fixed(s) => *s,
            StrategyPolicy::AutoRate { payload_bits } => Strategy::new(phy.highest_rate(), *payload_bits),
            StrategyPolicy::BestResponse { initial, .. } => *initial,
        }
    }

    /// Every strategy the node may use during a run.
    fn reachable(&self, phy: &PhyProfile) -> Vec<Strategy> {
        match self {
            StrategyPolicy::Fixed(s) => vec![*s],
            StrategyPolicy::AutoRate { payload_bits } => phy
                .rates_bps
                .iter()
                .map(|&r| Strategy::new(r, *payload_bits))
                .collect(),
            StrategyPolicy::BestResponse { candidates, .. } => candidates.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeConfig {
    pub name: String,
    pub link: LinkModel,
    pub policy: StrategyPolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestResponseConfig {
    /// Time given to each probed strategy before measurement starts, seconds.
    pub settle: f64,
    /// Measurement window per probed strategy, seconds.
    pub probe_window: f64,
    pub max_epochs: u32,
    /// Relative improvement a probed strategy needs over the incumbent's
    /// measured throughput before the node switches.
    pub switch_margin: f64,
}

impl Default for BestResponseConfig {
    fn default() -> Self {
        BestResponseConfig {
            settle: 1.0,
            probe_window: 10.0,
            max_epochs: 20,
            switch_margin: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimScenario {
    pub phy: PhyProfile,
    /// `TimeFair` runs DCF framing with the DCF* window controller.
    pub discipline: Discipline,
    pub nodes: Vec<NodeConfig>,
    /// Simulated time, seconds.
    pub duration: f64,
    pub seed: u64,
    /// Length of one CSV reporting interval, seconds.
    pub report_interval: f64,
    pub dcf_star: DcfStarConfig,
    pub best_response: BestResponseConfig,
    /// Display names used in interval rows; strategies without one are
    /// printed with their rate and payload.
    pub strategy_labels: BTreeMap<Strategy, String>,
}

impl SimScenario {
    pub fn new(phy: PhyProfile, discipline: Discipline, nodes: Vec<NodeConfig>, duration: f64, seed: u64) -> Self {
        let dcf_star = DcfStarConfig::for_profile(&phy);
        SimScenario {
            phy,
            discipline,
            nodes,
            duration,
            seed,
            report_interval: 1.0,
            dcf_star,
            best_response: BestResponseConfig::default(),
            strategy_labels: BTreeMap::new(),
        }
    }

    pub fn label(&self, s: &Strategy) -> String {
        self.strategy_labels
            .get(s)
            .cloned()
            .unwrap_or_else(|| s.to_string())
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.phy.validate()?;
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return invalid("duration must be > 0");
        }
        if !(self.report_interval > 0.0 && self.report_interval.is_finite()) {
            return invalid("report_interval must be > 0");
        }
        if self.nodes.is_empty() {
            return invalid("at least one node is required");
        }
        for node in &self.nodes {
            if node.link.coherence_samples() == 0 {
                return invalid(format!("node {}: coherence_samples must be >= 1", node.name));
            }
            match &node.policy {
                StrategyPolicy::AutoRate { .. } if !matches!(node.link, LinkModel::Fading(_)) => {
                    return invalid(format!("node {}: auto rate needs a fading channel", node.name));
                }
                StrategyPolicy::BestResponse { candidates, initial } => {
                    if candidates.is_empty() {
                        return invalid(format!("node {}: no best-response candidates", node.name));
                    }
                    if !candidates.contains(initial) {
                        return invalid(format!(
                            "node {}: initial strategy {initial} is not a candidate",
                            node.name
                        ));
                    }
                }
                _ => {}
            }
            for s in node.policy.reachable(&self.phy) {
                frame_airtime(&s, &self.phy)?;
                node.link.min_fade(&s)?;
            }
        }
        self.dcf_star.validate(&self.phy, self.nodes.len())?;
        let br = &self.best_response;
        if !(br.settle >= 0.0 && br.probe_window > 0.0 && br.switch_margin >= 0.0) {
            return invalid("best_response needs settle >= 0, probe_window > 0 and switch_margin >= 0");
        }
        Ok(())
    }
}

/// Runs one scenario to completion. Deterministic for a given scenario.
pub fn run_sim(scenario: &SimScenario) -> Result<SimReport, SimError> {
    scenario.validate()?;
    Ok(engine::Engine::new(scenario)?.run())
}

#[cfg(test)]
mod tests;
