use crate::phy::PhyProfile;

use super::{invalid, SimError};

/// Parameters of the DCF* contention-window controller.
#[derive(Debug, Clone, PartialEq)]
pub struct DcfStarConfig {
    /// Target channel-time shares per node; `None` means equal shares.
    pub targets: Option<Vec<f64>>,
    pub gain: f64,
    /// Weight kept by the running channel-time estimate at each period, in
    /// [0, 1). Zero uses only the last window.
    pub smoothing: f64,
    /// Adaptation period, seconds.
    pub period: f64,
    pub cw_lo: f64,
    pub cw_hi: f64,
}

impl DcfStarConfig {
    pub fn for_profile(phy: &PhyProfile) -> Self {
        DcfStarConfig {
            targets: None,
            gain: 1.0,
            smoothing: 0.9,
            period: 0.1,
            cw_lo: 1.0,
            cw_hi: phy.cw_max as f64,
        }
    }

    pub(crate) fn validate(&self, phy: &PhyProfile, nodes: usize) -> Result<(), SimError> {
        if let Some(t) = &self.targets {
            if t.len() != nodes {
                return invalid(format!("dcf_star: {} targets for {nodes} nodes", t.len()));
            }
            if t.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return invalid("dcf_star: targets must lie in [0, 1]");
            }
            let sum: f64 = t.iter().sum();
            if sum > 1.0 + 1e-9 || sum <= 0.0 {
                return invalid("dcf_star: targets must sum to a value in (0, 1]");
            }
        }
        if !(self.gain > 0.0 && self.gain.is_finite()) {
            return invalid("dcf_star: gain must be > 0");
        }
        if !(0.0..1.0).contains(&self.smoothing) {
            return invalid("dcf_star: smoothing must lie in [0, 1)");
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return invalid("dcf_star: period must be > 0");
        }
        if !(self.cw_lo >= 1.0 && self.cw_lo <= self.cw_hi && self.cw_hi <= phy.cw_max as f64) {
            return invalid("dcf_star: need 1 <= cw_lo <= cw_hi <= cw_max");
        }
        Ok(())
    }

    /// Targets normalised to sum to one.
    pub(crate) fn normalised_targets(&self, nodes: usize) -> Vec<f64> {
        match &self.targets {
            Some(t) => {
                let sum: f64 = t.iter().sum();
                t.iter().map(|x| x / sum).collect()
            }
            None => vec![1.0 / nodes as f64; nodes],
        }
    }
}

/// Multiplicative window update: a node below its target share shrinks its
/// minimum window and so wins the channel more often.
///
/// Shares are fractions of the channel time used by transmitting nodes.
pub fn dcf_star_update(cw_min_eff: f64, observed: f64, target: f64, config: &DcfStarConfig) -> f64 {
    let next = if target <= 0.0 {
        config.cw_hi
    } else if observed <= 0.0 {
        config.cw_lo
    } else {
        cw_min_eff * (observed / target).powf(config.gain)
    };
    next.clamp(config.cw_lo, config.cw_hi)
}
