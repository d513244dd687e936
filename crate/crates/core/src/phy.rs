//! PHY/MAC constants and the airtime arithmetic shared by the analytic game
//! and the simulator.
//!
//! Units are fixed throughout the crate: times in seconds, data rates in
//! bits per second, payloads in bits. Megabits per second only appear at
//! presentation boundaries (reports, CSV, scenario files).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Slack used when flooring `txop_limit / airtime`, so that a TXOP which is an
/// exact multiple of the frame airtime is not lost to rounding.
const BURST_FLOOR_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhyError {
    #[error("rate {0} b/s is not in the PHY rate table")]
    UnknownRate(u64),
    #[error("payload of {payload} bits outside (0, {max}]")]
    InvalidPayload { payload: u32, max: u32 },
    #[error("success fraction {0} outside [0, 1]")]
    AlphaOutOfRange(f64),
    #[error("invalid PHY profile: {0}")]
    InvalidProfile(String),
}

/// A sender's action: a data rate and a frame payload size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Strategy {
    pub rate_bps: u64,
    pub payload_bits: u32,
}

impl Strategy {
    pub fn new(rate_bps: u64, payload_bits: u32) -> Self {
        Strategy {
            rate_bps,
            payload_bits,
        }
    }

    /// Convenience constructor taking the rate in Mbps (e.g. `5.5`).
    pub fn from_mbps(rate_mbps: f64, payload_bits: u32) -> Self {
        Strategy::new(mbps_to_bps(rate_mbps), payload_bits)
    }

    pub fn rate_mbps(&self) -> f64 {
        self.rate_bps as f64 / 1e6
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}Mbps/{}b", self.rate_mbps(), self.payload_bits)
    }
}

pub fn mbps_to_bps(mbps: f64) -> u64 {
    (mbps * 1e6).round() as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhyProfile {
    /// Supported data rates, strictly increasing.
    pub rates_bps: Vec<u64>,
    /// Non-payload bits carried by every frame (MAC + transport headers).
    pub bit_overhead: f64,
    /// Fixed per-frame time: preamble, SIFS, MAC ack and inter-frame idle.
    pub time_overhead: f64,
    pub slot_time: f64,
    pub cw_min: u32,
    pub cw_max: u32,
    /// Channel time a contention winner may hold (EDCF TXOP limit).
    pub txop_limit: f64,
    /// Largest frame payload, bits.
    pub max_payload_bits: u32,
}

impl PhyProfile {
    /// An 802.11b-like profile: 1/2/5.5/11 Mbps, 20 us slots, cw 31..1023.
    ///
    /// Overheads assume long preamble (192 us), SIFS + DIFS, a 1 Mbps ack and
    /// 62 bytes of MAC/IP/UDP headers. TXOP limit 7.35 ms.
    pub fn dot11b() -> Self {
        PhyProfile {
            rates_bps: vec![1_000_000, 2_000_000, 5_500_000, 11_000_000],
            bit_overhead: 496.0,
            time_overhead: 556e-6,
            slot_time: 20e-6,
            cw_min: 31,
            cw_max: 1023,
            txop_limit: 7.35e-3,
            max_payload_bits: 12_000,
        }
    }

    /// Overheadless two-rate profile whose rates equal the achievable
    /// throughputs 3.2 and 1.6 Mbps; with 1500-byte frames and a 15 ms TXOP
    /// the bursts hold 4 and 2 frames respectively.
    pub fn two_rate_ideal() -> Self {
        PhyProfile {
            rates_bps: vec![1_600_000, 3_200_000],
            bit_overhead: 0.0,
            time_overhead: 0.0,
            slot_time: 20e-6,
            cw_min: 31,
            cw_max: 1023,
            txop_limit: 0.015,
            max_payload_bits: 12_000,
        }
    }

    pub fn validate(&self) -> Result<(), PhyError> {
        let bad = |m: &str| Err(PhyError::InvalidProfile(m.to_string()));
        if self.rates_bps.is_empty() {
            return bad("rate table is empty");
        }
        if self.rates_bps[0] == 0 {
            return bad("rates must be positive");
        }
        if self.rates_bps.windows(2).any(|w| w[0] >= w[1]) {
            return bad("rates must be strictly increasing");
        }
        if !(self.bit_overhead >= 0.0 && self.bit_overhead.is_finite()) {
            return bad("bit_overhead must be >= 0");
        }
        if !(self.time_overhead >= 0.0 && self.time_overhead.is_finite()) {
            return bad("time_overhead must be >= 0");
        }
        if !(self.slot_time > 0.0 && self.slot_time.is_finite()) {
            return bad("slot_time must be > 0");
        }
        if self.cw_min == 0 || self.cw_min > self.cw_max {
            return bad("need 0 < cw_min <= cw_max");
        }
        if !(self.txop_limit > 0.0 && self.txop_limit.is_finite()) {
            return bad("txop_limit must be > 0");
        }
        if self.max_payload_bits == 0 {
            return bad("max_payload_bits must be > 0");
        }
        Ok(())
    }

    pub fn check_strategy(&self, strategy: &Strategy) -> Result<(), PhyError> {
        if !self.rates_bps.contains(&strategy.rate_bps) {
            return Err(PhyError::UnknownRate(strategy.rate_bps));
        }
        if strategy.payload_bits == 0 || strategy.payload_bits > self.max_payload_bits {
            return Err(PhyError::InvalidPayload {
                payload: strategy.payload_bits,
                max: self.max_payload_bits,
            });
        }
        Ok(())
    }

    pub fn lowest_rate(&self) -> u64 {
        self.rates_bps[0]
    }

    pub fn highest_rate(&self) -> u64 {
        *self.rates_bps.last().expect("validated profile has rates")
    }
}

/// Channel occupancy of one frame exchange: `to + (s + bo) / d`, seconds.
pub fn frame_airtime(strategy: &Strategy, phy: &PhyProfile) -> Result<f64, PhyError> {
    phy.check_strategy(strategy)?;
    Ok(phy.time_overhead
        + (strategy.payload_bits as f64 + phy.bit_overhead) / strategy.rate_bps as f64)
}

/// Theoretically achievable throughput `s / (to + (s + bo) / d)`, bits/s.
pub fn gamma(strategy: &Strategy, phy: &PhyProfile) -> Result<f64, PhyError> {
    let airtime = frame_airtime(strategy, phy)?;
    Ok(strategy.payload_bits as f64 / airtime)
}

/// Practically achievable throughput `gamma * alpha`, bits/s.
pub fn r_prac(strategy: &Strategy, alpha: f64, phy: &PhyProfile) -> Result<f64, PhyError> {
    check_alpha(alpha)?;
    Ok(gamma(strategy, phy)? * alpha)
}

pub(crate) fn check_alpha(alpha: f64) -> Result<(), PhyError> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(PhyError::AlphaOutOfRange(alpha))
    }
}

/// Frames that fit in one TXOP, never less than one.
pub fn max_burst_frames(strategy: &Strategy, phy: &PhyProfile) -> Result<u32, PhyError> {
    let airtime = frame_airtime(strategy, phy)?;
    Ok(burst_frames_for(phy.txop_limit, airtime))
}

pub(crate) fn burst_frames_for(txop_limit: f64, airtime: f64) -> u32 {
    let n = (txop_limit / airtime + BURST_FLOOR_EPS).floor();
    if n < 1.0 {
        1
    } else {
        n as u32
    }
}
