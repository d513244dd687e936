//! Per-node frame success models.
//!
//! Two flavours: an explicit [`AlphaTable`] of success fractions per
//! strategy, and a [`FadingChannel`] under Rayleigh block fading where a frame
//! succeeds when the instantaneous received power clears the threshold of
//! its data rate.
//!
//! Both are driven by the same normalised fade level `X ~ Exp(1)` (received
//! power divided by its mean). A frame succeeds iff `X >= x_min`, where
//! `x_min = P_thresh / P_mean` for a fading channel and `-ln(alpha)` for a
//! table, so that `P[success] = exp(-x_min)` matches alpha in both cases.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::phy::{PhyProfile, Strategy};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("no success fraction configured for strategy {0}")]
    MissingStrategy(Strategy),
    #[error("no receive threshold configured for rate {0} b/s")]
    MissingThreshold(u64),
    #[error("success fraction {alpha} for strategy {strategy} outside [0, 1]")]
    AlphaOutOfRange { strategy: Strategy, alpha: f64 },
    #[error(
        "success fraction must not increase with rate at equal payload: \
         {low} -> {low_alpha}, {high} -> {high_alpha}"
    )]
    RateMonotonicity {
        low: Strategy,
        low_alpha: f64,
        high: Strategy,
        high_alpha: f64,
    },
    #[error("receive thresholds must increase strictly with rate")]
    ThresholdOrdering,
    #[error("coherence_samples must be >= 1")]
    Coherence,
}

/// Success fraction per strategy for one node.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AlphaTable {
    entries: BTreeMap<Strategy, f64>,
}

impl AlphaTable {
    /// Builds a table, rejecting fractions outside [0, 1] and any pair of
    /// equal-payload entries where the higher rate succeeds more often than
    /// the lower one.
    pub fn new(entries: impl IntoIterator<Item = (Strategy, f64)>) -> Result<Self, ChannelError> {
        let entries: BTreeMap<Strategy, f64> = entries.into_iter().collect();
        for (&strategy, &alpha) in &entries {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(ChannelError::AlphaOutOfRange { strategy, alpha });
            }
        }
        // BTreeMap orders by (rate, payload); regroup by payload.
        let mut by_payload: BTreeMap<u32, Vec<(Strategy, f64)>> = BTreeMap::new();
        for (&s, &a) in &entries {
            by_payload.entry(s.payload_bits).or_default().push((s, a));
        }
        for group in by_payload.values() {
            for w in group.windows(2) {
                let ((low, low_alpha), (high, high_alpha)) = (w[0], w[1]);
                if high_alpha > low_alpha {
                    return Err(ChannelError::RateMonotonicity {
                        low,
                        low_alpha,
                        high,
                        high_alpha,
                    });
                }
            }
        }
        Ok(AlphaTable { entries })
    }

    /// Table induced by a fading channel over the given strategies.
    pub fn from_fading<'a>(
        channel: &FadingChannel,
        strategies: impl IntoIterator<Item = &'a Strategy>,
    ) -> Result<Self, ChannelError> {
        let entries = strategies
            .into_iter()
            .map(|s| alpha_rayleigh(channel, s).map(|a| (*s, a)))
            .collect::<Result<Vec<_>, _>>()?;
        AlphaTable::new(entries)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Strategy, &f64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn alpha_lookup(table: &AlphaTable, strategy: &Strategy) -> Result<f64, ChannelError> {
    table
        .entries
        .get(strategy)
        .copied()
        .ok_or(ChannelError::MissingStrategy(*strategy))
}

/// Log-distance path loss: `tx - ref_loss - 10 n log10(d / d0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathLoss {
    pub tx_power_dbm: f64,
    pub exponent: f64,
    pub ref_distance_m: f64,
    /// Loss at the reference distance, dB.
    pub ref_loss_db: f64,
}

impl PathLoss {
    pub fn mean_rx_power_dbm(&self, distance_m: f64) -> f64 {
        let d = distance_m.max(self.ref_distance_m);
        self.tx_power_dbm - self.ref_loss_db - 10.0 * self.exponent * (d / self.ref_distance_m).log10()
    }
}

impl Default for PathLoss {
    /// 15 dBm transmitter, free-space loss at 1 m for 2.4 GHz, exponent 3.
    fn default() -> Self {
        PathLoss {
            tx_power_dbm: 15.0,
            exponent: 3.0,
            ref_distance_m: 1.0,
            ref_loss_db: 40.0,
        }
    }
}

/// Receive thresholds of a typical 802.11b card, dBm. Configurable defaults,
/// not a claim about any particular radio.
pub fn dot11b_thresholds() -> BTreeMap<u64, f64> {
    BTreeMap::from([
        (1_000_000, -94.0),
        (2_000_000, -91.0),
        (5_500_000, -87.0),
        (11_000_000, -82.0),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FadingChannel {
    pub mean_rx_power_dbm: f64,
    /// Minimum received power per rate (b/s), dBm.
    pub rx_thresholds_dbm: BTreeMap<u64, f64>,
    /// Consecutive frames sharing one fading draw.
    pub coherence_samples: u32,
    pub rng_seed: u64,
}

impl FadingChannel {
    pub fn new(
        mean_rx_power_dbm: f64,
        rx_thresholds_dbm: BTreeMap<u64, f64>,
        coherence_samples: u32,
        rng_seed: u64,
    ) -> Result<Self, ChannelError> {
        if coherence_samples == 0 {
            return Err(ChannelError::Coherence);
        }
        let th: Vec<f64> = rx_thresholds_dbm.values().copied().collect();
        if th.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(ChannelError::ThresholdOrdering);
        }
        Ok(FadingChannel {
            mean_rx_power_dbm,
            rx_thresholds_dbm,
            coherence_samples,
            rng_seed,
        })
    }

    pub fn threshold_dbm(&self, rate_bps: u64) -> Result<f64, ChannelError> {
        self.rx_thresholds_dbm
            .get(&rate_bps)
            .copied()
            .ok_or(ChannelError::MissingThreshold(rate_bps))
    }

    /// `P_thresh / P_mean` for the strategy's rate.
    fn min_fade(&self, strategy: &Strategy) -> Result<f64, ChannelError> {
        let th = self.threshold_dbm(strategy.rate_bps)?;
        Ok(db_to_ratio(th - self.mean_rx_power_dbm))
    }

    pub fn power_dbm(&self, fade: f64) -> f64 {
        self.mean_rx_power_dbm + 10.0 * fade.log10()
    }
}

fn db_to_ratio(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `P[received power >= threshold]` under Rayleigh fading.
pub fn alpha_rayleigh(channel: &FadingChannel, strategy: &Strategy) -> Result<f64, ChannelError> {
    Ok((-channel.min_fade(strategy)?).exp())
}

/// Draws the normalised received power `P / P_mean`.
pub fn draw_fade<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Exp1)
}

/// Stateful frame-by-frame sampler: one fading draw per `coherence_samples`
/// consecutive calls.
#[derive(Debug, Clone)]
pub struct FadingSampler {
    channel: FadingChannel,
    rng: ChaCha8Rng,
    fade: f64,
    remaining: u32,
}

impl FadingSampler {
    pub fn new(channel: FadingChannel) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(channel.rng_seed);
        FadingSampler {
            channel,
            rng,
            fade: 0.0,
            remaining: 0,
        }
    }

    pub fn channel(&self) -> &FadingChannel {
        &self.channel
    }

    fn advance(&mut self) -> f64 {
        if self.remaining == 0 {
            self.fade = draw_fade(&mut self.rng);
            self.remaining = self.channel.coherence_samples;
        }
        self.remaining -= 1;
        self.fade
    }

    /// Received power of the next sample, dBm.
    pub fn sample_power_dbm(&mut self) -> f64 {
        let fade = self.advance();
        self.channel.power_dbm(fade)
    }

    pub fn sample_frame_outcome(&mut self, strategy: &Strategy) -> Result<bool, ChannelError> {
        let min = self.channel.min_fade(strategy)?;
        Ok(self.advance() >= min)
    }
}

/// Highest rate whose threshold the sampled power clears, else the lowest
/// rate in the profile.
pub fn rbar_select_rate(channel: &FadingChannel, phy: &PhyProfile, sampled_power_dbm: f64) -> u64 {
    phy.rates_bps
        .iter()
        .rev()
        .find(|&&r| {
            channel
                .threshold_dbm(r)
                .map(|th| th <= sampled_power_dbm)
                .unwrap_or(false)
        })
        .copied()
        .unwrap_or_else(|| phy.lowest_rate())
}

/// A node's link as seen by the simulator.
#[derive(Debug, Clone, PartialEq)]
pub enum LinkModel {
    Table { alpha: AlphaTable, coherence_samples: u32 },
    Fading(FadingChannel),
}

impl LinkModel {
    pub fn alpha(&self, strategy: &Strategy) -> Result<f64, ChannelError> {
        match self {
            LinkModel::Table { alpha, .. } => alpha_lookup(alpha, strategy),
            LinkModel::Fading(ch) => alpha_rayleigh(ch, strategy),
        }
    }

    /// Smallest normalised fade level at which a frame with this strategy
    /// gets through.
    pub fn min_fade(&self, strategy: &Strategy) -> Result<f64, ChannelError> {
        match self {
            LinkModel::Table { alpha, .. } => {
                let a = alpha_lookup(alpha, strategy)?;
                Ok(if a <= 0.0 { f64::INFINITY } else { -a.ln() })
            }
            LinkModel::Fading(ch) => ch.min_fade(strategy),
        }
    }

    pub fn coherence_samples(&self) -> u32 {
        match self {
            LinkModel::Table {
                coherence_samples, ..
            } => *coherence_samples,
            LinkModel::Fading(ch) => ch.coherence_samples,
        }
    }
}

/// Block fading indexed by time: the fade level is held for
/// `block_ns` nanoseconds and redrawn independently for every new block.
#[derive(Debug, Clone)]
pub struct TimeBlockFading {
    block_ns: u64,
    block: Option<u64>,
    fade: f64,
}

impl TimeBlockFading {
    pub fn new(block_ns: u64) -> Self {
        TimeBlockFading {
            block_ns: block_ns.max(1),
            block: None,
            fade: 0.0,
        }
    }

    pub fn fade_at<R: Rng + ?Sized>(&mut self, t_ns: u64, rng: &mut R) -> f64 {
        let idx = t_ns / self.block_ns;
        if self.block != Some(idx) {
            self.fade = draw_fade(rng);
            self.block = Some(idx);
        }
        self.fade
    }

    /// Forces a fresh draw on the next query.
    pub fn reset(&mut self) {
        self.block = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use crate::phy::Strategy;

    fn g(rate_mbps: f64) -> Strategy {
        Strategy::from_mbps(rate_mbps, 12_000)
    }

    fn channel(mean: f64, coherence: u32) -> FadingChannel {
        FadingChannel::new(mean, dot11b_thresholds(), coherence, 42).unwrap()
    }

    #[test]
    fn lookup_fixture_values() {
        let i = AlphaTable::new([(g(3.2), 0.6), (g(1.6), 0.95)]).unwrap();
        let j = AlphaTable::new([(g(3.2), 1.0), (g(1.6), 1.0)]).unwrap();
        assert_eq!(alpha_lookup(&i, &g(3.2)), Ok(0.6));
        assert_eq!(alpha_lookup(&i, &g(1.6)), Ok(0.95));
        assert_eq!(alpha_lookup(&j, &g(3.2)), Ok(1.0));
        assert_eq!(alpha_lookup(&j, &g(1.6)), Ok(1.0));
        assert_eq!(
            alpha_lookup(&AlphaTable::default(), &g(3.2)),
            Err(ChannelError::MissingStrategy(g(3.2)))
        );
    }

    #[test]
    fn table_rejects_rate_monotonicity_violation() {
        let err = AlphaTable::new([(g(3.2), 0.9), (g(1.6), 0.5)]).unwrap_err();
        assert!(matches!(err, ChannelError::RateMonotonicity { .. }));
        // different payloads are not compared
        assert!(AlphaTable::new([
            (Strategy::from_mbps(3.2, 12_000), 0.9),
            (Strategy::from_mbps(1.6, 6_000), 0.5)
        ])
        .is_ok());
        assert!(matches!(
            AlphaTable::new([(g(3.2), 1.5)]),
            Err(ChannelError::AlphaOutOfRange { .. })
        ));
    }

    #[test]
    fn rayleigh_alpha_closed_form() {
        let th = dot11b_thresholds()[&11_000_000];
        let at = channel(th, 1);
        assert!((alpha_rayleigh(&at, &g(11.0)).unwrap() - (-1f64).exp()).abs() < 1e-12);
        let strong = channel(th + 10.0, 1);
        assert!((alpha_rayleigh(&strong, &g(11.0)).unwrap() - (-0.1f64).exp()).abs() < 1e-12);
        let huge = channel(th + 200.0, 1);
        assert!(alpha_rayleigh(&huge, &g(11.0)).unwrap() > 1.0 - 1e-15);
        assert_eq!(
            alpha_rayleigh(&at, &g(3.2)),
            Err(ChannelError::MissingThreshold(3_200_000))
        );
    }

    #[test]
    fn rayleigh_alpha_monte_carlo() {
        // 10 dB above threshold: exp(-0.1) = 0.904837
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000;
        let min = 0.1;
        let hits = (0..n).filter(|_| draw_fade(&mut rng) >= min).count();
        let empirical = hits as f64 / n as f64;
        assert!((empirical - 0.904_837).abs() < 0.001, "{empirical}");
    }

    #[test]
    fn independent_sampling_matches_alpha() {
        let ch = channel(-80.0, 1);
        let alpha = alpha_rayleigh(&ch, &g(11.0)).unwrap();
        let mut s = FadingSampler::new(ch);
        let n = 1_000_000;
        let ok = (0..n).filter(|_| s.sample_frame_outcome(&g(11.0)).unwrap()).count();
        let empirical = ok as f64 / n as f64;
        assert!((empirical - alpha).abs() < 0.002, "{empirical} vs {alpha}");
    }

    #[test]
    fn correlated_sampling_keeps_mean_and_lengthens_runs() {
        let alpha = alpha_rayleigh(&channel(-80.0, 1), &g(11.0)).unwrap();
        let mut mean_run = Vec::new();
        for coherence in [1, 8] {
            let mut s = FadingSampler::new(channel(-80.0, coherence));
            let n = 400_000;
            let outcomes: Vec<bool> = (0..n)
                .map(|_| s.sample_frame_outcome(&g(11.0)).unwrap())
                .collect();
            let ok = outcomes.iter().filter(|&&o| o).count() as f64 / n as f64;
            assert!((ok - alpha).abs() < 0.01, "coherence {coherence}: {ok} vs {alpha}");
            let mut runs = Vec::new();
            let mut cur = 0;
            for &o in &outcomes {
                if o {
                    if cur > 0 {
                        runs.push(cur);
                    }
                    cur = 0;
                } else {
                    cur += 1;
                }
            }
            mean_run.push(runs.iter().sum::<usize>() as f64 / runs.len() as f64);
        }
        assert!(mean_run[1] > mean_run[0], "{mean_run:?}");
    }

    #[test]
    fn unbounded_threshold_always_succeeds() {
        let mut th = dot11b_thresholds();
        th.insert(11_000_000, f64::NEG_INFINITY);
        th.remove(&1_000_000);
        th.remove(&2_000_000);
        th.remove(&5_500_000);
        let mut s = FadingSampler::new(FadingChannel::new(-120.0, th, 1, 3).unwrap());
        assert!((0..10_000).all(|_| s.sample_frame_outcome(&g(11.0)).unwrap()));
    }

    #[test]
    fn sampler_replays_with_seed() {
        let run = || {
            let mut s = FadingSampler::new(channel(-85.0, 3));
            (0..1000)
                .map(|_| s.sample_frame_outcome(&g(5.5)).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn rbar_selection() {
        let phy = PhyProfile::dot11b();
        let ch = channel(-80.0, 1);
        assert_eq!(rbar_select_rate(&ch, &phy, -50.0), 11_000_000);
        assert_eq!(rbar_select_rate(&ch, &phy, -100.0), 1_000_000);
        // between the 5.5 (-87) and 11 (-82) thresholds
        assert_eq!(rbar_select_rate(&ch, &phy, -84.5), 5_500_000);
        assert_eq!(rbar_select_rate(&ch, &phy, -87.0), 5_500_000);
    }

    #[test]
    fn thresholds_must_increase() {
        let mut th = dot11b_thresholds();
        th.insert(11_000_000, -95.0);
        assert_eq!(
            FadingChannel::new(-80.0, th, 1, 0),
            Err(ChannelError::ThresholdOrdering)
        );
        assert_eq!(
            FadingChannel::new(-80.0, dot11b_thresholds(), 0, 0),
            Err(ChannelError::Coherence)
        );
    }

    #[test]
    fn table_and_fading_agree_on_success_probability() {
        let table = LinkModel::Table {
            alpha: AlphaTable::new([(g(3.2), 0.6)]).unwrap(),
            coherence_samples: 1,
        };
        let min = table.min_fade(&g(3.2)).unwrap();
        assert!(((-min).exp() - 0.6).abs() < 1e-12);
        let zero = LinkModel::Table {
            alpha: AlphaTable::new([(g(3.2), 0.0)]).unwrap(),
            coherence_samples: 1,
        };
        assert_eq!(zero.min_fade(&g(3.2)), Ok(f64::INFINITY));
    }

    #[test]
    fn block_fading_holds_within_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut f = TimeBlockFading::new(1000);
        let a = f.fade_at(10, &mut rng);
        assert_eq!(f.fade_at(999, &mut rng), a);
        let b = f.fade_at(1000, &mut rng);
        assert_ne!(a, b);
    }

    proptest! {
        #[test]
        fn alpha_monotone_in_mean_power(mean in -110.0f64..-40.0, delta in 0.1f64..20.0) {
            let lo = alpha_rayleigh(&channel(mean, 1), &g(5.5)).unwrap();
            let hi = alpha_rayleigh(&channel(mean + delta, 1), &g(5.5)).unwrap();
            prop_assert!(hi >= lo);
        }

        #[test]
        fn induced_table_respects_rate_ordering(mean in -110.0f64..-40.0) {
            let ch = channel(mean, 1);
            let strategies: Vec<Strategy> = PhyProfile::dot11b().rates_bps.iter()
                .map(|&r| Strategy::new(r, 12_000)).collect();
            prop_assert!(AlphaTable::from_fading(&ch, &strategies).is_ok());
            let alphas: Vec<f64> = strategies.iter().map(|s| alpha_rayleigh(&ch, s).unwrap()).collect();
            prop_assert!(alphas.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
