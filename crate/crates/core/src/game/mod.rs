//! Two-player stagegame over (rate, frame size) strategies.
//!
//! Each round both nodes get one transmission opportunity. The MAC
//! discipline decides how much channel time a node consumes per
//! opportunity; a node's payoff is its practically achievable throughput
//! scaled by its fraction of the round:
//!
//! ```text
//! R_i = gamma(g_i) * alpha_i(g_i) * t_i / (t_i + t_j + t_idle)
//! ```

mod claims;
mod equilibrium;
mod nash;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{alpha_lookup, AlphaTable, ChannelError};
use crate::phy::{self, check_alpha, frame_airtime, PhyError, PhyProfile, Strategy};

pub use claims::{
    check_claim_monotonicity, check_dominant_strategy, check_unique_ne_condition, Inequality,
    MonotonicityCheck, RatioCheck, UniqueNeCheck,
};
pub use equilibrium::{
    classify_equilibria, max_r_prac, most_efficient_strategy, undesirability_witness,
    EquilibriumReport, NashEquilibrium, SpeClass, Witness,
};
pub use nash::{best_responses, find_pure_nash, pure_nash_cells, Bimatrix};

/// Relative tolerance below which two payoffs are treated as equal.
pub const PAYOFF_REL_TOL: f64 = 1e-9;

/// `a` beats `b` by more than the payoff tolerance.
pub fn strictly_better(a: f64, b: f64) -> bool {
    a > b + PAYOFF_REL_TOL * a.abs().max(b.abs())
}

pub fn payoff_eq(a: f64, b: f64) -> bool {
    !strictly_better(a, b) && !strictly_better(b, a)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error(transparent)]
    Phy(#[from] PhyError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("strategy set of node {0} is empty")]
    EmptyStrategySet(Player),
    #[error("strategy {strategy} listed twice for node {player}")]
    DuplicateStrategy { player: Player, strategy: Strategy },
    #[error("strategy {strategy} is not available to node {player}")]
    StrategyNotInSet { player: Player, strategy: Strategy },
    #[error("t_idle must be finite and >= 0, got {0}")]
    InvalidIdle(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    I,
    J,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::I, Player::J];

    pub fn index(self) -> usize {
        match self {
            Player::I => 0,
            Player::J => 1,
        }
    }

    pub fn other(self) -> Player {
        match self {
            Player::I => Player::J,
            Player::J => Player::I,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::I => "i",
            Player::J => "j",
        })
    }
}

/// How an EDCF burst ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BurstPolicy {
    /// Backoff upon first loss: the burst stops at the first failed frame.
    Bfl,
    /// Backoff at end of burst: always send the full burst.
    Beb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discipline {
    /// One frame per transmission opportunity.
    Dcf,
    /// Bursts bounded by the TXOP limit.
    Edcf(BurstPolicy),
    /// Every node holds the channel for the full TXOP limit each round,
    /// whatever its strategy.
    TimeFair,
}

impl fmt::Display for Discipline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Discipline::Dcf => "dcf",
            Discipline::Edcf(BurstPolicy::Bfl) => "edcf_bfl",
            Discipline::Edcf(BurstPolicy::Beb) => "edcf_beb",
            Discipline::TimeFair => "time_fair",
        })
    }
}

impl std::str::FromStr for Discipline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dcf" => Ok(Discipline::Dcf),
            "edcf_bfl" => Ok(Discipline::Edcf(BurstPolicy::Bfl)),
            "edcf_beb" => Ok(Discipline::Edcf(BurstPolicy::Beb)),
            "time_fair" | "dcf_star" => Ok(Discipline::TimeFair),
            other => Err(format!(
                "unknown discipline `{other}` (expected dcf, edcf_bfl, edcf_beb or time_fair)"
            )),
        }
    }
}

/// Channel time of a single DCF opportunity: one frame.
pub fn occupancy_dcf(strategy: &Strategy, phy: &PhyProfile) -> Result<f64, GameError> {
    Ok(frame_airtime(strategy, phy)?)
}

/// Expected frames per TXOP with at most `max_frames` frames and per-frame
/// success `alpha`.
///
/// Under BFL the burst has `k < n` frames with probability
/// `alpha^(k-1) (1 - alpha)` and the full `n` otherwise.
pub fn expected_burst_frames(alpha: f64, max_frames: u32, policy: BurstPolicy) -> f64 {
    match policy {
        BurstPolicy::Beb => max_frames as f64,
        BurstPolicy::Bfl => {
            let n = max_frames.max(1);
            let mut p_stop_sum = 0.0;
            let mut expect = 0.0;
            let mut reach = 1.0; // alpha^(k-1)
            for k in 1..n {
                let p = reach * (1.0 - alpha);
                expect += p * k as f64;
                p_stop_sum += p;
                reach *= alpha;
            }
            expect + (1.0 - p_stop_sum) * n as f64
        }
    }
}

pub fn expected_burst(
    strategy: &Strategy,
    alpha: f64,
    phy: &PhyProfile,
    policy: BurstPolicy,
) -> Result<f64, GameError> {
    check_alpha(alpha)?;
    let n = phy::max_burst_frames(strategy, phy)?;
    Ok(expected_burst_frames(alpha, n, policy))
}

pub fn occupancy_edcf(
    strategy: &Strategy,
    alpha: f64,
    phy: &PhyProfile,
    policy: BurstPolicy,
) -> Result<f64, GameError> {
    Ok(expected_burst(strategy, alpha, phy, policy)? * frame_airtime(strategy, phy)?)
}

/// Expected frames and channel time a node uses per round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Occupancy {
    pub burst: f64,
    pub time: f64,
}

pub fn occupancy(
    discipline: Discipline,
    strategy: &Strategy,
    alpha: f64,
    phy: &PhyProfile,
) -> Result<Occupancy, GameError> {
    check_alpha(alpha)?;
    let airtime = frame_airtime(strategy, phy)?;
    Ok(match discipline {
        Discipline::Dcf => Occupancy {
            burst: 1.0,
            time: airtime,
        },
        Discipline::Edcf(policy) => {
            let burst = expected_burst(strategy, alpha, phy, policy)?;
            Occupancy {
                burst,
                time: burst * airtime,
            }
        }
        Discipline::TimeFair => Occupancy {
            burst: phy.txop_limit / airtime,
            time: phy.txop_limit,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageGame {
    pub phy: PhyProfile,
    pub discipline: Discipline,
    strategies: [Vec<Strategy>; 2],
    alphas: [AlphaTable; 2],
    pub t_idle: f64,
}

impl StageGame {
    pub fn new(
        phy: PhyProfile,
        discipline: Discipline,
        strategies_i: Vec<Strategy>,
        strategies_j: Vec<Strategy>,
        alpha_i: AlphaTable,
        alpha_j: AlphaTable,
        t_idle: f64,
    ) -> Result<Self, GameError> {
        phy.validate()?;
        if !(t_idle >= 0.0 && t_idle.is_finite()) {
            return Err(GameError::InvalidIdle(t_idle));
        }
        let strategies = [strategies_i, strategies_j];
        let alphas = [alpha_i, alpha_j];
        for player in Player::BOTH {
            let set = &strategies[player.index()];
            if set.is_empty() {
                return Err(GameError::EmptyStrategySet(player));
            }
            for (k, s) in set.iter().enumerate() {
                phy.check_strategy(s)?;
                alpha_lookup(&alphas[player.index()], s)?;
                if set[..k].contains(s) {
                    return Err(GameError::DuplicateStrategy {
                        player,
                        strategy: *s,
                    });
                }
            }
        }
        Ok(StageGame {
            phy,
            discipline,
            strategies,
            alphas,
            t_idle,
        })
    }

    pub fn strategies(&self, player: Player) -> &[Strategy] {
        &self.strategies[player.index()]
    }

    pub fn alpha_table(&self, player: Player) -> &AlphaTable {
        &self.alphas[player.index()]
    }

    pub fn alpha(&self, player: Player, strategy: &Strategy) -> Result<f64, GameError> {
        Ok(alpha_lookup(&self.alphas[player.index()], strategy)?)
    }

    /// Same game with the node roles exchanged.
    pub fn swapped(&self) -> StageGame {
        let [si, sj] = self.strategies.clone();
        let [ai, aj] = self.alphas.clone();
        StageGame {
            strategies: [sj, si],
            alphas: [aj, ai],
            ..self.clone()
        }
    }

    pub fn with_discipline(&self, discipline: Discipline) -> StageGame {
        StageGame {
            discipline,
            ..self.clone()
        }
    }

    pub fn with_idle(&self, t_idle: f64) -> Result<StageGame, GameError> {
        if !(t_idle >= 0.0 && t_idle.is_finite()) {
            return Err(GameError::InvalidIdle(t_idle));
        }
        Ok(StageGame {
            t_idle,
            ..self.clone()
        })
    }

    fn check_member(&self, player: Player, s: &Strategy) -> Result<(), GameError> {
        if self.strategies(player).contains(s) {
            Ok(())
        } else {
            Err(GameError::StrategyNotInSet {
                player,
                strategy: *s,
            })
        }
    }

    pub(crate) fn occupancy_of(&self, player: Player, s: &Strategy) -> Result<Occupancy, GameError> {
        occupancy(self.discipline, s, self.alpha(player, s)?, &self.phy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlayerOutcome {
    /// Achieved throughput, bits/s.
    pub throughput: f64,
    /// Channel time per round, seconds.
    pub occupancy: f64,
    pub share: f64,
    /// Expected frames per transmission opportunity.
    pub burst: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Outcome {
    pub i: PlayerOutcome,
    pub j: PlayerOutcome,
    /// Round length `t_i + t_j + t_idle`, seconds.
    pub cycle: f64,
}

impl Outcome {
    pub fn player(&self, p: Player) -> &PlayerOutcome {
        match p {
            Player::I => &self.i,
            Player::J => &self.j,
        }
    }

    pub fn aggregate_throughput(&self) -> f64 {
        self.i.throughput + self.j.throughput
    }
}

pub fn stage_payoff(game: &StageGame, g_i: &Strategy, g_j: &Strategy) -> Result<Outcome, GameError> {
    game.check_member(Player::I, g_i)?;
    game.check_member(Player::J, g_j)?;
    let occ_i = game.occupancy_of(Player::I, g_i)?;
    let occ_j = game.occupancy_of(Player::J, g_j)?;
    let cycle = occ_i.time + occ_j.time + game.t_idle;
    let side = |player: Player, s: &Strategy, occ: Occupancy| -> Result<PlayerOutcome, GameError> {
        let share = occ.time / cycle;
        let rp = phy::r_prac(s, game.alpha(player, s)?, &game.phy)?;
        Ok(PlayerOutcome {
            throughput: rp * share,
            occupancy: occ.time,
            share,
            burst: occ.burst,
        })
    };
    Ok(Outcome {
        i: side(Player::I, g_i, occ_i)?,
        j: side(Player::J, g_j, occ_j)?,
        cycle,
    })
}

/// Outcomes for every strategy pair; rows are node i's strategies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PayoffMatrix {
    pub strategies_i: Vec<Strategy>,
    pub strategies_j: Vec<Strategy>,
    cells: Vec<Outcome>,
}

impl PayoffMatrix {
    pub fn rows(&self) -> usize {
        self.strategies_i.len()
    }

    pub fn cols(&self) -> usize {
        self.strategies_j.len()
    }

    pub fn cell(&self, row: usize, col: usize) -> &Outcome {
        &self.cells[row * self.cols() + col]
    }

    pub fn cell_for(&self, g_i: &Strategy, g_j: &Strategy) -> Option<&Outcome> {
        let r = self.strategies_i.iter().position(|s| s == g_i)?;
        let c = self.strategies_j.iter().position(|s| s == g_j)?;
        Some(self.cell(r, c))
    }

    pub fn bimatrix(&self) -> Bimatrix {
        Bimatrix::new(
            self.rows(),
            self.cols(),
            self.cells
                .iter()
                .map(|o| [o.i.throughput, o.j.throughput])
                .collect(),
        )
    }
}

pub fn payoff_matrix(game: &StageGame) -> Result<PayoffMatrix, GameError> {
    let si = game.strategies(Player::I);
    let sj = game.strategies(Player::J);
    let mut cells = Vec::with_capacity(si.len() * sj.len());
    for g_i in si {
        for g_j in sj {
            cells.push(stage_payoff(game, g_i, g_j)?);
        }
    }
    Ok(PayoffMatrix {
        strategies_i: si.to_vec(),
        strategies_j: sj.to_vec(),
        cells,
    })
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;
    use crate::phy::Strategy;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Truncated geometric mean, `sum_{k<n} alpha^k`.
    fn burst_oracle(alpha: f64, n: u32) -> f64 {
        (0..n).map(|k| alpha.powi(k as i32)).sum()
    }

    #[test]
    fn dcf_occupancy() {
        let phy = PhyProfile::two_rate_ideal();
        let t1 = occupancy_dcf(&g1(), &phy).unwrap();
        let t2 = occupancy_dcf(&g2(), &phy).unwrap();
        assert!(close(t1, 3.75e-3, 1e-15));
        assert!(close(t2, 2.0 * t1, 1e-15));
    }

    #[test]
    fn bfl_burst_examples() {
        assert!(close(expected_burst_frames(0.6, 4, BurstPolicy::Bfl), 2.176, 1e-12));
        assert!(close(expected_burst_frames(0.95, 2, BurstPolicy::Bfl), 1.95, 1e-12));
        assert_eq!(expected_burst_frames(1.0, 4, BurstPolicy::Bfl), 4.0);
        assert_eq!(expected_burst_frames(0.0, 4, BurstPolicy::Bfl), 1.0);
        assert_eq!(expected_burst_frames(0.3, 4, BurstPolicy::Beb), 4.0);
        let phy = PhyProfile::two_rate_ideal();
        assert!(close(
            expected_burst(&g1(), 0.6, &phy, BurstPolicy::Bfl).unwrap(),
            2.176,
            1e-12
        ));
    }

    #[test]
    fn edcf_occupancy_examples() {
        let phy = PhyProfile::two_rate_ideal();
        let t = occupancy_edcf(&g2(), 0.95, &phy, BurstPolicy::Bfl).unwrap();
        assert!(close(t, 14.625e-3, 1e-12));
        let t = occupancy_edcf(&g1(), 1.0, &phy, BurstPolicy::Bfl).unwrap();
        assert!(close(t, phy.txop_limit, 1e-12));
        let t = occupancy_edcf(&g1(), 0.6, &phy, BurstPolicy::Beb).unwrap();
        assert!(close(t, phy.txop_limit, 1e-12));
        let t = occupancy_edcf(&g1(), 0.0, &phy, BurstPolicy::Bfl).unwrap();
        assert!(close(t, 3.75e-3, 1e-15));
    }

    #[test]
    fn dcf_table_cells() {
        let game = dcf();
        let expect = [
            (g1(), g1(), 0.96, 1.6),
            (g1(), g2(), 0.63, 1.07),
            (g2(), g1(), 1.02, 1.06),
            (g2(), g2(), 0.76, 0.8),
        ];
        for (a, b, ri, rj) in expect {
            let o = stage_payoff(&game, &a, &b).unwrap();
            assert!(close(o.i.throughput / 1e6, ri, 0.02), "{a} {b}: {o:?}");
            assert!(close(o.j.throughput / 1e6, rj, 0.02), "{a} {b}: {o:?}");
        }
        let o = stage_payoff(&game, &g2(), &g1()).unwrap();
        assert!(close(o.i.throughput, 1.6e6 * 0.95 * 2.0 / 3.0, 1e-6));
    }

    #[test]
    fn edcf_bfl_table_cells() {
        let game = edcf_bfl();
        let expect = [
            (g1(), g1(), 0.68, 2.07),
            (g1(), g2(), 0.68, 1.04),
            (g2(), g1(), 0.75, 1.62),
            (g2(), g2(), 0.75, 0.81),
        ];
        for (a, b, ri, rj) in expect {
            let o = stage_payoff(&game, &a, &b).unwrap();
            assert!(close(o.i.throughput / 1e6, ri, 0.02), "{a} {b}: {o:?}");
            assert!(close(o.j.throughput / 1e6, rj, 0.02), "{a} {b}: {o:?}");
        }
    }

    #[test]
    fn time_fair_occupancy_is_strategy_blind() {
        let game = dcf().with_discipline(Discipline::TimeFair);
        for a in [g1(), g2()] {
            for b in [g1(), g2()] {
                let o = stage_payoff(&game, &a, &b).unwrap();
                assert_eq!(o.i.occupancy, game.phy.txop_limit);
                assert!(close(o.i.share, 0.5, 1e-15));
            }
        }
    }

    #[test]
    fn payoff_matrix_dimensions() {
        let m = payoff_matrix(&dcf()).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 2));
        let single = StageGame::new(
            PhyProfile::two_rate_ideal(),
            Discipline::Dcf,
            vec![g1()],
            vec![g2()],
            AlphaTable::new([(g1(), 0.6)]).unwrap(),
            AlphaTable::new([(g2(), 1.0)]).unwrap(),
            0.0,
        )
        .unwrap();
        let m = payoff_matrix(&single).unwrap();
        assert_eq!((m.rows(), m.cols()), (1, 1));
    }

    #[test]
    fn construction_errors() {
        let phy = PhyProfile::two_rate_ideal();
        let a = AlphaTable::new([(g1(), 1.0), (g2(), 1.0)]).unwrap();
        assert_eq!(
            StageGame::new(phy.clone(), Discipline::Dcf, vec![], vec![g1()], a.clone(), a.clone(), 0.0),
            Err(GameError::EmptyStrategySet(Player::I))
        );
        assert_eq!(
            StageGame::new(phy.clone(), Discipline::Dcf, vec![g1()], vec![g1()], a.clone(), a.clone(), -1.0),
            Err(GameError::InvalidIdle(-1.0))
        );
        assert!(matches!(
            StageGame::new(phy.clone(), Discipline::Dcf, vec![g1(), g1()], vec![g1()], a.clone(), a.clone(), 0.0),
            Err(GameError::DuplicateStrategy { .. })
        ));
        let partial = AlphaTable::new([(g1(), 1.0)]).unwrap();
        assert!(matches!(
            StageGame::new(phy, Discipline::Dcf, vec![g1(), g2()], vec![g1()], partial, a, 0.0),
            Err(GameError::Channel(ChannelError::MissingStrategy(_)))
        ));
        assert!(matches!(
            stage_payoff(&dcf(), &Strategy::from_mbps(1.6, 6000), &g1()),
            Err(GameError::StrategyNotInSet { .. })
        ));
    }

    fn arb_game() -> impl Strategy_<Value = StageGame> {
        (
            prop::sample::select(vec![
                Discipline::Dcf,
                Discipline::Edcf(BurstPolicy::Bfl),
                Discipline::Edcf(BurstPolicy::Beb),
                Discipline::TimeFair,
            ]),
            0.0f64..=1.0,
            0.0f64..=1.0,
            0.0f64..=1.0,
            0.0f64..=1.0,
            0.0f64..0.01,
        )
            .prop_map(|(d, a, b, c, e, idle)| {
                let (ai_fast, ai_slow) = (a.min(b), a.max(b));
                let (aj_fast, aj_slow) = (c.min(e), c.max(e));
                StageGame::new(
                    PhyProfile::two_rate_ideal(),
                    d,
                    vec![g1(), g2()],
                    vec![g1(), g2()],
                    AlphaTable::new([(g1(), ai_fast), (g2(), ai_slow)]).unwrap(),
                    AlphaTable::new([(g1(), aj_fast), (g2(), aj_slow)]).unwrap(),
                    idle,
                )
                .unwrap()
            })
    }

    use proptest::strategy::Strategy as Strategy_;

    proptest! {
        #[test]
        fn bfl_matches_geometric_oracle(alpha in 0.0f64..=1.0, n in 1u32..12) {
            let v = expected_burst_frames(alpha, n, BurstPolicy::Bfl);
            prop_assert!((v - burst_oracle(alpha, n)).abs() < 1e-12);
        }

        #[test]
        fn outcome_identities(game in arb_game()) {
            for a in [g1(), g2()] {
                for b in [g1(), g2()] {
                    let o = stage_payoff(&game, &a, &b).unwrap();
                    prop_assert_eq!(o.cycle, o.i.occupancy + o.j.occupancy + game.t_idle);
                    let total = o.i.share + o.j.share;
                    if game.t_idle == 0.0 {
                        prop_assert!((total - 1.0).abs() < 1e-12);
                    } else {
                        prop_assert!(total < 1.0);
                    }
                    let rp = phy::r_prac(&a, game.alpha(Player::I, &a).unwrap(), &game.phy).unwrap();
                    prop_assert!((o.i.throughput - rp * o.i.share).abs() <= 1e-9 * rp.max(1.0));
                }
            }
        }

        #[test]
        fn player_swap_symmetry(game in arb_game()) {
            let swapped = game.swapped();
            for a in [g1(), g2()] {
                for b in [g1(), g2()] {
                    let o = stage_payoff(&game, &a, &b).unwrap();
                    let s = stage_payoff(&swapped, &b, &a).unwrap();
                    prop_assert_eq!(o.i, s.j);
                    prop_assert_eq!(o.j, s.i);
                }
            }
        }
    }
}
