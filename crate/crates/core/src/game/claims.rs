//! Checkers for the structural inequalities behind the DCF and EDCF results:
//! rate monotonicity of time shares, strict dominance, and the ratio test
//! for a unique equilibrium when the opponent has a dominant strategy.

use serde::Serialize;

use super::{
    occupancy, stage_payoff, strictly_better, Discipline, GameError, Player, StageGame,
};
use crate::phy::{gamma, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum MonotonicityCheck {
    /// `g_fast == g_slow`: both inequalities collapse to equalities.
    NotApplicable,
    Evaluated {
        /// `f_i(g_fast, g_opp) < f_i(g_slow, g_opp)`
        share: Inequality,
        /// `gamma(g_fast) f_i(g_fast, g_opp) > gamma(g_slow) f_i(g_slow, g_opp)`
        weighted: Inequality,
    },
}

impl MonotonicityCheck {
    pub fn holds(&self) -> Option<bool> {
        match self {
            MonotonicityCheck::NotApplicable => None,
            MonotonicityCheck::Evaluated { share, weighted } => Some(share.holds && weighted.holds),
        }
    }
}

/// Under DCF, a faster rate at equal payload lowers node i's time share but
/// raises `gamma * share`. Evaluated from occupancies, independent of alpha.
pub fn check_claim_monotonicity(
    game: &StageGame,
    g_fast: &Strategy,
    g_slow: &Strategy,
    g_opp: &Strategy,
) -> Result<MonotonicityCheck, GameError> {
    if game.discipline != Discipline::Dcf {
        return Err(GameError::Precondition(format!(
            "monotonicity claims apply to DCF, game uses {}",
            game.discipline
        )));
    }
    if g_fast.payload_bits != g_slow.payload_bits {
        return Err(GameError::Precondition(
            "compared strategies must share a payload".into(),
        ));
    }
    if g_fast == g_slow {
        return Ok(MonotonicityCheck::NotApplicable);
    }
    if g_fast.rate_bps < g_slow.rate_bps {
        return Err(GameError::Precondition(format!(
            "{g_fast} must use a higher rate than {g_slow}"
        )));
    }
    let phy = &game.phy;
    // alpha does not enter DCF occupancy
    let t = |s: &Strategy| occupancy(Discipline::Dcf, s, 1.0, phy).map(|o| o.time);
    let t_opp = t(g_opp)?;
    let share = |s: &Strategy| -> Result<f64, GameError> {
        let ti = t(s)?;
        Ok(ti / (ti + t_opp + game.t_idle))
    };
    let (f_fast, f_slow) = (share(g_fast)?, share(g_slow)?);
    let (w_fast, w_slow) = (gamma(g_fast, phy)? * f_fast, gamma(g_slow, phy)? * f_slow);
    Ok(MonotonicityCheck::Evaluated {
        share: Inequality {
            lhs: f_fast,
            rhs: f_slow,
            holds: f_fast < f_slow,
        },
        weighted: Inequality {
            lhs: w_fast,
            rhs: w_slow,
            holds: w_fast > w_slow,
        },
    })
}

/// True iff `candidate` strictly beats every other strategy of `player`
/// against every opponent strategy.
pub fn check_dominant_strategy(
    game: &StageGame,
    player: Player,
    candidate: &Strategy,
) -> Result<bool, GameError> {
    game.check_member(player, candidate)?;
    let payoff = |own: &Strategy, opp: &Strategy| -> Result<f64, GameError> {
        Ok(match player {
            Player::I => stage_payoff(game, own, opp)?.i.throughput,
            Player::J => stage_payoff(game, opp, own)?.j.throughput,
        })
    };
    for alt in game.strategies(player).iter().filter(|s| *s != candidate) {
        for opp in game.strategies(player.other()) {
            if !strictly_better(payoff(candidate, opp)?, payoff(alt, opp)?) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioCheck {
    pub alternative: Strategy,
    /// `alpha* gamma* t* / (alpha' gamma' t')`; reduces to `alpha*/alpha'`
    /// under DCF with equal payloads and to `alpha* b* / (alpha' b')` under
    /// EDCF.
    pub lhs: f64,
    /// `T(g_i*, g_j*) / T(g_i', g_j*)`
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniqueNeCheck {
    pub holds: bool,
    pub alternatives: Vec<RatioCheck>,
}

/// Ratio condition for `(g_i_star, g_j_star)` being the unique equilibrium,
/// given that `g_j_star` dominates for node j.
pub fn check_unique_ne_condition(
    game: &StageGame,
    g_i_star: &Strategy,
    g_j_star: &Strategy,
) -> Result<UniqueNeCheck, GameError> {
    game.check_member(Player::I, g_i_star)?;
    if !check_dominant_strategy(game, Player::J, g_j_star)? {
        return Err(GameError::Precondition(format!(
            "{g_j_star} is not a dominant strategy for node j"
        )));
    }
    let phy = &game.phy;
    let t_j = game.occupancy_of(Player::J, g_j_star)?.time;
    // alpha * gamma * t for node i, and the round length
    let terms = |s: &Strategy| -> Result<(f64, f64), GameError> {
        let t_i = game.occupancy_of(Player::I, s)?.time;
        let weight = game.alpha(Player::I, s)? * gamma(s, phy)? * t_i;
        Ok((weight, t_i + t_j + game.t_idle))
    };
    let (w_star, cycle_star) = terms(g_i_star)?;
    let mut alternatives = Vec::new();
    for alt in game.strategies(Player::I).iter().filter(|s| *s != g_i_star) {
        let (w_alt, cycle_alt) = terms(alt)?;
        let lhs = if w_alt == 0.0 { f64::INFINITY } else { w_star / w_alt };
        let rhs = cycle_star / cycle_alt;
        // cross-multiplied to stay finite when w_alt == 0
        let holds = strictly_better(w_star * cycle_alt, w_alt * cycle_star);
        alternatives.push(RatioCheck {
            alternative: *alt,
            lhs,
            rhs,
            holds,
        });
    }
    Ok(UniqueNeCheck {
        holds: alternatives.iter().all(|a| a.holds),
        alternatives,
    })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{find_pure_nash, payoff_matrix, BurstPolicy};
    use super::*;
    use crate::channel::AlphaTable;
    use crate::phy::PhyProfile;

    #[test]
    fn monotonicity_on_fixture() {
        let check = check_claim_monotonicity(&dcf(), &g1(), &g2(), &g1()).unwrap();
        let MonotonicityCheck::Evaluated { share, weighted } = check else {
            panic!("expected evaluation");
        };
        assert!((share.lhs - 0.5).abs() < 1e-12);
        assert!((share.rhs - 2.0 / 3.0).abs() < 1e-12);
        assert!(share.holds);
        assert!((weighted.lhs - 1.6e6).abs() < 1e-6);
        assert!((weighted.rhs - 1.6e6 * 2.0 / 3.0).abs() < 1e-6);
        assert!(weighted.holds);
    }

    #[test]
    fn monotonicity_degenerate_and_errors() {
        assert_eq!(
            check_claim_monotonicity(&dcf(), &g1(), &g1(), &g2()),
            Ok(MonotonicityCheck::NotApplicable)
        );
        assert!(check_claim_monotonicity(&dcf(), &g2(), &g1(), &g1()).is_err());
        assert!(check_claim_monotonicity(&edcf_bfl(), &g1(), &g2(), &g1()).is_err());
        assert!(check_claim_monotonicity(&dcf(), &g1(), &Strategy::from_mbps(1.6, 6000), &g1()).is_err());
    }

    #[test]
    fn dominance() {
        assert_eq!(check_dominant_strategy(&dcf(), Player::J, &g1()), Ok(true));
        assert_eq!(check_dominant_strategy(&dcf(), Player::I, &g1()), Ok(false));
        let single = StageGame::new(
            PhyProfile::two_rate_ideal(),
            Discipline::Dcf,
            vec![g2()],
            vec![g1(), g2()],
            AlphaTable::new([(g2(), 0.1)]).unwrap(),
            AlphaTable::new([(g1(), 1.0), (g2(), 1.0)]).unwrap(),
            0.0,
        )
        .unwrap();
        assert_eq!(check_dominant_strategy(&single, Player::I, &g2()), Ok(true));
    }

    #[test]
    fn unique_ne_ratio_on_dcf_fixture() {
        let check = check_unique_ne_condition(&dcf(), &g2(), &g1()).unwrap();
        assert!(check.holds);
        let alt = &check.alternatives[0];
        assert_eq!(alt.alternative, g1());
        assert!((alt.lhs - 0.95 / 0.6).abs() < 1e-12);
        assert!((alt.rhs - 1.5).abs() < 1e-12);
        // the efficient strategy is not an equilibrium for i
        assert!(!check_unique_ne_condition(&dcf(), &g1(), &g1()).unwrap().holds);
        // node i has no dominant strategy
        assert!(check_unique_ne_condition(&dcf().swapped(), &g1(), &g1()).is_err());
    }

    #[test]
    fn unique_ne_ratio_on_bfl_fixture() {
        let game = edcf_bfl();
        let check = check_unique_ne_condition(&game, &g2(), &g1()).unwrap();
        assert!(check.holds);
        assert_eq!(find_pure_nash(&payoff_matrix(&game).unwrap()), vec![(g2(), g1())]);
        let alt = &check.alternatives[0];
        // alpha* b* / (alpha' b') = 0.95 * 1.95 / (0.6 * 2.176)
        assert!((alt.lhs - 0.95 * 1.95 / (0.6 * 2.176)).abs() < 1e-9);
    }

    #[test]
    fn lossless_top_rate_holds_everywhere() {
        let game = two_rate_game(Discipline::Edcf(BurstPolicy::Beb), 1.0, 1.0);
        assert!(check_dominant_strategy(&game, Player::I, &g1()).unwrap());
        let game = two_rate_game(Discipline::Dcf, 1.0, 1.0);
        assert!(check_unique_ne_condition(&game, &g1(), &g1()).unwrap().holds);
    }
}
