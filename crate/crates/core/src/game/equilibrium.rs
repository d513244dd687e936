use serde::Serialize;

use super::{
    best_responses, payoff_eq, payoff_matrix, pure_nash_cells, strictly_better, GameError, Outcome,
    PayoffMatrix, Player, StageGame,
};
use crate::channel::{alpha_lookup, AlphaTable};
use crate::phy::{r_prac, PhyProfile, Strategy};

/// Strategy with the highest practically achievable throughput. Ties go to
/// the higher rate, then the larger payload.
pub fn most_efficient_strategy(
    strategies: &[Strategy],
    alpha: &AlphaTable,
    phy: &PhyProfile,
) -> Result<Strategy, GameError> {
    let mut best: Option<(Strategy, f64)> = None;
    for s in strategies {
        let v = r_prac(s, alpha_lookup(alpha, s)?, phy)?;
        best = match best {
            None => Some((*s, v)),
            Some((b, bv)) => {
                let replace = strictly_better(v, bv)
                    || (payoff_eq(v, bv) && (s.rate_bps, s.payload_bits) > (b.rate_bps, b.payload_bits));
                if replace {
                    Some((*s, v))
                } else {
                    Some((b, bv))
                }
            }
        };
    }
    best.map(|(s, _)| s)
        .ok_or_else(|| GameError::Precondition("empty strategy set".into()))
}

/// Largest `r_prac` over a node's strategy set, bits/s.
pub fn max_r_prac(game: &StageGame, player: Player) -> Result<f64, GameError> {
    let mut best = f64::NEG_INFINITY;
    for s in game.strategies(player) {
        best = best.max(r_prac(s, game.alpha(player, s)?, &game.phy)?);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpeClass {
    UniqueDesirable,
    UniqueUndesirable,
    MultipleNe,
    None,
}

impl SpeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SpeClass::UniqueDesirable => "unique-desirable",
            SpeClass::UniqueUndesirable => "unique-undesirable",
            SpeClass::MultipleNe => "multiple-NE",
            SpeClass::None => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NashEquilibrium {
    pub cell: (usize, usize),
    pub strategies: (Strategy, Strategy),
    pub outcome: Outcome,
    /// Whether each node's strategy attains its maximum `r_prac`.
    pub efficient: [bool; 2],
    pub desirable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub matrix: PayoffMatrix,
    pub nash: Vec<NashEquilibrium>,
    pub unique: bool,
    pub spe_class: SpeClass,
    /// Per player, per opponent action: indices of best responses.
    pub best_responses: [Vec<Vec<usize>>; 2],
    pub most_efficient: [Strategy; 2],
    pub max_r_prac: [f64; 2],
}

impl EquilibriumReport {
    pub fn unique_ne(&self) -> Option<&NashEquilibrium> {
        if self.unique {
            self.nash.first()
        } else {
            None
        }
    }
}

fn is_efficient(game: &StageGame, player: Player, s: &Strategy, max: f64) -> Result<bool, GameError> {
    let v = r_prac(s, game.alpha(player, s)?, &game.phy)?;
    Ok(!strictly_better(max, v))
}

pub fn classify_equilibria(game: &StageGame) -> Result<EquilibriumReport, GameError> {
    let matrix = payoff_matrix(game)?;
    let bim = matrix.bimatrix();
    let max = [max_r_prac(game, Player::I)?, max_r_prac(game, Player::J)?];
    let mut nash = Vec::new();
    for (r, c) in pure_nash_cells(&bim) {
        let (gi, gj) = (matrix.strategies_i[r], matrix.strategies_j[c]);
        let efficient = [
            is_efficient(game, Player::I, &gi, max[0])?,
            is_efficient(game, Player::J, &gj, max[1])?,
        ];
        nash.push(NashEquilibrium {
            cell: (r, c),
            strategies: (gi, gj),
            outcome: *matrix.cell(r, c),
            efficient,
            desirable: efficient[0] && efficient[1],
        });
    }
    let spe_class = match nash.as_slice() {
        [] => SpeClass::None,
        [ne] if ne.desirable => SpeClass::UniqueDesirable,
        [_] => SpeClass::UniqueUndesirable,
        _ => SpeClass::MultipleNe,
    };
    let most_efficient = [
        most_efficient_strategy(game.strategies(Player::I), game.alpha_table(Player::I), &game.phy)?,
        most_efficient_strategy(game.strategies(Player::J), game.alpha_table(Player::J), &game.phy)?,
    ];
    Ok(EquilibriumReport {
        unique: nash.len() == 1,
        spe_class,
        best_responses: [best_responses(&bim, Player::I), best_responses(&bim, Player::J)],
        matrix,
        nash,
        most_efficient,
        max_r_prac: max,
    })
}

/// A node that plays a less efficient strategy at the unique equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub player: Player,
    pub ne_strategy: Strategy,
    pub forgone: Strategy,
    pub ne_r_prac: f64,
    pub forgone_r_prac: f64,
}

pub fn undesirability_witness(game: &StageGame) -> Result<Option<Witness>, GameError> {
    let matrix = payoff_matrix(game)?;
    let cells = pure_nash_cells(&matrix.bimatrix());
    let [(r, c)] = cells.as_slice() else {
        return Ok(None);
    };
    let ne = [matrix.strategies_i[*r], matrix.strategies_j[*c]];
    for player in Player::BOTH {
        let s = ne[player.index()];
        let ne_r = r_prac(&s, game.alpha(player, &s)?, &game.phy)?;
        let forgone = most_efficient_strategy(
            game.strategies(player),
            game.alpha_table(player),
            &game.phy,
        )?;
        let forgone_r = r_prac(&forgone, game.alpha(player, &forgone)?, &game.phy)?;
        if strictly_better(forgone_r, ne_r) {
            return Ok(Some(Witness {
                player,
                ne_strategy: s,
                forgone,
                ne_r_prac: ne_r,
                forgone_r_prac: forgone_r,
            }));
        }
    }
    Ok(None)
}
