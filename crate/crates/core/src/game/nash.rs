use super::{strictly_better, PayoffMatrix, Player};
use crate::phy::Strategy;

/// Raw two-player payoff table, row-major, `[row player, column player]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bimatrix {
    rows: usize,
    cols: usize,
    payoffs: Vec<[f64; 2]>,
}

impl Bimatrix {
    pub fn new(rows: usize, cols: usize, payoffs: Vec<[f64; 2]>) -> Self {
        assert_eq!(payoffs.len(), rows * cols, "payoff count must be rows * cols");
        Bimatrix {
            rows,
            cols,
            payoffs,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn payoff(&self, row: usize, col: usize) -> [f64; 2] {
        self.payoffs[row * self.cols + col]
    }
}

/// Cells where neither player gains strictly by deviating alone. Ties count
/// as best responses.
pub fn pure_nash_cells(m: &Bimatrix) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for r in 0..m.rows {
        for c in 0..m.cols {
            let [pi, pj] = m.payoff(r, c);
            let row_deviates = (0..m.rows).any(|r2| strictly_better(m.payoff(r2, c)[0], pi));
            let col_deviates = (0..m.cols).any(|c2| strictly_better(m.payoff(r, c2)[1], pj));
            if !row_deviates && !col_deviates {
                out.push((r, c));
            }
        }
    }
    out
}

/// For each opponent action, the indices of `player`'s best responses.
pub fn best_responses(m: &Bimatrix, player: Player) -> Vec<Vec<usize>> {
    let (own, opp) = match player {
        Player::I => (m.rows, m.cols),
        Player::J => (m.cols, m.rows),
    };
    let value = |mine: usize, theirs: usize| match player {
        Player::I => m.payoff(mine, theirs)[0],
        Player::J => m.payoff(theirs, mine)[1],
    };
    (0..opp)
        .map(|theirs| {
            (0..own)
                .filter(|&mine| {
                    let v = value(mine, theirs);
                    !(0..own).any(|alt| strictly_better(value(alt, theirs), v))
                })
                .collect()
        })
        .collect()
}

pub fn find_pure_nash(matrix: &PayoffMatrix) -> Vec<(Strategy, Strategy)> {
    pure_nash_cells(&matrix.bimatrix())
        .into_iter()
        .map(|(r, c)| (matrix.strategies_i[r], matrix.strategies_j[c]))
        .collect()
}
