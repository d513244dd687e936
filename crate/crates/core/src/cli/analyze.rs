use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::scenario::{Diag, ScenarioFile};
use super::{ensure_dir, io_err, CliError};
use crate::game::{classify_equilibria, undesirability_witness, Player, StageGame};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellRecord {
    pub i: String,
    pub j: String,
    pub throughput_i_mbps: f64,
    pub throughput_j_mbps: f64,
    pub share_i: f64,
    pub share_j: f64,
    pub aggregate_mbps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NashRecord {
    pub i: String,
    pub j: String,
    pub throughput_i_mbps: f64,
    pub throughput_j_mbps: f64,
    pub share_i: f64,
    pub share_j: f64,
    pub aggregate_mbps: f64,
    pub efficient: [bool; 2],
    pub desirable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficientRecord {
    pub strategy: String,
    pub r_prac_mbps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessRecord {
    pub node: String,
    pub ne_strategy: String,
    pub forgone: String,
    pub ne_r_prac_mbps: f64,
    pub forgone_r_prac_mbps: f64,
}

/// Machine-readable result of `analyze`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeRecord {
    pub scenario: String,
    pub discipline: String,
    pub t_idle_s: f64,
    pub nodes: [String; 2],
    pub alpha_i: Vec<(String, f64)>,
    pub alpha_j: Vec<(String, f64)>,
    pub matrix: Vec<CellRecord>,
    pub nash: Vec<NashRecord>,
    pub spe_class: String,
    pub most_efficient: [EfficientRecord; 2],
    pub efficient_profile_aggregate_mbps: f64,
    pub witness: Option<WitnessRecord>,
}

impl AnalyzeRecord {
    pub fn unique_ne(&self) -> Option<&NashRecord> {
        match self.nash.as_slice() {
            [ne] => Some(ne),
            _ => None,
        }
    }
}

fn diag_err(d: Diag, source: Option<&str>) -> CliError {
    CliError::Validation(d.render(source))
}

fn game_err(e: crate::game::GameError) -> Diag {
    Diag {
        path: super::locate::JsonPath::root(),
        msg: e.to_string(),
    }
}

pub(crate) fn analysis(sc: &ScenarioFile) -> Result<(StageGame, AnalyzeRecord), Diag> {
    let game = sc.build_game()?;
    let rep = classify_equilibria(&game).map_err(game_err)?;
    let name = |s: &crate::phy::Strategy| sc.strategy_name(s);
    let m = &rep.matrix;
    let mut matrix = Vec::new();
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            let o = m.cell(r, c);
            matrix.push(CellRecord {
                i: name(&m.strategies_i[r]),
                j: name(&m.strategies_j[c]),
                throughput_i_mbps: o.i.throughput / 1e6,
                throughput_j_mbps: o.j.throughput / 1e6,
                share_i: o.i.share,
                share_j: o.j.share,
                aggregate_mbps: o.aggregate_throughput() / 1e6,
            });
        }
    }
    let nash = rep
        .nash
        .iter()
        .map(|ne| NashRecord {
            i: name(&ne.strategies.0),
            j: name(&ne.strategies.1),
            throughput_i_mbps: ne.outcome.i.throughput / 1e6,
            throughput_j_mbps: ne.outcome.j.throughput / 1e6,
            share_i: ne.outcome.i.share,
            share_j: ne.outcome.j.share,
            aggregate_mbps: ne.outcome.aggregate_throughput() / 1e6,
            efficient: ne.efficient,
            desirable: ne.desirable,
        })
        .collect();
    let eff = m
        .cell_for(&rep.most_efficient[0], &rep.most_efficient[1])
        .map_or(f64::NAN, |o| o.aggregate_throughput() / 1e6);
    let node_name = |p: Player| sc.nodes[p.index()].name.clone();
    let witness = undesirability_witness(&game).map_err(game_err)?.map(|w| WitnessRecord {
        node: node_name(w.player),
        ne_strategy: name(&w.ne_strategy),
        forgone: name(&w.forgone),
        ne_r_prac_mbps: w.ne_r_prac / 1e6,
        forgone_r_prac_mbps: w.forgone_r_prac / 1e6,
    });
    let alpha = |p: Player| -> Vec<(String, f64)> {
        game.alpha_table(p).iter().map(|(s, a)| (name(s), *a)).collect()
    };
    let record = AnalyzeRecord {
        scenario: sc.name.clone(),
        discipline: game.discipline.to_string(),
        t_idle_s: game.t_idle,
        nodes: [node_name(Player::I), node_name(Player::J)],
        alpha_i: alpha(Player::I),
        alpha_j: alpha(Player::J),
        matrix,
        nash,
        spe_class: rep.spe_class.as_str().to_string(),
        most_efficient: [0, 1].map(|k| EfficientRecord {
            strategy: name(&rep.most_efficient[k]),
            r_prac_mbps: rep.max_r_prac[k] / 1e6,
        }),
        efficient_profile_aggregate_mbps: eff,
        witness,
    };
    Ok((game, record))
}

pub fn render_text(rec: &AnalyzeRecord) -> String {
    let mut t = String::new();
    let [ni, nj] = &rec.nodes;
    let _ = writeln!(t, "scenario:    {}", rec.scenario);
    let _ = writeln!(t, "discipline:  {}", rec.discipline);
    let _ = writeln!(t, "t_idle:      {:.1} us", rec.t_idle_s * 1e6);
    let fmt_alpha = |a: &[(String, f64)]| {
        a.iter().map(|(s, v)| format!("{s}={v}")).collect::<Vec<_>>().join(" ")
    };
    let _ = writeln!(t, "alpha {ni}:     {}", fmt_alpha(&rec.alpha_i));
    let _ = writeln!(t, "alpha {nj}:     {}", fmt_alpha(&rec.alpha_j));
    let _ = writeln!(t);
    let _ = writeln!(t, "payoff matrix, Mbps ({ni} / {nj}):");
    for c in &rec.matrix {
        let _ = writeln!(
            t,
            "  {ni}={:<8} {nj}={:<8} {:>7.3} / {:<7.3} aggregate {:.3}",
            c.i, c.j, c.throughput_i_mbps, c.throughput_j_mbps, c.aggregate_mbps
        );
    }
    let _ = writeln!(t);
    let _ = writeln!(t, "pure Nash equilibria: {}", rec.nash.len());
    for ne in &rec.nash {
        let _ = writeln!(
            t,
            "  ({}, {})  {:.3} / {:.3} Mbps, aggregate {:.3} Mbps, {}",
            ne.i,
            ne.j,
            ne.throughput_i_mbps,
            ne.throughput_j_mbps,
            ne.aggregate_mbps,
            if ne.desirable { "desirable" } else { "undesirable" }
        );
    }
    let _ = writeln!(t, "classification: {}", rec.spe_class);
    let _ = writeln!(
        t,
        "most efficient: {ni} {} ({:.3} Mbps), {nj} {} ({:.3} Mbps); aggregate {:.3} Mbps",
        rec.most_efficient[0].strategy,
        rec.most_efficient[0].r_prac_mbps,
        rec.most_efficient[1].strategy,
        rec.most_efficient[1].r_prac_mbps,
        rec.efficient_profile_aggregate_mbps
    );
    match &rec.witness {
        Some(w) => {
            let _ = writeln!(
                t,
                "witness: node {} plays {} (r_prac {:.3} Mbps) instead of {} (r_prac {:.3} Mbps)",
                w.node, w.ne_strategy, w.ne_r_prac_mbps, w.forgone, w.forgone_r_prac_mbps
            );
        }
        None => {
            let _ = writeln!(t, "witness: none");
        }
    }
    t
}

/// Writes `report.txt` and `report.json` into `out`.
pub fn analyze(sc: &ScenarioFile, source: Option<&str>, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let (_, rec) = analysis(sc).map_err(|d| diag_err(d, source))?;
    ensure_dir(out)?;
    let txt = out.join("report.txt");
    std::fs::write(&txt, render_text(&rec)).map_err(|e| io_err(&txt, e))?;
    let json = out.join("report.json");
    let body = serde_json::to_string_pretty(&rec).expect("record serializes");
    std::fs::write(&json, body + "\n").map_err(|e| io_err(&json, e))?;
    Ok(vec![txt, json])
}
