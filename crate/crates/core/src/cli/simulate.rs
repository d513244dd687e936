use std::path::{Path, PathBuf};

use serde::Serialize;

use super::scenario::ScenarioFile;
use super::{ensure_dir, io_err, CliError};
use crate::game::{stage_payoff, Discipline};
use crate::sim::{run_sim, SimReport};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeRecord {
    pub name: String,
    pub throughput_mbps: f64,
    pub share: f64,
    pub loss_rate: f64,
    pub txops: u64,
    pub collisions: u64,
    pub frames_attempted: u64,
    pub frames_succeeded: u64,
    pub final_strategy: String,
    pub cw_min_eff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestResponseRecord {
    pub converged: bool,
    pub epochs: u32,
    pub converged_at_s: Option<f64>,
    pub final_strategies: Vec<String>,
    pub post_convergence_throughput_mbps: Option<Vec<f64>>,
}

/// Analytic throughput of the final strategy pair, with the game's idle
/// time set to the idle time the simulation measured per round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionRecord {
    pub t_idle_s: f64,
    pub throughput_mbps: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub scenario: String,
    pub seed: u64,
    pub discipline: String,
    pub elapsed_s: f64,
    pub idle_s: f64,
    pub collision_s: f64,
    pub mean_idle_per_round_s: f64,
    pub aggregate_throughput_mbps: f64,
    pub nodes: Vec<NodeRecord>,
    pub best_response: Option<BestResponseRecord>,
    pub prediction: Option<PredictionRecord>,
}

pub(crate) fn summarize(sc: &ScenarioFile, rep: &SimReport) -> SimSummary {
    let name = |s: &crate::phy::Strategy| sc.strategy_name(s);
    let prediction = predict(sc, rep);
    SimSummary {
        scenario: sc.name.clone(),
        seed: sc.seed(),
        discipline: sc.discipline.clone(),
        elapsed_s: rep.elapsed(),
        idle_s: rep.idle_ns as f64 * 1e-9,
        collision_s: rep.collision_ns as f64 * 1e-9,
        mean_idle_per_round_s: rep.mean_idle_per_round(),
        aggregate_throughput_mbps: rep.aggregate_throughput() / 1e6,
        nodes: rep
            .nodes
            .iter()
            .map(|n| NodeRecord {
                name: n.name.clone(),
                throughput_mbps: n.throughput / 1e6,
                share: n.share,
                loss_rate: n.loss_rate,
                txops: n.txops,
                collisions: n.collisions,
                frames_attempted: n.frames_attempted,
                frames_succeeded: n.frames_succeeded,
                final_strategy: name(&n.final_strategy),
                cw_min_eff: n.cw_min_effective,
            })
            .collect(),
        best_response: rep.best_response.as_ref().map(|b| BestResponseRecord {
            converged: b.converged,
            epochs: b.epochs,
            converged_at_s: b.converged_at_s,
            final_strategies: b.final_strategies.iter().map(name).collect(),
            post_convergence_throughput_mbps: b
                .post_convergence_throughput
                .as_ref()
                .map(|v| v.iter().map(|x| x / 1e6).collect()),
        }),
        prediction,
    }
}

fn predict(sc: &ScenarioFile, rep: &SimReport) -> Option<PredictionRecord> {
    if rep.nodes.len() != 2 {
        return None;
    }
    let game = sc.build_game().ok()?;
    if game.discipline == Discipline::TimeFair {
        // DCF* framing in the simulator is not the analytic TXOP model
        return None;
    }
    let t_idle = rep.mean_idle_per_round();
    let game = game.with_idle(t_idle).ok()?;
    let out = stage_payoff(&game, &rep.nodes[0].final_strategy, &rep.nodes[1].final_strategy).ok()?;
    Some(PredictionRecord {
        t_idle_s: t_idle,
        throughput_mbps: [out.i.throughput / 1e6, out.j.throughput / 1e6],
    })
}

/// Writes `intervals.csv` and `summary.json` into `out`.
pub fn simulate(sc: &ScenarioFile, source: Option<&str>, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let scenario = sc.build_sim().map_err(|d| CliError::Validation(d.render(source)))?;
    let rep = run_sim(&scenario).map_err(|e| CliError::Validation(e.to_string()))?;
    ensure_dir(out)?;
    let csv_path = out.join("intervals.csv");
    let file = std::fs::File::create(&csv_path).map_err(|e| io_err(&csv_path, e))?;
    rep.write_intervals_csv(file).map_err(|e| io_err(&csv_path, e))?;
    let json = out.join("summary.json");
    let body = serde_json::to_string_pretty(&summarize(sc, &rep)).expect("summary serializes");
    std::fs::write(&json, body + "\n").map_err(|e| io_err(&json, e))?;
    Ok(vec![csv_path, json])
}
