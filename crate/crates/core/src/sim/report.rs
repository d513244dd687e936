use std::io::Write;

use serde::Serialize;

use crate::phy::Strategy;

/// Per-node totals over the whole run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeSummary {
    pub name: String,
    /// Delivered bits per second of elapsed time.
    pub throughput: f64,
    /// Fraction of elapsed time spent transmitting.
    pub share: f64,
    pub loss_rate: f64,
    pub txops: u64,
    pub collisions: u64,
    pub frames_attempted: u64,
    pub frames_succeeded: u64,
    pub channel_time_ns: u64,
    pub delivered_bits: u64,
    pub final_strategy: Strategy,
    pub cw_min_effective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalRow {
    /// End of the interval, seconds.
    pub time_s: f64,
    pub node: String,
    pub throughput_mbps: f64,
    pub share: f64,
    pub loss_rate: f64,
    pub cw_min_eff: f64,
    pub strategy: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRecord {
    pub node: String,
    pub start_s: f64,
    pub incumbent: Strategy,
    pub chosen: Strategy,
    /// Measured throughput per probed strategy, bits/s.
    pub measured: Vec<(Strategy, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestResponseOutcome {
    pub converged: bool,
    pub epochs: u32,
    pub converged_at_s: Option<f64>,
    pub final_strategies: Vec<Strategy>,
    pub history: Vec<EpochRecord>,
    /// Per-node throughput (bits/s) measured from convergence to the end.
    pub post_convergence_throughput: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub nodes: Vec<NodeSummary>,
    pub elapsed_ns: u64,
    pub idle_ns: u64,
    pub collision_ns: u64,
    pub intervals: Vec<IntervalRow>,
    pub best_response: Option<BestResponseOutcome>,
}

impl SimReport {
    pub fn elapsed(&self) -> f64 {
        self.elapsed_ns as f64 * 1e-9
    }

    pub fn aggregate_throughput(&self) -> f64 {
        self.nodes.iter().map(|n| n.throughput).sum()
    }

    /// Idle plus collision time per contention round, where a round is one
    /// TXOP per node on average. Seconds.
    pub fn mean_idle_per_round(&self) -> f64 {
        let txops: u64 = self.nodes.iter().map(|n| n.txops).sum();
        if txops == 0 {
            return 0.0;
        }
        let rounds = txops as f64 / self.nodes.len() as f64;
        (self.idle_ns + self.collision_ns) as f64 * 1e-9 / rounds
    }

    pub fn node(&self, name: &str) -> Option<&NodeSummary> {
        self.nodes.iter().find(|n| n.name == name)
    }

    pub fn write_intervals_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.intervals {
            w.serialize(row)?;
        }
        if self.intervals.is_empty() {
            w.write_record(["time_s", "node", "throughput_mbps", "share", "loss_rate", "cw_min_eff", "strategy"])?;
        }
        w.flush()?;
        Ok(())
    }
}
