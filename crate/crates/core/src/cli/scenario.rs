//! Scenario documents.
//!
//! A scenario is a JSON object. Units are spelled out in key names
//! (`rate_mbps`, `time_overhead_us`, `txop_limit_ms`, ...). Unknown keys are
//! rejected. See `scenarios/` for complete examples.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::locate::{locate, JsonPath};
use super::CliError;
use crate::channel::{dot11b_thresholds, AlphaTable, ChannelError, FadingChannel, LinkModel, PathLoss};
use crate::game::{Discipline, StageGame};
use crate::phy::{mbps_to_bps, PhyProfile, Strategy};
use crate::sim::{BestResponseConfig, DcfStarConfig, NodeConfig, SimScenario, StrategyPolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub phy: PhySpec,
    pub discipline: String,
    pub strategies: BTreeMap<String, StrategySpec>,
    pub nodes: Vec<NodeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radio: Option<RadioSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game: Option<GameSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dcf_star: Option<DcfStarSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_response: Option<BestResponseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

/// A named preset, optionally with individual fields overridden, or a fully
/// explicit profile.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates_mbps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bit_overhead: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_overhead_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot_time_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cw_min: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cw_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub txop_limit_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_payload_bits: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpec {
    pub rate_mbps: f64,
    pub payload_bits: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicySpec {
    #[default]
    Fixed,
    BestResponse,
    AutoRate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub name: String,
    /// Names from the top-level `strategies` map. The node's strategy set in
    /// the game and its candidates under best response.
    pub strategies: Vec<String>,
    #[serde(default)]
    pub policy: PolicySpec,
    /// Fixed strategy, or the starting one under best response. Defaults to
    /// the first entry of `strategies`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    /// Success fraction per strategy name. Mutually exclusive with the
    /// fading keys.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_rx_power_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence_samples: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_power_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_loss_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_distance_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_loss_db: Option<f64>,
    /// Receive threshold per rate; keys are rates in Mbps, e.g. `"5.5"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds_dbm: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    #[serde(default)]
    pub t_idle_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    pub duration_s: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_interval_s: Option<f64>,
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DcfStarSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cw_lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cw_hi: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BestResponseSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settle_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_window_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_epochs: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switch_margin: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Equilibrium analysis at every grid point.
    #[default]
    Analyze,
    /// One simulation with all nodes per grid point.
    Simulate,
    /// Each node simulated alone per grid point.
    Isolated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub param: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub kind: SweepKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub axes: Vec<AxisSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

/// A semantic problem tied to a location in the document.
#[derive(Debug, Clone, PartialEq)]
pub struct Diag {
    pub path: JsonPath,
    pub msg: String,
}

impl Diag {
    fn new(path: JsonPath, msg: impl Into<String>) -> Self {
        Diag {
            path,
            msg: msg.into(),
        }
    }

    /// Renders with a line number when the path can be found in `source`.
    pub fn render(&self, source: Option<&str>) -> String {
        match source.and_then(|s| locate(s, &self.path)) {
            Some((line, col)) => format!("line {line}, column {col} ({}): {}", self.path, self.msg),
            None => format!("{}: {}", self.path, self.msg),
        }
    }
}

type DResult<T> = Result<T, Diag>;

fn root() -> JsonPath {
    JsonPath::root()
}

fn finite_pos(v: f64, path: JsonPath, what: &str) -> DResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Diag::new(path, format!("{what} must be a positive number, got {v}")))
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            CliError::Validation(format!(
                "schema error at line {}, column {}: {}",
                e.line(),
                e.column(),
                strip_position(&e.to_string())
            ))
        })
    }

    pub fn load(path: &Path) -> Result<(Self, String), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read scenario {}: {e}", path.display())))?;
        let sc = Self::parse(&text).map_err(|e| e.context(&path.display().to_string()))?;
        Ok((sc, text))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn phy_profile(&self) -> DResult<PhyProfile> {
        let p = &self.phy;
        let path = root().key("phy");
        let mut prof = match p.preset.as_deref() {
            Some("dot11b") => PhyProfile::dot11b(),
            Some("two_rate_ideal") => PhyProfile::two_rate_ideal(),
            Some(other) => {
                return Err(Diag::new(
                    path.key("preset"),
                    format!("unknown preset `{other}` (expected dot11b or two_rate_ideal)"),
                ))
            }
            None => {
                let missing: Vec<&str> = [
                    ("rates_mbps", p.rates_mbps.is_none()),
                    ("bit_overhead", p.bit_overhead.is_none()),
                    ("time_overhead_us", p.time_overhead_us.is_none()),
                    ("slot_time_us", p.slot_time_us.is_none()),
                    ("cw_min", p.cw_min.is_none()),
                    ("cw_max", p.cw_max.is_none()),
                    ("txop_limit_ms", p.txop_limit_ms.is_none()),
                    ("max_payload_bits", p.max_payload_bits.is_none()),
                ]
                .into_iter()
                .filter(|(_, m)| *m)
                .map(|(k, _)| k)
                .collect();
                if !missing.is_empty() {
                    return Err(Diag::new(
                        path,
                        format!("without a preset these keys are required: {}", missing.join(", ")),
                    ));
                }
                PhyProfile::dot11b()
            }
        };
        if let Some(r) = &p.rates_mbps {
            prof.rates_bps = r.iter().map(|&m| mbps_to_bps(m)).collect();
        }
        if let Some(v) = p.bit_overhead {
            prof.bit_overhead = v;
        }
        if let Some(v) = p.time_overhead_us {
            prof.time_overhead = v * 1e-6;
        }
        if let Some(v) = p.slot_time_us {
            prof.slot_time = v * 1e-6;
        }
        if let Some(v) = p.cw_min {
            prof.cw_min = v;
        }
        if let Some(v) = p.cw_max {
            prof.cw_max = v;
        }
        if let Some(v) = p.txop_limit_ms {
            prof.txop_limit = v * 1e-3;
        }
        if let Some(v) = p.max_payload_bits {
            prof.max_payload_bits = v;
        }
        prof.validate().map_err(|e| Diag::new(path, e.to_string()))?;
        Ok(prof)
    }

    pub fn discipline(&self) -> DResult<Discipline> {
        self.discipline
            .parse()
            .map_err(|e: String| Diag::new(root().key("discipline"), e))
    }

    pub fn strategy(&self, name: &str, path: JsonPath, phy: &PhyProfile) -> DResult<Strategy> {
        let spec = self
            .strategies
            .get(name)
            .ok_or_else(|| Diag::new(path.clone(), format!("unknown strategy `{name}`")))?;
        let s = Strategy::from_mbps(spec.rate_mbps, spec.payload_bits);
        phy.check_strategy(&s)
            .map_err(|e| Diag::new(root().key("strategies").key(name), e.to_string()))?;
        Ok(s)
    }

    /// Name under which a strategy is declared; falls back to its display form.
    pub fn strategy_name(&self, s: &Strategy) -> String {
        self.strategies
            .iter()
            .find(|(_, spec)| Strategy::from_mbps(spec.rate_mbps, spec.payload_bits) == *s)
            .map(|(n, _)| n.clone())
            .unwrap_or_else(|| s.to_string())
    }

    fn node_path(k: usize) -> JsonPath {
        root().key("nodes").index(k)
    }

    pub fn node_strategies(&self, k: usize, phy: &PhyProfile) -> DResult<Vec<Strategy>> {
        let node = &self.nodes[k];
        let path = Self::node_path(k).key("strategies");
        if node.strategies.is_empty() {
            return Err(Diag::new(path, format!("node {}: empty strategy set", node.name)));
        }
        node.strategies
            .iter()
            .enumerate()
            .map(|(n, name)| self.strategy(name, path.index(n), phy))
            .collect()
    }

    fn thresholds(&self) -> DResult<BTreeMap<u64, f64>> {
        let Some(t) = self.radio.as_ref().and_then(|r| r.thresholds_dbm.as_ref()) else {
            return Ok(dot11b_thresholds());
        };
        let path = root().key("radio").key("thresholds_dbm");
        t.iter()
            .map(|(k, v)| {
                let mbps: f64 = k
                    .parse()
                    .map_err(|_| Diag::new(path.key(k), format!("threshold key `{k}` is not a rate in Mbps")))?;
                Ok((mbps_to_bps(mbps), *v))
            })
            .collect()
    }

    fn path_loss(&self) -> PathLoss {
        let mut pl = PathLoss::default();
        if let Some(r) = &self.radio {
            pl.tx_power_dbm = r.tx_power_dbm.unwrap_or(pl.tx_power_dbm);
            pl.exponent = r.path_loss_exponent.unwrap_or(pl.exponent);
            pl.ref_distance_m = r.ref_distance_m.unwrap_or(pl.ref_distance_m);
            pl.ref_loss_db = r.ref_loss_db.unwrap_or(pl.ref_loss_db);
        }
        pl
    }

    pub fn seed(&self) -> u64 {
        self.sim.as_ref().map_or(1, |s| s.seed)
    }

    pub fn link(&self, k: usize, phy: &PhyProfile) -> DResult<LinkModel> {
        let node = &self.nodes[k];
        let path = Self::node_path(k);
        let coherence = node.coherence_samples.unwrap_or(1);
        if coherence == 0 {
            return Err(Diag::new(path.key("coherence_samples"), "coherence_samples must be >= 1"));
        }
        let fading = node.distance_m.is_some() || node.mean_rx_power_dbm.is_some();
        match (&node.alpha, fading) {
            (Some(_), true) => Err(Diag::new(
                path,
                format!("node {}: give either `alpha` or fading parameters, not both", node.name),
            )),
            (None, false) => Err(Diag::new(
                path,
                format!("node {}: needs `alpha`, `distance_m` or `mean_rx_power_dbm`", node.name),
            )),
            (Some(alpha), false) => {
                let apath = path.key("alpha");
                let mut entries = Vec::new();
                for (name, &a) in alpha {
                    entries.push((self.strategy(name, apath.key(name), phy)?, a));
                }
                let table = AlphaTable::new(entries).map_err(|e| self.alpha_diag(&apath, e))?;
                Ok(LinkModel::Table {
                    alpha: table,
                    coherence_samples: coherence,
                })
            }
            (None, true) => {
                let mean = match (node.mean_rx_power_dbm, node.distance_m) {
                    (Some(_), Some(_)) => {
                        return Err(Diag::new(
                            path,
                            format!("node {}: give `distance_m` or `mean_rx_power_dbm`, not both", node.name),
                        ))
                    }
                    (Some(p), None) => p,
                    (None, Some(d)) => {
                        let d = finite_pos(d, path.key("distance_m"), "distance_m")?;
                        self.path_loss().mean_rx_power_dbm(d)
                    }
                    (None, None) => unreachable!(),
                };
                let ch = FadingChannel::new(mean, self.thresholds()?, coherence, self.seed())
                    .map_err(|e| Diag::new(root().key("radio"), e.to_string()))?;
                Ok(LinkModel::Fading(ch))
            }
        }
    }

    fn alpha_diag(&self, apath: &JsonPath, e: ChannelError) -> Diag {
        match &e {
            ChannelError::RateMonotonicity { high, .. } => Diag::new(
                apath.key(&self.strategy_name(high)),
                format!("alpha table violates rate ordering: {e}"),
            ),
            ChannelError::AlphaOutOfRange { strategy, .. } => {
                Diag::new(apath.key(&self.strategy_name(strategy)), e.to_string())
            }
            _ => Diag::new(apath.clone(), e.to_string()),
        }
    }

    /// Success table over the node's strategy set, from either link kind.
    fn alpha_table(&self, k: usize, strategies: &[Strategy], phy: &PhyProfile) -> DResult<AlphaTable> {
        let path = Self::node_path(k);
        match self.link(k, phy)? {
            LinkModel::Table { alpha, .. } => {
                for (n, s) in strategies.iter().enumerate() {
                    if alpha.iter().all(|(t, _)| t != s) {
                        return Err(Diag::new(
                            path.key("strategies").index(n),
                            format!("node {}: no alpha for strategy `{}`", self.nodes[k].name, self.nodes[k].strategies[n]),
                        ));
                    }
                }
                Ok(alpha)
            }
            LinkModel::Fading(ch) => AlphaTable::from_fading(&ch, strategies).map_err(|e| Diag::new(path, e.to_string())),
        }
    }

    pub fn t_idle(&self) -> DResult<f64> {
        let t = self.game.as_ref().map_or(0.0, |g| g.t_idle_us);
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Diag::new(root().key("game").key("t_idle_us"), "t_idle_us must be >= 0"));
        }
        Ok(t * 1e-6)
    }

    /// The two-player game between `nodes[0]` (i) and `nodes[1]` (j).
    pub fn build_game(&self) -> DResult<StageGame> {
        if self.nodes.len() != 2 {
            return Err(Diag::new(
                root().key("nodes"),
                format!("equilibrium analysis needs exactly 2 nodes, found {}", self.nodes.len()),
            ));
        }
        let phy = self.phy_profile()?;
        let discipline = self.discipline()?;
        let si = self.node_strategies(0, &phy)?;
        let sj = self.node_strategies(1, &phy)?;
        let ai = self.alpha_table(0, &si, &phy)?;
        let aj = self.alpha_table(1, &sj, &phy)?;
        StageGame::new(phy, discipline, si, sj, ai, aj, self.t_idle()?)
            .map_err(|e| Diag::new(root().key("nodes"), e.to_string()))
    }

    fn policy(&self, k: usize, phy: &PhyProfile) -> DResult<StrategyPolicy> {
        let node = &self.nodes[k];
        let path = Self::node_path(k);
        let set = self.node_strategies(k, phy)?;
        let chosen = match &node.strategy {
            Some(name) => {
                let s = self.strategy(name, path.key("strategy"), phy)?;
                if !set.contains(&s) {
                    return Err(Diag::new(
                        path.key("strategy"),
                        format!("node {}: strategy `{name}` is not in its strategy set", node.name),
                    ));
                }
                s
            }
            None => set[0],
        };
        Ok(match node.policy {
            PolicySpec::Fixed => StrategyPolicy::Fixed(chosen),
            PolicySpec::BestResponse => StrategyPolicy::BestResponse {
                candidates: set,
                initial: chosen,
            },
            PolicySpec::AutoRate => StrategyPolicy::AutoRate {
                payload_bits: chosen.payload_bits,
            },
        })
    }

    pub fn build_sim(&self) -> DResult<SimScenario> {
        let spec = self
            .sim
            .as_ref()
            .ok_or_else(|| Diag::new(root(), "a `sim` block is required to simulate"))?;
        let spath = root().key("sim");
        if !(spec.duration_s > 0.0 && spec.duration_s.is_finite()) {
            return Err(Diag::new(spath.key("duration_s"), "duration_s must be > 0"));
        }
        if self.nodes.is_empty() {
            return Err(Diag::new(root().key("nodes"), "at least one node is required"));
        }
        let phy = self.phy_profile()?;
        let discipline = self.discipline()?;
        let mut nodes = Vec::new();
        for k in 0..self.nodes.len() {
            nodes.push(NodeConfig {
                name: self.nodes[k].name.clone(),
                link: self.link(k, &phy)?,
                policy: self.policy(k, &phy)?,
            });
        }
        let mut sc = SimScenario::new(phy.clone(), discipline, nodes, spec.duration_s, spec.seed);
        if let Some(r) = spec.report_interval_s {
            sc.report_interval = finite_pos(r, spath.key("report_interval_s"), "report_interval_s")?;
        }
        let mut ds = DcfStarConfig::for_profile(&phy);
        if let Some(d) = &self.dcf_star {
            ds.targets = d.targets.clone();
            ds.gain = d.gain.unwrap_or(ds.gain);
            ds.smoothing = d.smoothing.unwrap_or(ds.smoothing);
            ds.period = d.period_ms.map_or(ds.period, |p| p * 1e-3);
            ds.cw_lo = d.cw_lo.unwrap_or(ds.cw_lo);
            ds.cw_hi = d.cw_hi.unwrap_or(ds.cw_hi);
        }
        sc.dcf_star = ds;
        let mut br = BestResponseConfig::default();
        if let Some(b) = &self.best_response {
            br.settle = b.settle_s.unwrap_or(br.settle);
            br.probe_window = b.probe_window_s.unwrap_or(br.probe_window);
            br.max_epochs = b.max_epochs.unwrap_or(br.max_epochs);
            br.switch_margin = b.switch_margin.unwrap_or(br.switch_margin);
        }
        sc.best_response = br;
        for (name, spec) in &self.strategies {
            sc.strategy_labels
                .entry(Strategy::from_mbps(spec.rate_mbps, spec.payload_bits))
                .or_insert_with(|| name.clone());
        }
        sc.validate().map_err(|e| {
            let path = match &e {
                crate::sim::SimError::Invalid(m) if m.starts_with("dcf_star") => root().key("dcf_star"),
                crate::sim::SimError::Invalid(m) if m.starts_with("best_response") => root().key("best_response"),
                _ => root(),
            };
            Diag::new(path, e.to_string())
        })?;
        Ok(sc)
    }

    /// Full semantic check: everything the commands would build.
    pub fn validate(&self) -> DResult<()> {
        self.phy_profile()?;
        self.discipline()?;
        if self.nodes.len() == 2 {
            self.build_game()?;
        }
        if self.sim.is_some() {
            self.build_sim()?;
        }
        Ok(())
    }
}

/// serde_json appends " at line L column C"; the caller reports it itself.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(n) => msg[..n].to_string(),
        None => msg.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINI: &str = r#"{
  "name": "mini",
  "phy": {"preset": "two_rate_ideal"},
  "discipline": "dcf",
  "strategies": {
    "g1": {"rate_mbps": 3.2, "payload_bits": 12000},
    "g2": {"rate_mbps": 1.6, "payload_bits": 12000}
  },
  "nodes": [
    {"name": "i", "strategies": ["g1", "g2"], "alpha": {"g1": 0.6, "g2": 0.95}},
    {"name": "j", "strategies": ["g1", "g2"], "alpha": {"g1": 1.0, "g2": 1.0}}
  ]
}"#;

    #[test]
    fn parses_and_builds_game() {
        let sc = ScenarioFile::parse(MINI).unwrap();
        let game = sc.build_game().unwrap();
        assert_eq!(game.strategies(crate::game::Player::I).len(), 2);
        assert_eq!(sc.strategy_name(&Strategy::from_mbps(1.6, 12000)), "g2");
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = MINI.replace("\"discipline\": \"dcf\",", "\"discipline\": \"dcf\", \"bogus\": 1,");
        let e = ScenarioFile::parse(&text).unwrap_err();
        assert!(matches!(e, CliError::Validation(_)));
        assert!(e.to_string().contains("line 4"), "{e}");
        assert!(e.to_string().contains("bogus"), "{e}");
    }

    #[test]
    fn rate_ordering_violation_points_at_value() {
        let text = MINI.replace("\"g1\": 0.6, \"g2\": 0.95", "\"g1\": 0.99, \"g2\": 0.5");
        let sc = ScenarioFile::parse(&text).unwrap();
        let d = sc.build_game().unwrap_err();
        let msg = d.render(Some(&text));
        assert!(msg.contains("rate ordering"), "{msg}");
        assert!(msg.starts_with("line 10"), "{msg}");
    }

    #[test]
    fn empty_strategy_set_rejected() {
        let text = MINI.replace("\"name\": \"j\", \"strategies\": [\"g1\", \"g2\"]", "\"name\": \"j\", \"strategies\": []");
        let d = ScenarioFile::parse(&text).unwrap().build_game().unwrap_err();
        assert!(d.msg.contains("empty strategy set"));
    }

    #[test]
    fn round_trip_is_stable() {
        let sc = ScenarioFile::parse(MINI).unwrap();
        let again = ScenarioFile::parse(&sc.to_json()).unwrap();
        assert_eq!(sc, again);
    }
}
