use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use super::analyze::analysis;
use super::scenario::{ScenarioFile, SweepKind};
use super::{ensure_dir, io_err, CliError};
use crate::sim::run_sim;

#[derive(Debug, Clone, PartialEq)]
pub struct AxisArg {
    pub param: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl AxisArg {
    /// Pairs up repeated `--param/--from/--to/--steps` flags.
    pub fn from_flags(param: &[String], from: &[f64], to: &[f64], steps: &[usize]) -> Result<Vec<AxisArg>, CliError> {
        let n = param.len();
        if from.len() != n || to.len() != n || steps.len() != n {
            return Err(CliError::Validation(
                "each --param needs its own --from, --to and --steps".into(),
            ));
        }
        Ok((0..n)
            .map(|k| AxisArg {
                param: param[k].clone(),
                from: from[k],
                to: to[k],
                steps: steps[k],
            })
            .collect())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.from];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| self.from + (self.to - self.from) * k as f64 / last)
            .collect()
    }
}

/// One CSV row: a node at a grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub grid_index: usize,
    pub param_x: String,
    pub x: f64,
    pub param_y: String,
    pub y: Option<f64>,
    pub node: String,
    /// `ok`, or `invalid` when the grid point fails validation.
    pub status: String,
    pub strategy: String,
    pub throughput_mbps: Option<f64>,
    pub share: Option<f64>,
    pub loss_rate: Option<f64>,
    pub spe_class: String,
    pub desirable: Option<bool>,
    pub detail: String,
}

/// Sets every field matched by the dotted `path` to `x`. Segments match
/// object keys, array indices or, in arrays of named objects, the `name`
/// field; `*` matches everything at its level. Returns the match count.
pub fn expand_params(doc: &mut Value, path: &str, x: f64) -> Result<usize, String> {
    let segs: Vec<&str> = path.split('.').collect();
    if segs.iter().any(|s| s.is_empty()) {
        return Err(format!("malformed parameter path `{path}`"));
    }
    let n = set_at(doc, &segs, x, path)?;
    if n == 0 {
        return Err(format!("parameter `{path}` matches no field"));
    }
    Ok(n)
}

fn set_at(v: &mut Value, segs: &[&str], x: f64, full: &str) -> Result<usize, String> {
    let Some((head, rest)) = segs.split_first() else {
        return match v {
            Value::Number(n) => {
                let integral = x.fract() == 0.0 && x.abs() < 9.0e15;
                *v = if (n.is_u64() || n.is_i64()) && integral {
                    Value::from(x as i64)
                } else {
                    serde_json::Number::from_f64(x)
                        .map(Value::Number)
                        .ok_or_else(|| format!("value {x} for `{full}` is not finite"))?
                };
                Ok(1)
            }
            _ => Err(format!("parameter `{full}` is not a scalar number")),
        };
    };
    let mut count = 0;
    match v {
        Value::Object(map) => {
            for (k, child) in map.iter_mut() {
                if *head == "*" || k == head {
                    count += set_at(child, rest, x, full)?;
                }
            }
        }
        Value::Array(items) => {
            let index: Option<usize> = head.parse().ok();
            for (k, child) in items.iter_mut().enumerate() {
                let named = child.get("name").and_then(Value::as_str) == Some(*head);
                if *head == "*" || index == Some(k) || named {
                    count += set_at(child, rest, x, full)?;
                }
            }
        }
        _ => return Err(format!("parameter `{full}` is not a scalar number")),
    }
    Ok(count)
}

struct Point {
    index: usize,
    x: f64,
    y: Option<f64>,
}

fn row(axes: &[AxisArg], p: &Point, node: &str) -> SweepRow {
    SweepRow {
        grid_index: p.index,
        param_x: axes[0].param.clone(),
        x: p.x,
        param_y: axes.get(1).map(|a| a.param.clone()).unwrap_or_default(),
        y: p.y,
        node: node.to_string(),
        status: "ok".into(),
        strategy: String::new(),
        throughput_mbps: None,
        share: None,
        loss_rate: None,
        spe_class: String::new(),
        desirable: None,
        detail: String::new(),
    }
}

fn evaluate(base: &Value, names: &[String], kind: SweepKind, axes: &[AxisArg], p: &Point) -> Vec<SweepRow> {
    let invalid = |msg: String| -> Vec<SweepRow> {
        names
            .iter()
            .map(|n| SweepRow {
                status: "invalid".into(),
                detail: msg.clone(),
                ..row(axes, p, n)
            })
            .collect()
    };
    let mut doc = base.clone();
    for (axis, v) in axes.iter().zip([Some(p.x), p.y]) {
        if let Some(v) = v {
            if let Err(e) = expand_params(&mut doc, &axis.param, v) {
                return invalid(e);
            }
        }
    }
    let sc: ScenarioFile = match serde_json::from_value(doc) {
        Ok(sc) => sc,
        Err(e) => return invalid(e.to_string()),
    };
    match kind {
        SweepKind::Analyze => match analysis(&sc) {
            Err(d) => invalid(d.render(None)),
            Ok((_, rec)) => {
                let ne = rec.unique_ne();
                (0..2)
                    .map(|k| {
                        let mut r = row(axes, p, &rec.nodes[k]);
                        r.spe_class = rec.spe_class.clone();
                        if let Some(ne) = ne {
                            let (s, thr, share) = if k == 0 {
                                (&ne.i, ne.throughput_i_mbps, ne.share_i)
                            } else {
                                (&ne.j, ne.throughput_j_mbps, ne.share_j)
                            };
                            let alphas = if k == 0 { &rec.alpha_i } else { &rec.alpha_j };
                            r.strategy = s.clone();
                            r.throughput_mbps = Some(thr);
                            r.share = Some(share);
                            r.loss_rate = alphas.iter().find(|(n, _)| n == s).map(|(_, a)| 1.0 - a);
                            r.desirable = Some(ne.desirable);
                        }
                        r
                    })
                    .collect()
            }
        },
        SweepKind::Simulate | SweepKind::Isolated => {
            let scenario = match sc.build_sim() {
                Ok(s) => s,
                Err(d) => return invalid(d.render(None)),
            };
            let runs: Vec<_> = if kind == SweepKind::Simulate {
                vec![scenario]
            } else {
                (0..scenario.nodes.len())
                    .map(|k| {
                        let mut one = scenario.clone();
                        one.nodes = vec![scenario.nodes[k].clone()];
                        if let Some(t) = &mut one.dcf_star.targets {
                            *t = vec![1.0];
                        }
                        one
                    })
                    .collect()
            };
            let mut rows = Vec::new();
            for run in runs {
                match run_sim(&run) {
                    Err(e) => return invalid(e.to_string()),
                    Ok(rep) => {
                        for n in &rep.nodes {
                            let mut r = row(axes, p, &n.name);
                            r.strategy = sc.strategy_name(&n.final_strategy);
                            r.throughput_mbps = Some(n.throughput / 1e6);
                            r.share = Some(n.share);
                            r.loss_rate = Some(n.loss_rate);
                            rows.push(r);
                        }
                    }
                }
            }
            rows
        }
    }
}

/// Evaluates every grid point and writes `sweep.csv` into `out`.
pub fn sweep(sc: &ScenarioFile, source: Option<&str>, axes: Vec<AxisArg>, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let rows = sweep_rows(sc, source, axes)?;
    ensure_dir(out)?;
    let path = out.join("sweep.csv");
    let file = std::fs::File::create(&path).map_err(|e| io_err(&path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for r in &rows {
        w.serialize(r).map_err(|e| io_err(&path, e))?;
    }
    w.flush().map_err(|e| io_err(&path, e))?;
    Ok(vec![path])
}

/// Grid evaluation without touching the filesystem. Rows are ordered by
/// grid index, then node.
pub fn sweep_rows(sc: &ScenarioFile, source: Option<&str>, axes: Vec<AxisArg>) -> Result<Vec<SweepRow>, CliError> {
    let axes = if axes.is_empty() {
        sc.sweep
            .as_ref()
            .map(|s| {
                s.axes
                    .iter()
                    .map(|a| AxisArg {
                        param: a.param.clone(),
                        from: a.from,
                        to: a.to,
                        steps: a.steps,
                    })
                    .collect()
            })
            .unwrap_or_default()
    } else {
        axes
    };
    if axes.is_empty() || axes.len() > 2 {
        return Err(CliError::Validation(format!(
            "sweep needs one or two parameters, got {}",
            axes.len()
        )));
    }
    for a in &axes {
        if a.steps == 0 || !a.from.is_finite() || !a.to.is_finite() {
            return Err(CliError::Validation(format!(
                "sweep axis `{}` needs finite bounds and steps >= 1",
                a.param
            )));
        }
    }
    // the unmodified scenario must itself be valid
    sc.phy_profile()
        .and_then(|_| sc.discipline())
        .map_err(|d| CliError::Validation(d.render(source)))?;
    let base = serde_json::to_value(sc).expect("scenario serializes");
    for a in &axes {
        expand_params(&mut base.clone(), &a.param, a.from).map_err(CliError::Validation)?;
    }
    let kind = sc.sweep.as_ref().map(|s| s.kind).unwrap_or_default();
    let names: Vec<String> = sc.nodes.iter().map(|n| n.name.clone()).collect();
    let xs = axes[0].values();
    let ys: Vec<Option<f64>> = match axes.get(1) {
        Some(a) => a.values().into_iter().map(Some).collect(),
        None => vec![None],
    };
    let points: Vec<Point> = xs
        .iter()
        .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
        .enumerate()
        .map(|(index, (x, y))| Point { index, x, y })
        .collect();
    let rows: Vec<Vec<SweepRow>> = points
        .par_iter()
        .map(|p| evaluate(&base, &names, kind, &axes, p))
        .collect();
    Ok(rows.into_iter().flatten().collect())
}
