use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{GridPoint, Mitigation};
use super::run::{read_kl_curve, read_report, to_json, RunStatus};
use super::sweep::{entry_dir, read_manifest, MANIFEST_FILE};
use crate::error::{Error, Result};

/// Statistics of one grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub grid_index: usize,
    pub point: GridPoint,
    pub k_d: usize,
    pub n_runs: usize,
    pub n_completed: usize,
    pub n_diverged: usize,
    pub n_failed: usize,
    /// Over completed runs only; absent when none completed.
    pub mean_final_kl: Option<f64>,
    /// Population standard deviation over completed runs.
    pub std_final_kl: Option<f64>,
    pub mean_curve: Vec<f64>,
}

/// Grid points sharing a noise setting, i.e. one panel of the
/// best/worst/average comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub p: f64,
    pub gate_lambda: f64,
    pub mitigation: Mitigation,
    pub k_d: usize,
    pub grid_indices: Vec<usize>,
    pub best: usize,
    pub worst: usize,
    pub best_curve: Vec<f64>,
    pub worst_curve: Vec<f64>,
    /// Per-epoch mean over the mean curves of every point in the group.
    pub average_curve: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub points: Vec<PointSummary>,
    pub groups: Vec<GroupSummary>,
}

impl SweepSummary {
    pub fn write_file(&self, path: &Path) -> Result<()> {
        fs::write(path, to_json(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
    }

    pub fn point(&self, grid_index: usize) -> Option<&PointSummary> {
        self.points.iter().find(|p| p.grid_index == grid_index)
    }
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

fn mean_curve(curves: &[Vec<f64>]) -> Result<Vec<f64>> {
    let Some(first) = curves.first() else {
        return Ok(Vec::new());
    };
    if curves.iter().any(|c| c.len() != first.len()) {
        return Err(Error::Contract("runs of one grid point have different epoch counts".into()));
    }
    let n = curves.len() as f64;
    Ok((0..first.len())
        .map(|t| curves.iter().map(|c| c[t]).sum::<f64>() / n)
        .collect())
}

/// Reads a sweep directory and summarizes it. Diverged and failed runs are
/// counted but excluded from the statistics.
pub fn aggregate(sweep_dir: &Path) -> Result<SweepSummary> {
    let entries = read_manifest(&sweep_dir.join(MANIFEST_FILE))?;
    if entries.is_empty() {
        return Err(Error::Contract(format!("{} lists no runs", sweep_dir.display())));
    }
    struct Acc {
        point: GridPoint,
        k_d: usize,
        n_runs: usize,
        n_diverged: usize,
        n_failed: usize,
        finals: Vec<f64>,
        curves: Vec<Vec<f64>>,
    }
    let mut by_index: BTreeMap<usize, Acc> = BTreeMap::new();
    for entry in &entries {
        let dir = entry_dir(sweep_dir, entry);
        let report = read_report(&dir)?;
        let c = &report.config;
        let acc = by_index.entry(entry.grid_index).or_insert_with(|| Acc {
            point: GridPoint {
                p: c.readout_p01,
                gate_lambda: c.gate_lambda,
                mitigation: c.mitigation,
                lr_g: c.lr_g,
                lr_d: c.lr_d,
                gamma: c.gamma,
            },
            k_d: c.k_d,
            n_runs: 0,
            n_diverged: 0,
            n_failed: 0,
            finals: Vec::new(),
            curves: Vec::new(),
        });
        acc.n_runs += 1;
        match report.status {
            RunStatus::Completed => {
                let curve = read_kl_curve(&dir)?;
                let last = *curve.last().ok_or_else(|| {
                    Error::Contract(format!("{} completed with no epochs", dir.display()))
                })?;
                acc.finals.push(last);
                acc.curves.push(curve);
            }
            RunStatus::Diverged => acc.n_diverged += 1,
            RunStatus::Failed => acc.n_failed += 1,
        }
    }

    let mut points = Vec::with_capacity(by_index.len());
    for (grid_index, acc) in by_index {
        let stats = mean_std(&acc.finals);
        points.push(PointSummary {
            grid_index,
            point: acc.point,
            k_d: acc.k_d,
            n_runs: acc.n_runs,
            n_completed: acc.finals.len(),
            n_diverged: acc.n_diverged,
            n_failed: acc.n_failed,
            mean_final_kl: stats.map(|s| s.0),
            std_final_kl: stats.map(|s| s.1),
            mean_curve: mean_curve(&acc.curves)?,
        });
    }
    if points.iter().all(|p| p.n_completed == 0) {
        return Err(Error::Contract("no run in the sweep completed".into()));
    }
    let groups = group(&points)?;
    Ok(SweepSummary { points, groups })
}

type GroupKey = (u64, u64, Mitigation, usize);

fn group_key(p: &PointSummary) -> GroupKey {
    (p.point.p.to_bits(), p.point.gate_lambda.to_bits(), p.point.mitigation, p.k_d)
}

fn group(points: &[PointSummary]) -> Result<Vec<GroupSummary>> {
    let mut keys: Vec<GroupKey> = Vec::new();
    let mut members: BTreeMap<GroupKey, Vec<&PointSummary>> = BTreeMap::new();
    for p in points {
        let key = group_key(p);
        if !members.contains_key(&key) {
            keys.push(key);
        }
        members.entry(key).or_default().push(p);
    }
    let mut out = Vec::new();
    // first-appearance order keeps groups aligned with the grid
    for key in keys {
        let pts: Vec<&PointSummary> = members[&key].iter().copied().filter(|p| p.mean_final_kl.is_some()).collect();
        if pts.is_empty() {
            continue;
        }
        let by_mean = |a: &&&PointSummary, b: &&&PointSummary| {
            a.mean_final_kl.partial_cmp(&b.mean_final_kl).expect("finite means")
        };
        let best = pts.iter().min_by(by_mean).expect("nonempty");
        let worst = pts.iter().max_by(by_mean).expect("nonempty");
        let curves: Vec<Vec<f64>> = pts.iter().map(|p| p.mean_curve.clone()).collect();
        out.push(GroupSummary {
            p: pts[0].point.p,
            gate_lambda: pts[0].point.gate_lambda,
            mitigation: pts[0].point.mitigation,
            k_d: pts[0].k_d,
            grid_indices: members[&key].iter().map(|p| p.grid_index).collect(),
            best: best.grid_index,
            worst: worst.grid_index,
            best_curve: best.mean_curve.clone(),
            worst_curve: worst.mean_curve.clone(),
            average_curve: mean_curve(&curves)?,
        });
    }
    Ok(out)
}

/// Share of the across-point variance explained by each hyperparameter's
/// main effect.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Importance {
    pub lr_g: f64,
    pub lr_d: f64,
    pub gamma: f64,
}

/// One (lr_g, lr_d, gamma) setting and its outcome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation {
    pub lr_g: f64,
    pub lr_d: f64,
    pub gamma: f64,
    pub outcome: f64,
}

fn levels(values: impl Iterator<Item = f64>) -> Vec<u64> {
    let mut v: Vec<u64> = values.map(f64::to_bits).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Main-effect importance on a full-factorial grid.
///
/// For each factor, the variance of its marginal means divided by the total
/// variance of the outcomes. Constant outcomes give zero for every factor.
pub fn importance(obs: &[Observation]) -> Result<Importance> {
    if obs.is_empty() {
        return Err(Error::Contract("importance needs at least one observation".into()));
    }
    let factors: [fn(&Observation) -> f64; 3] = [|o| o.lr_g, |o| o.lr_d, |o| o.gamma];
    let lv: Vec<Vec<u64>> = factors.iter().map(|f| levels(obs.iter().map(f))).collect();
    let cells = lv.iter().map(Vec::len).product::<usize>();
    let mut seen: Vec<(u64, u64, u64)> = obs
        .iter()
        .map(|o| (o.lr_g.to_bits(), o.lr_d.to_bits(), o.gamma.to_bits()))
        .collect();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != obs.len() || cells != obs.len() {
        return Err(Error::Contract(format!(
            "grid is not full factorial: {} observations for {} cells",
            obs.len(),
            cells
        )));
    }
    if obs.iter().any(|o| !o.outcome.is_finite()) {
        return Err(Error::Contract("non-finite outcome".into()));
    }

    let (_, total_std) = mean_std(&obs.iter().map(|o| o.outcome).collect::<Vec<_>>()).expect("nonempty");
    let total = total_std * total_std;
    let share = |k: usize| -> f64 {
        if total == 0.0 {
            return 0.0;
        }
        let marginal: Vec<f64> = lv[k]
            .iter()
            .map(|&level| {
                let xs: Vec<f64> = obs
                    .iter()
                    .filter(|o| factors[k](o).to_bits() == level)
                    .map(|o| o.outcome)
                    .collect();
                xs.iter().sum::<f64>() / xs.len() as f64
            })
            .collect();
        let (_, s) = mean_std(&marginal).expect("at least one level");
        s * s / total
    };
    Ok(Importance {
        lr_g: share(0),
        lr_d: share(1),
        gamma: share(2),
    })
}

/// Importance per noise group of an aggregated sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupImportance {
    pub p: f64,
    pub gate_lambda: f64,
    pub mitigation: Mitigation,
    pub k_d: usize,
    pub importance: Importance,
}

pub fn sweep_importance(summary: &SweepSummary) -> Result<Vec<GroupImportance>> {
    summary
        .groups
        .iter()
        .map(|g| {
            let obs = g
                .grid_indices
                .iter()
                .map(|&i| {
                    let pt = summary
                        .point(i)
                        .ok_or_else(|| Error::Contract(format!("grid index {i} missing from summary")))?;
                    let outcome = pt
                        .mean_final_kl
                        .ok_or_else(|| Error::Contract(format!("grid index {i} has no completed run")))?;
                    Ok(Observation {
                        lr_g: pt.point.lr_g,
                        lr_d: pt.point.lr_d,
                        gamma: pt.point.gamma,
                        outcome,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(GroupImportance {
                p: g.p,
                gate_lambda: g.gate_lambda,
                mitigation: g.mitigation,
                k_d: g.k_d,
                importance: importance(&obs)?,
            })
        })
        .collect()
}
