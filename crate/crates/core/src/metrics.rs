//! Detour metric and campaign summaries.
//!
//! `delay(s, t) = (SP_C(s, t) - SP(s, t)) / SP(s, t)` compares the covering
//! walk cost with the classical shortest-path cost. AWDelay averages these
//! relative detours over unordered node pairs, weighting each pair by
//! `exp(hops of its classical shortest path)`; the weights are rescaled to
//! mean 1 so the metric stays a weighted mean of the delays.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::color_path::{covering_costs_from, Coloring};
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::instance::Instance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDelay {
    pub s: NodeId,
    pub t: NodeId,
    pub classical_cost: u64,
    pub covering_cost: u64,
    pub hops: usize,
    pub delay: f64,
    /// Normalised weight; all weights sum to the number of pairs.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AwDelayReport {
    pub pairs: Vec<PairDelay>,
    pub awdelay: f64,
}

impl AwDelayReport {
    /// AWDelay recomputed from the per-pair fields alone.
    pub fn recompute(&self) -> f64 {
        let p = self.pairs.len() as f64;
        self.pairs.iter().map(|d| d.weight * d.delay).sum::<f64>() / p
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn awdelay(instance: &Instance, coloring: &Coloring) -> Result<AwDelayReport> {
    let graph = instance.graph();
    let n = graph.node_count();
    if n < 2 {
        return Err(Error::InvalidArguments("AWDelay needs at least two nodes".into()));
    }
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for s in 0..n - 1 {
        let classical = graph.distances_from(s);
        let covering = covering_costs_from(graph, coloring, instance.num_colors(), s)?;
        for t in s + 1..n {
            let covering_cost = covering[t].ok_or_else(|| {
                Error::Infeasible(format!("pair ({s}, {t}) has no covering walk"))
            })?;
            let (classical_cost, hops) = classical[t];
            pairs.push(PairDelay {
                s,
                t,
                classical_cost,
                covering_cost,
                hops,
                delay: (covering_cost - classical_cost) as f64 / classical_cost as f64,
                weight: 0.0,
            });
        }
    }

    // exp(h - h_max) keeps every term in (0, 1]; the shift cancels in the rescale.
    let max_hops = pairs.iter().map(|p| p.hops).max().unwrap_or(0);
    let raw: Vec<f64> = pairs
        .iter()
        .map(|p| (p.hops as f64 - max_hops as f64).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    let count = pairs.len() as f64;
    for (pair, r) in pairs.iter_mut().zip(&raw) {
        pair.weight = r * count / total;
    }
    let mut report = AwDelayReport { pairs, awdelay: 0.0 };
    report.awdelay = report.recompute();
    Ok(report)
}

/// One solved instance, reduced to the columns campaigns aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub n: usize,
    pub density: f64,
    pub cr_lo: u64,
    pub cr_hi: u64,
    pub seed: u64,
    pub num_colors: usize,
    pub best_time_s: f64,
    pub time_s: f64,
    pub ndy: usize,
    pub cost: u64,
    pub cost_c: u64,
    pub cost_p: u64,
    pub awdelay: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    Nodes,
    Density,
    CostRange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub set_label: String,
    pub runs: usize,
    pub num_colors_avg: f64,
    pub best_time_avg_s: f64,
    pub time_avg_s: f64,
    pub ndy_avg: f64,
    pub cost_avg: f64,
    pub cost_c_avg: f64,
    pub cost_p_avg: f64,
    pub awdelay_avg: Option<f64>,
    /// Population variance of the AWDelay values in the group.
    pub awdelay_var: Option<f64>,
}

impl CampaignSummary {
    pub const CSV_HEADER: [&'static str; 8] = [
        "set",
        "colors_avg",
        "best_time_s",
        "time_s",
        "ndy_avg",
        "cost",
        "cost_c",
        "cost_p",
    ];

    pub fn csv_row(&self) -> [String; 8] {
        [
            self.set_label.clone(),
            format!("{:.2}", self.num_colors_avg),
            format!("{:.2}", self.best_time_avg_s),
            format!("{:.2}", self.time_avg_s),
            format!("{:.2}", self.ndy_avg),
            format!("{:.1}", self.cost_avg),
            format!("{:.1}", self.cost_c_avg),
            format!("{:.1}", self.cost_p_avg),
        ]
    }
}

fn group_key(run: &RunRecord, group_by: &[GroupBy]) -> (Vec<(u64, u64)>, String) {
    let mut parts = Vec::new();
    let mut label = String::new();
    for g in group_by {
        match g {
            GroupBy::Nodes => {
                parts.push((run.n as u64, 0));
                label.push_str(&format!("N{}", run.n));
            }
            GroupBy::Density => {
                // Non-negative floats order like their bit patterns.
                parts.push((run.density.to_bits(), 0));
                label.push_str(&format!("D{}", run.density));
            }
            GroupBy::CostRange => {
                parts.push((run.cr_lo, run.cr_hi));
                label.push_str(&format!("CR{}-{}", run.cr_lo, run.cr_hi));
            }
        }
    }
    if label.is_empty() {
        label.push_str("ALL");
    }
    (parts, label)
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    sum / count as f64
}

/// Per-group arithmetic means, ordered by group key.
pub fn summarize_campaign(runs: &[RunRecord], group_by: &[GroupBy]) -> Result<Vec<CampaignSummary>> {
    if runs.is_empty() {
        return Err(Error::InvalidArguments("no runs to summarize".into()));
    }
    let mut groups: BTreeMap<Vec<(u64, u64)>, (String, Vec<&RunRecord>)> = BTreeMap::new();
    for run in runs {
        let (key, label) = group_key(run, group_by);
        groups.entry(key).or_insert_with(|| (label, Vec::new())).1.push(run);
    }
    Ok(groups
        .into_values()
        .map(|(label, rs)| {
            let delays: Vec<f64> = rs.iter().filter_map(|r| r.awdelay).collect();
            let (awdelay_avg, awdelay_var) = if delays.len() == rs.len() {
                let m = mean(delays.iter().copied());
                let v = mean(delays.iter().map(|d| (d - m) * (d - m)));
                (Some(m), Some(v))
            } else {
                (None, None)
            };
            CampaignSummary {
                set_label: label,
                runs: rs.len(),
                num_colors_avg: mean(rs.iter().map(|r| r.num_colors as f64)),
                best_time_avg_s: mean(rs.iter().map(|r| r.best_time_s)),
                time_avg_s: mean(rs.iter().map(|r| r.time_s)),
                ndy_avg: mean(rs.iter().map(|r| r.ndy as f64)),
                cost_avg: mean(rs.iter().map(|r| r.cost as f64)),
                cost_c_avg: mean(rs.iter().map(|r| r.cost_c as f64)),
                cost_p_avg: mean(rs.iter().map(|r| r.cost_p as f64)),
                awdelay_avg,
                awdelay_var,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, WeightedGraph};

    fn record(cost_c: u64, cost_p: u64) -> RunRecord {
        RunRecord {
            n: 10,
            density: 0.25,
            cr_lo: 1,
            cr_hi: 125,
            seed: 0,
            num_colors: 3,
            best_time_s: 0.1,
            time_s: 0.2,
            ndy: 4,
            cost: cost_c + cost_p,
            cost_c,
            cost_p,
            awdelay: Some(0.05),
        }
    }

    #[test]
    fn k2_has_no_delay() {
        let g = WeightedGraph::new(2, [Edge::new(0, 1, 5)]).unwrap();
        let inst = Instance::new(g, vec![7]).unwrap();
        let r = awdelay(&inst, &Coloring::from_assignment(vec![Some(0), None])).unwrap();
        assert_eq!(r.awdelay, 0.0);
        assert_eq!(r.pairs[0].delay, 0.0);
        assert_eq!(r.pairs[0].weight, 1.0);
    }

    #[test]
    fn detour_is_weighted_by_hops() {
        // Path 0-1-2, one colour on node 2: pair (0,1) detours 1 -> 3.
        let g = WeightedGraph::new(3, [Edge::new(0, 1, 1), Edge::new(1, 2, 1)]).unwrap();
        let inst = Instance::new(g, vec![1]).unwrap();
        let r = awdelay(&inst, &Coloring::from_assignment(vec![None, None, Some(0)])).unwrap();
        let delays: Vec<f64> = r.pairs.iter().map(|p| p.delay).collect();
        assert_eq!(delays, vec![2.0, 0.0, 0.0]);
        // Raw weights e, e^2, e; normalised to sum 3.
        let e = 1f64.exp();
        let z = 2.0 * e + e * e;
        let expected = (e * 3.0 / z) * 2.0 / 3.0;
        assert!((r.awdelay - expected).abs() < 1e-12);
        let wsum: f64 = r.pairs.iter().map(|p| p.weight).sum();
        assert!((wsum - 3.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_colouring_names_pair() {
        let g = WeightedGraph::new(2, [Edge::new(0, 1, 5)]).unwrap();
        let inst = Instance::new(g, vec![7]).unwrap();
        match awdelay(&inst, &Coloring::uncolored(2)) {
            Err(Error::Infeasible(msg)) => assert!(msg.contains("(0, 1)")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn summary_means() {
        let one = summarize_campaign(&[record(10, 90)], &[GroupBy::Nodes]).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].cost_avg, 100.0);
        assert_eq!(one[0].set_label, "N10");
        assert_eq!(one[0].awdelay_var, Some(0.0));

        let two = summarize_campaign(&[record(0, 10), record(0, 20)], &[]).unwrap();
        assert_eq!(two[0].cost_avg, 15.0);
        assert_eq!(two[0].set_label, "ALL");
        assert!(summarize_campaign(&[], &[GroupBy::Nodes]).is_err());
    }

    #[test]
    fn summary_groups_are_ordered() {
        let mut a = record(1, 1);
        a.n = 30;
        let mut b = record(1, 1);
        b.density = 0.55;
        let c = record(1, 1);
        let rows = summarize_campaign(&[a, b, c], &[GroupBy::Nodes, GroupBy::Density]).unwrap();
        let labels: Vec<_> = rows.iter().map(|r| r.set_label.as_str()).collect();
        assert_eq!(labels, vec!["N10D0.25", "N10D0.55", "N30D0.25"]);
    }
}
