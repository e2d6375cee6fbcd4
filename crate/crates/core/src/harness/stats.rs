use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gradient::Backend;
use crate::optimizers::Method;

use super::record::RunRecord;

/// Summary statistics with quartiles by linear interpolation between order
/// statistics; `std` is the sample standard deviation (0 for one value).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Stats {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::contract("statistics of an empty sample"));
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let mean = v.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let quantile = |q: f64| {
            let h = q * (n - 1) as f64;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Ok(Self {
            count: n,
            mean,
            std,
            min: v[0],
            q1: quantile(0.25),
            median: quantile(0.5),
            q3: quantile(0.75),
            max: v[n - 1],
        })
    }

    /// Standard error of the mean.
    pub fn standard_error(&self) -> f64 {
        self.std / (self.count as f64).sqrt()
    }
}

/// Record field to group by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupKey {
    Graph,
    Depth,
    Optimizer,
    Backend,
}

impl GroupKey {
    pub fn column(self) -> &'static str {
        match self {
            GroupKey::Graph => "graph_id",
            GroupKey::Depth => "depth",
            GroupKey::Optimizer => "optimizer",
            GroupKey::Backend => "backend",
        }
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

impl FromStr for GroupKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "graph" | "graph_id" => Ok(GroupKey::Graph),
            "depth" | "p" => Ok(GroupKey::Depth),
            "optimizer" => Ok(GroupKey::Optimizer),
            "backend" => Ok(GroupKey::Backend),
            _ => Err(Error::contract(format!(
                "unknown group key `{s}`; expected graph, depth, optimizer or backend"
            ))),
        }
    }
}

/// Values of the grouping fields; unused fields are `None`. Orders
/// naturally (depth numerically).
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct GroupValues {
    pub graph_id: Option<String>,
    pub depth: Option<usize>,
    pub optimizer: Option<Method>,
    pub backend: Option<Backend>,
}

impl GroupValues {
    fn of(r: &RunRecord, keys: &[GroupKey]) -> Self {
        let mut g = GroupValues::default();
        for k in keys {
            match k {
                GroupKey::Graph => g.graph_id = Some(r.graph_id.clone()),
                GroupKey::Depth => g.depth = Some(r.depth),
                GroupKey::Optimizer => g.optimizer = Some(r.optimizer),
                GroupKey::Backend => g.backend = Some(r.backend),
            }
        }
        g
    }

    /// The value of one key as text, empty when not grouped by it.
    pub fn get(&self, key: GroupKey) -> String {
        match key {
            GroupKey::Graph => self.graph_id.clone().unwrap_or_default(),
            GroupKey::Depth => self.depth.map(|d| d.to_string()).unwrap_or_default(),
            GroupKey::Optimizer => self.optimizer.map(|m| m.name().to_owned()).unwrap_or_default(),
            GroupKey::Backend => self.backend.map(|b| b.name().to_owned()).unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub group: GroupValues,
    pub expectation: Stats,
    /// Present when every record in the group carries a success probability.
    pub success: Option<Stats>,
}

/// Per-group statistics of final expectation and success probability, in
/// ascending group order.
pub fn aggregate(records: &[RunRecord], keys: &[GroupKey]) -> Result<Vec<GroupSummary>> {
    if records.is_empty() {
        return Err(Error::contract("cannot aggregate an empty record set"));
    }
    let mut groups: BTreeMap<GroupValues, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(GroupValues::of(r, keys)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(group, rs)| {
            let values: Vec<f64> = rs.iter().map(|r| r.final_expectation).collect();
            let success: Option<Vec<f64>> = rs.iter().map(|r| r.success_prob).collect();
            Ok(GroupSummary {
                group,
                expectation: Stats::from_values(&values)?,
                success: success.map(|s| Stats::from_values(&s)).transpose()?,
            })
        })
        .collect()
}
