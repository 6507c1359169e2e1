use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Position;

use super::run::{format_float, run_with_threads, TrialId};
use super::{MethodSpec, Placement, RisLayout, Scenario};

/// Grid and budget of a placement sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlacementSpec {
    /// Surface abscissas; the ordinate is kept from the scenario.
    pub x_values: Vec<f64>,
    /// Mean optimized sum-rate to reach.
    pub target: f64,
    /// Candidate element counts `m_start, m_start + m_step, ..., <= m_max`.
    pub m_start: usize,
    pub m_step: usize,
    pub m_max: usize,
    /// Trials per mean; `None` keeps the scenario's count.
    pub trials: Option<usize>,
    /// `None` keeps the scenario's methods.
    pub methods: Option<Vec<MethodSpec>>,
    pub threads: Option<usize>,
}

impl Default for PlacementSpec {
    fn default() -> Self {
        Self {
            x_values: (0..=30).step_by(2).map(|x| x as f64).collect(),
            target: 4.0,
            m_start: 2,
            m_step: 2,
            m_max: 128,
            trials: None,
            methods: None,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacementPoint {
    pub x0: f64,
    pub method: String,
    /// `None` when the target is not reached at `m_max`.
    pub required_m: Option<usize>,
    /// Mean sum-rate at `required_m` (or at `m_max` when saturated).
    pub mean_sum_rate: f64,
}

impl PlacementPoint {
    pub fn saturated(&self) -> bool {
        self.required_m.is_none()
    }
}

/// For every abscissa and method, the smallest grid `M` whose mean
/// optimized sum-rate reaches the target (binary search on the grid).
pub fn placement_sweep(scenario: &Scenario, spec: &PlacementSpec) -> Result<Vec<PlacementPoint>> {
    let y = match &scenario.layout.ris {
        RisLayout::Centralized { placement: Placement::Fixed { center } } => center.y,
        _ => return Err(Error::Config("placement sweep needs a fixed centralized surface".into())),
    };
    if spec.m_step == 0 || spec.m_start == 0 || spec.m_start > spec.m_max {
        return Err(Error::Config("placement grid needs 0 < m_start <= m_max and m_step > 0".into()));
    }
    let grid: Vec<usize> = (spec.m_start..=spec.m_max).step_by(spec.m_step).collect();
    let methods = spec.methods.clone().unwrap_or_else(|| scenario.methods.clone());
    let mut out = Vec::new();
    for &x0 in &spec.x_values {
        for method in &methods {
            let mut base = scenario.clone();
            base.variants.clear();
            base.layout.ris = RisLayout::Centralized { placement: Placement::Fixed { center: Position::new(x0, y) } };
            base.methods = vec![method.clone()];
            base.powers_dbm.truncate(1);
            if let Some(t) = spec.trials {
                base.trials = t;
            }
            let mut cache = BTreeMap::new();
            let mut mean_at = |m: usize| -> Result<f64> {
                if let Some(&v) = cache.get(&m) {
                    return Ok(v);
                }
                let mut s = base.clone();
                s.m_values = vec![m];
                let rows = run_with_threads(&s, spec.threads)?;
                let v = rows
                    .iter()
                    .find(|r| r.trial == TrialId::Agg && r.metric == "sum_rate")
                    .map(|r| r.value)
                    .ok_or_else(|| Error::Config(format!("no sum-rate aggregate at M = {m}")))?;
                cache.insert(m, v);
                Ok(v)
            };
            // `grid.len()` stands for "not reached at m_max"
            let (mut lo, mut hi) = (0usize, grid.len());
            while lo < hi {
                let mid = (lo + hi) / 2;
                if mean_at(grid[mid])? >= spec.target {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            let point = match grid.get(lo) {
                Some(&m) => {
                    PlacementPoint { x0, method: method.label(), required_m: Some(m), mean_sum_rate: mean_at(m)? }
                }
                None => {
                    let top = mean_at(*grid.last().expect("non-empty grid"))?;
                    PlacementPoint { x0, method: method.label(), required_m: None, mean_sum_rate: top }
                }
            };
            out.push(point);
        }
    }
    Ok(out)
}

/// One row per abscissa, one column per method; saturated points read
/// `saturated`.
pub fn write_placement_csv<W: Write>(points: &[PlacementPoint], mut out: W) -> Result<()> {
    let mut methods: Vec<&str> = Vec::new();
    let mut xs: Vec<f64> = Vec::new();
    for p in points {
        if !methods.contains(&p.method.as_str()) {
            methods.push(&p.method);
        }
        if !xs.contains(&p.x0) {
            xs.push(p.x0);
        }
    }
    writeln!(out, "x0,{}", methods.join(","))?;
    for x in xs {
        let cells: Vec<String> = methods
            .iter()
            .map(|m| {
                points.iter().find(|p| p.x0 == x && p.method == *m).map_or(String::new(), |p| match p.required_m {
                    Some(v) => v.to_string(),
                    None => "saturated".into(),
                })
            })
            .collect();
        writeln!(out, "{},{}", format_float(x), cells.join(","))?;
    }
    Ok(())
}
