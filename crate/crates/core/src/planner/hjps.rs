use std::collections::BTreeMap;

use num_traits::Zero;

use super::{present_values, residual_target, PartitionPlan, RouteDirective, SkewStats, Strategy};
use crate::data::{JoinValue, ValueHistogram};
use crate::error::{Error, Result};
use crate::rational::{ceil_u64, int, Ratio};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HjpsConfig {
    /// A value is skewed when `pn_b >= skew_threshold`.
    pub skew_threshold: Ratio,
}

impl Default for HjpsConfig {
    fn default() -> Self {
        Self {
            skew_threshold: int(2),
        }
    }
}

pub fn hjps_plan(h_r: &ValueHistogram, h_s: &ValueHistogram, n: usize) -> Result<PartitionPlan> {
    hjps_plan_with(h_r, h_s, n, &HjpsConfig::default())
}

/// HJPS: dedicate a processor group to every value whose join workload
/// needs at least `skew_threshold` processors' worth of the ideal share.
///
/// Skewed values are taken by descending `vwl_b` (ties: lower id) and get
/// `ceil(pn_b)` fresh processors starting at processor 0, capped by what is
/// left of the budget. One processor is held back for the remaining values
/// whenever any of them produces joins. Inside a group the larger side is
/// hashed over the group by payload and the other side is broadcast to it;
/// equal sides partition `R`. Everything else is hashed on the join value
/// over the processors left over.
///
/// A skewed value that finds the budget exhausted falls back to residual
/// routing.
pub fn hjps_plan_with(
    h_r: &ValueHistogram,
    h_s: &ValueHistogram,
    n: usize,
    config: &HjpsConfig,
) -> Result<PartitionPlan> {
    if n == 0 {
        return Err(Error::config("HJPS needs at least one processor"));
    }
    if config.skew_threshold <= Ratio::zero() {
        return Err(Error::config("skew threshold must be positive"));
    }
    h_r.ensure_same_domain(h_s)?;

    let mut stats = SkewStats::compute(h_r, h_s, n, config.skew_threshold.clone());
    let mut skewed: Vec<JoinValue> = stats
        .pn
        .iter()
        .filter(|(_, pn)| **pn >= config.skew_threshold)
        .map(|(&v, _)| v)
        .collect();
    skewed.sort_by(|a, b| stats.vwl_of(*b).cmp(&stats.vwl_of(*a)).then(a.cmp(b)));

    let has_rest = stats.vwl.keys().any(|v| !skewed.contains(v));
    let budget = if has_rest { n - 1 } else { n };

    let mut directives = BTreeMap::new();
    let mut next = 0usize;
    let mut stranded = Vec::new();
    for &v in &skewed {
        let wanted = ceil_u64(&stats.pn[&v]) as usize;
        let size = wanted.min(budget - next);
        if size == 0 {
            stranded.push(v);
            continue;
        }
        let group: Vec<usize> = (next..next + size).collect();
        next += size;
        let partition_r = h_r.count(v) >= h_s.count(v);
        directives.insert(
            v,
            RouteDirective::partition_broadcast(v, partition_r, group),
        );
    }

    let residual: Vec<usize> = (next..n).collect();
    let targets: Vec<usize> = if residual.is_empty() {
        (0..n).collect()
    } else {
        residual.clone()
    };
    for v in present_values(h_r, h_s) {
        directives
            .entry(v)
            .or_insert_with(|| RouteDirective::residual(v, residual_target(v, &targets)));
    }
    debug_assert!(stranded.iter().all(|v| !directives[v].is_dedicated()));

    stats.skewed = skewed;
    Ok(PartitionPlan {
        strategy: Strategy::Hjps,
        n,
        domain_size: h_r.domain_size(),
        directives,
        residual_processors: residual,
        skew_stats: Some(stats),
    })
}
