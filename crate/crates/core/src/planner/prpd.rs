use std::collections::BTreeMap;

use num_traits::Zero;

use super::{present_values, residual_target, PartitionPlan, RouteDirective, SkewStats, Strategy};
use crate::data::{JoinValue, ValueHistogram};
use crate::error::{Error, Result};
use crate::rational::{ratio, Ratio};

fn skewed_in(h: &ValueHistogram, v: JoinValue, threshold: &Ratio) -> bool {
    h.total() > 0 && ratio(h.count(v), h.total()) >= *threshold
}

/// Partial redistribution / partial duplication baseline.
///
/// A value is skewed in a relation when its relative frequency there reaches
/// `threshold`. The skewed side's tuples are spread over all `n` processors
/// by payload hash (standing in for "stay where they were declustered") and
/// the matching tuples of the other relation are broadcast to all `n`.
/// Values skewed in both relations partition `R` and broadcast `S`; they are
/// listed in `skew_stats.both_skewed`. All other values are hashed on the
/// join value.
pub fn prpd_plan(
    h_r: &ValueHistogram,
    h_s: &ValueHistogram,
    n: usize,
    threshold: &Ratio,
) -> Result<PartitionPlan> {
    if n == 0 {
        return Err(Error::config("processor count must be positive"));
    }
    if *threshold <= Ratio::zero() {
        return Err(Error::config("PRPD threshold must be positive"));
    }
    h_r.ensure_same_domain(h_s)?;

    let mut stats = SkewStats::compute(h_r, h_s, n, threshold.clone());
    let all: Vec<usize> = (0..n).collect();
    let mut directives = BTreeMap::new();
    for v in present_values(h_r, h_s) {
        let in_r = skewed_in(h_r, v, threshold);
        let in_s = skewed_in(h_s, v, threshold);
        let d = match (in_r, in_s) {
            (false, false) => RouteDirective::residual(v, residual_target(v, &all)),
            (true, both) => {
                stats.skewed.push(v);
                if both {
                    stats.both_skewed.push(v);
                }
                RouteDirective::partition_broadcast(v, true, all.clone())
            }
            (false, true) => {
                stats.skewed.push(v);
                RouteDirective::partition_broadcast(v, false, all.clone())
            }
        };
        directives.insert(v, d);
    }

    Ok(PartitionPlan {
        strategy: Strategy::Prpd,
        n,
        domain_size: h_r.domain_size(),
        directives,
        residual_processors: all,
        skew_stats: Some(stats),
    })
}
