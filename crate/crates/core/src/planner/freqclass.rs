use std::collections::BTreeMap;

use super::{present_values, residual_target, PartitionPlan, RouteDirective, SkewStats, Strategy};
use crate::data::{relative_frequencies, ValueHistogram};
use crate::error::{Error, Result};
use crate::freqclass::{assign_classes, build_frequency_tree, product_classes};
use crate::rational::int;

/// Routes each value wholly to the processor its frequency class (or leaf)
/// was assigned to by [`assign_classes`]. Values that produce no joins are
/// hashed on the join value.
pub fn freqclass_plan(
    h_r: &ValueHistogram,
    h_s: &ValueHistogram,
    n: usize,
) -> Result<PartitionPlan> {
    if n == 0 {
        return Err(Error::config("processor count must be positive"));
    }
    h_r.ensure_same_domain(h_s)?;
    let stats = SkewStats::compute(h_r, h_s, n, int(0));

    let owner = if stats.tpc == 0 {
        BTreeMap::new()
    } else {
        let cs = product_classes(&relative_frequencies(h_r)?, &relative_frequencies(h_s)?)?;
        let tree = build_frequency_tree(&cs);
        let (class_loads, leaf_loads) = cs.workloads(h_r.total(), h_s.total());
        assign_classes(&tree, &class_loads, &leaf_loads, n)?.owner
    };

    let all: Vec<usize> = (0..n).collect();
    let directives = present_values(h_r, h_s)
        .into_iter()
        .map(|v| {
            let p = owner
                .get(&v)
                .copied()
                .unwrap_or_else(|| residual_target(v, &all));
            (v, RouteDirective::residual(v, p))
        })
        .collect();

    Ok(PartitionPlan {
        strategy: Strategy::Freqclass,
        n,
        domain_size: h_r.domain_size(),
        directives,
        residual_processors: all,
        skew_stats: Some(stats),
    })
}
