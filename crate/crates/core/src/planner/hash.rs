use std::collections::BTreeMap;

use super::{residual_target, PartitionPlan, RouteDirective, Strategy};
use crate::data::JoinValue;
use crate::error::{Error, Result};

/// Plain hash redistribution: both relations send value `b` to
/// `h(b) mod n`.
pub fn hash_plan(domain_size: u32, n: usize) -> Result<PartitionPlan> {
    if n == 0 {
        return Err(Error::config("processor count must be positive"));
    }
    if domain_size == 0 {
        return Err(Error::config("domain size must be positive"));
    }
    let all: Vec<usize> = (0..n).collect();
    let directives: BTreeMap<_, _> = (0..domain_size)
        .map(|id| {
            let v = JoinValue(id);
            (v, RouteDirective::residual(v, residual_target(v, &all)))
        })
        .collect();
    Ok(PartitionPlan {
        strategy: Strategy::Hash,
        n,
        domain_size,
        directives,
        residual_processors: all,
        skew_stats: None,
    })
}
