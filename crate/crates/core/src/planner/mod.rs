//! Partition plans: where each tuple of `R` and `S` is shipped during the
//! redistribution phase.
//!
//! A plan holds one [`RouteDirective`] per join value. A directive names a
//! processor group and, for each relation, how that relation's tuples with
//! the value use the group:
//!
//! - `hash_into`: each tuple goes to one group member, chosen by hashing the
//!   tuple's payload;
//! - `broadcast_to`: each tuple is copied to every group member;
//! - `residual_hash`: the group is the single processor picked by the
//!   common join-attribute hash, and every tuple goes there.
//!
//! Pairing `hash_into` on one side with `broadcast_to` on the other puts
//! every matching pair on exactly one processor.

mod freqclass;
mod hash;
mod hjps;
mod prpd;
mod wire;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

pub use freqclass::freqclass_plan;
pub use hash::hash_plan;
pub use hjps::{hjps_plan, hjps_plan_with, HjpsConfig};
pub use prpd::prpd_plan;

use crate::data::{JoinValue, ValueHistogram};
use crate::error::{Error, Result};
use crate::hashing::hash_join_value;
use crate::rational::{int, Ratio};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Hash,
    Hjps,
    Prpd,
    Freqclass,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Hash,
        Strategy::Hjps,
        Strategy::Prpd,
        Strategy::Freqclass,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Hash => "hash",
            Strategy::Hjps => "hjps",
            Strategy::Prpd => "prpd",
            Strategy::Freqclass => "freqclass",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s.trim())
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown strategy {s:?} (expected hash, hjps, prpd or freqclass)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteAction {
    HashInto,
    BroadcastTo,
    ResidualHash,
}

impl RouteAction {
    pub fn as_str(self) -> &'static str {
        match self {
            RouteAction::HashInto => "hash_into",
            RouteAction::BroadcastTo => "broadcast_to",
            RouteAction::ResidualHash => "residual_hash",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteDirective {
    pub value: JoinValue,
    pub r: RouteAction,
    pub s: RouteAction,
    pub group: Vec<usize>,
}

impl RouteDirective {
    pub(crate) fn residual(value: JoinValue, processor: usize) -> Self {
        Self {
            value,
            r: RouteAction::ResidualHash,
            s: RouteAction::ResidualHash,
            group: vec![processor],
        }
    }

    pub(crate) fn partition_broadcast(
        value: JoinValue,
        partition_r: bool,
        group: Vec<usize>,
    ) -> Self {
        let (r, s) = if partition_r {
            (RouteAction::HashInto, RouteAction::BroadcastTo)
        } else {
            (RouteAction::BroadcastTo, RouteAction::HashInto)
        };
        Self { value, r, s, group }
    }

    pub fn is_dedicated(&self) -> bool {
        self.r != RouteAction::ResidualHash
    }
}

/// Workload statistics the skew-aware planners decide from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkewStats {
    /// Total processing cost `Σ |R_b|·|S_b|`.
    pub tpc: u128,
    /// Ideal per-processor workload `tpc / n`.
    pub pwl: Ratio,
    /// Per-value workload `|R_b|·|S_b|`, for values where it is positive.
    pub vwl: BTreeMap<JoinValue, u128>,
    /// Ideal processor count per value, `vwl_b / pwl`.
    pub pn: BTreeMap<JoinValue, Ratio>,
    pub threshold: Ratio,
    /// Skewed values, in the order groups were allocated.
    pub skewed: Vec<JoinValue>,
    /// PRPD only: values skewed in both relations.
    pub both_skewed: Vec<JoinValue>,
}

impl SkewStats {
    pub(crate) fn compute(
        h_r: &ValueHistogram,
        h_s: &ValueHistogram,
        n: usize,
        threshold: Ratio,
    ) -> Self {
        let mut vwl = BTreeMap::new();
        for (v, c) in h_r.iter() {
            let w = u128::from(c) * u128::from(h_s.count(v));
            if w > 0 {
                vwl.insert(v, w);
            }
        }
        let tpc: u128 = vwl.values().sum();
        let n_ratio = int(n as u64);
        let pn = if tpc == 0 {
            BTreeMap::new()
        } else {
            vwl.iter()
                .map(|(&v, &w)| (v, int(w) * &n_ratio / int(tpc)))
                .collect()
        };
        let pwl = if tpc == 0 {
            Ratio::zero()
        } else {
            int(tpc) / n_ratio
        };
        Self {
            tpc,
            pwl,
            vwl,
            pn,
            threshold,
            skewed: Vec::new(),
            both_skewed: Vec::new(),
        }
    }

    pub fn vwl_of(&self, v: JoinValue) -> u128 {
        self.vwl.get(&v).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "wire::PlanWire", into = "wire::PlanWire")]
pub struct PartitionPlan {
    pub strategy: Strategy,
    pub n: usize,
    pub domain_size: u32,
    pub directives: BTreeMap<JoinValue, RouteDirective>,
    pub residual_processors: Vec<usize>,
    pub skew_stats: Option<SkewStats>,
}

impl PartitionPlan {
    pub fn directive(&self, v: JoinValue) -> Option<&RouteDirective> {
        self.directives.get(&v)
    }

    pub fn skewed_values(&self) -> &[JoinValue] {
        self.skew_stats
            .as_ref()
            .map(|s| s.skewed.as_slice())
            .unwrap_or(&[])
    }

    /// Groups of dedicated (non-residual) directives, one per skewed value.
    pub fn dedicated_groups(&self) -> Vec<(JoinValue, &[usize])> {
        self.directives
            .values()
            .filter(|d| d.is_dedicated())
            .map(|d| (d.value, d.group.as_slice()))
            .collect()
    }

    /// Checks what the simulator needs to execute the plan: non-empty groups
    /// of valid processor ids, and single-processor residual groups.
    pub fn check_executable(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("plan has zero processors"));
        }
        for d in self.directives.values() {
            if d.group.is_empty() {
                return Err(Error::config(format!(
                    "directive for {} has an empty group",
                    d.value
                )));
            }
            if let Some(p) = d.group.iter().find(|&&p| p >= self.n) {
                return Err(Error::config(format!(
                    "directive for {} names processor {p} of {}",
                    d.value, self.n
                )));
            }
            let residual =
                (d.r == RouteAction::ResidualHash) as u8 + (d.s == RouteAction::ResidualHash) as u8;
            if residual > 0 && d.group.len() != 1 {
                return Err(Error::config(format!(
                    "residual directive for {} must name exactly one processor",
                    d.value
                )));
            }
        }
        if let Some(p) = self.residual_processors.iter().find(|&&p| p >= self.n) {
            return Err(Error::config(format!(
                "residual processor {p} out of range"
            )));
        }
        Ok(())
    }

    /// Full structural validation: executable, and every directive pairs a
    /// partitioned side with a broadcast side or is residual on both.
    pub fn validate(&self) -> Result<()> {
        self.check_executable()?;
        for d in self.directives.values() {
            use RouteAction::*;
            let ok = matches!(
                (d.r, d.s),
                (HashInto, BroadcastTo) | (BroadcastTo, HashInto) | (ResidualHash, ResidualHash)
            );
            if !ok {
                return Err(Error::config(format!(
                    "directive for {} pairs {} with {}",
                    d.value,
                    d.r.as_str(),
                    d.s.as_str()
                )));
            }
            let mut g = d.group.clone();
            g.sort_unstable();
            g.dedup();
            if g.len() != d.group.len() {
                return Err(Error::config(format!(
                    "group for {} repeats a processor",
                    d.value
                )));
            }
        }
        Ok(())
    }
}

/// Residual target for `value` over `processors` by the common join hash.
pub(crate) fn residual_target(value: JoinValue, processors: &[usize]) -> usize {
    processors[(hash_join_value(value.0) % processors.len() as u64) as usize]
}

/// Values with a positive count in either relation, ascending.
pub(crate) fn present_values(h_r: &ValueHistogram, h_s: &ValueHistogram) -> Vec<JoinValue> {
    let mut v: Vec<JoinValue> = h_r.iter().chain(h_s.iter()).map(|(v, _)| v).collect();
    v.sort_unstable();
    v.dedup();
    v
}
