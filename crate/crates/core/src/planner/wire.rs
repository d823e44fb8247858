//! JSON form of a [`PartitionPlan`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{PartitionPlan, RouteAction, RouteDirective, SkewStats, Strategy};
use crate::data::JoinValue;
use crate::error::{Error, Result};
use crate::rational::{format_ratio, parse_ratio};

#[derive(Serialize, Deserialize)]
pub(super) struct PlanWire {
    strategy: Strategy,
    n: usize,
    domain_size: u32,
    skew_stats: Option<StatsWire>,
    directives: Vec<DirectiveWire>,
    residual_processors: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct StatsWire {
    tpc: u128,
    pwl: String,
    threshold: String,
    vwl: BTreeMap<u32, u128>,
    pn: BTreeMap<u32, String>,
    sk: Vec<u32>,
    #[serde(default)]
    both_skewed: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct ActionWire {
    action: RouteAction,
}

#[derive(Serialize, Deserialize)]
struct DirectiveWire {
    value: u32,
    r: ActionWire,
    s: ActionWire,
    group: Vec<usize>,
}

impl From<PartitionPlan> for PlanWire {
    fn from(p: PartitionPlan) -> Self {
        PlanWire {
            strategy: p.strategy,
            n: p.n,
            domain_size: p.domain_size,
            skew_stats: p.skew_stats.map(|s| StatsWire {
                tpc: s.tpc,
                pwl: format_ratio(&s.pwl),
                threshold: format_ratio(&s.threshold),
                vwl: s.vwl.into_iter().map(|(v, w)| (v.0, w)).collect(),
                pn: s.pn.iter().map(|(v, r)| (v.0, format_ratio(r))).collect(),
                sk: s.skewed.iter().map(|v| v.0).collect(),
                both_skewed: s.both_skewed.iter().map(|v| v.0).collect(),
            }),
            directives: p
                .directives
                .into_values()
                .map(|d| DirectiveWire {
                    value: d.value.0,
                    r: ActionWire { action: d.r },
                    s: ActionWire { action: d.s },
                    group: d.group,
                })
                .collect(),
            residual_processors: p.residual_processors,
        }
    }
}

impl TryFrom<PlanWire> for PartitionPlan {
    type Error = Error;

    fn try_from(w: PlanWire) -> Result<Self> {
        let skew_stats = match w.skew_stats {
            None => None,
            Some(s) => Some(SkewStats {
                tpc: s.tpc,
                pwl: parse_ratio(&s.pwl)?,
                threshold: parse_ratio(&s.threshold)?,
                vwl: s.vwl.into_iter().map(|(v, x)| (JoinValue(v), x)).collect(),
                pn: s
                    .pn
                    .into_iter()
                    .map(|(v, r)| Ok((JoinValue(v), parse_ratio(&r)?)))
                    .collect::<Result<_>>()?,
                skewed: s.sk.into_iter().map(JoinValue).collect(),
                both_skewed: s.both_skewed.into_iter().map(JoinValue).collect(),
            }),
        };
        let mut directives = BTreeMap::new();
        for d in w.directives {
            if d.value >= w.domain_size {
                return Err(Error::Format(format!(
                    "directive value {} outside domain",
                    d.value
                )));
            }
            let v = JoinValue(d.value);
            let directive = RouteDirective {
                value: v,
                r: d.r.action,
                s: d.s.action,
                group: d.group,
            };
            if directives.insert(v, directive).is_some() {
                return Err(Error::Format(format!("duplicate directive for {v}")));
            }
        }
        let plan = PartitionPlan {
            strategy: w.strategy,
            n: w.n,
            domain_size: w.domain_size,
            directives,
            residual_processors: w.residual_processors,
            skew_stats,
        };
        plan.check_executable()?;
        Ok(plan)
    }
}

#[cfg(test)]
mod tests {
    use crate::data::ValueHistogram;
    use crate::planner::{hjps_plan, PartitionPlan};

    #[test]
    fn json_round_trip_and_shape() {
        let h = ValueHistogram::from_dense(&[8, 2, 2, 2]).unwrap();
        let plan = hjps_plan(&h, &h, 4).unwrap();
        let json = serde_json::to_value(&plan).unwrap();
        assert_eq!(json["strategy"], "hjps");
        assert_eq!(json["n"], 4);
        assert_eq!(json["skew_stats"]["tpc"], 76);
        assert_eq!(json["skew_stats"]["pn"]["0"], "64/19");
        assert_eq!(json["skew_stats"]["sk"][0], 0);
        assert_eq!(json["directives"][0]["r"]["action"], "hash_into");
        assert_eq!(json["directives"][0]["s"]["action"], "broadcast_to");
        assert_eq!(json["directives"][0]["group"], serde_json::json!([0, 1, 2]));
        assert_eq!(json["residual_processors"], serde_json::json!([3]));
        let back: PartitionPlan = serde_json::from_value(json).unwrap();
        assert_eq!(back, plan);
    }

    #[test]
    fn out_of_range_processor_rejected() {
        let bad = r#"{"strategy":"hash","n":2,"domain_size":2,"skew_stats":null,
            "directives":[{"value":0,"r":{"action":"residual_hash"},"s":{"action":"residual_hash"},"group":[5]}],
            "residual_processors":[0,1]}"#;
        assert!(serde_json::from_str::<PartitionPlan>(bad).is_err());
    }
}
