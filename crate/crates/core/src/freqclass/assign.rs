use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use super::FrequencyTree;
use crate::data::JoinValue;
use crate::error::{Error, Result};
use crate::rational::{format_ratio, int, Ratio};

/// A selected node of the frequency tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    /// Whole class, by index into the tree's class list.
    Class(usize),
    Leaf(JoinValue),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessorSelection {
    pub processor: usize,
    pub selections: Vec<Selection>,
    pub load: Ratio,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassAssignment {
    pub target_workload: Ratio,
    pub processors: Vec<ProcessorSelection>,
    /// Value → processor, resolved through class selections.
    pub owner: BTreeMap<JoinValue, usize>,
}

impl ClassAssignment {
    pub fn n(&self) -> usize {
        self.processors.len()
    }

    pub fn max_load(&self) -> Ratio {
        self.processors
            .iter()
            .map(|p| p.load.clone())
            .max()
            .unwrap_or_else(Ratio::zero)
    }

    pub fn total_load(&self) -> Ratio {
        self.processors
            .iter()
            .fold(Ratio::zero(), |acc, p| acc + &p.load)
    }
}

#[derive(Serialize)]
struct AssignmentWire<'a> {
    n: usize,
    target_workload: String,
    processors: Vec<ProcessorWire<'a>>,
}

#[derive(Serialize)]
struct ProcessorWire<'a> {
    p: usize,
    load: String,
    classes: Vec<&'a str>,
    leaves: Vec<u32>,
}

impl ClassAssignment {
    /// JSON form; class selections are named by their tree labels.
    pub fn to_json(&self, tree: &FrequencyTree) -> serde_json::Value {
        let wire = AssignmentWire {
            n: self.n(),
            target_workload: format_ratio(&self.target_workload),
            processors: self
                .processors
                .iter()
                .map(|p| ProcessorWire {
                    p: p.processor,
                    load: format_ratio(&p.load),
                    classes: p
                        .selections
                        .iter()
                        .filter_map(|s| match s {
                            Selection::Class(k) => Some(tree.classes[*k].label.as_str()),
                            Selection::Leaf(_) => None,
                        })
                        .collect(),
                    leaves: p
                        .selections
                        .iter()
                        .filter_map(|s| match s {
                            Selection::Leaf(v) => Some(v.0),
                            Selection::Class(_) => None,
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_value(wire).expect("assignment serializes")
    }
}

fn least_loaded(loads: &[Ratio]) -> usize {
    // first minimum: lower processor id wins ties
    let mut best = 0;
    for (p, l) in loads.iter().enumerate().skip(1) {
        if *l < loads[best] {
            best = p;
        }
    }
    best
}

/// Greedy longest-processing-time assignment of classes to `n` processors.
///
/// Classes are visited by descending workload (ties: smallest member id
/// first) and placed whole on the least-loaded processor. A class is split
/// into leaves instead when it exceeds the target `T = total / n`, or when
/// placing it whole would push that processor past `T + L`, where `L` is the
/// largest single-leaf workload. Split leaves go, largest first, to the
/// least-loaded processor one at a time. Every placement then starts from a
/// load of at most `T`, so no processor ends above `T + L`.
pub fn assign_classes(
    tree: &FrequencyTree,
    class_loads: &[Ratio],
    leaf_loads: &BTreeMap<JoinValue, Ratio>,
    n: usize,
) -> Result<ClassAssignment> {
    if n == 0 {
        return Err(Error::config("processor count must be positive"));
    }
    if class_loads.len() != tree.classes.len() {
        return Err(Error::Precondition(format!(
            "{} class workloads for {} tree classes",
            class_loads.len(),
            tree.classes.len()
        )));
    }
    for (_, v) in tree.leaves() {
        if !leaf_loads.contains_key(&v) {
            return Err(Error::Precondition(format!("no workload for leaf {v}")));
        }
    }

    let total = class_loads.iter().fold(Ratio::zero(), |acc, l| acc + l);
    let target = total / int(n as u64);
    let max_leaf = leaf_loads
        .values()
        .max()
        .cloned()
        .unwrap_or_else(Ratio::zero);
    let ceiling = &target + &max_leaf;

    let mut order: Vec<usize> = (0..tree.classes.len()).collect();
    order.sort_by(|&a, &b| {
        class_loads[b].cmp(&class_loads[a]).then_with(|| {
            tree.classes[a]
                .leaves
                .first()
                .cmp(&tree.classes[b].leaves.first())
        })
    });

    let mut loads = vec![Ratio::zero(); n];
    let mut selections: Vec<Vec<Selection>> = vec![Vec::new(); n];
    let mut owner = BTreeMap::new();

    for k in order {
        let node = &tree.classes[k];
        let load = &class_loads[k];
        let p = least_loaded(&loads);
        let fits = node.leaves.len() <= 1 || (*load <= target && &loads[p] + load <= ceiling);
        if fits {
            loads[p] += load;
            selections[p].push(Selection::Class(k));
            for &v in &node.leaves {
                owner.insert(v, p);
            }
            continue;
        }
        let mut leaves = node.leaves.clone();
        leaves.sort_by(|a, b| match leaf_loads[b].cmp(&leaf_loads[a]) {
            Ordering::Equal => a.cmp(b),
            o => o,
        });
        for v in leaves {
            let p = least_loaded(&loads);
            loads[p] += &leaf_loads[&v];
            selections[p].push(Selection::Leaf(v));
            owner.insert(v, p);
        }
    }

    let processors = loads
        .into_iter()
        .zip(selections)
        .enumerate()
        .map(|(processor, (load, selections))| ProcessorSelection {
            processor,
            selections,
            load,
        })
        .collect();
    Ok(ClassAssignment {
        target_workload: target,
        processors,
        owner,
    })
}
