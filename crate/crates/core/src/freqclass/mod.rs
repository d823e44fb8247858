//! Frequency classes.
//!
//! A frequency class groups the join values whose frequency (homogeneous
//! inputs) or frequency product (heterogeneous inputs) is identical, or falls
//! into the same half-open range. Every value in a class produces the same
//! number of joined tuples, which makes classes the natural unit for
//! spreading join work over processors. Values whose product is zero produce
//! nothing and never appear in a class.

mod assign;
mod tree;

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

pub use assign::{assign_classes, ClassAssignment, ProcessorSelection, Selection};
pub use tree::{build_frequency_tree, ClassNode, FrequencyTree};

use crate::data::{FrequencyMap, JoinValue, ValueHistogram};
use crate::error::{Error, Result};
use crate::rational::{format_ratio, int, ratio, Ratio};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassMode {
    /// `f1 = f2 = f`, keyed by `f(b)`.
    ExactHomogeneous,
    /// Keyed by `f1(b)·f2(b)`.
    ExactProduct,
    /// Keyed by the lower bound of `[f_{k-1}, f_k)` containing `f1(b)·f2(b)`.
    Range,
    /// Primary key on `R1`, keyed by the foreign-key frequency `f2(b)`.
    Fk,
}

impl ClassMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassMode::ExactHomogeneous => "exact-homogeneous",
            ClassMode::ExactProduct => "exact-product",
            ClassMode::Range => "range",
            ClassMode::Fk => "fk",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyClass {
    pub key: Ratio,
    /// Exclusive upper bound, range mode only.
    pub upper: Option<Ratio>,
    /// Member value → its pairing product `f1(b)·f2(b)`.
    pub members: BTreeMap<JoinValue, Ratio>,
}

impl FrequencyClass {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn smallest_member(&self) -> Option<JoinValue> {
        self.members.keys().next().copied()
    }

    /// Joined tuples produced by the whole class. Exact modes use the
    /// closed form; range classes sum their members' exact products.
    pub fn workload(&self, mode: ClassMode, total_r: u64, total_s: u64) -> Ratio {
        match mode {
            ClassMode::Range => {
                self.members.values().fold(Ratio::zero(), |acc, p| acc + p)
                    * int(total_r)
                    * int(total_s)
            }
            _ => class_workload(self.len(), &self.key, total_r, total_s, mode),
        }
    }

    pub fn leaf_workload(&self, value: JoinValue, total_r: u64, total_s: u64) -> Option<Ratio> {
        self.members
            .get(&value)
            .map(|p| p * int(total_r) * int(total_s))
    }
}

/// Classes ordered by strictly descending key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyClassSet {
    pub mode: ClassMode,
    pub classes: Vec<FrequencyClass>,
}

impl FrequencyClassSet {
    fn from_grouping(mode: ClassMode, groups: BTreeMap<Ratio, FrequencyClass>) -> Self {
        let classes = groups.into_values().rev().collect();
        Self { mode, classes }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// All member values, ascending.
    pub fn support(&self) -> Vec<JoinValue> {
        let mut v: Vec<JoinValue> = self
            .classes
            .iter()
            .flat_map(|c| c.members.keys().copied())
            .collect();
        v.sort_unstable();
        v
    }

    pub fn class_of(&self, value: JoinValue) -> Option<usize> {
        self.classes
            .iter()
            .position(|c| c.members.contains_key(&value))
    }

    /// Per-class and per-leaf workloads, in joined tuples.
    pub fn workloads(
        &self,
        total_r: u64,
        total_s: u64,
    ) -> (Vec<Ratio>, BTreeMap<JoinValue, Ratio>) {
        let class_loads = self
            .classes
            .iter()
            .map(|c| c.workload(self.mode, total_r, total_s))
            .collect();
        let leaf_loads = self
            .classes
            .iter()
            .flat_map(|c| {
                c.members
                    .iter()
                    .map(|(&v, p)| (v, p * int(total_r) * int(total_s)))
            })
            .collect();
        (class_loads, leaf_loads)
    }
}

#[derive(Serialize)]
struct ClassSetWire {
    mode: ClassMode,
    classes: Vec<ClassWire>,
}

#[derive(Serialize)]
struct ClassWire {
    key: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    upper: Option<String>,
    members: Vec<u32>,
}

impl Serialize for FrequencyClassSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ClassSetWire {
            mode: self.mode,
            classes: self
                .classes
                .iter()
                .map(|c| ClassWire {
                    key: format_ratio(&c.key),
                    upper: c.upper.as_ref().map(format_ratio),
                    members: c.members.keys().map(|v| v.0).collect(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

fn insert_member(
    groups: &mut BTreeMap<Ratio, FrequencyClass>,
    key: Ratio,
    upper: Option<Ratio>,
    value: JoinValue,
    product: Ratio,
) {
    groups
        .entry(key.clone())
        .or_insert_with(|| FrequencyClass {
            key,
            upper,
            members: BTreeMap::new(),
        })
        .members
        .insert(value, product);
}

/// Groups values of a homogeneous distribution by exact frequency.
pub fn exact_classes(f: &FrequencyMap) -> FrequencyClassSet {
    let mut groups = BTreeMap::new();
    for (v, freq) in f.iter() {
        insert_member(&mut groups, freq.clone(), None, v, freq * freq);
    }
    FrequencyClassSet::from_grouping(ClassMode::ExactHomogeneous, groups)
}

fn positive_products(f1: &FrequencyMap, f2: &FrequencyMap) -> Result<Vec<(JoinValue, Ratio)>> {
    f1.ensure_same_domain(f2)?;
    Ok(f1
        .iter()
        .filter_map(|(v, a)| f2.get_ref(v).map(|b| (v, a * b)))
        .filter(|(_, p)| !p.is_zero())
        .collect())
}

/// Groups values by exact frequency product `f1(b)·f2(b)`.
pub fn product_classes(f1: &FrequencyMap, f2: &FrequencyMap) -> Result<FrequencyClassSet> {
    let mut groups = BTreeMap::new();
    for (v, p) in positive_products(f1, f2)? {
        insert_member(&mut groups, p.clone(), None, v, p);
    }
    Ok(FrequencyClassSet::from_grouping(
        ClassMode::ExactProduct,
        groups,
    ))
}

/// Buckets frequency products into the half-open intervals
/// `[boundaries[k-1], boundaries[k])`. Empty intervals yield no class.
pub fn range_classes(
    f1: &FrequencyMap,
    f2: &FrequencyMap,
    boundaries: &[Ratio],
) -> Result<FrequencyClassSet> {
    if boundaries.len() < 2 {
        return Err(Error::config("range classes need at least two boundaries"));
    }
    if boundaries.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("range boundaries must be strictly ascending"));
    }
    let mut groups = BTreeMap::new();
    for (v, p) in positive_products(f1, f2)? {
        // first boundary strictly greater than p closes p's interval
        let k = boundaries.partition_point(|b| *b <= p);
        if k == 0 || k == boundaries.len() {
            return Err(Error::config(format!(
                "frequency product {} of {v} lies outside [{}, {})",
                format_ratio(&p),
                format_ratio(&boundaries[0]),
                format_ratio(boundaries.last().unwrap())
            )));
        }
        insert_member(
            &mut groups,
            boundaries[k - 1].clone(),
            Some(boundaries[k].clone()),
            v,
            p,
        );
    }
    Ok(FrequencyClassSet::from_grouping(ClassMode::Range, groups))
}

/// Primary-key/foreign-key classes keyed by the foreign-key frequency alone.
///
/// `pk` is the histogram of the key side and must hold each value at most
/// once. Foreign-key values without a matching key produce no joins and are
/// left out, like every other zero-product value.
pub fn fk_classes(pk: &ValueHistogram, f2: &FrequencyMap) -> Result<FrequencyClassSet> {
    if pk.domain_size() != f2.domain_size() {
        return Err(Error::config(format!(
            "domain size mismatch: {} vs {}",
            pk.domain_size(),
            f2.domain_size()
        )));
    }
    if let Some((v, c)) = pk.iter().find(|&(_, c)| c > 1) {
        return Err(Error::Precondition(format!(
            "primary key side holds {v} {c} times"
        )));
    }
    let mut groups = BTreeMap::new();
    for (v, freq) in f2.iter() {
        if pk.count(v) == 0 {
            continue;
        }
        let product = freq * ratio(1, pk.total());
        insert_member(&mut groups, freq.clone(), None, v, product);
    }
    Ok(FrequencyClassSet::from_grouping(ClassMode::Fk, groups))
}

/// Joined tuples produced by a class of `size` values with key `key`.
///
/// - homogeneous: `size·key²·|R1|·|R2|`
/// - product and range: `size·key·|R1|·|R2|`
/// - fk: `size·key·|R2|`, each key value matching exactly one `R1` tuple
pub fn class_workload(
    size: usize,
    key: &Ratio,
    total_r: u64,
    total_s: u64,
    mode: ClassMode,
) -> Ratio {
    let size = int(size as u64);
    match mode {
        ClassMode::ExactHomogeneous => size * key * key * int(total_r) * int(total_s),
        ClassMode::ExactProduct | ClassMode::Range => size * key * int(total_r) * int(total_s),
        ClassMode::Fk => size * key * int(total_s),
    }
}

/// Per-processor share of the total class workload.
pub fn ideal_workload(
    cs: &FrequencyClassSet,
    total_r: u64,
    total_s: u64,
    n: usize,
) -> Result<Ratio> {
    if n == 0 {
        return Err(Error::config("processor count must be positive"));
    }
    let total = cs.classes.iter().fold(Ratio::zero(), |acc, c| {
        acc + c.workload(cs.mode, total_r, total_s)
    });
    Ok(total / int(n as u64))
}
