//! Shared-nothing execution of a partition plan.
//!
//! Tuples are routed once, sequentially, according to their value's
//! directive. Each processor then joins its local fragments `R^p ⋈ S^p`
//! value by value. Load is measured in tuples received and joined tuples
//! produced, not time; skew is reported as max/ideal ratios.
//!
//! The output digest is a multiset hash: the wrapping sum of a 128-bit hash
//! of every `(payload_r, payload_s, value)` triple, finalized with the
//! triple count. It is independent of output order, so per-processor digests
//! can be computed in parallel and merged by addition, and any duplicated or
//! missing triple changes it.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::data::{JoinValue, Relation};
use crate::error::{Error, Result};
use crate::hashing::{hash_payload, hash_triple, mix64};
use crate::planner::{PartitionPlan, RouteAction, RouteDirective, Strategy};
use crate::rational::{int, to_f64, Ratio};
use crate::selectivity::{brute_force_join, JoinedTuple, OracleBudget};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecuteOptions {
    /// Compute the output digest (enumerates every joined pair).
    pub digest: bool,
    /// Keep the canonical sorted output in the report.
    pub collect_output: bool,
    /// Run local joins on the rayon pool.
    pub parallel: bool,
}

impl Default for ExecuteOptions {
    fn default() -> Self {
        Self {
            digest: true,
            collect_output: false,
            parallel: true,
        }
    }
}

impl ExecuteOptions {
    /// Load counts only; never touches individual output pairs.
    pub fn counts_only() -> Self {
        Self {
            digest: false,
            collect_output: false,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProcessorLoad {
    #[serde(rename = "p")]
    pub processor_id: usize,
    #[serde(rename = "recv_r")]
    pub received_r: u64,
    #[serde(rename = "recv_s")]
    pub received_s: u64,
    #[serde(rename = "joins")]
    pub produced_joins: u128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkewMetrics {
    /// `max_p produced_joins / (total_joins / n)`.
    pub jps_factor: Ratio,
    /// `max_p received_r / (|R| / n)`.
    pub redist_factor_r: Ratio,
    /// `max_p received_s / (|S| / n)`.
    pub redist_factor_s: Ratio,
}

impl Serialize for SkewMetrics {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            jps_factor: f64,
            redist_r: f64,
            redist_s: f64,
        }
        Wire {
            jps_factor: to_f64(&self.jps_factor),
            redist_r: to_f64(&self.redist_factor_r),
            redist_s: to_f64(&self.redist_factor_s),
        }
        .serialize(s)
    }
}

/// Order-independent 128-bit digest of a joined-tuple multiset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OutputDigest(pub u128);

impl fmt::Display for OutputDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:032x}", self.0)
    }
}

impl Serialize for OutputDigest {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct DigestAccumulator {
    sum: u128,
    count: u128,
}

impl DigestAccumulator {
    #[inline]
    fn add(&mut self, payload_r: u64, payload_s: u64, value: JoinValue) {
        self.sum = self
            .sum
            .wrapping_add(hash_triple(payload_r, payload_s, value.0));
        self.count += 1;
    }

    fn merge(self, other: Self) -> Self {
        Self {
            sum: self.sum.wrapping_add(other.sum),
            count: self.count + other.count,
        }
    }

    fn finish(self) -> OutputDigest {
        let lo = self.sum as u64;
        let hi = (self.sum >> 64) as u64;
        let c_lo = self.count as u64;
        let c_hi = (self.count >> 64) as u64;
        let out_lo = mix64(lo ^ mix64(c_lo ^ 0x5851_f42d_4c95_7f2d));
        let out_hi = mix64(hi ^ mix64(c_hi ^ c_lo.rotate_left(32) ^ 0x1405_7b7e_f767_814f));
        OutputDigest((u128::from(out_hi) << 64) | u128::from(out_lo))
    }
}

impl OutputDigest {
    pub fn of<'a>(tuples: impl IntoIterator<Item = &'a JoinedTuple>) -> Self {
        let mut acc = DigestAccumulator::default();
        for t in tuples {
            acc.add(t.payload_r, t.payload_s, t.value);
        }
        acc.finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExecutionReport {
    pub n: usize,
    pub strategy: Strategy,
    pub loads: Vec<ProcessorLoad>,
    pub total_joins: u128,
    #[serde(skip)]
    pub total_r: u64,
    #[serde(skip)]
    pub total_s: u64,
    pub metrics: SkewMetrics,
    #[serde(rename = "digest")]
    pub output_digest: Option<OutputDigest>,
    #[serde(skip)]
    pub output: Option<Vec<JoinedTuple>>,
}

impl ExecutionReport {
    pub fn max_joins(&self) -> u128 {
        self.loads
            .iter()
            .map(|l| l.produced_joins)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Default)]
struct Fragment {
    r: Vec<u64>,
    s: Vec<u64>,
}

#[derive(Clone, Copy)]
enum Side {
    R,
    S,
}

fn route(
    directive: &RouteDirective,
    action: RouteAction,
    payload: u64,
    mut deliver: impl FnMut(usize),
) {
    match action {
        RouteAction::ResidualHash => deliver(directive.group[0]),
        RouteAction::HashInto => {
            let g = directive.group.len() as u64;
            deliver(directive.group[(hash_payload(payload) % g) as usize]);
        }
        RouteAction::BroadcastTo => directive.group.iter().for_each(|&p| deliver(p)),
    }
}

struct LocalResult {
    load: ProcessorLoad,
    digest: DigestAccumulator,
    output: Vec<JoinedTuple>,
}

fn local_join(
    p: usize,
    frags: &BTreeMap<JoinValue, Fragment>,
    opts: ExecuteOptions,
) -> LocalResult {
    let mut load = ProcessorLoad {
        processor_id: p,
        received_r: 0,
        received_s: 0,
        produced_joins: 0,
    };
    let mut digest = DigestAccumulator::default();
    let mut output = Vec::new();
    for (&value, frag) in frags {
        load.received_r += frag.r.len() as u64;
        load.received_s += frag.s.len() as u64;
        load.produced_joins += frag.r.len() as u128 * frag.s.len() as u128;
        if opts.digest || opts.collect_output {
            for &pr in &frag.r {
                for &ps in &frag.s {
                    if opts.digest {
                        digest.add(pr, ps, value);
                    }
                    if opts.collect_output {
                        output.push(JoinedTuple {
                            payload_r: pr,
                            payload_s: ps,
                            value,
                        });
                    }
                }
            }
        }
    }
    LocalResult {
        load,
        digest,
        output,
    }
}

pub fn execute_plan(plan: &PartitionPlan, r: &Relation, s: &Relation) -> Result<ExecutionReport> {
    execute_plan_with(plan, r, s, ExecuteOptions::default())
}

/// Routes `r` and `s` through `plan` and joins locally on every processor.
pub fn execute_plan_with(
    plan: &PartitionPlan,
    r: &Relation,
    s: &Relation,
    opts: ExecuteOptions,
) -> Result<ExecutionReport> {
    plan.check_executable()?;
    let n = plan.n;
    let mut fragments: Vec<BTreeMap<JoinValue, Fragment>> =
        (0..n).map(|_| BTreeMap::new()).collect();

    for (rel, side) in [(r, Side::R), (s, Side::S)] {
        for t in &rel.tuples {
            let d = plan
                .directive(t.value)
                .ok_or(Error::PlanCoverage(t.value))?;
            let action = match side {
                Side::R => d.r,
                Side::S => d.s,
            };
            route(d, action, t.payload, |p| {
                let frag = fragments[p].entry(t.value).or_default();
                match side {
                    Side::R => frag.r.push(t.payload),
                    Side::S => frag.s.push(t.payload),
                }
            });
        }
    }

    let results: Vec<LocalResult> = if opts.parallel {
        fragments
            .par_iter()
            .enumerate()
            .map(|(p, f)| local_join(p, f, opts))
            .collect()
    } else {
        fragments
            .iter()
            .enumerate()
            .map(|(p, f)| local_join(p, f, opts))
            .collect()
    };

    let mut loads = Vec::with_capacity(n);
    let mut digest = DigestAccumulator::default();
    let mut output = Vec::new();
    for res in results {
        loads.push(res.load);
        digest = digest.merge(res.digest);
        output.extend(res.output);
    }
    let total_joins = loads.iter().map(|l| l.produced_joins).sum();
    let metrics = skew_metrics(&loads, r.len() as u64, s.len() as u64);
    let output = opts.collect_output.then(|| {
        output.sort_unstable();
        output
    });

    Ok(ExecutionReport {
        n,
        strategy: plan.strategy,
        loads,
        total_joins,
        total_r: r.len() as u64,
        total_s: s.len() as u64,
        metrics,
        output_digest: opts.digest.then(|| digest.finish()),
        output,
    })
}

/// Max/ideal ratio of `counts` against an even split of `total` over
/// `counts.len()` processors. An empty total counts as perfectly balanced.
fn imbalance(counts: impl Iterator<Item = u128> + Clone, total: u128) -> Ratio {
    if total == 0 {
        return int(1);
    }
    let n = counts.clone().count() as u64;
    let max = counts.max().unwrap_or(0);
    int(max) * int(n) / int(total)
}

pub fn skew_metrics(loads: &[ProcessorLoad], total_r: u64, total_s: u64) -> SkewMetrics {
    let total_joins: u128 = loads.iter().map(|l| l.produced_joins).sum();
    SkewMetrics {
        jps_factor: imbalance(loads.iter().map(|l| l.produced_joins), total_joins),
        redist_factor_r: imbalance(
            loads.iter().map(|l| u128::from(l.received_r)),
            u128::from(total_r),
        ),
        redist_factor_s: imbalance(
            loads.iter().map(|l| u128::from(l.received_s)),
            u128::from(total_s),
        ),
    }
}

/// True iff the distributed output equals the nested-loop join of `r` and
/// `s` as a multiset. Uses the collected output when the report has it, the
/// digest otherwise.
pub fn verify_output(
    report: &ExecutionReport,
    r: &Relation,
    s: &Relation,
    budget: OracleBudget,
) -> Result<bool> {
    if report.output.is_none() && report.output_digest.is_none() {
        return Err(Error::MissingDigest);
    }
    let expected = brute_force_join(r, s, budget)?;
    if report.total_joins != expected.len() as u128 {
        return Ok(false);
    }
    if let Some(out) = &report.output {
        return Ok(*out == expected);
    }
    Ok(report.output_digest == Some(OutputDigest::of(&expected)))
}

impl SkewMetrics {
    pub fn is_balanced(&self) -> bool {
        self.jps_factor.is_zero() || self.jps_factor == int(1)
    }
}
