//! Join product skew toolkit.
//!
//! The crate models a binary equijoin `R ⋈ S` on a single integer-coded
//! join attribute, spread across `n` virtual shared-nothing processors:
//!
//! - [`data`]: value histograms, exact relative frequencies, a seeded
//!   workload generator and concrete tuple relations.
//! - [`selectivity`]: exact join selectivity and cardinality, chain-join
//!   estimates and the nested-loop oracles that check them.
//! - [`freqclass`]: frequency classes, the two-level frequency tree and
//!   greedy class-to-processor assignment.
//! - [`planner`]: routing plans (plain hash, HJPS, PRPD, frequency classes).
//! - [`simulator`]: executes a plan, measures per-processor load and
//!   verifies the distributed output against the oracle.
//! - [`cli`]: the `skewjoin` command line.

pub mod cli;
pub mod data;
pub mod error;
pub mod freqclass;
pub mod hashing;
pub mod planner;
pub mod rational;
pub mod selectivity;
pub mod simulator;

pub use data::{
    build_histogram, generate_histogram, materialize_relation, relative_frequencies, Distribution,
    FrequencyMap, JoinValue, Relation, Tuple, ValueHistogram,
};
pub use error::{Error, Result};
pub use freqclass::{
    assign_classes, build_frequency_tree, class_workload, exact_classes, fk_classes,
    ideal_workload, product_classes, range_classes, ClassAssignment, ClassMode, FrequencyClass,
    FrequencyClassSet, FrequencyTree,
};
pub use planner::{
    freqclass_plan, hash_plan, hjps_plan, hjps_plan_with, prpd_plan, HjpsConfig, PartitionPlan,
    RouteAction, RouteDirective, SkewStats, Strategy,
};
pub use selectivity::{
    brute_force_chain, brute_force_join, chain_cardinality, chain_selectivity, join_cardinality,
    join_selectivity, ChainRelation, ChainSpec, ChainTuple, JoinedTuple, OracleBudget, Selectivity,
};
pub use simulator::{
    execute_plan, execute_plan_with, skew_metrics, verify_output, ExecuteOptions, ExecutionReport,
    OutputDigest, ProcessorLoad, SkewMetrics,
};
