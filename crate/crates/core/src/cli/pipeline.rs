use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use super::commands::{write_atomic, write_json};
use super::config::{default_prpd_threshold, ExperimentConfig};
use crate::data::{
    build_histogram, materialize_relation, write_relation, Relation, ValueHistogram,
};
use crate::planner::{
    freqclass_plan, hash_plan, hjps_plan_with, prpd_plan, HjpsConfig, PartitionPlan, Strategy,
};
use crate::rational::{to_f64, Ratio};
use crate::selectivity::OracleBudget;
use crate::simulator::{execute_plan_with, verify_output, ExecuteOptions, ExecutionReport};

/// One line of the `compare` metrics table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub strategy: Strategy,
    pub jps_factor: String,
    pub redist_r: String,
    pub redist_s: String,
    pub max_joins: u128,
    pub total_joins: u128,
}

impl ComparisonRow {
    fn from_report(rep: &ExecutionReport) -> Self {
        let fmt = |r: &Ratio| format!("{:.6}", to_f64(r));
        Self {
            strategy: rep.strategy,
            jps_factor: fmt(&rep.metrics.jps_factor),
            redist_r: fmt(&rep.metrics.redist_factor_r),
            redist_s: fmt(&rep.metrics.redist_factor_s),
            max_joins: rep.max_joins(),
            total_joins: rep.total_joins,
        }
    }
}

pub(super) fn make_plan(
    strategy: Strategy,
    h_r: &ValueHistogram,
    h_s: &ValueHistogram,
    procs: usize,
    skew_threshold: &Ratio,
    prpd_threshold: Option<&Ratio>,
) -> crate::Result<PartitionPlan> {
    match strategy {
        Strategy::Hash => hash_plan(h_r.domain_size(), procs),
        Strategy::Hjps => hjps_plan_with(
            h_r,
            h_s,
            procs,
            &HjpsConfig {
                skew_threshold: skew_threshold.clone(),
            },
        ),
        Strategy::Prpd => {
            let t = prpd_threshold
                .cloned()
                .unwrap_or_else(|| default_prpd_threshold(procs));
            prpd_plan(h_r, h_s, procs, &t)
        }
        Strategy::Freqclass => freqclass_plan(h_r, h_s, procs),
    }
}

/// Plans, executes and optionally verifies every strategy on one instance.
/// The second result is `Some(all_ok)` when a budget was given.
pub fn compare_strategies(
    strategies: &[Strategy],
    r: &Relation,
    s: &Relation,
    procs: usize,
    skew_threshold: &Ratio,
    prpd_threshold: Option<&Ratio>,
    verify: Option<OracleBudget>,
) -> crate::Result<(Vec<ComparisonRow>, Option<bool>)> {
    let h_r = build_histogram(r);
    let h_s = build_histogram(s);
    let mut rows = Vec::new();
    let mut all_ok = verify.map(|_| true);
    for &st in strategies {
        let plan = make_plan(st, &h_r, &h_s, procs, skew_threshold, prpd_threshold)?;
        let opts = ExecuteOptions {
            digest: verify.is_some(),
            ..Default::default()
        };
        let rep = execute_plan_with(&plan, r, s, opts)?;
        if let Some(budget) = verify {
            if !verify_output(&rep, r, s, budget)? {
                all_ok = Some(false);
            }
        }
        rows.push(ComparisonRow::from_report(&rep));
    }
    Ok((rows, all_ok))
}

pub(super) fn write_csv(path: &Path, rows: &[ComparisonRow]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().context("flushing CSV")?;
    write_atomic(path, &bytes)
}

/// Files written by [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentOutputs {
    pub histograms: [PathBuf; 2],
    pub relations: [PathBuf; 2],
    pub plans: Vec<PathBuf>,
    pub reports: Vec<PathBuf>,
    pub metrics_csv: PathBuf,
    pub rows: Vec<ComparisonRow>,
    pub verified: Option<bool>,
}

/// gen → materialize → plan → simulate for every configured strategy,
/// writing each intermediate artifact into `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> anyhow::Result<ExperimentOutputs> {
    cfg.validate()?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let skew_threshold = cfg.skew_threshold()?;
    let prpd_threshold = cfg.prpd_threshold()?;
    let budget = if cfg.verify {
        Some(cfg.budget()?)
    } else {
        None
    };

    let h_r = cfg.r.histogram()?;
    let h_s = cfg.s.histogram()?;
    let histograms = [out_dir.join("r.hist.json"), out_dir.join("s.hist.json")];
    write_json(&histograms[0], &h_r)?;
    write_json(&histograms[1], &h_s)?;

    let r = materialize_relation(&h_r, "R", cfg.r.seed)?;
    let s = materialize_relation(&h_s, "S", cfg.s.seed)?;
    let relations = [out_dir.join("r.bin"), out_dir.join("s.bin")];
    for (rel, path) in [(&r, &relations[0]), (&s, &relations[1])] {
        let mut buf = Vec::new();
        write_relation(rel, &mut buf)?;
        write_atomic(path, &buf)?;
    }

    let mut plans = Vec::new();
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    let mut verified = budget.map(|_| true);
    for &st in &cfg.strategies {
        let plan = make_plan(
            st,
            &h_r,
            &h_s,
            cfg.procs,
            &skew_threshold,
            Some(&prpd_threshold),
        )?;
        let plan_path = out_dir.join(format!("plan-{st}.json"));
        write_json(&plan_path, &plan)?;
        let opts = ExecuteOptions {
            digest: cfg.digest || cfg.verify,
            ..Default::default()
        };
        let rep = execute_plan_with(&plan, &r, &s, opts)?;
        let report_path = out_dir.join(format!("report-{st}.json"));
        write_json(&report_path, &rep)?;
        if let Some(b) = budget {
            if !verify_output(&rep, &r, &s, b)? {
                verified = Some(false);
            }
        }
        rows.push(ComparisonRow::from_report(&rep));
        plans.push(plan_path);
        reports.push(report_path);
    }
    let metrics_csv = out_dir.join("metrics.csv");
    write_csv(&metrics_csv, &rows)?;
    Ok(ExperimentOutputs {
        histograms,
        relations,
        plans,
        reports,
        metrics_csv,
        rows,
        verified,
    })
}
