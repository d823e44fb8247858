use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::data::{generate_histogram, Distribution, ValueHistogram};
use crate::error::{Error, Result};
use crate::planner::Strategy;
use crate::rational::{parse_ratio, ratio, Ratio};
use crate::selectivity::OracleBudget;

/// How to synthesize one relation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationSpec {
    pub domain: u32,
    pub tuples: u64,
    pub dist: Distribution,
    pub seed: u64,
}

impl RelationSpec {
    pub fn histogram(&self) -> Result<ValueHistogram> {
        generate_histogram(self.domain, self.tuples, &self.dist, self.seed)
    }
}

fn default_strategies() -> Vec<Strategy> {
    vec![Strategy::Hash, Strategy::Hjps, Strategy::Prpd]
}

fn default_skew_threshold() -> String {
    "2".into()
}

fn default_digest() -> bool {
    true
}

/// Full description of a gen → plan → simulate experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub r: RelationSpec,
    pub s: RelationSpec,
    pub procs: usize,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<Strategy>,
    /// HJPS `pn` threshold, as a rational string.
    #[serde(default = "default_skew_threshold")]
    pub skew_threshold: String,
    /// PRPD relative-frequency cutoff; `1/procs` when absent.
    #[serde(default)]
    pub prpd_threshold: Option<String>,
    #[serde(default)]
    pub oracle_budget: Option<u64>,
    #[serde(default)]
    pub verify: bool,
    #[serde(default = "default_digest")]
    pub digest: bool,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.procs == 0 {
            return Err(Error::config("procs must be at least 1"));
        }
        if self.r.domain != self.s.domain {
            return Err(Error::config("R and S must share a join domain"));
        }
        if self.strategies.is_empty() {
            return Err(Error::config("no strategies selected"));
        }
        self.skew_threshold()?;
        self.prpd_threshold()?;
        Ok(())
    }

    pub fn skew_threshold(&self) -> Result<Ratio> {
        parse_ratio(&self.skew_threshold)
    }

    pub fn prpd_threshold(&self) -> Result<Ratio> {
        match &self.prpd_threshold {
            Some(t) => parse_ratio(t),
            None => Ok(default_prpd_threshold(self.procs)),
        }
    }

    pub fn budget(&self) -> Result<OracleBudget> {
        match self.oracle_budget {
            Some(b) => Ok(OracleBudget(b)),
            None => OracleBudget::from_env(),
        }
    }
}

/// A value is PRPD-skewed in a relation when it alone holds at least one
/// processor's fair share of that relation.
pub fn default_prpd_threshold(procs: usize) -> Ratio {
    ratio(1, procs.max(1) as u64)
}
