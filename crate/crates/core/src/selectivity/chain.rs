use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::oracle::ChainTuple;
use super::{chain_selectivity, join_selectivity, Selectivity};
use crate::data::{relative_frequencies, JoinValue, ValueHistogram};
use crate::error::{Error, Result};
use crate::rational::{int, Ratio};

/// One relation `R_i(A_{i-1}, A_i)` of a chain join, described by its
/// marginal histograms. The first relation has no left histogram and the
/// last has no right one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainRelation {
    pub name: String,
    pub left_attr_hist: Option<ValueHistogram>,
    pub right_attr_hist: Option<ValueHistogram>,
    pub total: u64,
}

/// Chain join `⋈_{i=1..k} R_i(A_{i-1}, A_i)`.
///
/// `independent` asserts that every interior relation's joint distribution
/// is the product of its two marginals. Only then can the chain be
/// materialized and the product-of-selectivities estimate be exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub relations: Vec<ChainRelation>,
    pub independent: bool,
}

impl ChainSpec {
    pub fn validate(&self) -> Result<()> {
        let k = self.relations.len();
        if k < 2 {
            return Err(Error::config("a chain join needs at least two relations"));
        }
        for (i, rel) in self.relations.iter().enumerate() {
            let is_first = i == 0;
            let is_last = i == k - 1;
            match (&rel.left_attr_hist, is_first) {
                (Some(_), true) => {
                    return Err(Error::config(format!(
                        "first relation {} must not carry a left histogram",
                        rel.name
                    )))
                }
                (None, false) => {
                    return Err(Error::config(format!(
                        "relation {} is missing its left histogram",
                        rel.name
                    )))
                }
                _ => {}
            }
            match (&rel.right_attr_hist, is_last) {
                (Some(_), true) => {
                    return Err(Error::config(format!(
                        "last relation {} must not carry a right histogram",
                        rel.name
                    )))
                }
                (None, false) => {
                    return Err(Error::config(format!(
                        "relation {} is missing its right histogram",
                        rel.name
                    )))
                }
                _ => {}
            }
            for h in [&rel.left_attr_hist, &rel.right_attr_hist]
                .into_iter()
                .flatten()
            {
                if h.total() != rel.total {
                    return Err(Error::config(format!(
                        "relation {}: histogram total {} differs from relation total {}",
                        rel.name,
                        h.total(),
                        rel.total
                    )));
                }
            }
        }
        for pair in self.relations.windows(2) {
            let right = pair[0].right_attr_hist.as_ref().expect("validated above");
            let left = pair[1].left_attr_hist.as_ref().expect("validated above");
            if right.domain_size() != left.domain_size() {
                return Err(Error::config(format!(
                    "attribute shared by {} and {} has domain sizes {} and {}",
                    pair[0].name,
                    pair[1].name,
                    right.domain_size(),
                    left.domain_size()
                )));
            }
        }
        Ok(())
    }

    /// Builds an independent chain whose interior relations are full cross
    /// products of two factor histograms: the interior tuple `(a, b)` occurs
    /// `left(a)·right(b)` times.
    pub fn from_cross_products(
        first: ValueHistogram,
        interiors: Vec<(ValueHistogram, ValueHistogram)>,
        last: ValueHistogram,
    ) -> Result<Self> {
        let mut relations = Vec::with_capacity(interiors.len() + 2);
        relations.push(ChainRelation {
            name: "R1".into(),
            left_attr_hist: None,
            total: first.total(),
            right_attr_hist: Some(first),
        });
        for (i, (left, right)) in interiors.into_iter().enumerate() {
            let total = left
                .total()
                .checked_mul(right.total())
                .ok_or_else(|| Error::config("interior relation too large"))?;
            let left_marginal = scale(&left, right.total())?;
            let right_marginal = scale(&right, left.total())?;
            relations.push(ChainRelation {
                name: format!("R{}", i + 2),
                left_attr_hist: Some(left_marginal),
                right_attr_hist: Some(right_marginal),
                total,
            });
        }
        let k = relations.len() + 1;
        relations.push(ChainRelation {
            name: format!("R{k}"),
            total: last.total(),
            left_attr_hist: Some(last),
            right_attr_hist: None,
        });
        let spec = ChainSpec {
            relations,
            independent: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Concrete tuples for every relation. Interior relations are realized
    /// as the product of their marginals, `count(a, b) = left(a)·right(b)/t`,
    /// which must come out integral.
    pub fn materialize(&self) -> Result<Vec<Vec<ChainTuple>>> {
        self.validate()?;
        if !self.independent {
            return Err(Error::Precondition(
                "only chains flagged independent can be materialized from marginals".into(),
            ));
        }
        let k = self.relations.len();
        let mut tables = Vec::with_capacity(k);
        for (i, rel) in self.relations.iter().enumerate() {
            let mut table = Vec::new();
            if i == 0 || i == k - 1 {
                let (h, on_right) = if i == 0 {
                    (rel.right_attr_hist.as_ref().unwrap(), true)
                } else {
                    (rel.left_attr_hist.as_ref().unwrap(), false)
                };
                for (v, c) in h.iter() {
                    let t = if on_right {
                        ChainTuple {
                            left: JoinValue(0),
                            right: v,
                        }
                    } else {
                        ChainTuple {
                            left: v,
                            right: JoinValue(0),
                        }
                    };
                    table.extend(std::iter::repeat_n(t, c as usize));
                }
            } else {
                let left = rel.left_attr_hist.as_ref().unwrap();
                let right = rel.right_attr_hist.as_ref().unwrap();
                let t = u128::from(rel.total);
                for (a, ca) in left.iter() {
                    for (b, cb) in right.iter() {
                        let joint = u128::from(ca) * u128::from(cb);
                        if joint % t != 0 {
                            return Err(Error::Precondition(format!(
                                "relation {} is not realizable as a product of its marginals",
                                rel.name
                            )));
                        }
                        let n = (joint / t) as usize;
                        table.extend(std::iter::repeat_n(ChainTuple { left: a, right: b }, n));
                    }
                }
            }
            tables.push(table);
        }
        Ok(tables)
    }
}

fn scale(h: &ValueHistogram, factor: u64) -> Result<ValueHistogram> {
    let mut out = ValueHistogram::new(h.domain_size())?;
    for (v, c) in h.iter() {
        let scaled = c
            .checked_mul(factor)
            .ok_or_else(|| Error::config("histogram count overflow"))?;
        out.add(v, scaled)?;
    }
    Ok(out)
}

/// Pairwise selectivities `μ_{i,i+1}` on the shared attributes. `None` when
/// some relation is empty and frequencies are undefined.
pub fn chain_selectivities(spec: &ChainSpec) -> Result<Option<Vec<Selectivity>>> {
    spec.validate()?;
    if spec.relations.iter().any(|r| r.total == 0) {
        return Ok(None);
    }
    spec.relations
        .windows(2)
        .map(|pair| {
            let right = relative_frequencies(pair[0].right_attr_hist.as_ref().unwrap())?;
            let left = relative_frequencies(pair[1].left_attr_hist.as_ref().unwrap())?;
            join_selectivity(&right, &left)
        })
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

/// `(Π μ_{i,i+1}) · (Π |R_j|)`. Exact (and integral) when the independence
/// flag holds; otherwise an unrounded estimate.
pub fn chain_cardinality(spec: &ChainSpec) -> Result<Ratio> {
    let Some(mus) = chain_selectivities(spec)? else {
        return Ok(Ratio::zero());
    };
    let mu = chain_selectivity(&mus)?;
    let sizes = spec
        .relations
        .iter()
        .fold(int(1), |acc, r| acc * int(r.total));
    Ok(mu.into_inner() * sizes)
}
