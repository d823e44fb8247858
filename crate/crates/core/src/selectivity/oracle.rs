//! Exact nested-loop reference joins. Slow on purpose; they refuse to run
//! past a configured number of pair comparisons instead of sampling.

use crate::data::{JoinValue, Relation};
use crate::error::{Error, Result};

pub const ORACLE_BUDGET_ENV: &str = "SKEWJOIN_ORACLE_BUDGET";

/// Maximum number of pair comparisons an oracle may perform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget(pub u64);

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget(100_000_000)
    }
}

impl OracleBudget {
    /// Default budget, overridden by `SKEWJOIN_ORACLE_BUDGET` when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(ORACLE_BUDGET_ENV) {
            Ok(v) => {
                v.trim().parse().map(OracleBudget).map_err(|_| {
                    Error::config(format!("{ORACLE_BUDGET_ENV}={v:?} is not an integer"))
                })
            }
            Err(_) => Ok(Self::default()),
        }
    }

    fn check(self, required: u128) -> Result<()> {
        if required > u128::from(self.0) {
            return Err(Error::OracleBudget {
                required,
                budget: self.0,
            });
        }
        Ok(())
    }
}

/// One output row of `R ⋈ S`. Ordering is the canonical multiset order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JoinedTuple {
    pub payload_r: u64,
    pub payload_s: u64,
    pub value: JoinValue,
}

/// Nested-loop equijoin, returned sorted.
pub fn brute_force_join(
    r: &Relation,
    s: &Relation,
    budget: OracleBudget,
) -> Result<Vec<JoinedTuple>> {
    budget.check(r.len() as u128 * s.len() as u128)?;
    let mut out = Vec::new();
    for tr in &r.tuples {
        for ts in &s.tuples {
            if tr.value == ts.value {
                out.push(JoinedTuple {
                    payload_r: tr.payload,
                    payload_s: ts.payload,
                    value: tr.value,
                });
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// A tuple of a chain relation `R_i(A_{i-1}, A_i)`. Edge relations ignore
/// the attribute that does not take part in the join.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChainTuple {
    pub left: JoinValue,
    pub right: JoinValue,
}

/// Size of `R_1 ⋈ R_2 ⋈ … ⋈ R_k`, joining `R_i.right = R_{i+1}.left`,
/// computed by repeated pairwise nested loops over the partial results.
pub fn brute_force_chain(tables: &[Vec<ChainTuple>], budget: OracleBudget) -> Result<u128> {
    if tables.is_empty() {
        return Err(Error::Precondition(
            "chain needs at least one relation".into(),
        ));
    }
    let required = tables
        .iter()
        .try_fold(1u128, |acc, t| acc.checked_mul(t.len() as u128))
        .unwrap_or(u128::MAX);
    budget.check(required)?;

    // each partial result is represented by the value of its last attribute
    let mut partial: Vec<JoinValue> = tables[0].iter().map(|t| t.right).collect();
    for table in &tables[1..] {
        let mut next = Vec::new();
        for &carry in &partial {
            for t in table {
                if t.left == carry {
                    next.push(t.right);
                }
            }
        }
        partial = next;
    }
    Ok(partial.len() as u128)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Tuple;

    fn rel(name: &str, tuples: &[(u32, u64)]) -> Relation {
        Relation::new(
            name,
            4,
            tuples
                .iter()
                .map(|&(v, p)| Tuple {
                    value: JoinValue(v),
                    payload: p,
                })
                .collect(),
        )
        .unwrap()
    }

    fn ct(l: u32, r: u32) -> ChainTuple {
        ChainTuple {
            left: JoinValue(l),
            right: JoinValue(r),
        }
    }

    #[test]
    fn single_pair() {
        let out = brute_force_join(
            &rel("R", &[(0, 1)]),
            &rel("S", &[(0, 2)]),
            OracleBudget::default(),
        )
        .unwrap();
        assert_eq!(
            out,
            vec![JoinedTuple {
                payload_r: 1,
                payload_s: 2,
                value: JoinValue(0)
            }]
        );
    }

    #[test]
    fn disjoint_values() {
        let out = brute_force_join(
            &rel("R", &[(0, 1)]),
            &rel("S", &[(1, 2)]),
            OracleBudget::default(),
        )
        .unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn budget_is_enforced() {
        let r = rel("R", &[(0, 1), (0, 2)]);
        let s = rel("S", &[(0, 3), (0, 4)]);
        assert!(matches!(
            brute_force_join(&r, &s, OracleBudget(3)),
            Err(Error::OracleBudget {
                required: 4,
                budget: 3
            })
        ));
        assert_eq!(brute_force_join(&r, &s, OracleBudget(4)).unwrap().len(), 4);
    }

    #[test]
    fn chain_of_two_is_a_join() {
        let a = vec![ct(0, 0), ct(0, 1), ct(0, 1)];
        let b = vec![ct(1, 0), ct(1, 3), ct(0, 2)];
        // value 0: 1·1, value 1: 2·2
        assert_eq!(
            brute_force_chain(&[a, b], OracleBudget::default()).unwrap(),
            5
        );
    }

    #[test]
    fn three_chain_cross_product() {
        let r1 = vec![ct(0, 0), ct(0, 1)];
        let r2 = vec![ct(0, 0), ct(0, 1), ct(1, 0), ct(1, 1)];
        let r3 = vec![ct(0, 0), ct(1, 0)];
        assert_eq!(
            brute_force_chain(&[r1, r2, r3], OracleBudget::default()).unwrap(),
            4
        );
    }

    #[test]
    fn chain_with_empty_relation() {
        let r1 = vec![ct(0, 0)];
        assert_eq!(
            brute_force_chain(&[r1, vec![], vec![ct(0, 0)]], OracleBudget::default()).unwrap(),
            0
        );
    }

    #[test]
    fn chain_budget() {
        let r = vec![ct(0, 0); 10];
        assert!(brute_force_chain(&[r.clone(), r.clone(), r], OracleBudget(999)).is_err());
    }
}
