//! Join selectivity and cardinality in exact arithmetic, chain-join
//! estimates, and the nested-loop oracles used to check them.

mod chain;
mod oracle;

use num_traits::{One, Zero};

pub use chain::{chain_cardinality, chain_selectivities, ChainRelation, ChainSpec};
pub use oracle::{brute_force_chain, brute_force_join, ChainTuple, JoinedTuple, OracleBudget};

use crate::data::{FrequencyMap, ValueHistogram};
use crate::error::{Error, Result};
use crate::rational::Ratio;

/// Probability that a random pair from `R × S` matches; always in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Selectivity(Ratio);

impl Selectivity {
    pub fn new(value: Ratio) -> Result<Self> {
        if value < Ratio::zero() || value > Ratio::one() {
            return Err(Error::config(format!("selectivity {value} outside [0,1]")));
        }
        Ok(Self(value))
    }

    pub fn one() -> Self {
        Self(Ratio::one())
    }

    pub fn value(&self) -> &Ratio {
        &self.0
    }

    pub fn into_inner(self) -> Ratio {
        self.0
    }
}

/// `Σ_b f1(b)·f2(b)`.
pub fn join_selectivity(f1: &FrequencyMap, f2: &FrequencyMap) -> Result<Selectivity> {
    f1.ensure_same_domain(f2)?;
    let mut mu = Ratio::zero();
    for (v, a) in f1.iter() {
        if let Some(b) = f2.get_ref(v) {
            mu += a * b;
        }
    }
    Selectivity::new(mu)
}

/// Exact join size `Σ_b |R_b|·|S_b|` (the total processing cost).
pub fn join_cardinality(h_r: &ValueHistogram, h_s: &ValueHistogram) -> Result<u128> {
    h_r.ensure_same_domain(h_s)?;
    let (small, large) = if h_r.support_len() <= h_s.support_len() {
        (h_r, h_s)
    } else {
        (h_s, h_r)
    };
    Ok(small
        .iter()
        .map(|(v, c)| u128::from(c) * u128::from(large.count(v)))
        .sum())
}

/// Product of the pairwise selectivities along a chain.
pub fn chain_selectivity(mus: &[Selectivity]) -> Result<Selectivity> {
    if mus.is_empty() {
        return Err(Error::Precondition(
            "chain_selectivity needs at least one factor".into(),
        ));
    }
    let product = mus.iter().fold(Ratio::one(), |acc, mu| acc * mu.value());
    Selectivity::new(product)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{relative_frequencies, JoinValue};
    use crate::rational::{int, ratio};

    fn freqs(m: u32, pairs: &[(u32, Ratio)]) -> FrequencyMap {
        FrequencyMap::from_freqs(m, pairs.iter().map(|(v, f)| (JoinValue(*v), f.clone()))).unwrap()
    }

    fn hist(m: u32, pairs: &[(u32, u64)]) -> ValueHistogram {
        ValueHistogram::from_counts(m, pairs.iter().map(|&(v, c)| (JoinValue(v), c))).unwrap()
    }

    #[test]
    fn selectivity_examples() {
        let one = freqs(2, &[(0, int(1))]);
        assert_eq!(join_selectivity(&one, &one).unwrap().value(), &int(1));

        let other = freqs(2, &[(1, int(1))]);
        assert_eq!(join_selectivity(&one, &other).unwrap().value(), &int(0));

        // nested-loop count over R=[b1,b2], S=[b1,b2,b2,b2]: 4 matching pairs of 8
        let f1 = freqs(2, &[(0, ratio(1, 2)), (1, ratio(1, 2))]);
        let f2 = freqs(2, &[(0, ratio(1, 4)), (1, ratio(3, 4))]);
        assert_eq!(join_selectivity(&f1, &f2).unwrap().value(), &ratio(4, 8));
        assert_eq!(
            join_selectivity(&f2, &f1).unwrap(),
            join_selectivity(&f1, &f2).unwrap()
        );
    }

    #[test]
    fn selectivity_domain_mismatch() {
        let a = FrequencyMap::uniform(2).unwrap();
        let b = FrequencyMap::uniform(3).unwrap();
        assert!(matches!(join_selectivity(&a, &b), Err(Error::Config(_))));
    }

    #[test]
    fn cardinality_examples() {
        // 3·2 + 1·5 from a hand nested-loop count
        assert_eq!(
            join_cardinality(&hist(2, &[(0, 3), (1, 1)]), &hist(2, &[(0, 2), (1, 5)])).unwrap(),
            11
        );
        assert_eq!(
            join_cardinality(&hist(2, &[]), &hist(2, &[(0, 2)])).unwrap(),
            0
        );
        assert_eq!(
            join_cardinality(&hist(2, &[(1, 1000)]), &hist(2, &[(1, 1000)])).unwrap(),
            1_000_000
        );
        assert!(join_cardinality(&hist(2, &[]), &hist(3, &[])).is_err());
    }

    #[test]
    fn cardinality_matches_selectivity_identity() {
        let hr = hist(3, &[(0, 3), (1, 1), (2, 7)]);
        let hs = hist(3, &[(0, 2), (1, 5)]);
        let mu = join_selectivity(
            &relative_frequencies(&hr).unwrap(),
            &relative_frequencies(&hs).unwrap(),
        )
        .unwrap();
        let lhs = mu.into_inner() * int(hr.total()) * int(hs.total());
        assert_eq!(lhs, int(join_cardinality(&hr, &hs).unwrap()));
    }

    #[test]
    fn chain_selectivity_products() {
        assert_eq!(
            chain_selectivity(&[Selectivity::one()]).unwrap(),
            Selectivity::one()
        );
        let half = Selectivity::new(ratio(1, 2)).unwrap();
        assert_eq!(
            chain_selectivity(&[half.clone(), half]).unwrap().value(),
            &ratio(1, 4)
        );
        assert!(chain_selectivity(&[]).is_err());
    }

    #[test]
    fn selectivity_bounds_enforced() {
        assert!(Selectivity::new(ratio(3, 2)).is_err());
        assert!(Selectivity::new(ratio(-1, 2)).is_err());
    }
}
