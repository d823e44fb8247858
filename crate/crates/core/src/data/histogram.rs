use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{ratio, Ratio};

/// Dense index of a join-attribute value, `0..domain_size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JoinValue(pub u32);

impl JoinValue {
    pub fn id(self) -> u32 {
        self.0
    }
}

impl fmt::Display for JoinValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0)
    }
}

/// Exact tuple count per join value for one relation. Zero counts are never
/// stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "HistogramWire", into = "HistogramWire")]
pub struct ValueHistogram {
    domain_size: u32,
    counts: BTreeMap<JoinValue, u64>,
    total: u64,
}

#[derive(Serialize, Deserialize)]
struct HistogramWire {
    domain_size: u32,
    total: u64,
    counts: BTreeMap<u32, u64>,
}

impl TryFrom<HistogramWire> for ValueHistogram {
    type Error = Error;

    fn try_from(w: HistogramWire) -> Result<Self> {
        let h = ValueHistogram::from_counts(
            w.domain_size,
            w.counts.into_iter().map(|(v, c)| (JoinValue(v), c)),
        )?;
        if h.total != w.total {
            return Err(Error::Format(format!(
                "histogram total {} does not match sum of counts {}",
                w.total, h.total
            )));
        }
        Ok(h)
    }
}

impl From<ValueHistogram> for HistogramWire {
    fn from(h: ValueHistogram) -> Self {
        HistogramWire {
            domain_size: h.domain_size,
            total: h.total,
            counts: h.counts.into_iter().map(|(v, c)| (v.0, c)).collect(),
        }
    }
}

impl ValueHistogram {
    /// All-zero histogram over `domain_size` values.
    pub fn new(domain_size: u32) -> Result<Self> {
        if domain_size == 0 {
            return Err(Error::config("domain size must be positive"));
        }
        Ok(Self {
            domain_size,
            counts: BTreeMap::new(),
            total: 0,
        })
    }

    /// Builds a histogram from `(value, count)` pairs; repeated values add up.
    pub fn from_counts(
        domain_size: u32,
        counts: impl IntoIterator<Item = (JoinValue, u64)>,
    ) -> Result<Self> {
        let mut h = Self::new(domain_size)?;
        for (v, c) in counts {
            h.add(v, c)?;
        }
        Ok(h)
    }

    /// Dense form: `counts[i]` is the count of value `i`.
    pub fn from_dense(counts: &[u64]) -> Result<Self> {
        let m = u32::try_from(counts.len()).map_err(|_| Error::config("domain too large"))?;
        Self::from_counts(
            m,
            counts
                .iter()
                .enumerate()
                .map(|(i, &c)| (JoinValue(i as u32), c)),
        )
    }

    pub fn add(&mut self, value: JoinValue, count: u64) -> Result<()> {
        if value.0 >= self.domain_size {
            return Err(Error::config(format!(
                "join value {} outside domain of size {}",
                value.0, self.domain_size
            )));
        }
        if count == 0 {
            return Ok(());
        }
        *self.counts.entry(value).or_insert(0) += count;
        self.total += count;
        Ok(())
    }

    pub fn domain_size(&self) -> u32 {
        self.domain_size
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, value: JoinValue) -> u64 {
        self.counts.get(&value).copied().unwrap_or(0)
    }

    /// Values with a positive count, ascending.
    pub fn iter(&self) -> impl Iterator<Item = (JoinValue, u64)> + '_ {
        self.counts.iter().map(|(&v, &c)| (v, c))
    }

    pub fn support_len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn to_dense(&self) -> Vec<u64> {
        let mut out = vec![0; self.domain_size as usize];
        for (v, c) in self.iter() {
            out[v.0 as usize] = c;
        }
        out
    }

    pub(crate) fn ensure_same_domain(&self, other: &ValueHistogram) -> Result<()> {
        if self.domain_size != other.domain_size {
            return Err(Error::config(format!(
                "domain size mismatch: {} vs {}",
                self.domain_size, other.domain_size
            )));
        }
        Ok(())
    }
}

/// Relative frequency `count / total` of each value, as exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyMap {
    domain_size: u32,
    freqs: BTreeMap<JoinValue, Ratio>,
}

impl FrequencyMap {
    /// Builds a map directly from frequencies. They must be non-negative and
    /// sum to exactly one.
    pub fn from_freqs(
        domain_size: u32,
        freqs: impl IntoIterator<Item = (JoinValue, Ratio)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut sum = Ratio::zero();
        for (v, f) in freqs {
            if v.0 >= domain_size {
                return Err(Error::config(format!("join value {} outside domain", v.0)));
            }
            if f < Ratio::zero() || f > Ratio::one() {
                return Err(Error::config(format!("frequency {f} of {v} outside [0,1]")));
            }
            sum += &f;
            if !f.is_zero() && map.insert(v, f).is_some() {
                return Err(Error::config(format!("duplicate frequency for {v}")));
            }
        }
        if !sum.is_one() {
            return Err(Error::config(format!("frequencies sum to {sum}, not 1")));
        }
        Ok(Self {
            domain_size,
            freqs: map,
        })
    }

    /// Uniform `1/m` over the whole domain.
    pub fn uniform(domain_size: u32) -> Result<Self> {
        if domain_size == 0 {
            return Err(Error::config("domain size must be positive"));
        }
        let f = ratio(1, domain_size);
        Ok(Self {
            domain_size,
            freqs: (0..domain_size)
                .map(|i| (JoinValue(i), f.clone()))
                .collect(),
        })
    }

    pub fn domain_size(&self) -> u32 {
        self.domain_size
    }

    pub fn get(&self, value: JoinValue) -> Ratio {
        self.freqs.get(&value).cloned().unwrap_or_else(Ratio::zero)
    }

    pub fn get_ref(&self, value: JoinValue) -> Option<&Ratio> {
        self.freqs.get(&value)
    }

    /// Values with positive frequency, ascending.
    pub fn iter(&self) -> impl Iterator<Item = (JoinValue, &Ratio)> + '_ {
        self.freqs.iter().map(|(&v, f)| (v, f))
    }

    pub fn sum(&self) -> Ratio {
        self.freqs.values().fold(Ratio::zero(), |acc, f| acc + f)
    }

    pub(crate) fn ensure_same_domain(&self, other: &FrequencyMap) -> Result<()> {
        if self.domain_size != other.domain_size {
            return Err(Error::config(format!(
                "domain size mismatch: {} vs {}",
                self.domain_size, other.domain_size
            )));
        }
        Ok(())
    }
}

pub fn relative_frequencies(h: &ValueHistogram) -> Result<FrequencyMap> {
    if h.total() == 0 {
        return Err(Error::EmptyRelation);
    }
    let total = h.total();
    Ok(FrequencyMap {
        domain_size: h.domain_size(),
        freqs: h.iter().map(|(v, c)| (v, ratio(c, total))).collect(),
    })
}
