use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::histogram::{JoinValue, ValueHistogram};
use crate::error::{Error, Result};
use crate::hashing::fnv1a32;

pub const RELATION_MAGIC: &[u8; 8] = b"SKJREL01";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tuple {
    pub value: JoinValue,
    pub payload: u64,
}

/// A concrete relation: join values plus opaque payload tokens that are
/// unique within the relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub name: String,
    pub domain_size: u32,
    pub tuples: Vec<Tuple>,
}

impl Relation {
    pub fn new(name: impl Into<String>, domain_size: u32, tuples: Vec<Tuple>) -> Result<Self> {
        if domain_size == 0 {
            return Err(Error::config("domain size must be positive"));
        }
        if let Some(t) = tuples.iter().find(|t| t.value.0 >= domain_size) {
            return Err(Error::config(format!(
                "tuple value {} outside domain of size {domain_size}",
                t.value.0
            )));
        }
        Ok(Self {
            name: name.into(),
            domain_size,
            tuples,
        })
    }

    /// Builds a relation from bare join values; payloads are sequence tokens.
    pub fn from_values(
        name: impl Into<String>,
        domain_size: u32,
        values: impl IntoIterator<Item = u32>,
    ) -> Result<Self> {
        let name = name.into();
        let tuples = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| Tuple {
                value: JoinValue(v),
                payload: payload_token(&name, i as u32),
            })
            .collect();
        Self::new(name, domain_size, tuples)
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }
}

/// `(fnv1a32(name) << 32) | index`.
pub fn payload_token(name: &str, index: u32) -> u64 {
    (u64::from(fnv1a32(name.as_bytes())) << 32) | u64::from(index)
}

pub fn build_histogram(rel: &Relation) -> ValueHistogram {
    let mut counts = vec![0u64; rel.domain_size as usize];
    for t in &rel.tuples {
        counts[t.value.0 as usize] += 1;
    }
    ValueHistogram::from_dense(&counts).expect("relation values are validated against its domain")
}

/// Expands a histogram into tuples in a seeded random order.
///
/// Payload tokens are assigned after shuffling, so they depend on the seed
/// but stay unique as long as the relation holds fewer than 2^32 tuples.
pub fn materialize_relation(h: &ValueHistogram, name: &str, seed: u64) -> Result<Relation> {
    if h.total() > u64::from(u32::MAX) {
        return Err(Error::config(format!(
            "cannot materialize {} tuples; payload tokens hold 2^32 per relation",
            h.total()
        )));
    }
    let mut values: Vec<JoinValue> = Vec::with_capacity(h.total() as usize);
    for (v, c) in h.iter() {
        values.extend(std::iter::repeat_n(v, c as usize));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    values.shuffle(&mut rng);
    let tuples = values
        .into_iter()
        .enumerate()
        .map(|(i, value)| Tuple {
            value,
            payload: payload_token(name, i as u32),
        })
        .collect();
    Relation::new(name, h.domain_size(), tuples)
}

/// Writes `SKJREL01` followed by little-endian `(u32 value, u64 payload)`
/// records.
pub fn write_relation<W: Write>(rel: &Relation, mut out: W) -> Result<()> {
    out.write_all(RELATION_MAGIC)?;
    let mut buf = Vec::with_capacity(rel.tuples.len() * 12);
    for t in &rel.tuples {
        buf.extend_from_slice(&t.value.0.to_le_bytes());
        buf.extend_from_slice(&t.payload.to_le_bytes());
    }
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

/// Reads the binary relation format. The format stores neither a name nor a
/// domain size, so the caller supplies both.
pub fn read_relation<R: Read>(mut input: R, name: &str, domain_size: u32) -> Result<Relation> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let body = bytes
        .strip_prefix(RELATION_MAGIC.as_slice())
        .ok_or_else(|| Error::Format("missing SKJREL01 magic".into()))?;
    if body.len() % 12 != 0 {
        return Err(Error::Format(format!(
            "relation body is {} bytes, not a multiple of 12",
            body.len()
        )));
    }
    let tuples = body
        .chunks_exact(12)
        .map(|rec| Tuple {
            value: JoinValue(u32::from_le_bytes(rec[..4].try_into().unwrap())),
            payload: u64::from_le_bytes(rec[4..].try_into().unwrap()),
        })
        .collect();
    Relation::new(name, domain_size, tuples)
}
