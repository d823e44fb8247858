//! Value histograms, exact frequencies, synthetic workloads and concrete
//! relations. Everything downstream consumes these types.

mod generate;
mod histogram;
mod relation;

pub use generate::{generate_histogram, Distribution};
pub use histogram::{relative_frequencies, FrequencyMap, JoinValue, ValueHistogram};
pub use relation::{
    build_histogram, materialize_relation, payload_token, read_relation, write_relation, Relation,
    Tuple, RELATION_MAGIC,
};
