//! Explicit constructions certifying lower bounds on speeds.

mod lower_bound;
mod steiner;

pub use lower_bound::{
    extend_member, lower_bound_from_witness, steiner_lower_bound, witness_lower_bound, Generator,
    LowerBoundCertificate, SteinerBound, WitnessBound,
};
pub use steiner::{hypergraph_from_blocks, steiner, validate_sts, SteinerTripleSystem};
pub(crate) use steiner::blocks_distinct;
