//! Construction, audit and verification of edge colourings of `K_n` and
//! `K_{n,n}` in which every cycle with length in `[k, ℓ]` sees at least three
//! colours.
//!
//! The construction has two stages. A conflict-free random greedy matching in
//! the block hypergraph ([`matcher`]) colours almost every edge with
//! vertex-disjoint monochromatic blocks; the leftover graph is then coloured
//! from a small fresh palette and repaired by Moser–Tardos resampling
//! ([`lll`]). [`verify`] checks the result against the cycle family directly,
//! [`hyperaudit`] audits the degree and counting identities of the underlying
//! hypergraph, and [`exact`] solves tiny instances outright.

pub mod combinatorics;
pub mod error;
pub mod exact;
pub mod hyperaudit;
pub mod lll;
pub mod matcher;
pub mod model;
mod par;
pub mod pipeline;
pub mod verify;

pub use error::{DecodeError, Error, Result};
pub use model::{
    build_host, graph_of_blocks, graph_of_matching, leftover_graph, Block, BlockMatching, BlockShape, Certificate,
    Colouring, EdgeColour, HostSpec, Leftover, Mode, Rational,
};

/// Overrides the worker count of the global thread pool. Returns `false` if the
/// pool was already initialised (or the crate was built without `parallel`).
pub fn init_workers(threads: usize) -> bool {
    par::init_workers(threads)
}
