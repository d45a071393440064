//! Hosts, blocks, block matchings, colourings and the certificate format.

mod block;
pub mod certificate;
mod colouring;
mod host;
mod matching;

pub use block::Block;
pub use certificate::{Certificate, CertificateVerdict, Format, PipelineStats, StageSeeds};
pub use colouring::{
    graph_of_blocks, graph_of_matching, leftover_graph, Colouring, EdgeColour, FreshPalette, Leftover,
};
pub use host::{build_host, BlockShape, HostParams, HostSpec, Mode, Rational, Side};
pub use matching::{BlockMatching, Incompatibility};
