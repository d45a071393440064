use serde::{Deserialize, Serialize};

use super::host::{BlockShape, HostSpec};
use crate::error::{Error, Result};

/// One hyperedge: a vertex set of the block shape together with its colour.
///
/// Vertices are global ids, kept sorted; in bipartite hosts the X side is
/// `0..n` and the Y side `n..2n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Block {
    pub colour: u32,
    pub vertices: Vec<u32>,
}

impl Block {
    /// Builds a block, sorting the vertex list. No host checks.
    pub fn new(colour: u32, mut vertices: Vec<u32>) -> Self {
        vertices.sort_unstable();
        Block { colour, vertices }
    }

    pub fn contains(&self, v: u32) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    /// Number of common vertices with `other`.
    pub fn overlap(&self, other: &Block) -> usize {
        let (mut i, mut j, mut c) = (0, 0, 0);
        let (a, b) = (&self.vertices, &other.vertices);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    c += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        c
    }

    /// The unique common vertex, if the blocks share exactly one.
    pub fn single_common(&self, other: &Block) -> Option<u32> {
        let mut found = None;
        for &v in &self.vertices {
            if other.contains(v) {
                if found.is_some() {
                    return None;
                }
                found = Some(v);
            }
        }
        found
    }

    pub fn x_side(&self, host: &HostSpec) -> Vec<u32> {
        self.vertices.iter().copied().filter(|&v| v < host.n()).collect()
    }

    pub fn y_side(&self, host: &HostSpec) -> Vec<u32> {
        self.vertices.iter().copied().filter(|&v| v >= host.n()).collect()
    }

    /// Host edges covered by this block (pairs inside it that are host edges).
    pub fn edges<'a>(&'a self, host: &'a HostSpec) -> impl Iterator<Item = (u32, u32)> + 'a {
        let vs = &self.vertices;
        (0..vs.len()).flat_map(move |i| {
            (i + 1..vs.len()).map(move |j| (vs[i], vs[j])).filter(move |&(a, b)| host.adjacent(a, b))
        })
    }

    /// Checks colour range, vertex range, distinctness and shape.
    pub fn validate(&self, host: &HostSpec) -> Result<()> {
        if self.colour == 0 || self.colour > host.palette_size() {
            return Err(Error::InvalidBlock(format!("colour {} outside 1..={}", self.colour, host.palette_size())));
        }
        if self.vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidBlock(format!("vertices {:?} not sorted and distinct", self.vertices)));
        }
        if let Some(&v) = self.vertices.iter().find(|&&v| v >= host.vertex_count()) {
            return Err(Error::InvalidBlock(format!("vertex {v} outside the host")));
        }
        match host.shape() {
            BlockShape::Clique { order } => {
                if self.vertices.len() != order as usize {
                    return Err(Error::InvalidBlock(format!("expected {order} vertices, got {}", self.vertices.len())));
                }
            }
            BlockShape::Biclique { small, large } => {
                let x = self.vertices.iter().filter(|&&v| v < host.n()).count() as u32;
                let y = self.vertices.len() as u32 - x;
                if !((x, y) == (small, large) || (x, y) == (large, small)) {
                    return Err(Error::InvalidBlock(format!(
                        "side sizes ({x}, {y}) are not ({small}, {large}) in some order"
                    )));
                }
            }
        }
        Ok(())
    }
}
