use serde::{Deserialize, Serialize};

use super::block::Block;
use super::host::HostSpec;
use super::matching::BlockMatching;
use crate::combinatorics::robust_ceil;
use crate::error::{Error, Result};

/// Colour of one host edge. Structured and fresh ids live in separate namespaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeColour {
    Uncoloured,
    Structured(u32),
    Fresh(u32),
}

impl EdgeColour {
    /// Dense key with the namespaces kept apart; 0 for uncoloured.
    pub fn key(self) -> u64 {
        match self {
            EdgeColour::Uncoloured => 0,
            EdgeColour::Structured(i) => i as u64,
            EdgeColour::Fresh(j) => (1u64 << 32) | j as u64,
        }
    }

    pub fn is_fresh(self) -> bool {
        matches!(self, EdgeColour::Fresh(_))
    }
}

/// The fresh palette `[r]` with `r = ⌈n^(1-α)⌉`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreshPalette {
    pub alpha: f64,
    pub size: u32,
}

impl FreshPalette {
    pub fn new(n: u32, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 0.5) {
            return Err(Error::InvalidQuery(format!("alpha must lie in (0, 1/2), got {alpha}")));
        }
        let size = robust_ceil((n as f64).powf(1.0 - alpha)).max(1) as u32;
        Ok(FreshPalette { alpha, size })
    }
}

/// Uncoloured host edges and their maximum degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Leftover {
    pub edges: Vec<(u32, u32)>,
    pub max_degree: u32,
}

/// A (possibly partial) edge colouring of the host, indexed by dense edge index.
#[derive(Clone, Debug, PartialEq)]
pub struct Colouring {
    host: HostSpec,
    colours: Vec<EdgeColour>,
    fresh: Option<FreshPalette>,
}

impl Colouring {
    pub fn uncoloured(host: &HostSpec) -> Self {
        Colouring { host: host.clone(), colours: vec![EdgeColour::Uncoloured; host.edge_count()], fresh: None }
    }

    pub fn host(&self) -> &HostSpec {
        &self.host
    }

    pub fn fresh_palette(&self) -> Option<FreshPalette> {
        self.fresh
    }

    pub fn set_fresh_palette(&mut self, p: FreshPalette) {
        self.fresh = Some(p);
    }

    pub fn colours(&self) -> &[EdgeColour] {
        &self.colours
    }

    pub fn at(&self, idx: usize) -> EdgeColour {
        self.colours[idx]
    }

    pub fn set_at(&mut self, idx: usize, c: EdgeColour) {
        self.colours[idx] = c;
    }

    /// Colour of host edge `uv`; `None` if `uv` is not a host edge.
    pub fn get(&self, u: u32, v: u32) -> Option<EdgeColour> {
        self.host.edge_index(u, v).map(|i| self.colours[i])
    }

    pub fn set(&mut self, u: u32, v: u32, c: EdgeColour) -> Result<()> {
        let i = self.host.edge_index(u, v).ok_or_else(|| Error::InvalidQuery(format!("{u}-{v} is not a host edge")))?;
        self.colours[i] = c;
        Ok(())
    }

    pub fn uncoloured_count(&self) -> usize {
        self.colours.iter().filter(|c| **c == EdgeColour::Uncoloured).count()
    }

    pub fn is_total(&self) -> bool {
        self.uncoloured_count() == 0
    }

    /// Colour ids stay in range: structured in `[palette]`, fresh in `[r]`.
    pub fn check_ranges(&self) -> Result<()> {
        let p = self.host.palette_size();
        let r = self.fresh.map_or(0, |f| f.size);
        for (i, c) in self.colours.iter().enumerate() {
            let ok = match *c {
                EdgeColour::Uncoloured => true,
                EdgeColour::Structured(s) => (1..=p).contains(&s),
                EdgeColour::Fresh(f) => (1..=r).contains(&f),
            };
            if !ok {
                let (u, v) = self.host.edge_endpoints(i);
                return Err(Error::InvalidQuery(format!("edge {u}-{v} has out-of-range colour {c:?}")));
            }
        }
        Ok(())
    }

    /// Number of edges at `v` coloured `c`.
    pub fn degree_in(&self, v: u32, c: EdgeColour) -> usize {
        self.host.neighbours(v).filter(|&w| self.get(v, w) == Some(c)).count()
    }

    /// Checks that the structured edges are exactly the block edges of `m`,
    /// each in its block's colour.
    pub fn check_against(&self, m: &BlockMatching) -> Result<()> {
        if m.host() != &self.host {
            return Err(Error::InvalidQuery("matching and colouring live on different hosts".into()));
        }
        for (i, c) in self.colours.iter().enumerate() {
            let (u, v) = self.host.edge_endpoints(i);
            let expected = m.pair_owner(u, v).map(|b| m.blocks()[b].colour);
            let actual = match *c {
                EdgeColour::Structured(s) => Some(s),
                _ => None,
            };
            if expected != actual {
                return Err(Error::Mismatch { u, v });
            }
        }
        Ok(())
    }

    /// Connected components (as sorted vertex lists) of every structured colour
    /// class, each tagged with its colour; sorted.
    pub fn structured_components(&self) -> Vec<Block> {
        let n = self.host.vertex_count() as usize;
        let mut by_colour: std::collections::BTreeMap<u32, Vec<(u32, u32)>> = Default::default();
        for (i, c) in self.colours.iter().enumerate() {
            if let EdgeColour::Structured(s) = *c {
                by_colour.entry(s).or_default().push(self.host.edge_endpoints(i));
            }
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut out = Vec::new();
        for (colour, edges) in by_colour {
            let mut touched = Vec::new();
            for &(u, v) in &edges {
                touched.push(u as usize);
                touched.push(v as usize);
                let (a, b) = (find(&mut parent, u as usize), find(&mut parent, v as usize));
                if a != b {
                    parent[a] = b;
                }
            }
            touched.sort_unstable();
            touched.dedup();
            let mut groups: std::collections::BTreeMap<usize, Vec<u32>> = Default::default();
            for &t in &touched {
                let r = find(&mut parent, t);
                groups.entry(r).or_default().push(t as u32);
            }
            out.extend(groups.into_values().map(|vs| Block::new(colour, vs)));
            for &t in &touched {
                parent[t] = t;
            }
        }
        out.sort();
        out
    }
}

/// `G(M)`: every host edge inside a block gets that block's colour; the rest stay uncoloured.
pub fn graph_of_matching(m: &BlockMatching) -> Colouring {
    let host = m.host();
    let mut c = Colouring::uncoloured(host);
    for b in m.blocks() {
        for (u, v) in b.edges(host) {
            let i = host.edge_index(u, v).expect("block edges are host edges");
            c.colours[i] = EdgeColour::Structured(b.colour);
        }
    }
    c
}

/// [`graph_of_matching`] on raw blocks, rejecting an invalid matching with the offending pair.
pub fn graph_of_blocks(host: &HostSpec, blocks: &[Block]) -> Result<Colouring> {
    let m = BlockMatching::from_blocks(host, blocks.iter().cloned())?;
    Ok(graph_of_matching(&m))
}

/// The uncoloured host edges with their maximum degree.
pub fn leftover_graph(c: &Colouring) -> Leftover {
    let host = c.host();
    let mut deg = vec![0u32; host.vertex_count() as usize];
    let mut edges = Vec::new();
    for (i, col) in c.colours.iter().enumerate() {
        if *col == EdgeColour::Uncoloured {
            let (u, v) = host.edge_endpoints(i);
            deg[u as usize] += 1;
            deg[v as usize] += 1;
            edges.push((u, v));
        }
    }
    Leftover { edges, max_degree: deg.into_iter().max().unwrap_or(0) }
}
