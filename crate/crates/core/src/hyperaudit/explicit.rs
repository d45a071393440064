use serde::Serialize;

use crate::combinatorics::{binomial_signed, for_each_subset};
use crate::error::{Error, Result};
use crate::model::{Block, BlockShape, HostSpec, Mode};
use crate::par;

/// Default ceiling on `|E(H)|` for materialisation.
pub const DEFAULT_EDGE_CAP: u128 = 10_000_000;

/// The kinds of vertex of the block hypergraph. Degrees are uniform per kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum VertexKind {
    /// A host edge (complete hosts).
    PairEdge,
    /// A pair inside one side (bipartite hosts).
    SameSidePair,
    /// A host edge of a bipartite host.
    CrossPair,
    /// A (vertex, colour) pair.
    VertexColour,
}

impl VertexKind {
    pub fn name(self) -> &'static str {
        match self {
            VertexKind::PairEdge => "pairEdge",
            VertexKind::SameSidePair => "sameSidePair",
            VertexKind::CrossPair => "crossPair",
            VertexKind::VertexColour => "vertexColour",
        }
    }

    pub fn for_mode(mode: Mode) -> &'static [VertexKind] {
        match mode {
            Mode::Complete => &[VertexKind::PairEdge, VertexKind::VertexColour],
            Mode::Bipartite => &[VertexKind::SameSidePair, VertexKind::CrossPair, VertexKind::VertexColour],
        }
    }
}

/// Closed-form degree of every hypergraph vertex of `kind`.
pub fn degree_formula(host: &HostSpec, kind: VertexKind) -> Result<u128> {
    let n = host.n() as i64;
    let p = host.palette_size() as u128;
    let mismatch = || Error::KindMismatch { kind: kind.name(), mode: host.mode().as_str() };
    let overflow = || Error::Overflow("degree formula");
    match (host.shape(), kind) {
        (BlockShape::Clique { order }, VertexKind::PairEdge) => {
            binomial_signed(n - 2, order as i64 - 2).checked_mul(p).ok_or_else(overflow)
        }
        (BlockShape::Clique { order }, VertexKind::VertexColour) => Ok(binomial_signed(n - 1, order as i64 - 1)),
        (BlockShape::Biclique { small, large }, k) => {
            let (s, t) = (small as i64, large as i64);
            let c = binomial_signed;
            let mul = |a: u128, b: u128| a.checked_mul(b).ok_or_else(overflow);
            let add = |a: u128, b: u128| a.checked_add(b).ok_or_else(overflow);
            match k {
                VertexKind::SameSidePair => {
                    let per = add(mul(c(n - 2, t - 2), c(n, s))?, mul(c(n - 2, s - 2), c(n, t))?)?;
                    mul(per, p)
                }
                VertexKind::CrossPair => mul(mul(2, mul(c(n - 1, t - 1), c(n - 1, s - 1))?)?, p),
                VertexKind::VertexColour => add(mul(c(n - 1, t - 1), c(n, s))?, mul(c(n - 1, s - 1), c(n, t))?),
                VertexKind::PairEdge => Err(mismatch()),
            }
        }
        (BlockShape::Clique { .. }, _) => Err(mismatch()),
    }
}

/// Every vertex set a block can occupy, sorted, in a fixed order: complete hosts
/// in lexicographic order; bipartite hosts with the small side in `X` first.
pub fn placements(host: &HostSpec) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let n = host.n();
    match host.shape() {
        BlockShape::Clique { order } => {
            let vs: Vec<u32> = (0..n).collect();
            for_each_subset(&vs, order as usize, |s| out.push(s.to_vec()));
        }
        BlockShape::Biclique { small, large } => {
            let xs: Vec<u32> = (0..n).collect();
            let ys: Vec<u32> = (n..2 * n).collect();
            for (a, b) in [(small, large), (large, small)] {
                let mut xsets = Vec::new();
                for_each_subset(&xs, a as usize, |s| xsets.push(s.to_vec()));
                for x in &xsets {
                    for_each_subset(&ys, b as usize, |y| {
                        let mut v = x.clone();
                        v.extend_from_slice(y);
                        out.push(v);
                    });
                }
            }
        }
    }
    out
}

/// The block hypergraph with every edge listed and every vertex degree measured.
///
/// Hypergraph vertices are numbered pairs first (`pair_index` over all
/// `C(V,2)` vertex pairs) and then `(v, colour)` as `pairs + v·P + colour − 1`.
/// Edge `(placement p, colour c)` has id `p·P + c − 1`.
#[derive(Clone, Debug)]
pub struct ExplicitHypergraph {
    host: HostSpec,
    placements: Vec<Vec<u32>>,
    incidence: Vec<Vec<u32>>,
    degrees: Vec<u64>,
}

/// Builds `H` with the default edge cap.
pub fn materialize(host: &HostSpec) -> Result<ExplicitHypergraph> {
    materialize_with_cap(host, DEFAULT_EDGE_CAP)
}

pub fn materialize_with_cap(host: &HostSpec, cap: u128) -> Result<ExplicitHypergraph> {
    let size = host.hyperedge_count();
    if size > cap {
        return Err(Error::CapExceeded { what: "hypergraph edge count", size, cap });
    }
    let placements = placements(host);
    let mut incidence = vec![Vec::new(); host.vertex_count() as usize];
    for (i, p) in placements.iter().enumerate() {
        for &v in p {
            incidence[v as usize].push(i as u32);
        }
    }
    let mut h = ExplicitHypergraph { host: host.clone(), placements, incidence, degrees: Vec::new() };
    let mut degrees = vec![0u64; h.vertex_count()];
    let mut buf = Vec::new();
    for e in 0..h.edge_count() {
        h.vertices_of_edge(e as u32, &mut buf);
        for &x in &buf {
            degrees[x as usize] += 1;
        }
    }
    h.degrees = degrees;
    Ok(h)
}

impl ExplicitHypergraph {
    pub fn host(&self) -> &HostSpec {
        &self.host
    }

    pub fn palette(&self) -> u32 {
        self.host.palette_size()
    }

    pub fn placements(&self) -> &[Vec<u32>] {
        &self.placements
    }

    /// Placements containing vertex `v`.
    pub fn incident(&self, v: u32) -> &[u32] {
        &self.incidence[v as usize]
    }

    pub fn edge_count(&self) -> usize {
        self.placements.len() * self.palette() as usize
    }

    pub fn vertex_count(&self) -> usize {
        self.host.pair_count() + self.host.vertex_count() as usize * self.palette() as usize
    }

    pub fn edge_id(&self, placement: u32, colour: u32) -> u32 {
        placement * self.palette() + colour - 1
    }

    /// `(placement, colour)` of an edge id.
    pub fn split(&self, e: u32) -> (u32, u32) {
        (e / self.palette(), e % self.palette() + 1)
    }

    pub fn block(&self, e: u32) -> Block {
        let (p, c) = self.split(e);
        Block { colour: c, vertices: self.placements[p as usize].clone() }
    }

    /// Sorted hypergraph-vertex ids of edge `e`, written into `out`.
    pub fn vertices_of_edge(&self, e: u32, out: &mut Vec<u32>) {
        out.clear();
        let (p, c) = self.split(e);
        let vs = &self.placements[p as usize];
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                out.push(self.host.pair_index(vs[i], vs[j]) as u32);
            }
        }
        let base = self.host.pair_count() as u32;
        for &v in vs {
            out.push(base + v * self.palette() + c - 1);
        }
        out.sort_unstable();
    }

    pub fn kind_of(&self, x: u32) -> VertexKind {
        let pairs = self.host.pair_count() as u32;
        if x >= pairs {
            return VertexKind::VertexColour;
        }
        match self.host.mode() {
            Mode::Complete => VertexKind::PairEdge,
            Mode::Bipartite => {
                // invert pair_index: x = b(b-1)/2 + a
                let mut b = ((1.0 + (1.0 + 8.0 * x as f64).sqrt()) / 2.0) as u32;
                while b * (b - 1) / 2 > x {
                    b -= 1;
                }
                while (b + 1) * b / 2 <= x {
                    b += 1;
                }
                let a = x - b * (b - 1) / 2;
                if self.host.side(a) == self.host.side(b) {
                    VertexKind::SameSidePair
                } else {
                    VertexKind::CrossPair
                }
            }
        }
    }

    /// Measured degree of hypergraph vertex `x`.
    pub fn degree(&self, x: u32) -> u64 {
        self.degrees[x as usize]
    }

    /// `(kind, min degree, max degree, count)` per vertex kind present.
    pub fn degree_summary(&self) -> Vec<(VertexKind, u64, u64, usize)> {
        let kinds = VertexKind::for_mode(self.host.mode());
        let mut acc: Vec<(VertexKind, u64, u64, usize)> = kinds.iter().map(|&k| (k, u64::MAX, 0, 0)).collect();
        for (x, &d) in self.degrees.iter().enumerate() {
            let k = self.kind_of(x as u32);
            let slot = acc.iter_mut().find(|a| a.0 == k).expect("kind listed for mode");
            slot.1 = slot.1.min(d);
            slot.2 = slot.2.max(d);
            slot.3 += 1;
        }
        acc.retain(|a| a.3 > 0);
        acc
    }

    /// `Δ₂(H)`: the largest number of edges through two distinct hypergraph vertices.
    ///
    /// Rows (smaller vertex of the pair) are split into bands processed
    /// independently, each with a dense counter of `band × V(H)` cells.
    pub fn max_codegree(&self) -> u64 {
        let nv = self.vertex_count();
        if nv < 2 || self.edge_count() == 0 {
            return 0;
        }
        let band = ((1usize << 22) / nv).clamp(1, nv);
        let bands = nv.div_ceil(band);
        par::fold_range(
            bands,
            || 0u64,
            |best, bi| {
                let lo = bi * band;
                let hi = (lo + band).min(nv);
                let mut counts = vec![0u32; (hi - lo) * nv];
                let mut buf = Vec::new();
                for e in 0..self.edge_count() {
                    self.vertices_of_edge(e as u32, &mut buf);
                    for (i, &a) in buf.iter().enumerate() {
                        let a = a as usize;
                        if a < lo || a >= hi {
                            continue;
                        }
                        for &b in &buf[i + 1..] {
                            counts[(a - lo) * nv + b as usize] += 1;
                        }
                    }
                }
                best.max(counts.into_iter().max().unwrap_or(0) as u64)
            },
            u64::max,
        )
    }
}
