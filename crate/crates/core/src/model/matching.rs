use super::block::Block;
use super::host::HostSpec;
use crate::error::{Error, Result};

/// Why a block cannot join a matching; carries the index of the blocking block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Incompatibility {
    /// Same colour and at least one common vertex.
    SameColourOverlap(usize),
    /// Two or more common vertices (a host pair would be covered twice).
    SharedPair(usize),
}

impl Incompatibility {
    pub fn other(self) -> usize {
        match self {
            Incompatibility::SameColourOverlap(i) | Incompatibility::SharedPair(i) => i,
        }
    }

    pub fn reason(self) -> &'static str {
        match self {
            Incompatibility::SameColourOverlap(_) => "have the same colour and share a vertex",
            Incompatibility::SharedPair(_) => "share two or more vertices",
        }
    }
}

/// A matching of the block hypergraph: same-coloured blocks are vertex-disjoint
/// and differently coloured blocks share at most one vertex.
///
/// Lookup tables are dense: one slot per (colour, vertex) and one per vertex pair.
#[derive(Clone, Debug)]
pub struct BlockMatching {
    host: HostSpec,
    blocks: Vec<Block>,
    slot: Vec<u32>,
    pair_owner: Vec<u32>,
}

impl PartialEq for BlockMatching {
    fn eq(&self, other: &Self) -> bool {
        self.host == other.host && self.blocks == other.blocks
    }
}

impl BlockMatching {
    pub fn new(host: &HostSpec) -> Self {
        let v = host.vertex_count() as usize;
        BlockMatching {
            host: host.clone(),
            blocks: Vec::new(),
            slot: vec![0; host.palette_size() as usize * v],
            pair_owner: vec![0; host.pair_count()],
        }
    }

    /// Validates and inserts blocks in order; the first offending pair is reported.
    pub fn from_blocks(host: &HostSpec, blocks: impl IntoIterator<Item = Block>) -> Result<Self> {
        let mut m = BlockMatching::new(host);
        for b in blocks {
            m.insert(b)?;
        }
        Ok(m)
    }

    pub fn host(&self) -> &HostSpec {
        &self.host
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    fn slot_index(&self, colour: u32, v: u32) -> usize {
        (colour as usize - 1) * self.host.vertex_count() as usize + v as usize
    }

    /// Index of the block of `colour` containing `v`.
    pub fn block_at(&self, colour: u32, v: u32) -> Option<usize> {
        if colour == 0 || colour > self.host.palette_size() || v >= self.host.vertex_count() {
            return None;
        }
        match self.slot[self.slot_index(colour, v)] {
            0 => None,
            i => Some(i as usize - 1),
        }
    }

    /// Index of the block covering the pair `{u, v}`.
    pub fn pair_owner(&self, u: u32, v: u32) -> Option<usize> {
        if u == v {
            return None;
        }
        match self.pair_owner[self.host.pair_index(u, v)] {
            0 => None,
            i => Some(i as usize - 1),
        }
    }

    /// First reason `cand` cannot be added, if any. `cand` must be valid for the host.
    pub fn incompatibility(&self, cand: &Block) -> Option<Incompatibility> {
        for &v in &cand.vertices {
            if let Some(i) = self.block_at(cand.colour, v) {
                return Some(Incompatibility::SameColourOverlap(i));
            }
        }
        let vs = &cand.vertices;
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                if let Some(o) = self.pair_owner(vs[i], vs[j]) {
                    return Some(Incompatibility::SharedPair(o));
                }
            }
        }
        None
    }

    pub fn is_compatible(&self, cand: &Block) -> bool {
        self.incompatibility(cand).is_none()
    }

    /// Validates `cand` and adds it, returning its index.
    pub fn insert(&mut self, cand: Block) -> Result<usize> {
        cand.validate(&self.host)?;
        if let Some(why) = self.incompatibility(&cand) {
            return Err(Error::InvalidMatching {
                first: Box::new(self.blocks[why.other()].clone()),
                second: Box::new(cand),
                reason: why.reason(),
            });
        }
        Ok(self.insert_unchecked(cand))
    }

    /// Adds a block already known to be valid and compatible.
    pub(crate) fn insert_unchecked(&mut self, cand: Block) -> usize {
        let idx = self.blocks.len();
        let tag = idx as u32 + 1;
        for &v in &cand.vertices {
            let s = self.slot_index(cand.colour, v);
            self.slot[s] = tag;
        }
        let vs = &cand.vertices;
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                let p = self.host.pair_index(vs[i], vs[j]);
                self.pair_owner[p] = tag;
            }
        }
        self.blocks.push(cand);
        idx
    }

    /// The matching with block `idx` removed (indices above it shift down).
    pub fn without(&self, idx: usize) -> BlockMatching {
        let mut m = BlockMatching::new(&self.host);
        for (i, b) in self.blocks.iter().enumerate() {
            if i != idx {
                m.insert_unchecked(b.clone());
            }
        }
        m
    }

    /// Sorted distinct colours used.
    pub fn colours_present(&self) -> Vec<u32> {
        let mut cs: Vec<u32> = self.blocks.iter().map(|b| b.colour).collect();
        cs.sort_unstable();
        cs.dedup();
        cs
    }

    /// Number of host edges covered by blocks.
    pub fn covered_edges(&self) -> usize {
        self.blocks.iter().map(|b| b.edges(&self.host).count()).sum()
    }
}
