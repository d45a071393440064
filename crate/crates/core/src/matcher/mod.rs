//! Conflict detection against alternating block cycles and the seeded random
//! greedy construction of a conflict-free block matching.

mod tracking;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use tracking::{matching_chain_counts, track_tests, ChainTrack, TestFunctionReport};

use crate::error::{Error, Result};
use crate::hyperaudit::ChainQuery;
use crate::model::{Block, BlockMatching, BlockShape, HostSpec};

/// A cycle `(A_1,i), (B_1,j), …, (A_m,i), (B_m,j)` of blocks in two alternating
/// colours, consecutive blocks meeting in exactly one vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlternatingCycleConflict {
    pub m: u32,
    /// Cyclic order, starting with the candidate block.
    pub blocks: Vec<Block>,
    /// `v_1, u_1, …, v_m, u_m`: the vertex shared by block `t` and block `t+1`.
    pub link_vertices: Vec<u32>,
}

/// Whether `cand` can join `m` without breaking the matching rules.
pub fn is_compatible(m: &BlockMatching, cand: &Block) -> bool {
    m.is_compatible(cand)
}

/// A shortest alternating cycle through `cand` completed by blocks of `m`, of
/// half-length at most `⌊ℓ/2⌋`. `cand` must be compatible with `m`.
///
/// Exploration is canonical: exit vertices in increasing order, partner
/// colours in increasing order, shorter cycles first.
pub fn find_conflict(m: &BlockMatching, cand: &Block) -> Option<AlternatingCycleConflict> {
    let host = m.host();
    let partners: Vec<u32> = m.colours_present().into_iter().filter(|&c| c != cand.colour).collect();
    if partners.is_empty() {
        return None;
    }
    let max = host.max_half_length();
    for half in 2..=max {
        let mut path: Vec<usize> = Vec::with_capacity(2 * half as usize);
        let mut links: Vec<u32> = Vec::with_capacity(2 * half as usize);
        for &j in &partners {
            for &w in &cand.vertices {
                let Some(b1) = m.block_at(j, w) else { continue };
                path.push(b1);
                links.push(w);
                if search(m, cand, [cand.colour, j], 2 * half as usize, &mut path, &mut links) {
                    let mut blocks = vec![cand.clone()];
                    blocks.extend(path.iter().map(|&i| m.blocks()[i].clone()));
                    return Some(AlternatingCycleConflict { m: half, blocks, link_vertices: links });
                }
                path.pop();
                links.pop();
            }
        }
    }
    None
}

/// Extends `path` (blocks after the candidate) until it closes back on `cand`
/// with exactly `len` blocks including the candidate.
fn search(
    m: &BlockMatching,
    cand: &Block,
    colours: [u32; 2],
    len: usize,
    path: &mut Vec<usize>,
    links: &mut Vec<u32>,
) -> bool {
    let pos = path.len(); // position of the last block in the cycle
    let last = &m.blocks()[*path.last().expect("non-empty")];
    let entry = *links.last().expect("non-empty");
    if pos == len - 1 {
        for &w in &last.vertices {
            if w != entry && cand.contains(w) {
                links.push(w);
                return true;
            }
        }
        return false;
    }
    let next_colour = colours[(pos + 1) % 2];
    for &w in &last.vertices {
        if w == entry {
            continue;
        }
        let Some(b) = m.block_at(next_colour, w) else { continue };
        if path.contains(&b) {
            continue;
        }
        path.push(b);
        links.push(w);
        if search(m, cand, colours, len, path, links) {
            return true;
        }
        path.pop();
        links.pop();
    }
    false
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatcherParams {
    pub seed: u64,
    /// Consecutive rejected samples before stopping (at least 1).
    pub stall: u64,
    /// Stop once this fraction of host edges is covered.
    pub target_coverage: Option<f64>,
    /// Chain queries reported by the test-function tracker.
    #[serde(default)]
    pub track: Vec<ChainQuery>,
}

impl MatcherParams {
    pub fn new(seed: u64, stall: u64) -> Self {
        MatcherParams { seed, stall, target_coverage: None, track: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.stall == 0 {
            return Err(Error::InvalidQuery("stall threshold must be at least 1".into()));
        }
        if let Some(t) = self.target_coverage {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidQuery(format!("target coverage {t} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyStats {
    pub samples: u64,
    pub accepted: u64,
    pub rejected_incompatible: u64,
    pub rejected_conflict: u64,
    pub acceptance_rate: f64,
    /// Covered host edges over all host edges.
    pub coverage: f64,
}

/// Uniform random block placement.
pub(crate) fn random_placement<R: Rng>(host: &HostSpec, rng: &mut R) -> Option<Vec<u32>> {
    let n = host.n() as usize;
    match host.shape() {
        BlockShape::Clique { order } => {
            (n >= order as usize).then(|| sample(rng, n, order as usize).into_iter().map(|v| v as u32).collect())
        }
        BlockShape::Biclique { small, large } => {
            if n < large as usize {
                return None;
            }
            let (a, b) = if rng.gen::<bool>() { (small, large) } else { (large, small) };
            let mut vs: Vec<u32> = sample(rng, n, a as usize).into_iter().map(|v| v as u32).collect();
            vs.extend(sample(rng, n, b as usize).into_iter().map(|v| v as u32 + host.n()));
            Some(vs)
        }
    }
}

/// Random greedy with rejection: sample a colour and a placement uniformly,
/// keep the block iff it is compatible and closes no short alternating cycle.
pub fn greedy_match(
    host: &HostSpec,
    params: &MatcherParams,
) -> Result<(BlockMatching, TestFunctionReport, GreedyStats)> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut m = BlockMatching::new(host);
    let total_edges = host.edge_count().max(1);
    let per_block = match host.shape() {
        BlockShape::Clique { order } => (order * (order - 1) / 2) as usize,
        BlockShape::Biclique { small, large } => (small * large) as usize,
    };
    let mut stats = GreedyStats {
        samples: 0,
        accepted: 0,
        rejected_incompatible: 0,
        rejected_conflict: 0,
        acceptance_rate: 0.0,
        coverage: 0.0,
    };
    let palette = host.palette_size();
    let reached = |m: &BlockMatching| {
        params.target_coverage.is_some_and(|t| (m.len() * per_block) as f64 / total_edges as f64 >= t)
    };
    if palette > 0 && !reached(&m) {
        let mut stalled = 0u64;
        while stalled < params.stall {
            let colour = rng.gen_range(1..=palette);
            let Some(vs) = random_placement(host, &mut rng) else { break };
            stats.samples += 1;
            let cand = Block::new(colour, vs);
            if !m.is_compatible(&cand) {
                stats.rejected_incompatible += 1;
                stalled += 1;
                continue;
            }
            if find_conflict(&m, &cand).is_some() {
                stats.rejected_conflict += 1;
                stalled += 1;
                continue;
            }
            m.insert_unchecked(cand);
            stats.accepted += 1;
            stalled = 0;
            if reached(&m) {
                break;
            }
        }
    }
    stats.acceptance_rate = if stats.samples == 0 { 0.0 } else { stats.accepted as f64 / stats.samples as f64 };
    stats.coverage = (m.len() * per_block) as f64 / total_edges as f64;
    let report = track_tests(&m, &params.track)?;
    Ok((m, report, stats))
}
