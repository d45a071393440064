//! Ground-truth checks: every cycle with a forbidden length sees three
//! colours, and a block family with its colouring has the four structural
//! properties the construction relies on.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lll::canonical_cycle;
use crate::model::{Block, CertificateVerdict, Colouring, EdgeColour, HostSpec, Mode};
use crate::par;

/// Ordered vertex tuples an exhaustive run may visit.
pub const DEFAULT_TUPLE_CAP: u128 = 1_000_000_000;
/// Witnesses kept per cycle length; counts stay exact.
pub const WITNESS_CAP: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VerifyMode {
    Exhaustive,
    /// `budget` uniform random cycles per length.
    Sampled {
        budget: u64,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Canonical cycle.
    pub cycle: Vec<u32>,
    /// Colours of the cycle edges, sorted.
    pub colours: Vec<EdgeColour>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LengthSummary {
    pub length: u32,
    pub checked: u128,
    pub violations: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub mode: VerifyMode,
    pub lengths: Vec<LengthSummary>,
    /// At most [`WITNESS_CAP`] per length.
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn violation_count(&self) -> u128 {
        self.lengths.iter().map(|l| l.violations).sum()
    }

    pub fn is_certified(&self) -> bool {
        self.violation_count() == 0
    }

    pub fn cycles_checked(&self) -> u128 {
        self.lengths.iter().map(|l| l.checked).sum()
    }
}

impl From<&Verdict> for CertificateVerdict {
    fn from(v: &Verdict) -> Self {
        if v.is_certified() {
            CertificateVerdict::Certified
        } else {
            CertificateVerdict::Violations {
                count: v.violation_count().min(u64::MAX as u128) as u64,
                cycles: v.violations.iter().map(|x| x.cycle.clone()).collect(),
            }
        }
    }
}

/// Checks every forbidden cycle length of the host.
pub fn verify_colouring(c: &Colouring, mode: VerifyMode) -> Result<Verdict> {
    verify_lengths(c, &c.host().forbidden_lengths(), mode, DEFAULT_TUPLE_CAP)
}

/// Checks the given cycle lengths. Lengths the host cannot carry (odd lengths
/// in a bipartite host, lengths above the vertex count) are checked vacuously.
pub fn verify_lengths(c: &Colouring, lengths: &[u32], mode: VerifyMode, tuple_cap: u128) -> Result<Verdict> {
    let missing = c.uncoloured_count();
    if missing > 0 {
        return Err(Error::PartialColouring { uncoloured: missing });
    }
    let mut lengths: Vec<u32> = lengths.iter().copied().filter(|&h| h >= 3).collect();
    lengths.sort_unstable();
    lengths.dedup();
    match mode {
        VerifyMode::Exhaustive => {
            let tuples = lengths.iter().try_fold(0u128, |acc, &h| {
                ordered_tuples(c.host(), h)
                    .and_then(|t| acc.checked_add(t))
                    .ok_or(Error::Overflow("ordered cycle tuples"))
            })?;
            if tuples > tuple_cap {
                return Err(Error::CapExceeded { what: "ordered cycle tuples", size: tuples, cap: tuple_cap });
            }
            Ok(exhaustive(c, &lengths))
        }
        VerifyMode::Sampled { budget, seed } => Ok(sampled(c, &lengths, budget, seed)),
    }
}

/// Ordered sequences of `h` distinct vertices that could close into a cycle.
fn ordered_tuples(host: &HostSpec, h: u32) -> Option<u128> {
    let falling = |n: u128, r: u32| {
        (0..r as u128).try_fold(1u128, |acc, i| if i >= n { Some(0) } else { acc.checked_mul(n - i) })
    };
    let n = host.n() as u128;
    match host.mode() {
        Mode::Complete => falling(n, h),
        Mode::Bipartite if h % 2 == 1 => Some(0),
        Mode::Bipartite => falling(n, h / 2).and_then(|a| a.checked_mul(a)).and_then(|x| x.checked_mul(2)),
    }
}

/// Distinct-colour tracker that saturates at three.
#[derive(Clone, Copy)]
struct Few {
    seen: [u64; 2],
    count: u8,
}

impl Few {
    const EMPTY: Few = Few { seen: [0; 2], count: 0 };

    fn add(mut self, key: u64) -> Few {
        let held = self.count.min(2) as usize;
        if self.count < 3 && !self.seen[..held].contains(&key) {
            if self.count < 2 {
                self.seen[self.count as usize] = key;
            }
            self.count += 1;
        }
        self
    }
}

struct Tally {
    checked: Vec<u128>,
    violations: Vec<u128>,
    witnesses: Vec<Vec<Vec<u32>>>,
}

impl Tally {
    fn new(n: usize) -> Self {
        Tally { checked: vec![0; n], violations: vec![0; n], witnesses: vec![Vec::new(); n] }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for i in 0..self.checked.len() {
            self.checked[i] += other.checked[i];
            self.violations[i] += other.violations[i];
            let room = WITNESS_CAP.saturating_sub(self.witnesses[i].len());
            self.witnesses[i].extend(other.witnesses[i].iter().take(room).cloned());
        }
        self
    }
}

fn cycle_colours(c: &Colouring, cycle: &[u32]) -> Vec<EdgeColour> {
    let h = cycle.len();
    let mut cols: Vec<EdgeColour> = (0..h).map(|t| c.get(cycle[t], cycle[(t + 1) % h]).expect("cycle edge")).collect();
    cols.sort_unstable();
    cols
}

fn finish(c: &Colouring, mode: VerifyMode, lengths: &[u32], t: Tally) -> Verdict {
    let mut violations = Vec::new();
    for w in &t.witnesses {
        for cyc in w {
            violations.push(Violation { cycle: cyc.clone(), colours: cycle_colours(c, cyc) });
        }
    }
    Verdict {
        mode,
        lengths: lengths
            .iter()
            .enumerate()
            .map(|(i, &h)| LengthSummary { length: h, checked: t.checked[i], violations: t.violations[i] })
            .collect(),
        violations,
    }
}

fn exhaustive(c: &Colouring, lengths: &[u32]) -> Verdict {
    let host = c.host();
    let nv = host.vertex_count() as usize;
    let max = lengths.last().copied().unwrap_or(0) as usize;
    // per-start tallies are merged in start order so witnesses are deterministic
    let parts = par::map_range(nv, |s| {
        let mut t = Tally::new(lengths.len());
        if max >= 3 {
            let mut path = vec![s as u32];
            let mut on = vec![false; nv];
            on[s] = true;
            walk(c, lengths, max, &mut path, &mut on, Few::EMPTY, &mut t);
        }
        t
    });
    let t = parts.into_iter().fold(Tally::new(lengths.len()), Tally::merge);
    finish(c, VerifyMode::Exhaustive, lengths, t)
}

/// Paths from `path[0]` through larger vertices; a path of length `h` closes
/// into a canonical cycle when its second vertex is below its last.
fn walk(c: &Colouring, lengths: &[u32], max: usize, path: &mut Vec<u32>, on: &mut [bool], few: Few, t: &mut Tally) {
    let host = c.host();
    let s = path[0];
    let last = *path.last().unwrap();
    if path.len() >= 3 && path[1] < last && host.adjacent(last, s) {
        if let Ok(i) = lengths.binary_search(&(path.len() as u32)) {
            t.checked[i] += 1;
            let closed = few.add(c.get(last, s).unwrap().key());
            if closed.count <= 2 {
                t.violations[i] += 1;
                if t.witnesses[i].len() < WITNESS_CAP {
                    t.witnesses[i].push(path.clone());
                }
            }
        }
    }
    if path.len() == max {
        return;
    }
    for w in host.neighbours(last) {
        if w <= s || on[w as usize] {
            continue;
        }
        let next = few.add(c.get(last, w).unwrap().key());
        path.push(w);
        on[w as usize] = true;
        walk(c, lengths, max, path, on, next, t);
        on[w as usize] = false;
        path.pop();
    }
}

fn sampled(c: &Colouring, lengths: &[u32], budget: u64, seed: u64) -> Verdict {
    let host = c.host();
    let n = host.n() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new(lengths.len());
    for (i, &h) in lengths.iter().enumerate() {
        if ordered_tuples(host, h).unwrap_or(1) == 0 {
            continue;
        }
        let mut found = BTreeSet::new();
        for _ in 0..budget {
            let cycle: Vec<u32> = match host.mode() {
                Mode::Complete => sample(&mut rng, n, h as usize).into_iter().map(|v| v as u32).collect(),
                Mode::Bipartite => {
                    let xs = sample(&mut rng, n, h as usize / 2);
                    let ys = sample(&mut rng, n, h as usize / 2);
                    let flip = rng.gen::<bool>();
                    xs.into_iter()
                        .zip(ys)
                        .flat_map(|(x, y)| {
                            let (x, y) = (x as u32, y as u32 + n as u32);
                            if flip {
                                [y, x]
                            } else {
                                [x, y]
                            }
                        })
                        .collect()
                }
            };
            t.checked[i] += 1;
            let cols = cycle_colours(c, &cycle);
            let mut distinct = cols.clone();
            distinct.dedup();
            if distinct.len() <= 2 {
                found.insert(canonical_cycle(&cycle));
            }
        }
        t.violations[i] = found.len() as u128;
        t.witnesses[i] = found.into_iter().take(WITNESS_CAP).collect();
    }
    finish(c, VerifyMode::Sampled { budget, seed }, lengths, t)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum PropertyWitness {
    /// Two blocks of one colour that meet.
    BlockPair { first: usize, second: usize },
    /// A block whose vertex set does not have the block shape.
    BadBlock { block: usize },
    /// A short cycle of blocks in two colours, with its link vertices.
    BlockCycle { blocks: Vec<usize>, links: Vec<u32> },
    /// A vertex of high leftover degree.
    Vertex { vertex: u32, degree: u32 },
    /// A host edge `u_1 v_m` with too many mixed cycles of half-length `m`.
    Edge { u: u32, v: u32, m: u32, count: u128 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyOutcome {
    pub pass: bool,
    pub measured: f64,
    pub bound: f64,
    pub witnesses: Vec<PropertyWitness>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyReport {
    /// (I) blocks of one colour are vertex-disjoint copies of the block shape.
    pub disjoint: PropertyOutcome,
    /// (II) every two-colour block hypergraph has no short cycle.
    pub girth: PropertyOutcome,
    /// (III) the leftover graph has small maximum degree.
    pub leftover_degree: PropertyOutcome,
    /// (IV) few mixed block/leftover cycles through any host edge.
    pub mixed_cycles: PropertyOutcome,
}

impl PropertyReport {
    pub fn all_pass(&self) -> bool {
        self.disjoint.pass && self.girth.pass && self.leftover_degree.pass && self.mixed_cycles.pass
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PropertyOptions {
    pub delta: f64,
    /// Host edges probed for (IV); `None` probes every edge.
    pub edge_samples: Option<usize>,
    pub seed: u64,
}

impl PropertyOptions {
    pub fn new(delta: f64) -> Self {
        PropertyOptions { delta, edge_samples: None, seed: 0 }
    }
}

/// Checks the four structural properties of `blocks` and the colouring `c`,
/// whose structured edges must be exactly the block edges.
pub fn check_lemma_properties(blocks: &[Block], c: &Colouring, opts: PropertyOptions) -> Result<PropertyReport> {
    let host = c.host();
    for b in blocks {
        b.validate(host)?;
    }
    check_consistent(blocks, c)?;
    let disjoint = check_disjoint(host, blocks);
    let girth = check_girth(host, blocks);
    let leftover_degree = check_leftover(c, opts.delta);
    let mixed_cycles = check_mixed(blocks, c, opts);
    Ok(PropertyReport { disjoint, girth, leftover_degree, mixed_cycles })
}

fn check_consistent(blocks: &[Block], c: &Colouring) -> Result<()> {
    let host = c.host();
    let mut covered = vec![false; host.edge_count()];
    for b in blocks {
        for (u, v) in b.edges(host) {
            let i = host.edge_index(u, v).expect("block edge");
            if c.at(i) != EdgeColour::Structured(b.colour) {
                return Err(Error::Mismatch { u, v });
            }
            covered[i] = true;
        }
    }
    for (i, col) in c.colours().iter().enumerate() {
        if matches!(col, EdgeColour::Structured(_)) && !covered[i] {
            let (u, v) = host.edge_endpoints(i);
            return Err(Error::Mismatch { u, v });
        }
    }
    Ok(())
}

fn check_disjoint(host: &HostSpec, blocks: &[Block]) -> PropertyOutcome {
    let mut witnesses = Vec::new();
    let nv = host.vertex_count() as usize;
    let mut owner: std::collections::HashMap<(u32, u32), usize> = Default::default();
    for (bi, b) in blocks.iter().enumerate() {
        for &v in &b.vertices {
            if v as usize >= nv {
                witnesses.push(PropertyWitness::BadBlock { block: bi });
                break;
            }
            if let Some(&first) = owner.get(&(b.colour, v)) {
                let w = PropertyWitness::BlockPair { first, second: bi };
                if !witnesses.contains(&w) {
                    witnesses.push(w);
                }
            } else {
                owner.insert((b.colour, v), bi);
            }
        }
    }
    PropertyOutcome { pass: witnesses.is_empty(), measured: witnesses.len() as f64, bound: 0.0, witnesses }
}

/// Shortest cycle of the incidence graph (blocks on one side, host vertices on
/// the other) for every pair of colours that meet. A cycle through `t` blocks
/// there is a hypergraph cycle of length `t`.
fn check_girth(host: &HostSpec, blocks: &[Block]) -> PropertyOutcome {
    let limit = 2 * host.max_half_length() as usize;
    let mut colours: Vec<u32> = blocks.iter().map(|b| b.colour).collect();
    colours.sort_unstable();
    colours.dedup();
    let mut meets: BTreeSet<(u32, u32)> = BTreeSet::new();
    let mut at: Vec<Vec<usize>> = vec![Vec::new(); host.vertex_count() as usize];
    for (bi, b) in blocks.iter().enumerate() {
        for &v in &b.vertices {
            at[v as usize].push(bi);
        }
    }
    for list in &at {
        for (x, &a) in list.iter().enumerate() {
            for &b in &list[x + 1..] {
                let (ca, cb) = (blocks[a].colour, blocks[b].colour);
                if ca != cb {
                    meets.insert((ca.min(cb), ca.max(cb)));
                }
            }
        }
    }
    let pairs: Vec<(u32, u32)> = meets.into_iter().collect();
    let found = par::map(&pairs, |&(i, j)| shortest_block_cycle(blocks, i, j, limit));
    let witnesses: Vec<PropertyWitness> = found.into_iter().flatten().collect();
    let shortest = witnesses
        .iter()
        .map(|w| match w {
            PropertyWitness::BlockCycle { blocks, .. } => blocks.len(),
            _ => 0,
        })
        .min();
    PropertyOutcome {
        pass: witnesses.is_empty(),
        measured: shortest.map_or(f64::INFINITY, |s| s as f64),
        bound: (limit + 1) as f64,
        witnesses,
    }
}

fn shortest_block_cycle(blocks: &[Block], i: u32, j: u32, limit: usize) -> Option<PropertyWitness> {
    // incidence graph nodes: blocks first, then the host vertices they touch
    let ids: Vec<usize> = (0..blocks.len()).filter(|&b| blocks[b].colour == i || blocks[b].colour == j).collect();
    let mut verts: Vec<u32> = ids.iter().flat_map(|&b| blocks[b].vertices.iter().copied()).collect();
    verts.sort_unstable();
    verts.dedup();
    let nb = ids.len();
    let total = nb + verts.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total];
    for (x, &b) in ids.iter().enumerate() {
        for v in &blocks[b].vertices {
            let y = nb + verts.binary_search(v).unwrap();
            adj[x].push(y);
            adj[y].push(x);
        }
    }
    let mut best: Option<(usize, Vec<usize>)> = None;
    let mut dist = vec![usize::MAX; total];
    let mut parent = vec![usize::MAX; total];
    for root in 0..nb {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[root] = 0;
        let mut q = VecDeque::from([root]);
        while let Some(x) = q.pop_front() {
            // cycles through the root longer than the best cannot help
            if best.as_ref().is_some_and(|b| 2 * dist[x] >= b.0) {
                break;
            }
            for &y in &adj[x] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    parent[y] = x;
                    q.push_back(y);
                } else if y != parent[x] {
                    let len = dist[x] + dist[y] + 1;
                    if best.as_ref().is_none_or(|b| len < b.0) {
                        let mut a = vec![x];
                        while *a.last().unwrap() != root {
                            a.push(parent[*a.last().unwrap()]);
                        }
                        let mut b = vec![y];
                        while *b.last().unwrap() != root {
                            b.push(parent[*b.last().unwrap()]);
                        }
                        b.pop();
                        a.reverse();
                        a.extend(b);
                        best = Some((len, a));
                    }
                }
            }
        }
    }
    let (len, cycle) = best?;
    if len / 2 > limit {
        return None;
    }
    // rotate so the cycle starts at a block node
    let start = cycle.iter().position(|&x| x < nb).unwrap();
    let cycle: Vec<usize> = cycle[start..].iter().chain(&cycle[..start]).copied().collect();
    let blocks_on: Vec<usize> = cycle.iter().step_by(2).map(|&x| ids[x]).collect();
    let links: Vec<u32> = cycle.iter().skip(1).step_by(2).map(|&y| verts[y - nb]).collect();
    Some(PropertyWitness::BlockCycle { blocks: blocks_on, links })
}

fn check_leftover(c: &Colouring, delta: f64) -> PropertyOutcome {
    let host = c.host();
    let mut deg = vec![0u32; host.vertex_count() as usize];
    for (i, col) in c.colours().iter().enumerate() {
        if !matches!(col, EdgeColour::Structured(_)) {
            let (u, v) = host.edge_endpoints(i);
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
    }
    let bound = (host.n() as f64).powf(1.0 - delta);
    let max = deg.iter().copied().max().unwrap_or(0);
    let witnesses = deg
        .iter()
        .enumerate()
        .filter(|&(_, &d)| d as f64 > bound)
        .take(WITNESS_CAP)
        .map(|(v, &d)| PropertyWitness::Vertex { vertex: v as u32, degree: d })
        .collect::<Vec<_>>();
    PropertyOutcome { pass: witnesses.is_empty(), measured: max as f64, bound, witnesses }
}

/// Cycles `u_1 v_1 … u_m v_m u_1` with `u_t v_t` an edge of block `F_t` (the
/// `F_t` distinct, one colour) and `v_t u_{t+1}` leftover edges, for a fixed
/// ordered pair `(u_1, v_m)`.
pub fn mixed_cycle_count(blocks: &[Block], c: &Colouring, u1: u32, vm: u32, m: u32) -> u128 {
    let host = c.host();
    let mut at: Vec<Vec<usize>> = vec![Vec::new(); host.vertex_count() as usize];
    for (bi, b) in blocks.iter().enumerate() {
        for &v in &b.vertices {
            at[v as usize].push(bi);
        }
    }
    count_mixed(blocks, c, &at, u1, vm, m)
}

fn count_mixed(blocks: &[Block], c: &Colouring, at: &[Vec<usize>], u1: u32, vm: u32, m: u32) -> u128 {
    let host = c.host();
    let leftover = |a: u32, b: u32| c.get(a, b).is_some_and(|x| !matches!(x, EdgeColour::Structured(_)));
    #[allow(clippy::too_many_arguments)]
    fn rec(
        blocks: &[Block],
        host: &HostSpec,
        at: &[Vec<usize>],
        leftover: &dyn Fn(u32, u32) -> bool,
        colour: u32,
        used: &mut Vec<usize>,
        u: u32,
        vm: u32,
        left: u32,
    ) -> u128 {
        // `u` is the entry of the next block; `left` blocks remain including it
        let mut total = 0;
        for &f in &at[u as usize] {
            if blocks[f].colour != colour || used.contains(&f) {
                continue;
            }
            if left == 1 {
                if blocks[f].contains(vm) && vm != u && host.adjacent(u, vm) {
                    total += 1;
                }
                continue;
            }
            used.push(f);
            for &v in &blocks[f].vertices {
                if v == u || v == vm || !host.adjacent(u, v) {
                    continue;
                }
                for w in host.neighbours(v) {
                    if leftover(v, w) && w != vm {
                        total += rec(blocks, host, at, leftover, colour, used, w, vm, left - 1);
                    }
                }
            }
            used.pop();
        }
        total
    }
    let mut colours: Vec<u32> = at[u1 as usize].iter().map(|&b| blocks[b].colour).collect();
    colours.sort_unstable();
    colours.dedup();
    let mut used = Vec::new();
    colours.into_iter().map(|i| rec(blocks, host, at, &leftover, i, &mut used, u1, vm, m)).sum()
}

fn check_mixed(blocks: &[Block], c: &Colouring, opts: PropertyOptions) -> PropertyOutcome {
    let host = c.host();
    let mut at: Vec<Vec<usize>> = vec![Vec::new(); host.vertex_count() as usize];
    for (bi, b) in blocks.iter().enumerate() {
        for &v in &b.vertices {
            at[v as usize].push(bi);
        }
    }
    let edges: Vec<usize> = match opts.edge_samples {
        Some(s) if s < host.edge_count() => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let mut e = sample(&mut rng, host.edge_count(), s).into_vec();
            e.sort_unstable();
            e
        }
        _ => (0..host.edge_count()).collect(),
    };
    let n = host.n() as f64;
    let ms: Vec<u32> = host.alternating_cycle_range().collect();
    let found = par::map(&edges, |&e| {
        let (a, b) = host.edge_endpoints(e);
        let mut out = Vec::new();
        for &m in &ms {
            let bound = n.powf((m - 1) as f64 * (1.0 - opts.delta));
            for (u, v) in [(a, b), (b, a)] {
                let count = count_mixed(blocks, c, &at, u, v, m);
                out.push((count as f64 / bound, PropertyWitness::Edge { u, v, m, count }, count as f64 > bound));
            }
        }
        out
    });
    let mut worst = 0.0f64;
    let mut witnesses = Vec::new();
    for (ratio, w, bad) in found.into_iter().flatten() {
        worst = worst.max(ratio);
        if bad && witnesses.len() < WITNESS_CAP {
            witnesses.push(w);
        }
    }
    PropertyOutcome { pass: witnesses.is_empty(), measured: worst, bound: 1.0, witnesses }
}
