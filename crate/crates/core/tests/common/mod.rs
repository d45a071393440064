//! Brute-force reference implementations shared by the integration tests and
//! the acceptance runner. Nothing here calls into the search code under test.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use tricolour::hyperaudit::ChainQuery;
use tricolour::{Block, BlockMatching, Colouring, EdgeColour, HostSpec, Mode};

pub fn combos(pool: &[u32], r: usize) -> Vec<Vec<u32>> {
    fn go(pool: &[u32], r: usize, start: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..pool.len() {
            if pool.len() - i < r - cur.len() {
                break;
            }
            cur.push(pool[i]);
            go(pool, r, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(pool, r, 0, &mut Vec::new(), &mut out);
    out
}

fn tri(x: u32) -> usize {
    (x * (x - 1) / 2) as usize
}

/// Every vertex set a block can occupy, sorted.
pub fn all_placements(host: &HostSpec) -> Vec<Vec<u32>> {
    let n = host.n();
    let k = host.k();
    match host.mode() {
        Mode::Complete => {
            let all: Vec<u32> = (0..n).collect();
            combos(&all, (k - 1) as usize)
        }
        Mode::Bipartite => {
            let xs: Vec<u32> = (0..n).collect();
            let ys: Vec<u32> = (n..2 * n).collect();
            let (s, t) = (tri(k), tri(k + 1));
            let mut out = Vec::new();
            for (a, b) in [(s, t), (t, s)] {
                for left in combos(&xs, a) {
                    for right in combos(&ys, b) {
                        let mut p = left.clone();
                        p.extend(right);
                        out.push(p);
                    }
                }
            }
            out
        }
    }
}

pub fn mask(vs: &[u32]) -> u128 {
    vs.iter().fold(0, |m, &v| m | 1u128 << v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HVertex {
    Pair(u32, u32),
    At(u32, u32),
}

pub fn h_vertices(block: &[u32], colour: u32) -> Vec<HVertex> {
    let mut out = Vec::new();
    for (i, &a) in block.iter().enumerate() {
        for &b in &block[i + 1..] {
            out.push(HVertex::Pair(a.min(b), a.max(b)));
        }
        out.push(HVertex::At(a, colour));
    }
    out
}

/// Degree of every hypergraph vertex, including those of degree zero.
pub fn brute_degrees(host: &HostSpec) -> HashMap<HVertex, u64> {
    let nv = host.vertex_count();
    let mut deg = HashMap::new();
    for a in 0..nv {
        for b in a + 1..nv {
            deg.insert(HVertex::Pair(a, b), 0);
        }
        for c in 1..=host.palette_size() {
            deg.insert(HVertex::At(a, c), 0);
        }
    }
    for p in all_placements(host) {
        for c in 1..=host.palette_size() {
            for x in h_vertices(&p, c) {
                *deg.get_mut(&x).expect("known vertex") += 1;
            }
        }
    }
    deg
}

/// Largest number of hyperedges through two distinct hypergraph vertices.
pub fn brute_codegree(host: &HostSpec) -> u64 {
    let mut count: HashMap<(HVertex, HVertex), u64> = HashMap::new();
    for p in all_placements(host) {
        for c in 1..=host.palette_size() {
            let xs = h_vertices(&p, c);
            for i in 0..xs.len() {
                for j in i + 1..xs.len() {
                    let key = if xs[i] < xs[j] { (xs[i], xs[j]) } else { (xs[j], xs[i]) };
                    *count.entry(key).or_default() += 1;
                }
            }
        }
    }
    count.into_values().max().unwrap_or(0)
}

/// A block with its colour, as sorted vertices.
pub type Member = (Vec<u32>, u32);

fn fits(prev: &[(u128, u32)], m: u128, colour: u32) -> bool {
    prev.iter().all(|&(pm, pc)| {
        let common = (pm & m).count_ones();
        if pc == colour {
            common == 0
        } else {
            common <= 1
        }
    })
}

/// All alternating cycles of `2 * half` blocks in colours `ci`, `cj` through
/// the anchor block. Link vertices are chosen first, then a block holding each
/// consecutive pair of links. `holding(a, b, colour)` lists candidate blocks.
pub fn cycles_through(
    anchor: &[u32],
    ci: u32,
    cj: u32,
    half: usize,
    vertex_count: u32,
    holding: &dyn Fn(u32, u32, u32) -> Vec<Vec<u32>>,
) -> HashSet<Vec<Member>> {
    struct Walk<'a> {
        anchor: &'a [u32],
        len: usize,
        colours: [u32; 2],
        vertex_count: u32,
        holding: &'a dyn Fn(u32, u32, u32) -> Vec<Vec<u32>>,
        links: Vec<u32>,
        chosen: Vec<(u128, u32)>,
        members: Vec<Member>,
        out: HashSet<Vec<Member>>,
    }
    impl Walk<'_> {
        fn step(&mut self) {
            let pos = self.chosen.len();
            if pos == self.len {
                let mut set = self.members.clone();
                set.sort();
                self.out.insert(set);
                return;
            }
            let colour = self.colours[pos % 2];
            let from = self.links[pos];
            let targets: Vec<u32> = if pos == self.len - 1 {
                vec![self.links[0]]
            } else {
                (0..self.vertex_count).filter(|w| !self.links.contains(w)).collect()
            };
            for to in targets {
                for blk in (self.holding)(from, to, colour) {
                    let m = mask(&blk);
                    if (m & self.chosen[pos - 1].0).count_ones() != 1 {
                        continue;
                    }
                    if pos == self.len - 1 && (m & self.chosen[0].0).count_ones() != 1 {
                        continue;
                    }
                    if !fits(&self.chosen, m, colour) {
                        continue;
                    }
                    let closing = pos == self.len - 1;
                    if !closing {
                        self.links.push(to);
                    }
                    self.chosen.push((m, colour));
                    self.members.push((blk, colour));
                    self.step();
                    self.members.pop();
                    self.chosen.pop();
                    if !closing {
                        self.links.pop();
                    }
                }
            }
        }
    }
    let mut w = Walk {
        anchor,
        len: 2 * half,
        colours: [ci, cj],
        vertex_count,
        holding,
        links: Vec::new(),
        chosen: vec![(mask(anchor), ci)],
        members: vec![(anchor.to_vec(), ci)],
        out: HashSet::new(),
    };
    for &x in w.anchor {
        for &y in w.anchor {
            if x != y {
                w.links = vec![x, y];
                w.step();
            }
        }
    }
    w.out
}

/// Conflict degree of the anchor and its `j`-codegrees for `2 <= j < 2 * half`,
/// over every partner colour.
pub fn brute_conflict_stats(host: &HostSpec, anchor: &[u32], ci: u32, half: usize) -> (u128, Vec<(u32, u128)>) {
    let placements = all_placements(host);
    let mut by_pair: HashMap<(u32, u32), Vec<Vec<u32>>> = HashMap::new();
    for p in &placements {
        for (i, &a) in p.iter().enumerate() {
            for &b in &p[i + 1..] {
                by_pair.entry((a, b)).or_default().push(p.clone());
            }
        }
    }
    let holding = |a: u32, b: u32, _c: u32| by_pair.get(&(a.min(b), a.max(b))).cloned().unwrap_or_default();
    let me: Member = (anchor.to_vec(), ci);
    let mut sets = Vec::new();
    for cj in (1..=host.palette_size()).filter(|&c| c != ci) {
        sets.extend(cycles_through(anchor, ci, cj, half, host.vertex_count(), &holding));
    }
    let mut codeg = Vec::new();
    for j in 2..2 * half {
        let mut count: HashMap<Vec<Member>, u128> = HashMap::new();
        for s in &sets {
            let rest: Vec<Member> = s.iter().filter(|x| **x != me).cloned().collect();
            for pick in combos(&(0..rest.len() as u32).collect::<Vec<_>>(), j - 1) {
                let key: Vec<Member> = pick.iter().map(|&i| rest[i as usize].clone()).collect();
                *count.entry(key).or_default() += 1;
            }
        }
        codeg.push((j as u32, count.into_values().max().unwrap_or(0)));
    }
    (sets.len() as u128, codeg)
}

/// Whether `cand` closes an alternating cycle of allowed half-length with the
/// blocks of `m`.
pub fn closes_cycle(m: &BlockMatching, cand: &Block) -> bool {
    let host = m.host();
    let holding = |a: u32, b: u32, c: u32| -> Vec<Vec<u32>> {
        m.blocks()
            .iter()
            .filter(|blk| blk.colour == c && blk.contains(a) && blk.contains(b))
            .map(|blk| blk.vertices.clone())
            .collect()
    };
    let colours: BTreeSet<u32> = m.blocks().iter().map(|b| b.colour).filter(|&c| c != cand.colour).collect();
    for half in 2..=host.max_half_length() as usize {
        for &cj in &colours {
            if !cycles_through(&cand.vertices, cand.colour, cj, half, host.vertex_count(), &holding).is_empty() {
                return true;
            }
        }
    }
    false
}

fn side_x(host: &HostSpec, v: u32) -> bool {
    host.mode() == Mode::Complete || v < host.n()
}

fn in_x(host: &HostSpec, blk: &[u32]) -> usize {
    blk.iter().filter(|&&v| side_x(host, v)).count()
}

fn meet(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().copied().filter(|v| b.contains(v)).collect()
}

fn bip(host: &HostSpec) -> bool {
    host.mode() == Mode::Bipartite
}

/// A set of same-coloured blocks forms a chain for `q`.
pub fn is_chain(host: &HostSpec, q: &ChainQuery, set: &[&[u32]]) -> bool {
    if set.len() != q.m as usize {
        return false;
    }
    for i in 0..set.len() {
        for j in i + 1..set.len() {
            if !meet(set[i], set[j]).is_empty() {
                return false;
            }
        }
    }
    let Some(au) = set.iter().find(|b| b.contains(&q.u)) else { return false };
    let Some(av) = set.iter().find(|b| b.contains(&q.v)) else { return false };
    if au.contains(&q.v) {
        return false;
    }
    if bip(host) {
        let k = host.k();
        let ysize = av.len() - in_x(host, av);
        if in_x(host, au) != tri(k + q.a as u32) || ysize != tri(k + q.b as u32) {
            return false;
        }
    }
    true
}

/// A chain plus one block of another colour forms a crossed chain for `q`.
pub fn is_crossed(host: &HostSpec, q: &ChainQuery, chain: &[&[u32]], extra: &[u32]) -> bool {
    if !is_chain(host, q, chain) || extra.contains(&q.u) || extra.contains(&q.v) {
        return false;
    }
    if chain.iter().any(|b| meet(b, extra).len() > 1) {
        return false;
    }
    let au = chain.iter().position(|b| b.contains(&q.u)).unwrap();
    let av = chain.iter().position(|b| b.contains(&q.v)).unwrap();
    let hit_u = meet(chain[au], extra);
    if hit_u.len() != 1 || (bip(host) && side_x(host, hit_u[0])) {
        return false;
    }
    let c_size = tri(host.k() + q.c as u32);
    (0..chain.len()).filter(|&t| t != au && (q.m == 2 || t != av)).any(|t| {
        let hit = meet(chain[t], extra);
        hit.len() == 1 && (!bip(host) || (side_x(host, hit[0]) && in_x(host, chain[t]) == c_size))
    })
}

/// Exact chain and crossed-chain counts over the whole host, by listing sets.
pub fn brute_chain_counts(host: &HostSpec, q: &ChainQuery) -> (u128, u128) {
    let all = all_placements(host);
    let pal = host.palette_size() as u128;
    let mut chains = 0u128;
    let mut crossed = 0u128;
    let with_u: Vec<&Vec<u32>> = all.iter().filter(|p| p.contains(&q.u) && !p.contains(&q.v)).collect();
    let with_v: Vec<&Vec<u32>> = all.iter().filter(|p| p.contains(&q.v) && !p.contains(&q.u)).collect();
    for au in &with_u {
        for av in &with_v {
            if !meet(au, av).is_empty() {
                continue;
            }
            let free: Vec<u32> = (0..all.len() as u32)
                .filter(|&i| meet(&all[i as usize], au).is_empty() && meet(&all[i as usize], av).is_empty())
                .collect();
            for mid in combos(&free, q.m as usize - 2) {
                let mut set: Vec<&[u32]> = vec![au.as_slice(), av.as_slice()];
                set.extend(mid.iter().map(|&i| all[i as usize].as_slice()));
                if !is_chain(host, q, &set) {
                    continue;
                }
                chains += 1;
                crossed += all.iter().filter(|b| is_crossed(host, q, &set, b)).count() as u128;
            }
        }
    }
    (chains * pal, crossed * pal * pal.saturating_sub(1))
}

/// Chain and crossed-chain counts inside a matching, by scanning its subsets.
pub fn subset_chain_counts(m: &BlockMatching, q: &ChainQuery) -> (u128, u128) {
    let host = m.host();
    let blocks = m.blocks();
    let mut chains = 0u128;
    let mut crossed = 0u128;
    for colour in m.colours_present() {
        let ids: Vec<u32> = (0..blocks.len() as u32).filter(|&i| blocks[i as usize].colour == colour).collect();
        for pick in combos(&ids, q.m as usize) {
            let set: Vec<&[u32]> = pick.iter().map(|&i| blocks[i as usize].vertices.as_slice()).collect();
            if !is_chain(host, q, &set) {
                continue;
            }
            chains += 1;
            crossed +=
                blocks.iter().filter(|b| b.colour != colour && is_crossed(host, q, &set, &b.vertices)).count() as u128;
        }
    }
    (chains, crossed)
}

/// Rotation starting at the least vertex, read towards its smaller neighbour.
pub fn canonical(cycle: &[u32]) -> Vec<u32> {
    let h = cycle.len();
    let s = (0..h).min_by_key(|&i| cycle[i]).unwrap();
    let fwd: Vec<u32> = (0..h).map(|t| cycle[(s + t) % h]).collect();
    let bwd: Vec<u32> = (0..h).map(|t| cycle[(s + h - t) % h]).collect();
    fwd.min(bwd)
}

/// Visits every ordered vertex sequence of length `len` whose consecutive
/// entries and closing pair are host edges.
pub fn for_each_closed_walk(host: &HostSpec, len: usize, f: &mut dyn FnMut(&[u32])) {
    fn go(host: &HostSpec, len: usize, cur: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
        if cur.len() == len {
            if host.adjacent(cur[len - 1], cur[0]) {
                f(cur);
            }
            return;
        }
        for w in 0..host.vertex_count() {
            if !cur.contains(&w) && host.adjacent(*cur.last().unwrap(), w) {
                cur.push(w);
                go(host, len, cur, f);
                cur.pop();
            }
        }
    }
    for s in 0..host.vertex_count() {
        go(host, len, &mut vec![s], f);
    }
}

/// Canonical cycles of the given lengths that see at most two colours.
pub fn brute_violations(c: &Colouring, lengths: &[u32]) -> BTreeSet<Vec<u32>> {
    let host = c.host().clone();
    let mut out = BTreeSet::new();
    for &len in lengths {
        for_each_closed_walk(&host, len as usize, &mut |w| {
            let cols: BTreeSet<EdgeColour> = (0..w.len()).map(|t| c.get(w[t], w[(t + 1) % w.len()]).unwrap()).collect();
            if cols.len() <= 2 {
                out.insert(canonical(w));
            }
        });
    }
    out
}

#[derive(Debug, Default, PartialEq, Eq)]
pub struct EventSets {
    pub a: BTreeSet<Vec<usize>>,
    pub b: BTreeSet<(Vec<u32>, Vec<usize>)>,
    pub c: BTreeSet<(Vec<u32>, Vec<usize>)>,
}

fn edge_ids(host: &HostSpec, pairs: impl Iterator<Item = (u32, u32)>) -> Vec<usize> {
    let mut v: Vec<usize> = pairs.map(|(a, b)| host.edge_index(a, b).unwrap()).collect();
    v.sort_unstable();
    v
}

/// Every bad event, by exhaustive search over pairs and closed walks.
pub fn brute_events(c: &Colouring, m: &BlockMatching) -> EventSets {
    let host = c.host().clone();
    let mut out = EventSets::default();
    let fresh_at = |a: u32, b: u32| match c.get(a, b) {
        Some(EdgeColour::Fresh(j)) => Some(j),
        _ => None,
    };
    let edges: Vec<(u32, u32)> = host.edges().collect();
    for (i, &(a, b)) in edges.iter().enumerate() {
        for (j, &(x, y)) in edges.iter().enumerate().skip(i + 1) {
            let share = a == x || a == y || b == x || b == y;
            if let (true, Some(p), Some(q)) = (share, fresh_at(a, b), fresh_at(x, y)) {
                if p == q {
                    out.a.insert(vec![i, j]);
                }
            }
        }
    }
    let b_lo = (*host.two_coloured_cycle_range().start()).max(2);
    for half in b_lo..=*host.two_coloured_cycle_range().end() {
        let len = 2 * half as usize;
        for_each_closed_walk(&host, len, &mut |w| {
            let cols: Option<Vec<u32>> = (0..len).map(|t| fresh_at(w[t], w[(t + 1) % len])).collect();
            let Some(cols) = cols else { return };
            let alternating = (0..len).all(|t| cols[t] == cols[t % 2]) && cols[0] != cols[1];
            if alternating {
                let scope = edge_ids(&host, (0..len).map(|t| (w[t], w[(t + 1) % len])));
                out.b.insert((canonical(w), scope));
            }
        });
    }
    for half in host.alternating_cycle_range() {
        let len = 2 * half as usize;
        for_each_closed_walk(&host, len, &mut |w| {
            let structured: Option<Vec<(u32, usize)>> = (0..half as usize)
                .map(|t| match c.get(w[2 * t], w[2 * t + 1]) {
                    Some(EdgeColour::Structured(i)) => Some((i, m.pair_owner(w[2 * t], w[2 * t + 1])?)),
                    _ => None,
                })
                .collect();
            let fresh: Option<Vec<u32>> =
                (0..half as usize).map(|t| fresh_at(w[2 * t + 1], w[(2 * t + 2) % len])).collect();
            let (Some(s), Some(f)) = (structured, fresh) else { return };
            let owners: BTreeSet<usize> = s.iter().map(|x| x.1).collect();
            if s.iter().all(|x| x.0 == s[0].0) && owners.len() == s.len() && f.iter().all(|&j| j == f[0]) {
                let scope = edge_ids(&host, (0..half as usize).map(|t| (w[2 * t + 1], w[(2 * t + 2) % len])));
                out.c.insert((canonical(w), scope));
            }
        });
    }
    out
}

/// Random blocks inserted while compatible; no conflict check.
pub fn random_matching<R: Rng>(host: &HostSpec, tries: usize, rng: &mut R) -> BlockMatching {
    let all = all_placements(host);
    let mut m = BlockMatching::new(host);
    if all.is_empty() {
        return m;
    }
    for _ in 0..tries {
        let p = all.choose(rng).unwrap().clone();
        let b = Block::new(rng.gen_range(1..=host.palette_size()), p);
        if m.is_compatible(&b) {
            m.insert(b).unwrap();
        }
    }
    m
}

/// Structured edges from `m`, every other edge fresh from `[r]`.
pub fn random_colouring<R: Rng>(m: &BlockMatching, r: u32, rng: &mut R) -> Colouring {
    let host = m.host();
    let mut c = tricolour::graph_of_matching(m);
    c.set_fresh_palette(tricolour::model::FreshPalette { alpha: 0.25, size: r });
    for i in 0..host.edge_count() {
        if c.at(i) == EdgeColour::Uncoloured {
            c.set_at(i, EdgeColour::Fresh(rng.gen_range(1..=r)));
        }
    }
    c
}
