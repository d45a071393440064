//! Fresh-palette colouring of the leftover graph and Moser–Tardos repair of
//! the three bad-event families.
//!
//! The leftover graph `L` is the set of fresh-coloured edges. The events are:
//!
//! * **A**: two adjacent `L`-edges with the same fresh colour;
//! * **B**: an even cycle inside `L` properly coloured with exactly two colours;
//! * **C**: a cycle `u_1 v_1 u_2 v_2 … u_m v_m` where every `u_t v_t` lies in a
//!   block `F_t`, the `F_t` being distinct blocks of one structured colour, and
//!   every `v_t u_{t+1}` is an `L`-edge of one fresh colour `j`.
//!
//! Every cycle is reported once, in canonical form: least vertex first, then
//! the smaller of its two neighbours.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BlockMatching, Colouring, EdgeColour, FreshPalette, HostSpec, Mode};
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EventKind {
    A,
    B,
    C,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::A => "A",
            EventKind::B => "B",
            EventKind::C => "C",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum EventWitness {
    /// Shared vertex and the common fresh colour.
    A { vertex: u32, colour: u32 },
    /// Canonical cycle and the colours of its first and second edge.
    B { cycle: Vec<u32>, colours: (u32, u32) },
    /// Canonical cycle, the fresh colour of its `L`-edges, the structured
    /// colour of its blocks and the block indices in cycle order.
    C { cycle: Vec<u32>, fresh: u32, structured: u32, blocks: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BadEvent {
    pub kind: EventKind,
    /// Sorted edge indices of the `L`-edges the event depends on.
    pub scope: Vec<usize>,
    pub witness: EventWitness,
}

impl BadEvent {
    pub fn half_length(&self) -> Option<u32> {
        match &self.witness {
            EventWitness::A { .. } => None,
            EventWitness::B { cycle, .. } | EventWitness::C { cycle, .. } => Some(cycle.len() as u32 / 2),
        }
    }
}

/// Rotates and reflects a cycle so that it starts at its least vertex and
/// continues towards the smaller neighbour.
pub fn canonical_cycle(cycle: &[u32]) -> Vec<u32> {
    let h = cycle.len();
    if h == 0 {
        return Vec::new();
    }
    let s = (0..h).min_by_key(|&i| cycle[i]).unwrap();
    let fwd = cycle[(s + 1) % h];
    let back = cycle[(s + h - 1) % h];
    if fwd <= back {
        (0..h).map(|t| cycle[(s + t) % h]).collect()
    } else {
        (0..h).map(|t| cycle[(s + h - t) % h]).collect()
    }
}

/// Fresh-coloured adjacency: for every vertex, `(neighbour, colour, edge)` sorted.
struct FreshGraph {
    adj: Vec<Vec<(u32, u32, usize)>>,
}

impl FreshGraph {
    fn new(c: &Colouring) -> Self {
        let host = c.host();
        let mut adj = vec![Vec::new(); host.vertex_count() as usize];
        for (i, col) in c.colours().iter().enumerate() {
            if let EdgeColour::Fresh(j) = *col {
                let (u, v) = host.edge_endpoints(i);
                adj[u as usize].push((v, j, i));
                adj[v as usize].push((u, j, i));
            }
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        FreshGraph { adj }
    }

    fn edge(&self, u: u32, v: u32) -> Option<(u32, usize)> {
        let a = &self.adj[u as usize];
        a.binary_search_by_key(&v, |e| e.0).ok().map(|p| (a[p].1, a[p].2))
    }
}

fn check_input(c: &Colouring, m: &BlockMatching) -> Result<()> {
    c.check_against(m)?;
    let missing = c.uncoloured_count();
    if missing > 0 {
        return Err(Error::PartialColouring { uncoloured: missing });
    }
    Ok(())
}

/// Every occurring event of the three families, sorted.
///
/// Structured edges of `c` must be exactly the block edges of `m` and every
/// other edge must carry a fresh colour.
pub fn detect_events(c: &Colouring, m: &BlockMatching) -> Result<Vec<BadEvent>> {
    check_input(c, m)?;
    let g = FreshGraph::new(c);
    let mut out = events_a(c.host(), &g);
    out.extend(events_b(c.host(), &g));
    out.extend(events_c(c.host(), &g, m));
    out.sort();
    Ok(out)
}

fn events_a(host: &HostSpec, g: &FreshGraph) -> Vec<BadEvent> {
    par::flat_map_range(host.vertex_count() as usize, |v| {
        let a = &g.adj[v];
        let mut out = Vec::new();
        for (x, &(_, cx, ex)) in a.iter().enumerate() {
            for &(_, cy, ey) in &a[x + 1..] {
                if cx == cy {
                    out.push(BadEvent {
                        kind: EventKind::A,
                        scope: vec![ex.min(ey), ex.max(ey)],
                        witness: EventWitness::A { vertex: v as u32, colour: cx },
                    });
                }
            }
        }
        out
    })
}

fn events_b(host: &HostSpec, g: &FreshGraph) -> Vec<BadEvent> {
    let range = host.two_coloured_cycle_range();
    let (lo, hi) = (*range.start() as usize, *range.end() as usize);
    if lo > hi {
        return Vec::new();
    }
    par::flat_map_range(host.vertex_count() as usize, |s| {
        let s = s as u32;
        let mut out = Vec::new();
        let mut path = vec![s];
        let mut on = vec![false; host.vertex_count() as usize];
        on[s as usize] = true;
        for &(x1, a, _) in &g.adj[s as usize] {
            if x1 <= s {
                continue;
            }
            path.push(x1);
            on[x1 as usize] = true;
            extend_b(g, s, a, None, 2 * lo, 2 * hi, &mut path, &mut on, &mut out);
            on[x1 as usize] = false;
            path.pop();
        }
        out
    })
}

#[allow(clippy::too_many_arguments)]
fn extend_b(
    g: &FreshGraph,
    s: u32,
    a: u32,
    b: Option<u32>,
    min_len: usize,
    max_len: usize,
    path: &mut Vec<u32>,
    on: &mut [bool],
    out: &mut Vec<BadEvent>,
) {
    let last = *path.last().unwrap();
    // next edge index is path.len() - 1; even positions carry `a`, odd ones `b`
    let want_a = (path.len() - 1).is_multiple_of(2);
    if !want_a && path.len() >= min_len && path.len().is_multiple_of(2) && path[1] < last {
        if let (Some(b), Some((col, _))) = (b, g.edge(last, s)) {
            if col == b {
                let scope = cycle_scope(g, path);
                out.push(BadEvent {
                    kind: EventKind::B,
                    scope,
                    witness: EventWitness::B { cycle: path.clone(), colours: (a, b) },
                });
            }
        }
    }
    if path.len() == max_len {
        return;
    }
    for &(w, col, _) in &g.adj[last as usize] {
        if w <= s || on[w as usize] {
            continue;
        }
        let next_b = if want_a {
            if col != a {
                continue;
            }
            b
        } else {
            match b {
                Some(b) if col != b => continue,
                None if col == a => continue,
                _ => Some(col),
            }
        };
        path.push(w);
        on[w as usize] = true;
        extend_b(g, s, a, next_b, min_len, max_len, path, on, out);
        on[w as usize] = false;
        path.pop();
    }
}

fn cycle_scope(g: &FreshGraph, cycle: &[u32]) -> Vec<usize> {
    let h = cycle.len();
    let mut scope: Vec<usize> =
        (0..h).map(|t| g.edge(cycle[t], cycle[(t + 1) % h]).expect("cycle edge in L").1).collect();
    scope.sort_unstable();
    scope
}

fn events_c(host: &HostSpec, g: &FreshGraph, m: &BlockMatching) -> Vec<BadEvent> {
    let max_half = host.max_half_length() as usize;
    if max_half < 2 || m.is_empty() {
        return Vec::new();
    }
    let nv = host.vertex_count() as usize;
    let mut at: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (bi, b) in m.blocks().iter().enumerate() {
        for &v in &b.vertices {
            at[v as usize].push(bi);
        }
    }
    par::flat_map_range(nv, |u1| {
        let u1 = u1 as u32;
        let mut out = Vec::new();
        for &f1 in &at[u1 as usize] {
            let block = &m.blocks()[f1];
            for &v1 in &block.vertices {
                if v1 <= u1 || !host.adjacent(u1, v1) {
                    continue;
                }
                let mut st = CSearch {
                    host,
                    g,
                    m,
                    u1,
                    colour: block.colour,
                    max_half,
                    cycle: vec![u1, v1],
                    blocks: vec![f1],
                    out: &mut out,
                };
                st.extend(None);
            }
        }
        out
    })
}

struct CSearch<'a> {
    host: &'a HostSpec,
    g: &'a FreshGraph,
    m: &'a BlockMatching,
    u1: u32,
    colour: u32,
    max_half: usize,
    cycle: Vec<u32>,
    blocks: Vec<usize>,
    out: &'a mut Vec<BadEvent>,
}

impl CSearch<'_> {
    fn extend(&mut self, fresh: Option<u32>) {
        let v = *self.cycle.last().unwrap();
        if let Some(j) = fresh {
            if self.blocks.len() >= 2 {
                if let Some((col, _)) = self.g.edge(v, self.u1) {
                    if col == j {
                        self.emit(j);
                    }
                }
            }
        }
        if self.blocks.len() == self.max_half {
            return;
        }
        for &(u, col, _) in &self.g.adj[v as usize] {
            if u <= self.u1 || fresh.is_some_and(|j| j != col) {
                continue;
            }
            let Some(f) = self.m.block_at(self.colour, u) else { continue };
            if self.blocks.contains(&f) {
                continue;
            }
            for &w in &self.m.blocks()[f].vertices {
                if w <= self.u1 || w == u || !self.host.adjacent(u, w) {
                    continue;
                }
                self.cycle.push(u);
                self.cycle.push(w);
                self.blocks.push(f);
                self.extend(Some(col));
                self.blocks.pop();
                self.cycle.truncate(self.cycle.len() - 2);
            }
        }
    }

    fn emit(&mut self, j: u32) {
        let h = self.cycle.len();
        let mut scope: Vec<usize> =
            (0..h / 2).map(|t| self.g.edge(self.cycle[2 * t + 1], self.cycle[(2 * t + 2) % h]).unwrap().1).collect();
        scope.sort_unstable();
        let cycle = canonical_cycle(&self.cycle);
        // block order follows the canonical orientation
        let blocks = if cycle[1] == self.cycle[1] {
            self.blocks.clone()
        } else {
            let mut b = self.blocks.clone();
            b[1..].reverse();
            b
        };
        self.out.push(BadEvent {
            kind: EventKind::C,
            scope,
            witness: EventWitness::C { cycle, fresh: j, structured: self.colour, blocks },
        });
    }
}

/// Colours every uncoloured edge independently and uniformly from the fresh
/// palette `[⌈n^(1-α)⌉]`; records the palette on the colouring.
pub fn init_fresh(c: &Colouring, alpha: f64, seed: u64) -> Result<Colouring> {
    let palette = FreshPalette::new(c.host().n(), alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(init_fresh_with_palette(c, palette, &mut rng))
}

pub fn init_fresh_with_palette<R: Rng>(c: &Colouring, palette: FreshPalette, rng: &mut R) -> Colouring {
    let mut out = c.clone();
    out.set_fresh_palette(palette);
    for i in 0..out.colours().len() {
        if out.at(i) == EdgeColour::Uncoloured {
            out.set_at(i, EdgeColour::Fresh(rng.gen_range(1..=palette.size)));
        }
    }
    out
}

/// One resampled event.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResampleEntry {
    pub round: u64,
    pub kind: EventKind,
    pub scope: Vec<(u32, u32)>,
}

impl fmt::Display for ResampleEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R {} {}", self.round, self.kind)?;
        for (u, v) in &self.scope {
            write!(f, " {u}-{v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResampleOutcome {
    pub certified: bool,
    pub rounds: u64,
    pub log: Vec<ResampleEntry>,
    /// Events still occurring when the round cap was hit.
    pub residual: Vec<BadEvent>,
}

/// Moser–Tardos: while some event occurs, pick one uniformly and resample its
/// scope. Structured edges are never touched. Stops uncertified after
/// `max_rounds` resamplings.
pub fn moser_tardos(
    c: &Colouring,
    m: &BlockMatching,
    seed: u64,
    max_rounds: u64,
) -> Result<(Colouring, ResampleOutcome)> {
    let palette = c.fresh_palette().ok_or_else(|| Error::InvalidQuery("colouring has no fresh palette".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = c.clone();
    let mut log = Vec::new();
    let mut rounds = 0u64;
    loop {
        let events = detect_events(&cur, m)?;
        if events.is_empty() {
            return Ok((cur, ResampleOutcome { certified: true, rounds, log, residual: Vec::new() }));
        }
        if rounds == max_rounds {
            return Ok((cur, ResampleOutcome { certified: false, rounds, log, residual: events }));
        }
        rounds += 1;
        let ev = &events[rng.gen_range(0..events.len())];
        for &e in &ev.scope {
            cur.set_at(e, EdgeColour::Fresh(rng.gen_range(1..=palette.size)));
        }
        log.push(ResampleEntry {
            round: rounds,
            kind: ev.kind,
            scope: ev.scope.iter().map(|&e| cur.host().edge_endpoints(e)).collect(),
        });
    }
}

/// One exponent condition of the weight choice.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Condition {
    pub kind: EventKind,
    pub half_length: Option<u32>,
    /// Human-readable inequality, e.g. `3α < 2δ`.
    pub inequality: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LllWeights {
    pub n: u32,
    pub alpha: f64,
    pub delta: f64,
    pub x: f64,
    /// `(m, y_m)` for the two-coloured cycle range.
    pub y: Vec<(u32, f64)>,
    /// `(m, z_m)` for `2 ≤ m ≤ ⌊ℓ/2⌋`.
    pub z: Vec<(u32, f64)>,
    pub conditions: Vec<Condition>,
    /// `α < min(δ/4, 1/2)`.
    pub alpha_small: bool,
}

impl LllWeights {
    pub fn feasible(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }
}

/// Weights `x`, `y_m`, `z_m` and the exponent conditions that make them work.
/// The ranges of `m` follow the host family: bipartite hosts use the even
/// lengths from `k²−k+2`.
pub fn lll_weights(mode: Mode, n: u32, alpha: f64, delta: f64, k: u32, ell: u32) -> Result<LllWeights> {
    if !(alpha > 0.0 && alpha < 1.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidQuery(format!("alpha and delta must lie in (0, 1), got {alpha}, {delta}")));
    }
    let nf = n as f64;
    let b_lo = match mode {
        Mode::Complete => k.div_ceil(2),
        Mode::Bipartite => (k * k - k + 2) / 2,
    };
    let mut conditions = vec![Condition {
        kind: EventKind::A,
        half_length: None,
        inequality: "2α < δ".into(),
        lhs: 2.0 * alpha,
        rhs: delta,
        holds: 2.0 * alpha < delta,
    }];
    let mut y = Vec::new();
    for m in b_lo.max(2)..=ell / 2 {
        let mf = m as f64;
        y.push((m, nf.powf(-(2.0 * mf - 2.0) + (2.0 * mf - 1.0) * alpha)));
        let (lhs, rhs) = ((2.0 * mf - 1.0) * alpha, (2.0 * mf - 2.0) * delta);
        conditions.push(Condition {
            kind: EventKind::B,
            half_length: Some(m),
            inequality: format!("{}α < {}δ", 2 * m - 1, 2 * m - 2),
            lhs,
            rhs,
            holds: lhs < rhs,
        });
    }
    let mut z = Vec::new();
    for m in 2..=ell / 2 {
        let mf = m as f64;
        z.push((m, nf.powf(-mf + (mf + 1.0) * alpha)));
        let (lhs, rhs) = ((mf + 2.0) * alpha, (mf - 1.0) * delta);
        conditions.push(Condition {
            kind: EventKind::C,
            half_length: Some(m),
            inequality: format!("{}α < {}δ", m + 2, m - 1),
            lhs,
            rhs,
            holds: lhs < rhs,
        });
    }
    Ok(LllWeights {
        n,
        alpha,
        delta,
        x: nf.powf(-2.0 + 3.0 * alpha),
        y,
        z,
        conditions,
        alpha_small: alpha < (delta / 4.0).min(0.5),
    })
}

/// Probability that a given A event occurs under uniform fresh colouring: `r^-2`.
pub fn probability_a(palette: FreshPalette) -> f64 {
    let r = palette.size as f64;
    1.0 / (r * r)
}
