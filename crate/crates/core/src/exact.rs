//! Exact values for tiny hosts by backtracking, and the closed-form bound
//! calculators.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{build_host, Colouring, EdgeColour, HostSpec, Mode};
use crate::par;
use crate::verify::{verify_lengths, VerifyMode, DEFAULT_TUPLE_CAP};

/// Largest complete host the solver accepts by default.
pub const COMPLETE_CAP: u32 = 8;
/// Largest side of a bipartite host the solver accepts by default.
pub const BIPARTITE_CAP: u32 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ExactOptions {
    /// Restrict the next edge's colour to at most one above the largest used.
    pub symmetry_breaking: bool,
    /// Overrides the default vertex cap.
    pub vertex_cap: Option<u32>,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions { symmetry_breaking: true, vertex_cap: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactResult {
    pub mode: Mode,
    pub n: u32,
    pub lengths: Vec<u32>,
    pub q: u32,
    pub value: u32,
    /// Edge colours `1..=value`, indexed like the host edges.
    pub witness: Vec<u32>,
    /// Cycles in the family.
    pub cycles: usize,
    /// Search nodes over all attempted colour counts.
    pub nodes: u64,
    /// `value - 1` when the search at that count was exhausted.
    pub refuted: Option<u32>,
}

impl ExactResult {
    pub fn host(&self) -> Result<HostSpec> {
        solver_host(self.mode, self.n, &self.lengths)
    }

    /// The witness as a colouring with colours in the fresh namespace.
    pub fn colouring(&self) -> Result<Colouring> {
        let host = self.host()?;
        let mut c = Colouring::uncoloured(&host);
        for (i, &col) in self.witness.iter().enumerate() {
            c.set_at(i, EdgeColour::Fresh(col));
        }
        Ok(c)
    }
}

fn solver_host(mode: Mode, n: u32, lengths: &[u32]) -> Result<HostSpec> {
    let top = lengths.iter().copied().max().unwrap_or(4);
    match mode {
        Mode::Complete => build_host(mode, n, 3, top.max(3), None),
        Mode::Bipartite => build_host(mode, n, 2, (top + top % 2).max(4), None),
    }
}

/// Edge lists of the canonical cycles of the given lengths.
fn cycles(host: &HostSpec, lengths: &[u32]) -> Vec<Vec<usize>> {
    let nv = host.vertex_count();
    let max = lengths.iter().copied().max().unwrap_or(0) as usize;
    let mut out = Vec::new();
    fn rec(host: &HostSpec, lengths: &[u32], max: usize, path: &mut Vec<u32>, out: &mut Vec<Vec<usize>>) {
        let s = path[0];
        let last = *path.last().unwrap();
        if path.len() >= 3 && path[1] < last && host.adjacent(last, s) && lengths.contains(&(path.len() as u32)) {
            let h = path.len();
            let mut e: Vec<usize> = (0..h).map(|t| host.edge_index(path[t], path[(t + 1) % h]).unwrap()).collect();
            e.sort_unstable();
            out.push(e);
        }
        if path.len() == max {
            return;
        }
        for w in host.neighbours(last).collect::<Vec<_>>() {
            if w > s && !path.contains(&w) {
                path.push(w);
                rec(host, lengths, max, path, out);
                path.pop();
            }
        }
    }
    for s in 0..nv {
        rec(host, lengths, max, &mut vec![s], &mut out);
    }
    out
}

struct Search<'a> {
    cycles: &'a [Vec<usize>],
    /// For each edge: cycles through it with the edge's position in the sorted list.
    through: Vec<Vec<(usize, usize)>>,
    q: usize,
    colours: u32,
    symmetry: bool,
    nodes: &'a AtomicU64,
}

impl Search<'_> {
    /// Whether edge `e`, just coloured, leaves every cycle through it able to reach `q` colours.
    fn ok(&self, col: &[u32], e: usize) -> bool {
        self.through[e].iter().all(|&(cid, pos)| {
            let cyc = &self.cycles[cid];
            let remaining = cyc.len() - pos - 1;
            if remaining >= self.q {
                return true;
            }
            let mut seen = [0u32; 8];
            let mut d = 0;
            for &f in &cyc[..=pos] {
                if !seen[..d].contains(&col[f]) {
                    if d + 1 + remaining >= self.q {
                        return true;
                    }
                    seen[d] = col[f];
                    d += 1;
                }
            }
            d + remaining >= self.q
        })
    }

    fn max_choice(&self, col: &[u32], e: usize) -> u32 {
        if self.symmetry {
            (col[..e].iter().copied().max().unwrap_or(0) + 1).min(self.colours)
        } else {
            self.colours
        }
    }

    fn solve(&self, col: &mut Vec<u32>, e: usize) -> bool {
        self.nodes.fetch_add(1, Ordering::Relaxed);
        if e == col.len() {
            return true;
        }
        for c in 1..=self.max_choice(col, e) {
            col[e] = c;
            if self.ok(col, e) && self.solve(col, e + 1) {
                return true;
            }
        }
        col[e] = 0;
        false
    }

    /// Consistent prefixes of the first `depth` edges, in lexicographic order.
    fn prefixes(&self, edges: usize, depth: usize) -> Vec<Vec<u32>> {
        let mut level = vec![vec![0u32; edges]];
        for e in 0..depth.min(edges) {
            let mut next = Vec::new();
            for p in level {
                for c in 1..=self.max_choice(&p, e) {
                    let mut p2 = p.clone();
                    p2[e] = c;
                    if self.ok(&p2, e) {
                        next.push(p2);
                    }
                }
            }
            level = next;
        }
        level
    }
}

/// Least number of colours for which some colouring of the host gives every
/// cycle with length in `[k_low, k_high]` at least `q` colours.
///
/// Minimality is proved by exhausting the search at one colour fewer. The
/// witness is re-checked by the cycle verifier when `q = 3`.
pub fn exact_ramsey(mode: Mode, n: u32, k_low: u32, k_high: u32, q: u32, opts: ExactOptions) -> Result<ExactResult> {
    if k_low < 3 || k_low > k_high {
        return Err(Error::InvalidQuery(format!("need 3 <= k_low <= k_high, got [{k_low}, {k_high}]")));
    }
    if q == 0 || q > 8 {
        return Err(Error::InvalidQuery(format!("q must lie in 1..=8, got {q}")));
    }
    let cap = opts.vertex_cap.unwrap_or(match mode {
        Mode::Complete => COMPLETE_CAP,
        Mode::Bipartite => BIPARTITE_CAP,
    });
    if n > cap {
        return Err(Error::CapExceeded { what: "exact solver vertices", size: n as u128, cap: cap as u128 });
    }
    let lengths: Vec<u32> = (k_low..=k_high).filter(|h| mode == Mode::Complete || h % 2 == 0).collect();
    let host = solver_host(mode, n, &lengths)?;
    let cyc = cycles(&host, &lengths);
    let edges = host.edge_count();
    let mut through = vec![Vec::new(); edges];
    for (cid, c) in cyc.iter().enumerate() {
        for (pos, &e) in c.iter().enumerate() {
            through[e].push((cid, pos));
        }
    }
    let nodes = AtomicU64::new(0);
    let mut refuted = None;
    let start = if edges == 0 { 0 } else { 1 };
    for colours in start..=edges.max(1) as u32 {
        let s = Search {
            cycles: &cyc,
            through: through.clone(),
            q: q as usize,
            colours,
            symmetry: opts.symmetry_breaking,
            nodes: &nodes,
        };
        let found = if edges == 0 {
            Some(Vec::new())
        } else {
            let pre = s.prefixes(edges, 6);
            par::find_first(pre.len(), |i| {
                let mut col = pre[i].clone();
                let depth = 6.min(edges);
                s.solve(&mut col, depth).then_some(col)
            })
        };
        match found {
            Some(witness) => {
                let res = ExactResult {
                    mode,
                    n,
                    lengths: lengths.clone(),
                    q,
                    value: colours,
                    witness,
                    cycles: cyc.len(),
                    nodes: nodes.load(Ordering::Relaxed),
                    refuted,
                };
                if q == 3 {
                    let v = verify_lengths(&res.colouring()?, &lengths, VerifyMode::Exhaustive, DEFAULT_TUPLE_CAP)?;
                    assert!(v.is_certified(), "solver witness failed verification");
                }
                return Ok(res);
            }
            None => refuted = Some(colours),
        }
    }
    unreachable!("a rainbow colouring always works")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsReport {
    pub mode: Mode,
    pub n: u32,
    pub k: u32,
    pub lower_bound: u64,
    /// Path extremal value the lower bound divides by.
    pub path_extremal: f64,
    /// Largest `t` with `t² − t + 2 ≤ k` (bipartite only).
    pub block_parameter: Option<u32>,
    /// `2 / (t² − 1)` as `(numerator, denominator)` in lowest terms.
    pub upper_coefficient: Option<(u64, u64)>,
}

/// `⌈C(n,2) / ((k−2)n/2)⌉ = ⌈(n−1)/(k−2)⌉`, dividing by the path bound
/// `ex(n, P_k) ≤ (k−2)n/2`.
pub fn lower_bound_complete(n: u32, k: u32) -> Result<BoundsReport> {
    if k < 3 || n < k {
        return Err(Error::InvalidQuery(format!("need n >= k >= 3, got n={n}, k={k}")));
    }
    Ok(BoundsReport {
        mode: Mode::Complete,
        n,
        k,
        lower_bound: ((n - 1) as u64).div_ceil((k - 2) as u64),
        path_extremal: (k - 2) as f64 * n as f64 / 2.0,
        block_parameter: None,
        upper_coefficient: None,
    })
}

/// Maximum edges of a subgraph of `K_{m,n}` with no path on `2(k+1)` vertices.
pub fn ex_path_bipartite(m: u64, n: u64, k: u64) -> Result<u64> {
    if m > n {
        return Err(Error::InvalidQuery(format!("need m <= n, got m={m}, n={n}")));
    }
    if k == 0 {
        return Err(Error::InvalidQuery("k must be positive".into()));
    }
    let v = if m <= k {
        m.checked_mul(n)
    } else if m < 2 * k {
        n.checked_mul(k)
    } else {
        (m + n - 2 * k).checked_mul(k)
    };
    v.ok_or(Error::Overflow("ex_path_bipartite"))
}

/// Largest integer `t ≥ 1` with `t² − t + 2 ≤ k`.
pub fn block_parameter(k: u32) -> Option<u32> {
    let f = |t: u64| t * t - t + 2;
    (f(1) <= k as u64).then(|| {
        let mut t = 1u64;
        while f(t + 1) <= k as u64 {
            t += 1;
        }
        t as u32
    })
}

/// Lower bound `⌈n² / ex(n,n;P_k)⌉` and the upper coefficient `2/(t²−1)` for
/// `K_{n,n}` and even `k ≥ 4`.
pub fn bipartite_bounds(n: u32, k: u32) -> Result<BoundsReport> {
    if k < 4 || k % 2 == 1 {
        return Err(Error::InvalidQuery(format!("need even k >= 4, got {k}")));
    }
    if n == 0 {
        return Err(Error::InvalidQuery("n must be positive".into()));
    }
    let ex = ex_path_bipartite(n as u64, n as u64, (k / 2 - 1) as u64)?;
    let t = block_parameter(k).expect("k >= 4");
    let (num, den) = (2u64, (t as u64 * t as u64) - 1);
    let g = num_integer::gcd(num, den);
    Ok(BoundsReport {
        mode: Mode::Bipartite,
        n,
        k,
        lower_bound: (n as u64 * n as u64).div_ceil(ex),
        path_extremal: ex as f64,
        block_parameter: Some(t),
        upper_coefficient: Some((num / g, den / g)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(n: u32, lo: u32, hi: u32) -> ExactResult {
        exact_ramsey(Mode::Complete, n, lo, hi, 3, ExactOptions::default()).unwrap()
    }

    #[test]
    fn tiny_values() {
        let r = solve(4, 4, 4);
        assert_eq!((r.value, r.refuted, r.cycles), (3, Some(2), 3));
        assert_eq!(solve(4, 3, 3).value, 3);
        let r = solve(3, 4, 4);
        assert_eq!((r.value, r.cycles), (1, 0));
    }

    #[test]
    fn hand_witness_for_squares() {
        // 12=a 23=b 34=c 41=a 13=b 24=c on vertices 0..4
        let h = build_host(Mode::Complete, 4, 4, 4, None).unwrap();
        let mut c = Colouring::uncoloured(&h);
        for (u, v, col) in [(0, 1, 1), (1, 2, 2), (2, 3, 3), (0, 3, 1), (0, 2, 2), (1, 3, 3)] {
            c.set(u, v, EdgeColour::Fresh(col)).unwrap();
        }
        assert!(verify_lengths(&c, &[4], VerifyMode::Exhaustive, DEFAULT_TUPLE_CAP).unwrap().is_certified());
    }

    #[test]
    fn symmetry_breaking_agrees() {
        let plain = ExactOptions { symmetry_breaking: false, vertex_cap: None };
        for n in 3..=5 {
            for k in 3..=4 {
                let a = exact_ramsey(Mode::Complete, n, k, k, 3, ExactOptions::default()).unwrap().value;
                let b = exact_ramsey(Mode::Complete, n, k, k, 3, plain).unwrap().value;
                assert_eq!(a, b, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn bipartite_square() {
        // K_{2,2} is one 4-cycle
        let r = exact_ramsey(Mode::Bipartite, 2, 4, 4, 3, ExactOptions::default()).unwrap();
        assert_eq!(r.value, 3);
    }

    #[test]
    fn caps_and_ranges() {
        assert!(matches!(solve_err(9, 3, 3), Error::CapExceeded { .. }));
        assert!(matches!(solve_err(5, 4, 3), Error::InvalidQuery(_)));
    }

    fn solve_err(n: u32, lo: u32, hi: u32) -> Error {
        exact_ramsey(Mode::Complete, n, lo, hi, 3, ExactOptions::default()).unwrap_err()
    }

    #[test]
    fn bounds() {
        assert_eq!(lower_bound_complete(10, 4).unwrap().lower_bound, 5);
        assert_eq!(lower_bound_complete(10, 3).unwrap().lower_bound, 9);
        for k in 3..20 {
            assert_eq!(lower_bound_complete(k, k).unwrap().lower_bound, 2);
        }
        assert!(lower_bound_complete(3, 4).is_err());
        assert_eq!(ex_path_bipartite(10, 10, 2).unwrap(), 32);
        assert_eq!(ex_path_bipartite(2, 10, 2).unwrap(), 20);
        assert_eq!(ex_path_bipartite(3, 10, 2).unwrap(), 20);
        assert!(ex_path_bipartite(11, 10, 2).is_err());
        let b = |k| bipartite_bounds(100, k).unwrap();
        assert_eq!((b(4).block_parameter, b(4).upper_coefficient), (Some(2), Some((2, 3))));
        assert_eq!((b(8).block_parameter, b(8).upper_coefficient), (Some(3), Some((1, 4))));
        assert_eq!((b(14).block_parameter, b(14).upper_coefficient), (Some(4), Some((2, 15))));
        // ex(100,100;P_4) = 2·100 − 2
        assert_eq!(b(4).lower_bound, 10_000u64.div_ceil(198));
    }
}
