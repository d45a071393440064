use serde::Serialize;

use super::explicit::ExplicitHypergraph;
use crate::combinatorics::for_each_subset;
use crate::error::{Error, Result};
use crate::par;

/// Default ceiling on the number of conflict sets held in memory.
pub const DEFAULT_CONFLICT_CAP: usize = 20_000_000;

/// Conflicts of one half-length through a fixed anchor edge.
#[derive(Clone, Debug, Default)]
pub struct AnchoredConflicts {
    pub half_length: u32,
    /// Sorted edge-id sets; every set contains the anchor.
    pub sets: Vec<Vec<u32>>,
    /// Cyclic sequences that start at the anchor (both directions counted).
    pub ordered: u64,
}

struct Frame {
    placement: u32,
    colour: u32,
    mask: u128,
}

fn mask_of(vs: &[u32]) -> u128 {
    vs.iter().fold(0u128, |m, &v| m | (1u128 << v))
}

fn check_width(h: &ExplicitHypergraph) -> Result<()> {
    let v = h.host().vertex_count();
    if v > 128 {
        return Err(Error::CapExceeded { what: "host vertex count for conflict search", size: v as u128, cap: 128 });
    }
    Ok(())
}

/// Every alternating `2m`-cycle conflict containing `anchor` whose second colour
/// is one of `partners`. Search branches on the first step.
pub fn conflicts_through(
    h: &ExplicitHypergraph,
    anchor: u32,
    partners: &[u32],
    m: u32,
    cap: usize,
) -> Result<AnchoredConflicts> {
    check_width(h)?;
    let (p0, i) = h.split(anchor);
    let a0 = &h.placements()[p0 as usize];
    let mut starts = Vec::new();
    for &j in partners.iter().filter(|&&j| j != i) {
        for &w in a0 {
            for &q in h.incident(w) {
                starts.push((j, w, q));
            }
        }
    }
    let parts = par::map(&starts, |&(j, w, q)| {
        let mut stack = vec![Frame { placement: p0, colour: i, mask: mask_of(a0) }];
        let mut out = AnchoredConflicts { half_length: m, ..Default::default() };
        let cand = mask_of(&h.placements()[q as usize]);
        if admissible(&stack, j, cand) {
            stack.push(Frame { placement: q, colour: j, mask: cand });
            extend(h, &mut stack, w, [i, j], 2 * m as usize, &mut out, cap);
        }
        out
    });
    let mut all = AnchoredConflicts { half_length: m, ..Default::default() };
    for p in parts {
        all.ordered += p.ordered;
        all.sets.extend(p.sets);
        if all.sets.len() > cap {
            return Err(Error::CapExceeded { what: "conflict sets", size: all.sets.len() as u128, cap: cap as u128 });
        }
    }
    all.sets.sort_unstable();
    all.sets.dedup();
    Ok(all)
}

fn admissible(stack: &[Frame], colour: u32, mask: u128) -> bool {
    stack.iter().all(|f| {
        let common = (f.mask & mask).count_ones();
        if f.colour == colour {
            common == 0
        } else {
            common <= 1
        }
    })
}

fn extend(
    h: &ExplicitHypergraph,
    stack: &mut Vec<Frame>,
    entry: u32,
    colours: [u32; 2],
    len: usize,
    out: &mut AnchoredConflicts,
    cap: usize,
) {
    let top = stack.last().expect("non-empty");
    if stack.len() == len {
        if top.mask & stack[0].mask != 0 {
            out.ordered += 1;
            if out.sets.len() <= cap {
                let mut ids: Vec<u32> = stack.iter().map(|f| h.edge_id(f.placement, f.colour)).collect();
                ids.sort_unstable();
                out.sets.push(ids);
            }
        }
        return;
    }
    let next_colour = colours[stack.len() % 2];
    let top_placement = top.placement;
    for &w in &h.placements()[top_placement as usize] {
        if w == entry {
            continue;
        }
        for &q in h.incident(w) {
            let mask = mask_of(&h.placements()[q as usize]);
            if admissible(stack, next_colour, mask) {
                stack.push(Frame { placement: q, colour: next_colour, mask });
                extend(h, stack, w, colours, len, out, cap);
                stack.pop();
            }
        }
    }
}

/// All conflicts of half-length `m` in `H`, as sorted edge-id sets.
pub fn enumerate_conflicts(h: &ExplicitHypergraph, m: u32, cap: usize) -> Result<Vec<Vec<u32>>> {
    check_width(h)?;
    let colours: Vec<u32> = (1..=h.palette()).collect();
    let edges = h.edge_count();
    let parts: Vec<Result<Vec<Vec<u32>>>> = par::map_range(edges, |e| {
        let found = conflicts_through_seq(h, e as u32, &colours, m, cap)?;
        Ok(found.into_iter().filter(|s| s[0] == e as u32).collect())
    });
    let mut all = Vec::new();
    for p in parts {
        all.extend(p?);
        if all.len() > cap {
            return Err(Error::CapExceeded { what: "conflict sets", size: all.len() as u128, cap: cap as u128 });
        }
    }
    all.sort_unstable();
    Ok(all)
}

fn conflicts_through_seq(
    h: &ExplicitHypergraph,
    anchor: u32,
    partners: &[u32],
    m: u32,
    cap: usize,
) -> Result<Vec<Vec<u32>>> {
    let (p0, i) = h.split(anchor);
    let a0 = &h.placements()[p0 as usize];
    let mut out = AnchoredConflicts { half_length: m, ..Default::default() };
    let mut stack = vec![Frame { placement: p0, colour: i, mask: mask_of(a0) }];
    for &j in partners.iter().filter(|&&j| j != i) {
        for &w in a0 {
            for &q in h.incident(w) {
                let cand = mask_of(&h.placements()[q as usize]);
                if admissible(&stack, j, cand) {
                    stack.push(Frame { placement: q, colour: j, mask: cand });
                    extend(h, &mut stack, w, [i, j], 2 * m as usize, &mut out, cap);
                    stack.pop();
                }
            }
        }
        if out.sets.len() > cap {
            return Err(Error::CapExceeded { what: "conflict sets", size: out.sets.len() as u128, cap: cap as u128 });
        }
    }
    out.sets.sort_unstable();
    out.sets.dedup();
    Ok(out.sets)
}

/// Exact degree and codegree statistics of `C^(2m)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConflictStats {
    pub half_length: u32,
    /// `Δ(C^(2m))`: conflicts through any one edge (all are equal).
    pub degree: u128,
    /// Cyclic sequences starting at a fixed edge.
    pub ordered_degree: u128,
    /// `|C^(2m)|` as unordered sets.
    pub total_sets: u128,
    /// Ordered cyclic sequences in total.
    pub total_ordered: u128,
    /// `(j, Δ_j(C^(2m)))` for `2 ≤ j < 2m`.
    pub codegrees: Vec<(u32, u128)>,
    /// Every set found had exactly `2m` members.
    pub sizes_ok: bool,
}

/// Statistics of `C^(2m)` from the conflicts through one anchor edge.
///
/// Vertex permutations, colour permutations and (bipartite) the side swap act
/// transitively on `E(H)` and preserve the conflict system, so the anchor's
/// degree is every edge's degree and each `j`-set can be moved to contain it.
/// The second colour is fixed to one value; colour permutations fixing the
/// anchor's colour recover the rest.
pub fn conflict_stats(h: &ExplicitHypergraph, m: u32, cap: usize) -> Result<ConflictStats> {
    let p = h.palette() as u128;
    let len = 2 * m as usize;
    if h.edge_count() == 0 || p < 2 {
        return Ok(ConflictStats {
            half_length: m,
            degree: 0,
            ordered_degree: 0,
            total_sets: 0,
            total_ordered: 0,
            codegrees: (2..len as u32).map(|j| (j, 0)).collect(),
            sizes_ok: true,
        });
    }
    let anchor = h.edge_id(0, 1);
    let found = conflicts_through(h, anchor, &[2], m, cap)?;
    let sizes_ok = found.sets.iter().all(|s| s.len() == len && s.contains(&anchor));
    let degree = found.sets.len() as u128 * (p - 1);
    let ordered_degree = found.ordered as u128 * (p - 1);
    let edges = h.edge_count() as u128;
    let mut codegrees = Vec::new();
    for j in 2..len {
        let (mut mixed, mut single) = (Vec::new(), Vec::new());
        for s in &found.sets {
            let rest: Vec<u32> = s.iter().copied().filter(|&e| e != anchor).collect();
            for_each_subset(&rest, j - 1, |u| {
                let key = u.to_vec();
                if u.iter().all(|&e| h.split(e).1 == 1) {
                    single.push(key);
                } else {
                    mixed.push(key);
                }
            });
        }
        let best = max_multiplicity(mixed).max(max_multiplicity(single) * (p - 1));
        codegrees.push((j as u32, best));
    }
    Ok(ConflictStats {
        half_length: m,
        degree,
        ordered_degree,
        total_sets: edges * degree / len as u128,
        total_ordered: edges * ordered_degree,
        codegrees,
        sizes_ok,
    })
}

fn max_multiplicity(mut keys: Vec<Vec<u32>>) -> u128 {
    keys.sort_unstable();
    let mut best = 0u128;
    let mut run = 0u128;
    for i in 0..keys.len() {
        run = if i > 0 && keys[i] == keys[i - 1] { run + 1 } else { 1 };
        best = best.max(run);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperaudit::materialize;
    use crate::model::{build_host, Mode};

    #[test]
    fn single_colour_has_no_conflicts() {
        let host = build_host(Mode::Complete, 5, 5, 6, None).unwrap();
        assert_eq!(host.palette_size(), 1);
        let h = materialize(&host).unwrap();
        let s = conflict_stats(&h, 2, DEFAULT_CONFLICT_CAP).unwrap();
        assert_eq!(s.degree, 0);
        assert!(enumerate_conflicts(&h, 2, DEFAULT_CONFLICT_CAP).unwrap().is_empty());
    }

    #[test]
    fn k3_four_cycles_match_hand_count() {
        // Blocks are edges; a conflict of half-length 2 is a 4-cycle of K_n
        // coloured i, j, i, j: 3 four-cycles per 4-set, 2 colourings per
        // colour pair, C(P, 2) colour pairs.
        let host = build_host(Mode::Complete, 5, 3, 4, None).unwrap();
        let h = materialize(&host).unwrap();
        let all = enumerate_conflicts(&h, 2, DEFAULT_CONFLICT_CAP).unwrap();
        let p = host.palette_size() as usize;
        assert_eq!(all.len(), 5 * 3 * 2 * p * (p - 1) / 2);
        let s = conflict_stats(&h, 2, DEFAULT_CONFLICT_CAP).unwrap();
        assert_eq!(s.total_sets, all.len() as u128);
        assert!(s.sizes_ok);
    }

    #[test]
    fn degrees_are_uniform_on_small_hosts() {
        for host in
            [build_host(Mode::Complete, 6, 3, 6, None).unwrap(), build_host(Mode::Complete, 7, 4, 4, None).unwrap()]
        {
            let h = materialize(&host).unwrap();
            for m in 2..=host.max_half_length() {
                let all = enumerate_conflicts(&h, m, DEFAULT_CONFLICT_CAP).unwrap();
                let mut deg = vec![0u128; h.edge_count()];
                for s in &all {
                    for &e in s {
                        deg[e as usize] += 1;
                    }
                }
                let st = conflict_stats(&h, m, DEFAULT_CONFLICT_CAP).unwrap();
                assert!(deg.iter().all(|&d| d == st.degree), "{host} m={m}");
                assert_eq!(st.total_sets, all.len() as u128);
            }
        }
    }
}
