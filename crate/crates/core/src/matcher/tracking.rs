use serde::Serialize;

use crate::combinatorics::binomial;
use crate::error::Result;
use crate::hyperaudit::{
    chain_count, chain_leading_term, crossed_chain_count, crossed_chain_leading_term, degree_formula, ChainQuery,
    VertexKind,
};
use crate::model::{graph_of_matching, BlockMatching, BlockShape, HostSpec, Mode};

/// Chain statistics of one query: counts inside the matching against the
/// `d^-j`-scaled hypergraph totals.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainTrack {
    pub query: ChainQuery,
    pub chains_in_matching: u128,
    pub crossed_in_matching: u128,
    pub chains_total: u128,
    pub crossed_total: u128,
    /// `d^-m · chains_total`.
    pub chains_predicted: f64,
    /// `d^-(m+1) · crossed_total`.
    pub crossed_predicted: f64,
    /// `d^-m` times the leading-term approximation.
    pub chains_predicted_leading: f64,
    pub crossed_predicted_leading: f64,
    pub chains_deviation: f64,
    pub crossed_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestFunctionReport {
    /// `w_v(M)` per host vertex: edges at `v` covered by blocks.
    pub vertex_weights: Vec<u64>,
    /// `d^-1 · w_v(H)`, the same for every vertex.
    pub vertex_weight_predicted: f64,
    pub chains: Vec<ChainTrack>,
}

fn rel(measured: u128, predicted: f64) -> f64 {
    if predicted == 0.0 {
        if measured == 0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (measured as f64 - predicted) / predicted
    }
}

/// Test-function values of `m` for the vertex weights and the given chain queries.
pub fn track_tests(m: &BlockMatching, queries: &[ChainQuery]) -> Result<TestFunctionReport> {
    let host = m.host();
    let mut vertex_weights = vec![0u64; host.vertex_count() as usize];
    for b in m.blocks() {
        for (u, v) in b.edges(host) {
            vertex_weights[u as usize] += 1;
            vertex_weights[v as usize] += 1;
        }
    }
    let d = host.d_f64();
    let kind = match host.mode() {
        Mode::Complete => VertexKind::PairEdge,
        Mode::Bipartite => VertexKind::CrossPair,
    };
    let wv_h = degree_formula(host, kind)? as f64 * host.host_degree() as f64;
    let mut chains = Vec::new();
    for q in queries {
        let (pm, tm) = matching_chain_counts(m, q)?;
        let pt = chain_count(host, q)?;
        let tt = crossed_chain_count(host, q)?;
        let scale_p = d.powi(-(q.m as i32));
        let scale_t = d.powi(-(q.m as i32 + 1));
        let chains_predicted = pt as f64 * scale_p;
        let crossed_predicted = tt as f64 * scale_t;
        chains.push(ChainTrack {
            query: *q,
            chains_in_matching: pm,
            crossed_in_matching: tm,
            chains_total: pt,
            crossed_total: tt,
            chains_predicted,
            crossed_predicted,
            chains_predicted_leading: chain_leading_term(host, q)? * scale_p,
            crossed_predicted_leading: crossed_chain_leading_term(host, q)? * scale_t,
            chains_deviation: rel(pm, chains_predicted),
            crossed_deviation: rel(tm, crossed_predicted),
        });
    }
    debug_assert!({
        let g = graph_of_matching(m);
        (0..host.vertex_count()).all(|v| {
            host.neighbours(v).filter(|&w| !matches!(g.get(v, w), Some(crate::model::EdgeColour::Uncoloured))).count()
                as u64
                == vertex_weights[v as usize]
        })
    });
    Ok(TestFunctionReport { vertex_weights, vertex_weight_predicted: wv_h / d, chains })
}

fn side_sizes(host: &HostSpec, vs: &[u32]) -> (u32, u32) {
    let x = vs.iter().filter(|&&v| v < host.n()).count() as u32;
    match host.mode() {
        Mode::Complete => (vs.len() as u32, 0),
        Mode::Bipartite => (x, vs.len() as u32 - x),
    }
}

fn pair(k: u32, f: bool) -> u32 {
    let x = k + f as u32;
    x * (x - 1) / 2
}

/// Numbers of chains and crossed chains of `q` whose blocks all lie in `m`.
pub fn matching_chain_counts(m: &BlockMatching, q: &ChainQuery) -> Result<(u128, u128)> {
    let host = m.host();
    q.validate(host)?;
    let bip = matches!(host.shape(), BlockShape::Biclique { .. });
    let k = host.k();
    let mut by_colour: Vec<Vec<usize>> = vec![Vec::new(); host.palette_size() as usize + 1];
    for (i, b) in m.blocks().iter().enumerate() {
        by_colour[b.colour as usize].push(i);
    }
    let half = q.m as u64;
    let (mut chains, mut crossed) = (0u128, 0u128);
    for i in 1..=host.palette_size() {
        let (Some(a1), Some(am)) = (m.block_at(i, q.u), m.block_at(i, q.v)) else { continue };
        if a1 == am {
            continue;
        }
        let (first, last) = (&m.blocks()[a1], &m.blocks()[am]);
        if bip
            && (side_sizes(host, &first.vertices).0 != pair(k, q.a)
                || side_sizes(host, &last.vertices).1 != pair(k, q.b))
        {
            continue;
        }
        let r = by_colour[i as usize].len() as u64 - 2;
        chains += binomial(r, half - 2);
        // crossing blocks: another colour, meeting the u-block once (in Y when bipartite)
        let mut seen = Vec::new();
        for &w in &first.vertices {
            if w == q.u || (bip && w < host.n()) {
                continue;
            }
            for j in 1..=host.palette_size() {
                if j == i {
                    continue;
                }
                if let Some(bi) = m.block_at(j, w) {
                    seen.push(bi);
                }
            }
        }
        seen.sort_unstable();
        seen.dedup();
        let eligible_size = pair(k, q.c);
        for bi in seen {
            let b = &m.blocks()[bi];
            if b.contains(q.u) || b.contains(q.v) {
                continue;
            }
            // every B vertex lands in at most one colour-i block; count hits per block
            let mut hits: Vec<(usize, u32)> =
                b.vertices.iter().filter_map(|&w| m.block_at(i, w).map(|t| (t, w))).collect();
            hits.sort_unstable();
            if hits.windows(2).any(|p| p[0].0 == p[1].0) {
                continue;
            }
            let meets_second = |t: usize, w: u32| {
                !bip || (w < host.n() && side_sizes(host, &m.blocks()[t].vertices).0 == eligible_size)
            };
            if half == 2 {
                if hits.iter().any(|&(t, w)| t == am && meets_second(t, w)) {
                    crossed += 1;
                }
            } else {
                let eligible = hits.iter().filter(|&&(t, w)| t != a1 && t != am && meets_second(t, w)).count() as u64;
                crossed += binomial(r, half - 2) - binomial(r - eligible, half - 2);
            }
        }
    }
    Ok((chains, crossed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_host, Block};

    #[test]
    fn empty_matching_counts_nothing() {
        let h = build_host(Mode::Complete, 10, 3, 6, None).unwrap();
        let m = BlockMatching::new(&h);
        let r = track_tests(&m, &[ChainQuery::new(0, 1, 2), ChainQuery::new(0, 1, 3)]).unwrap();
        assert!(r.vertex_weights.iter().all(|&w| w == 0));
        assert!(r.chains.iter().all(|c| c.chains_in_matching == 0 && c.crossed_in_matching == 0));
    }

    #[test]
    fn single_chain() {
        let h = build_host(Mode::Complete, 8, 3, 4, None).unwrap();
        let m = BlockMatching::from_blocks(
            &h,
            [Block::new(1, vec![0, 2]), Block::new(1, vec![1, 3]), Block::new(2, vec![2, 3])],
        )
        .unwrap();
        assert_eq!(matching_chain_counts(&m, &ChainQuery::new(0, 1, 2)).unwrap(), (1, 1));
        let r = track_tests(&m, &[]).unwrap();
        assert_eq!(r.vertex_weights[2], 2);
        assert_eq!(r.vertex_weights[4], 0);
    }
}
