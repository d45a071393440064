//! Acceptance runner: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Each criterion also has a wall-clock budget.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tricolour::exact::{bipartite_bounds, ex_path_bipartite, exact_ramsey, lower_bound_complete, ExactOptions};
use tricolour::hyperaudit::{
    chain_count, chain_leading_term, conflict_stats, conflicts_through, crossed_chain_count, degree_formula,
    enumerate_conflicts, materialize, ChainQuery, VertexKind, DEFAULT_CONFLICT_CAP,
};
use tricolour::lll::{detect_events, init_fresh_with_palette, lll_weights, moser_tardos, EventKind, EventWitness};
use tricolour::matcher::{greedy_match, MatcherParams};
use tricolour::model::{CertificateVerdict, Format, FreshPalette, HostParams};
use tricolour::pipeline::{run_pipeline, PipelineConfig, PipelineStatus};
use tricolour::verify::{check_lemma_properties, verify_colouring, verify_lengths, PropertyOptions, VerifyMode};
use tricolour::{build_host, graph_of_matching, leftover_graph, BlockMatching, Certificate, Colouring, HostSpec, Mode};

type Outcome = Result<String, String>;

/// Name, check and wall-clock budget in seconds.
type Criterion = (&'static str, fn() -> Outcome, u64);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn degree_audits() -> Outcome {
    let mut hosts = Vec::new();
    for n in 8..=14 {
        for k in [3, 4] {
            hosts.push(build_host(Mode::Complete, n, k, 4, None).unwrap());
        }
    }
    for n in 8..=12 {
        hosts.push(build_host(Mode::Bipartite, n, 2, 4, None).unwrap());
    }
    let mut vertices = 0usize;
    for host in &hosts {
        let h = materialize(host).map_err(|e| e.to_string())?;
        for x in 0..h.vertex_count() as u32 {
            let want = degree_formula(host, h.kind_of(x)).map_err(|e| e.to_string())?;
            ensure(h.degree(x) as u128 == want, || {
                format!(
                    "{:?} n={} k={}: vertex {x} has degree {} not {want}",
                    host.mode(),
                    host.n(),
                    host.k(),
                    h.degree(x)
                )
            })?;
        }
        for (x, d) in brute_degrees(host) {
            let kind = match x {
                HVertex::At(..) => VertexKind::VertexColour,
                HVertex::Pair(a, b) if host.mode() == Mode::Bipartite => {
                    if (a < host.n()) == (b < host.n()) {
                        VertexKind::SameSidePair
                    } else {
                        VertexKind::CrossPair
                    }
                }
                HVertex::Pair(..) => VertexKind::PairEdge,
            };
            ensure(d as u128 == degree_formula(host, kind).unwrap(), || format!("hand count differs at {x:?}"))?;
        }
        vertices += h.vertex_count();
    }
    Ok(format!("{} hosts, {vertices} vertices", hosts.len()))
}

fn conflict_audits() -> Outcome {
    let mut checked = 0;
    for k in [3u32, 4] {
        for n in k + 1..=10 {
            let host = build_host(Mode::Complete, n, k, 6, None).unwrap();
            let h = materialize(&host).map_err(|e| e.to_string())?;
            let codeg = brute_codegree(&host);
            ensure(h.max_codegree() == codeg, || format!("n={n} k={k}: codegree {} vs {codeg}", h.max_codegree()))?;
            let anchor: Vec<u32> = (n - k + 1..n).collect();
            let partners: Vec<u32> = (1..=host.palette_size()).collect();
            for m in host.alternating_cycle_range() {
                let s = conflict_stats(&h, m, DEFAULT_CONFLICT_CAP).map_err(|e| e.to_string())?;
                let (deg, codegs) = brute_conflict_stats(&host, &anchor, host.palette_size(), m as usize);
                ensure(s.degree == deg && s.codegrees == codegs, || {
                    format!("n={n} k={k} m={m}: {:?} vs {:?}", (s.degree, &s.codegrees), (deg, codegs))
                })?;
                ensure(s.sizes_ok, || format!("n={n} k={k} m={m}: bad conflict size"))?;
                let e = h.edge_id(h.placements().len() as u32 - 1, 1);
                let through =
                    conflicts_through(&h, e, &partners, m, DEFAULT_CONFLICT_CAP).map_err(|e| e.to_string())?;
                ensure(through.sets.iter().all(|c| c.len() == 2 * m as usize), || format!("n={n} k={k}: odd set"))?;
                if n <= 7 {
                    let all = enumerate_conflicts(&h, m, DEFAULT_CONFLICT_CAP).map_err(|e| e.to_string())?;
                    ensure(all.iter().all(|c| c.len() == 2 * m as usize && (4..=6).contains(&c.len())), || {
                        format!("n={n} k={k}: conflict size out of range")
                    })?;
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (host, half-length) pairs"))
}

fn chain_hosts() -> Vec<HostSpec> {
    let mut out = Vec::new();
    for n in 4..=16 {
        out.push(build_host(Mode::Complete, n, 3, 6, None).unwrap());
    }
    for n in 5..=12 {
        out.push(build_host(Mode::Complete, n, 4, 6, None).unwrap());
    }
    for n in 6..=11 {
        out.push(build_host(Mode::Complete, n, 5, 6, None).unwrap());
    }
    for n in 4..=7 {
        out.push(build_host(Mode::Bipartite, n, 2, 6, None).unwrap());
    }
    out.retain(|h| h.hyperedge_count() <= 100_000);
    out
}

fn counting_formulas() -> Outcome {
    let hosts = chain_hosts();
    let mut queries = 0;
    for host in &hosts {
        let pairs = match host.mode() {
            Mode::Complete => vec![(0, 1), (host.n() - 1, 2)],
            Mode::Bipartite => vec![(0, host.n()), (host.n() - 1, host.n() + 1)],
        };
        let flag_sets = if host.mode() == Mode::Bipartite { 8 } else { 1 };
        for (u, v) in pairs {
            for m in 2..=host.max_half_length() {
                for f in 0..flag_sets {
                    let q = ChainQuery::new(u, v, m).with_flags(f & 1 != 0, f & 2 != 0, f & 4 != 0);
                    let want = brute_chain_counts(host, &q);
                    let got = (chain_count(host, &q).unwrap(), crossed_chain_count(host, &q).unwrap());
                    ensure(got == want, || {
                        format!("{:?} n={} k={} {q:?}: {got:?} vs {want:?}", host.mode(), host.n(), host.k())
                    })?;
                    queries += 1;
                }
            }
        }
    }
    let mut ratios = Vec::new();
    for n in [10u32, 20, 40, 60] {
        let host = build_host(Mode::Complete, n, 3, 4, None).unwrap();
        let q = ChainQuery::new(0, 1, 2);
        let r = chain_count(&host, &q).unwrap() as f64 / chain_leading_term(&host, &q).unwrap();
        let nf = n as f64;
        let closed = (nf - 2.0) * (nf - 3.0) / (nf * nf);
        ensure((r - closed).abs() < 1e-12, || format!("n={n}: ratio {r} vs {closed}"))?;
        ratios.push(r);
    }
    ensure(ratios.windows(2).all(|w| w[0] < w[1]), || format!("ratios not increasing: {ratios:?}"))?;
    let last = *ratios.last().unwrap();
    ensure((last - 1.0).abs() <= 0.1 && (last - 0.918).abs() < 5e-4, || format!("ratio at 60 is {last}"))?;
    Ok(format!("{} hosts, {queries} queries, ratio(60) = {last:.4}", hosts.len()))
}

fn conflict_free(m: &BlockMatching) -> bool {
    (0..m.len()).all(|i| !closes_cycle(&m.without(i), &m.blocks()[i]))
}

fn matching_soundness() -> Outcome {
    let host = build_host(Mode::Complete, 30, 3, 4, None).unwrap();
    let mut coverage = 0.0;
    for seed in 0..50 {
        let (m, _, stats) = greedy_match(&host, &MatcherParams::new(seed, 20_000)).map_err(|e| e.to_string())?;
        ensure(conflict_free(&m), || format!("seed {seed}: conflict found by re-check"))?;
        let rep = check_lemma_properties(m.blocks(), &graph_of_matching(&m), PropertyOptions::new(0.1))
            .map_err(|e| e.to_string())?;
        ensure(rep.disjoint.pass && rep.girth.pass, || format!("seed {seed}: property (I)/(II) failed"))?;
        coverage += stats.coverage;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let small = [(8, 3, 4), (9, 3, 6), (10, 4, 6), (12, 4, 4)];
    let mut split = [0usize; 2];
    for i in 0..200 {
        let (n, k, ell) = small[i % small.len()];
        let host = build_host(Mode::Complete, n, k, ell, None).unwrap();
        let m = random_matching(&host, rng.gen_range(5..50), &mut rng);
        let rep = check_lemma_properties(m.blocks(), &graph_of_matching(&m), PropertyOptions::new(0.1))
            .map_err(|e| e.to_string())?;
        let free = conflict_free(&m);
        ensure(rep.girth.pass == free, || format!("matching {i}: girth {} vs conflict-free {free}", rep.girth.pass))?;
        split[free as usize] += 1;
    }
    ensure(split[0] > 0 && split[1] > 0, || format!("only one outcome seen: {split:?}"))?;
    Ok(format!("mean coverage {:.3}; 200 small matchings, {} conflict-free", coverage / 50.0, split[1]))
}

fn event_sets(c: &Colouring, m: &BlockMatching) -> EventSets {
    let mut out = EventSets::default();
    for ev in detect_events(c, m).unwrap() {
        match (ev.kind, ev.witness) {
            (EventKind::A, _) => {
                out.a.insert(ev.scope);
            }
            (EventKind::B, EventWitness::B { cycle, .. }) => {
                out.b.insert((cycle, ev.scope));
            }
            (EventKind::C, EventWitness::C { cycle, .. }) => {
                out.c.insert((cycle, ev.scope));
            }
            (kind, w) => panic!("{kind} event with witness {w:?}"),
        }
    }
    out
}

fn event_detection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let hosts = [
        (Mode::Complete, 8, 3, 6),
        (Mode::Complete, 12, 3, 4),
        (Mode::Complete, 10, 4, 6),
        (Mode::Complete, 12, 5, 6),
        (Mode::Bipartite, 6, 2, 6),
    ];
    let mut seen = [0usize; 3];
    for i in 0..100 {
        let (mode, n, k, ell) = hosts[i % hosts.len()];
        let host = build_host(mode, n, k, ell, None).unwrap();
        let m = random_matching(&host, rng.gen_range(5..60), &mut rng);
        let c = random_colouring(&m, rng.gen_range(2..6), &mut rng);
        let (got, want) = (event_sets(&c, &m), brute_events(&c, &m));
        ensure(got == want, || format!("colouring {i} ({mode:?} n={n} k={k}): detector disagrees"))?;
        seen[0] += want.a.len();
        seen[1] += want.b.len();
        seen[2] += want.c.len();
    }
    ensure(seen.iter().all(|&s| s > 0), || format!("an event kind never occurred: {seen:?}"))?;
    let host = build_host(Mode::Complete, 30, 3, 4, None).unwrap();
    let mut rounds = 0;
    for seed in 0..100u64 {
        let (m, _, _) = greedy_match(&host, &MatcherParams::new(seed, 2000)).map_err(|e| e.to_string())?;
        let base = graph_of_matching(&m);
        let r = (2 * leftover_graph(&base).max_degree).max(2);
        let alpha = 1.0 - (r as f64).ln() / (host.n() as f64).ln();
        let fresh =
            init_fresh_with_palette(&base, FreshPalette { alpha, size: r }, &mut ChaCha8Rng::seed_from_u64(seed));
        let (out, res) = moser_tardos(&fresh, &m, seed, 100_000).map_err(|e| e.to_string())?;
        ensure(res.certified, || format!("seed {seed}: resampling capped"))?;
        ensure(detect_events(&out, &m).unwrap().is_empty(), || format!("seed {seed}: detector re-scan not empty"))?;
        ensure(brute_events(&out, &m) == EventSets::default(), || format!("seed {seed}: brute re-scan not empty"))?;
        rounds += res.rounds;
    }
    Ok(format!("events seen {seen:?}; 100/100 certified, {rounds} rounds in total"))
}

fn cycle_sets(host: &HostSpec, lengths: &[u32]) -> Vec<Vec<usize>> {
    let mut seen = BTreeSet::new();
    for &len in lengths {
        for_each_closed_walk(host, len as usize, &mut |w| {
            seen.insert(canonical(w));
        });
    }
    seen.into_iter()
        .map(|w| (0..w.len()).map(|t| host.edge_index(w[t], w[(t + 1) % w.len()]).unwrap()).collect())
        .collect()
}

fn exact_values() -> Outcome {
    let opts = ExactOptions::default();
    for (n, k) in [(4, 4), (4, 3)] {
        let r = exact_ramsey(Mode::Complete, n, k, k, 3, opts).map_err(|e| e.to_string())?;
        ensure(r.value == 3, || format!("exact({n},{k},{k}) = {}", r.value))?;
        let host = r.host().unwrap();
        for cy in cycle_sets(&host, &[k]) {
            let cols: BTreeSet<u32> = cy.iter().map(|&e| r.witness[e]).collect();
            ensure(cols.len() >= 3, || format!("witness for ({n},{k}) has a cycle with {cols:?}"))?;
        }
    }
    let mut table = Vec::new();
    for k in [3u32, 4] {
        for n in k..=7 {
            let r = exact_ramsey(Mode::Complete, n, k, k, 3, opts).map_err(|e| e.to_string())?;
            let lb = lower_bound_complete(n, k).unwrap().lower_bound;
            ensure(r.value as u64 >= lb, || format!("exact({n},{k},{k}) = {} below {lb}", r.value))?;
            let v = verify_lengths(&r.colouring().unwrap(), &r.lengths, VerifyMode::Exhaustive, u128::MAX)
                .map_err(|e| e.to_string())?;
            ensure(v.is_certified(), || format!("witness ({n},{k}) fails verification"))?;
            table.push(format!("{n}/{k}:{}", r.value));
        }
    }
    Ok(table.join(" "))
}

fn bound_calculators() -> Outcome {
    let lb = lower_bound_complete(10, 4).unwrap().lower_bound;
    ensure(lb == 5, || format!("lower bound {lb}"))?;
    let ex = ex_path_bipartite(10, 10, 2).unwrap();
    ensure(ex == 32, || format!("ex {ex}"))?;
    for (k, t, coef) in [(4, 2, (2, 3)), (8, 3, (1, 4))] {
        let b = bipartite_bounds(12, k).unwrap();
        ensure(b.block_parameter == Some(t) && b.upper_coefficient == Some(coef), || format!("k={k}: {b:?}"))?;
    }
    Ok("5, 32, 2/3, 1/4".into())
}

fn lll_feasibility() -> Outcome {
    let delta = 0.1;
    let mut cases = 0;
    for k in 3..=12 {
        for ell in k..=12 {
            let w = lll_weights(Mode::Complete, 10_000, delta / 5.0, delta, k, ell).map_err(|e| e.to_string())?;
            let bad: Vec<&str> = w.conditions.iter().filter(|c| !c.holds).map(|c| c.inequality.as_str()).collect();
            ensure(bad.is_empty(), || format!("k={k} ell={ell}: {bad:?}"))?;
            cases += 1;
        }
    }
    let w = lll_weights(Mode::Complete, 10_000, delta, delta, 3, 4).map_err(|e| e.to_string())?;
    let c2 = w.conditions.iter().find(|c| c.kind == EventKind::C && c.half_length == Some(2));
    ensure(c2.is_some_and(|c| !c.holds), || "m=2 C-condition not reported infeasible at alpha = delta".into())?;
    Ok(format!("{cases} (k, ell) pairs feasible; alpha = delta infeasible"))
}

fn end_to_end() -> Outcome {
    let params = HostParams { mode: Mode::Complete, n: 60, k: 3, ell: 4, eps: None };
    let limit = 60 + 22;
    let mut notes = Vec::new();
    let mut certified = Vec::new();
    for seed in 1..=10u64 {
        let mut cfg = PipelineConfig::new(params, seed);
        cfg.alpha = Some(0.25);
        cfg.restarts = 10;
        let out = run_pipeline(&cfg).map_err(|e| e.to_string())?;
        let again = run_pipeline(&cfg).map_err(|e| e.to_string())?;
        ensure(again.certificate == out.certificate, || format!("seed {seed}: not reproducible"))?;
        let text = out.certificate.encode(Format::Text).map_err(|e| e.to_string())?;
        let back = Certificate::decode(text.as_bytes()).map_err(|e| e.to_string())?;
        let c = back.colouring().map_err(|e| e.to_string())?;
        let verdict = verify_colouring(&c, VerifyMode::Exhaustive).map_err(|e| e.to_string())?;
        ensure(
            CertificateVerdict::from(&verdict) == out.certificate.verdict || out.status != PipelineStatus::Certified,
            || format!("seed {seed}: verdict does not re-check"),
        )?;
        if let CertificateVerdict::Violations { cycles, .. } = &out.certificate.verdict {
            let genuine = brute_violations(&c, &[3, 4]);
            ensure(cycles.iter().all(|cy| genuine.contains(cy)), || {
                format!("seed {seed}: reported violation is not genuine")
            })?;
        }
        if out.status == PipelineStatus::Certified && verdict.is_certified() && back.total_colours() <= limit {
            certified.push(seed);
        }
        notes.push(format!("{seed}:{}", out.attempts.len()));
    }
    ensure(!certified.is_empty(), || format!("no seed certified within {limit} colours; attempts {notes:?}"))?;
    Ok(format!("certified seeds {certified:?}; attempts used {}", notes.join(" ")))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("degree audits", degree_audits, 60),
        ("codegree and conflict audits", conflict_audits, 300),
        ("chain counting formulas", counting_formulas, 120),
        ("matching soundness", matching_soundness, 300),
        ("event detection and resampling", event_detection, 300),
        ("exact values", exact_values, 600),
        ("bound calculators", bound_calculators, 5),
        ("local lemma feasibility", lll_feasibility, 5),
        ("end-to-end pipeline", end_to_end, 1200),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let took = start.elapsed();
        let res = res.and_then(|s| {
            if took > Duration::from_secs(*budget) {
                Err(format!("{s}; over budget of {budget}s"))
            } else {
                Ok(s)
            }
        });
        match res {
            Ok(s) => println!("PASS criterion {} ({name}): {s} [{:.1}s]", i + 1, took.as_secs_f64()),
            Err(s) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {s} [{:.1}s]", i + 1, took.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
