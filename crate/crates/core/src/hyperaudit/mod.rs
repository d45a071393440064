//! The block hypergraph `H` and exact audits of its degree, codegree, conflict
//! and chain-counting identities.
//!
//! Audits need the explicit hypergraph and therefore small hosts. A failed
//! inequality is a legitimate finding at small `n`; the report records it.

mod chains;
mod conflicts;
mod explicit;

use std::fmt;

use serde::Serialize;

pub use chains::{chain_count, chain_leading_term, crossed_chain_count, crossed_chain_leading_term, ChainQuery};
pub use conflicts::{
    conflict_stats, conflicts_through, enumerate_conflicts, AnchoredConflicts, ConflictStats, DEFAULT_CONFLICT_CAP,
};
pub use explicit::{
    degree_formula, materialize, materialize_with_cap, placements, ExplicitHypergraph, VertexKind, DEFAULT_EDGE_CAP,
};

use crate::error::Result;
use crate::model::{BlockShape, HostParams, HostSpec};

/// One audited inequality or identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditEntry {
    pub quantity: String,
    pub measured: u128,
    /// `"<="`, `">="` or `"=="`.
    pub relation: &'static str,
    pub bound: f64,
    pub pass: bool,
}

impl AuditEntry {
    fn new(quantity: impl Into<String>, measured: u128, relation: &'static str, bound: f64) -> Self {
        let m = measured as f64;
        let pass = match relation {
            "<=" => m <= bound,
            ">=" => m >= bound,
            _ => m == bound,
        };
        AuditEntry { quantity: quantity.into(), measured, relation, bound, pass }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub host: HostParams,
    pub d: f64,
    pub entries: Vec<AuditEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub conflicts: Vec<ConflictStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub advisory: Option<String>,
}

impl AuditReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn entry(&self, quantity: &str) -> Option<&AuditEntry> {
        self.entries.iter().find(|e| e.quantity == quantity)
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = &self.host;
        writeln!(f, "{} n={} k={} ell={} d={:.6}", h.mode, h.n, h.k, h.ell, self.d)?;
        let w = self.entries.iter().map(|e| e.quantity.len()).max().unwrap_or(0);
        for e in &self.entries {
            writeln!(
                f,
                "{:<w$}  {:>14} {} {:<16.6}  {}",
                e.quantity,
                e.measured,
                e.relation,
                e.bound,
                if e.pass { "PASS" } else { "FAIL" }
            )?;
        }
        for c in &self.conflicts {
            writeln!(
                f,
                "m={} sets={} ordered={} degree={} ordered-degree={}",
                c.half_length, c.total_sets, c.total_ordered, c.degree, c.ordered_degree
            )?;
        }
        if let Some(a) = &self.advisory {
            writeln!(f, "note: {a}")?;
        }
        Ok(())
    }
}

/// Measured `δ(H)`, `Δ(H)` and `Δ₂(H)` against `d(1 − d^−ε)`, `d` and `d^(1−ε)`,
/// plus per-kind identities with the closed-form degrees.
pub fn audit_regularity(host: &HostSpec) -> Result<AuditReport> {
    let h = materialize(host)?;
    Ok(regularity_of(&h))
}

pub fn regularity_of(h: &ExplicitHypergraph) -> AuditReport {
    let host = h.host();
    let d = host.d_f64();
    let eps = host.eps();
    let mut entries = Vec::new();
    let summary = h.degree_summary();
    for &(kind, lo, hi, _) in &summary {
        let f = degree_formula(host, kind).map(|x| x as f64).unwrap_or(f64::NAN);
        entries.push(AuditEntry::new(format!("min degree[{}]", kind.name()), lo as u128, "==", f));
        entries.push(AuditEntry::new(format!("max degree[{}]", kind.name()), hi as u128, "==", f));
    }
    let min = summary.iter().map(|s| s.1).min().unwrap_or(0);
    let max = summary.iter().map(|s| s.2).max().unwrap_or(0);
    entries.push(AuditEntry::new("delta(H)", min as u128, ">=", d * (1.0 - d.powf(-eps))));
    entries.push(AuditEntry::new("Delta(H)", max as u128, "<=", d));
    entries.push(AuditEntry::new("Delta2(H)", h.max_codegree() as u128, "<=", d.powf(1.0 - eps)));
    AuditReport { host: host.params(), d, entries, conflicts: Vec::new(), advisory: Some(min_n_advisory(host)) }
}

/// Conflict-system audit: sizes, `Δ(C^(2m))` and `Δ_j(C^(2m))` for every
/// half-length, against the boundedness thresholds.
pub fn audit_conflicts(host: &HostSpec) -> Result<AuditReport> {
    audit_conflicts_with_cap(host, DEFAULT_CONFLICT_CAP)
}

pub fn audit_conflicts_with_cap(host: &HostSpec, cap: usize) -> Result<AuditReport> {
    let h = materialize(host)?;
    let d = host.d_f64();
    let eps = host.eps();
    let largest = 2 * host.max_half_length();
    let mut entries = Vec::new();
    let mut stats = Vec::new();
    for m in 2..=host.max_half_length() {
        let s = conflict_stats(&h, m, cap)?;
        let i = 2 * m;
        entries.push(AuditEntry::new(format!("conflict size {i} in [4,{largest}]"), s.sizes_ok as u128, "==", 1.0));
        entries.push(AuditEntry::new(format!("Delta(C^{i})"), s.degree, "<=", largest as f64 * d.powi(i as i32 - 1)));
        for &(j, v) in &s.codegrees {
            entries.push(AuditEntry::new(format!("Delta_{j}(C^{i})"), v, "<=", d.powf(i as f64 - j as f64 - eps)));
        }
        stats.push(s);
    }
    Ok(AuditReport { host: host.params(), d, entries, conflicts: stats, advisory: None })
}

fn binom_f(n: f64, r: i64) -> f64 {
    if r < 0 || n < r as f64 {
        return 0.0;
    }
    (0..r).fold(1.0, |acc, i| acc * (n - i as f64) / (i as f64 + 1.0))
}

fn degree_bounds_hold(host: &HostSpec, n: u32) -> bool {
    let Ok(h) = crate::model::build_host(host.mode(), n, host.k(), host.ell(), Some(host.eps())) else {
        return false;
    };
    let d = h.d_f64();
    let lo = d * (1.0 - d.powf(-h.eps()));
    VertexKind::for_mode(h.mode()).iter().all(|&kind| {
        let nf = n as f64;
        let p = h.palette_size() as f64;
        // closed forms in floating point, free of overflow
        let deg = match h.shape() {
            BlockShape::Clique { order } => match kind {
                VertexKind::PairEdge => binom_f(nf - 2.0, order as i64 - 2) * p,
                _ => binom_f(nf - 1.0, order as i64 - 1),
            },
            BlockShape::Biclique { small, large } => {
                let (s, t) = (small as i64, large as i64);
                match kind {
                    VertexKind::SameSidePair => {
                        p * (binom_f(nf - 2.0, t - 2) * binom_f(nf, s) + binom_f(nf - 2.0, s - 2) * binom_f(nf, t))
                    }
                    VertexKind::CrossPair => p * 2.0 * binom_f(nf - 1.0, t - 1) * binom_f(nf - 1.0, s - 1),
                    _ => binom_f(nf - 1.0, t - 1) * binom_f(nf, s) + binom_f(nf - 1.0, s - 1) * binom_f(nf, t),
                }
            }
        };
        deg >= lo && deg <= d
    })
}

/// Smallest `n` from which the degree window holds up to a scan limit.
fn min_n_advisory(host: &HostSpec) -> String {
    const LIMIT: u32 = 2000;
    let mut from = None;
    for n in (1..=LIMIT).rev() {
        if degree_bounds_hold(host, n) {
            from = Some(n);
        } else {
            break;
        }
    }
    match from {
        Some(n0) => {
            format!("degree window d(1-d^-eps) <= deg <= d holds for every n in [{n0}, {LIMIT}] at this k, ell, eps")
        }
        None => format!("degree window d(1-d^-eps) <= deg <= d fails at n = {LIMIT} for this k, ell, eps"),
    }
}
