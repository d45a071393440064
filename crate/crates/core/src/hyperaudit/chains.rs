//! Exact sizes of the chain families behind the path-counting test functions,
//! and their leading-term approximations.
//!
//! A chain is a set of `m` pairwise-disjoint blocks of one colour with `u` in
//! one block and `v` in another. A crossed chain adds one block of a second
//! colour meeting the `u`-block and some other block of the chain in exactly
//! one vertex each, avoiding `u` and `v`, and meeting every chain block at most
//! once. In bipartite hosts the flags fix side sizes: `|A_u ∩ X| = C(k+a,2)`,
//! `|A_v ∩ Y| = C(k+b,2)`, and the second met block has `C(k+c,2)` vertices in
//! `X`; the crossing block meets the `u`-block in `Y` and the other block in `X`.

use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, binomial_signed, factorial};
use crate::error::{Error, Result};
use crate::model::{BlockShape, HostSpec, Side};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainQuery {
    pub u: u32,
    pub v: u32,
    pub m: u32,
    #[serde(default)]
    pub a: bool,
    #[serde(default)]
    pub b: bool,
    #[serde(default)]
    pub c: bool,
}

impl ChainQuery {
    pub fn new(u: u32, v: u32, m: u32) -> Self {
        ChainQuery { u, v, m, a: false, b: false, c: false }
    }

    pub fn with_flags(self, a: bool, b: bool, c: bool) -> Self {
        ChainQuery { a, b, c, ..self }
    }

    pub fn validate(&self, host: &HostSpec) -> Result<()> {
        let max = host.max_half_length();
        if self.m < 2 || self.m > max {
            return Err(Error::HalfLengthOutOfRange { m: self.m, max });
        }
        if self.u == self.v || self.u >= host.vertex_count() || self.v >= host.vertex_count() {
            return Err(Error::InvalidQuery(format!("need distinct host vertices, got {} and {}", self.u, self.v)));
        }
        if matches!(host.shape(), BlockShape::Biclique { .. })
            && (host.side(self.u) != Side::X || host.side(self.v) != Side::Y)
        {
            return Err(Error::InvalidQuery("bipartite chains need u in X and v in Y".into()));
        }
        Ok(())
    }
}

type Middle = (Vec<u64>, u128, u64, u64);

fn pair(k: u32, flag: bool) -> u32 {
    let x = k + flag as u32;
    x * (x - 1) / 2
}

fn ovf() -> Error {
    Error::Overflow("chain count")
}

fn mul(a: u128, b: u128) -> Result<u128> {
    a.checked_mul(b).ok_or_else(ovf)
}

/// Block geometry of a chain: `(x, y)` sizes of the `u`-block, the `v`-block
/// and the two middle-block orientations.
struct Geometry {
    n: u64,
    first: (u64, u64),
    last: (u64, u64),
    middle_types: Vec<(u64, u64)>,
}

impl Geometry {
    fn of(host: &HostSpec, q: &ChainQuery) -> Self {
        let n = host.n() as u64;
        match host.shape() {
            BlockShape::Clique { order } => {
                let o = order as u64;
                Geometry { n, first: (o, 0), last: (o, 0), middle_types: vec![(o, 0)] }
            }
            BlockShape::Biclique { small, large } => {
                let kk = (small + large) as u64;
                let a1 = pair(host.k(), q.a) as u64;
                let bm = pair(host.k(), q.b) as u64;
                Geometry {
                    n,
                    first: (a1, kk - a1),
                    last: (kk - bm, bm),
                    middle_types: vec![(small as u64, large as u64), (large as u64, small as u64)],
                }
            }
        }
    }

    fn bipartite(&self) -> bool {
        self.middle_types.len() == 2
    }

    /// Choices of the `u`-block (avoiding `v`) and then the `v`-block.
    fn ends(&self) -> Result<u128> {
        if self.bipartite() {
            let (ax, ay) = self.first;
            let (bx, by) = self.last;
            let n = self.n as i64;
            let first = mul(binomial_signed(n - 1, ax as i64 - 1), binomial_signed(n - 1, ay as i64))?;
            let last =
                mul(binomial_signed(n - ax as i64, bx as i64), binomial_signed(n - ay as i64 - 1, by as i64 - 1))?;
            mul(first, last)
        } else {
            let o = self.first.0 as i64;
            let n = self.n as i64;
            mul(binomial_signed(n - 2, o - 1), binomial_signed(n - o - 1, o - 1))
        }
    }

    /// Middle compositions: `(counts per type, unordered families, free x, free y)`.
    fn middles(&self, count: u64) -> Result<Vec<Middle>> {
        let xr = self.n.checked_sub(self.first.0 + self.last.0);
        let yr = if self.bipartite() { self.n.checked_sub(self.first.1 + self.last.1) } else { Some(0) };
        let (Some(xr), Some(yr)) = (xr, yr) else { return Ok(Vec::new()) };
        let types = &self.middle_types;
        let mut out = Vec::new();
        let splits: Vec<Vec<u64>> =
            if types.len() == 1 { vec![vec![count]] } else { (0..=count).map(|j| vec![j, count - j]).collect() };
        for split in splits {
            let (mut x, mut y) = (xr, yr);
            let mut ordered: u128 = 1;
            let mut fits = true;
            for (t, &c) in types.iter().zip(&split) {
                for _ in 0..c {
                    if x < t.0 || y < t.1 {
                        fits = false;
                        break;
                    }
                    ordered = mul(ordered, mul(binomial(x, t.0), binomial(y, t.1))?)?;
                    x -= t.0;
                    y -= t.1;
                }
            }
            if !fits {
                continue;
            }
            let sym = split
                .iter()
                .try_fold(1u128, |acc, &c| factorial(c).and_then(|f| acc.checked_mul(f)))
                .ok_or_else(ovf)?;
            out.push((split, ordered / sym, x, y));
        }
        Ok(out)
    }
}

/// Number of chains (sets of `m` disjoint same-coloured blocks, `u` in one and `v` in another).
pub fn chain_count(host: &HostSpec, q: &ChainQuery) -> Result<u128> {
    q.validate(host)?;
    let g = Geometry::of(host, q);
    let mut total = 0u128;
    let ends = g.ends()?;
    for (_, families, _, _) in g.middles(q.m as u64 - 2)? {
        total = total.checked_add(mul(ends, families)?).ok_or_else(ovf)?;
    }
    mul(total, host.palette_size() as u128)
}

/// Bivariate polynomial truncated at `(dx, dy)`.
#[derive(Clone)]
struct Poly {
    dx: usize,
    dy: usize,
    c: Vec<u128>,
}

impl Poly {
    fn one(dx: usize, dy: usize) -> Self {
        let mut c = vec![0; (dx + 1) * (dy + 1)];
        c[0] = 1;
        Poly { dx, dy, c }
    }

    /// `c0 + cx·tx + cy·ty`.
    fn linear(dx: usize, dy: usize, c0: u128, cx: u128, cy: u128) -> Self {
        let mut p = Poly::one(dx, dy);
        p.c[0] = c0;
        if dx >= 1 {
            p.c[1] = cx;
        }
        if dy >= 1 {
            p.c[dx + 1] = cy;
        }
        p
    }

    fn at(&self, i: usize, j: usize) -> u128 {
        self.c[j * (self.dx + 1) + i]
    }

    fn mul(&self, o: &Poly) -> Result<Poly> {
        let mut r = Poly { dx: self.dx, dy: self.dy, c: vec![0; self.c.len()] };
        for j1 in 0..=self.dy {
            for i1 in 0..=self.dx {
                let a = self.at(i1, j1);
                if a == 0 {
                    continue;
                }
                for j2 in 0..=self.dy - j1 {
                    for i2 in 0..=self.dx - i1 {
                        let b = o.at(i2, j2);
                        if b != 0 {
                            let s = &mut r.c[(j1 + j2) * (self.dx + 1) + i1 + i2];
                            *s = s.checked_add(a.checked_mul(b).ok_or_else(ovf)?).ok_or_else(ovf)?;
                        }
                    }
                }
            }
        }
        Ok(r)
    }

    fn pow(&self, e: u64) -> Result<Poly> {
        let mut r = Poly::one(self.dx, self.dy);
        for _ in 0..e {
            r = r.mul(self)?;
        }
        Ok(r)
    }

    fn sub(&self, o: &Poly) -> Result<Poly> {
        let c = self.c.iter().zip(&o.c).map(|(a, b)| a.checked_sub(*b).ok_or_else(ovf)).collect::<Result<_>>()?;
        Ok(Poly { dx: self.dx, dy: self.dy, c })
    }

    /// `(1 + tx)^fx (1 + ty)^fy`.
    fn free(dx: usize, dy: usize, fx: u64, fy: u64) -> Self {
        let mut p = Poly::one(dx, dy);
        for j in 0..=dy {
            for i in 0..=dx {
                p.c[j * (dx + 1) + i] = binomial(fx, i as u64) * binomial(fy, j as u64);
            }
        }
        p
    }
}

/// Number of crossed chains: a chain plus one block of another colour as
/// described in the module docs.
pub fn crossed_chain_count(host: &HostSpec, q: &ChainQuery) -> Result<u128> {
    q.validate(host)?;
    let g = Geometry::of(host, q);
    let m = q.m as u64;
    let ends = g.ends()?;
    // target sizes of the crossing block: either orientation in bipartite hosts
    let targets: Vec<(usize, usize)> = match host.shape() {
        BlockShape::Clique { order } => vec![(order as usize, 0)],
        BlockShape::Biclique { small, large } => {
            vec![(small as usize, large as usize), (large as usize, small as usize)]
        }
    };
    let dx = targets.iter().map(|t| t.0).max().unwrap_or(0);
    let dy = targets.iter().map(|t| t.1).max().unwrap_or(0);
    let bip = g.bipartite();
    let c_size = pair(host.k(), q.c) as u64;
    // the second met block must have the c-sized X side (bipartite)
    let eligible = |t: (u64, u64)| !bip || t.0 == c_size;
    let first = if bip {
        Poly::linear(dx, dy, 0, 0, g.first.1 as u128)
    } else {
        Poly::linear(dx, dy, 0, g.first.0 as u128 - 1, 0)
    };
    let (lx, ly) = g.last;
    let last = if m == 2 {
        if !eligible(g.last) {
            return Ok(0);
        }
        if bip {
            Poly::linear(dx, dy, 0, lx as u128, 0)
        } else {
            Poly::linear(dx, dy, 0, lx as u128 - 1, 0)
        }
    } else if bip {
        Poly::linear(dx, dy, 1, lx as u128, ly as u128 - 1)
    } else {
        Poly::linear(dx, dy, 1, lx as u128 - 1, 0)
    };
    let mut total = 0u128;
    for (split, families, fx, fy) in g.middles(m - 2)? {
        if families == 0 {
            continue;
        }
        let base = first.mul(&last)?.mul(&Poly::free(dx, dy, fx, fy))?;
        let mut all = Poly::one(dx, dy);
        let mut without = Poly::one(dx, dy);
        for (t, &cnt) in g.middle_types.iter().zip(&split) {
            let open = if bip {
                Poly::linear(dx, dy, 1, t.0 as u128, t.1 as u128)
            } else {
                Poly::linear(dx, dy, 1, t.0 as u128, 0)
            };
            all = all.mul(&open.pow(cnt)?)?;
            let closed =
                if eligible(*t) { Poly::linear(dx, dy, 1, 0, if bip { t.1 as u128 } else { 0 }) } else { open };
            without = without.mul(&closed.pow(cnt)?)?;
        }
        let mid = if m == 2 { Poly::one(dx, dy) } else { all.sub(&without)? };
        let poly = base.mul(&mid)?;
        let per_chain: u128 = targets.iter().map(|&(x, y)| poly.at(x, y)).sum();
        total = total.checked_add(mul(mul(ends, families)?, per_chain)?).ok_or_else(ovf)?;
    }
    let p = host.palette_size() as u128;
    mul(total, mul(p, p.saturating_sub(1))?)
}

fn fact_f(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Leading term of [`chain_count`] for large `n`.
pub fn chain_leading_term(host: &HostSpec, q: &ChainQuery) -> Result<f64> {
    check_m(host, q.m)?;
    let (d, n, k, m) = (host.d_f64(), host.n() as f64, host.k() as f64, q.m as i32);
    Ok(match host.shape() {
        BlockShape::Clique { .. } => d.powi(m) * n.powi(m - 1) / (fact_f(q.m - 2) * (k - 2.0) * (k - 1.0).powi(m - 2)),
        BlockShape::Biclique { .. } => {
            let (ca, cb) = (pair(host.k(), q.a) as f64, pair(host.k(), q.b) as f64);
            2f64.powi(m - 1) * ca * cb * d.powi(m) * n.powi(m - 1) / (k.powi(2 * m) * (k * k - 1.0) * fact_f(q.m - 2))
        }
    })
}

/// Leading term of [`crossed_chain_count`] for large `n`.
pub fn crossed_chain_leading_term(host: &HostSpec, q: &ChainQuery) -> Result<f64> {
    check_m(host, q.m)?;
    let (d, n, k, m) = (host.d_f64(), host.n() as f64, host.k() as f64, q.m as i32);
    Ok(match host.shape() {
        BlockShape::Clique { .. } => {
            let a = if q.m >= 3 { (m as f64 - 2.0) * (k - 1.0) * (k - 2.0) } else { (k - 2.0).powi(2) };
            a * d.powi(m + 1) * n.powi(m - 1) / (fact_f(q.m - 2) * (k - 2.0) * (k - 1.0).powi(m - 2))
        }
        BlockShape::Biclique { .. } => {
            let z = if q.m >= 3 { (m as f64 - 2.0) / 2.0 } else { 1.0 };
            let (cc, cb) = (pair(host.k(), q.c) as f64, pair(host.k(), q.b) as f64);
            2f64.powi(m - 3) * cc * cb * z * d.powi(m + 1) * n.powi(m - 1) / (k.powi(2 * m - 2) * fact_f(q.m - 2))
        }
    })
}

fn check_m(host: &HostSpec, m: u32) -> Result<()> {
    let max = host.max_half_length();
    if m < 2 || m > max {
        return Err(Error::HalfLengthOutOfRange { m, max });
    }
    Ok(())
}
