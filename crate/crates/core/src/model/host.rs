use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, checked_binomial, factorial};
use crate::error::{Error, Result};

/// Exact rational with machine-width parts.
pub type Rational = Ratio<u128>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Complete,
    Bipartite,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Complete => "complete",
            Mode::Bipartite => "bipartite",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complete" => Ok(Mode::Complete),
            "bipartite" => Ok(Mode::Bipartite),
            other => Err(Error::InvalidHost(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    X,
    Y,
}

/// Vertex layout of one block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockShape {
    /// `K_{order}` on `order = k - 1` vertices.
    Clique { order: u32 },
    /// `K_{small,large}` with `small = C(k,2)`, `large = C(k+1,2)`, either side first.
    Biclique { small: u32, large: u32 },
}

impl BlockShape {
    pub fn vertex_count(self) -> usize {
        match self {
            BlockShape::Clique { order } => order as usize,
            BlockShape::Biclique { small, large } => (small + large) as usize,
        }
    }
}

/// User-facing parameters of a host; everything else is derived.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HostParams {
    pub mode: Mode,
    pub n: u32,
    pub k: u32,
    pub ell: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

/// A problem instance: the host graph, the cycle family `C_[k..ℓ]` (bipartite:
/// `C_[k²-k+2..ℓ]`) and the derived block hypergraph parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct HostSpec {
    mode: Mode,
    n: u32,
    k: u32,
    ell: u32,
    eps: f64,
    shape: BlockShape,
    palette_size: u32,
    d: Rational,
}

/// Validates parameters and derives block shape, palette size and `d`.
///
/// `eps` defaults to half of its admissible upper end.
pub fn build_host(mode: Mode, n: u32, k: u32, ell: u32, eps: Option<f64>) -> Result<HostSpec> {
    if n == 0 {
        return Err(Error::InvalidHost("n must be positive".into()));
    }
    let (shape, palette_size, eps_max, d) = match mode {
        Mode::Complete => {
            if k < 3 {
                return Err(Error::InvalidHost(format!("complete hosts need k >= 3, got {k}")));
            }
            if ell < k {
                return Err(Error::InvalidHost(format!("need k <= ell, got k={k}, ell={ell}")));
            }
            let num = (n as u128).checked_pow(k - 2).ok_or(Error::Overflow("d"))?;
            let den = factorial((k - 2) as u64).ok_or(Error::Overflow("d"))?;
            (BlockShape::Clique { order: k - 1 }, n / (k - 2), 1.0 / (k - 2) as f64, Ratio::new(num, den))
        }
        Mode::Bipartite => {
            if k < 2 {
                return Err(Error::InvalidHost(format!("bipartite hosts need k >= 2, got {k}")));
            }
            if ell % 2 == 1 {
                return Err(Error::InvalidHost(format!("bipartite hosts need even ell, got {ell}")));
            }
            if ell < k * k - k + 2 {
                return Err(Error::InvalidHost(format!(
                    "bipartite hosts need ell >= k^2-k+2 = {}, got {ell}",
                    k * k - k + 2
                )));
            }
            let small = k * (k - 1) / 2;
            let large = k * (k + 1) / 2;
            let num = (n as u128)
                .checked_pow(k * k - 1)
                .and_then(|p| p.checked_mul((k * k) as u128))
                .ok_or(Error::Overflow("d"))?;
            let den = factorial(small as u64)
                .zip(factorial(large as u64))
                .and_then(|(a, b)| a.checked_mul(b))
                .ok_or(Error::Overflow("d"))?;
            (BlockShape::Biclique { small, large }, 2 * n / (k * k - 1), 1.0 / (k * k - 1) as f64, Ratio::new(num, den))
        }
    };
    let eps = eps.unwrap_or(eps_max / 2.0);
    if !(eps > 0.0 && eps < eps_max) {
        return Err(Error::InvalidHost(format!("eps must lie in (0, {eps_max}), got {eps}")));
    }
    Ok(HostSpec { mode, n, k, ell, eps, shape, palette_size, d })
}

impl HostSpec {
    pub fn from_params(p: HostParams) -> Result<Self> {
        build_host(p.mode, p.n, p.k, p.ell, p.eps)
    }

    pub fn params(&self) -> HostParams {
        HostParams { mode: self.mode, n: self.n, k: self.k, ell: self.ell, eps: Some(self.eps) }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }
    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn k(&self) -> u32 {
        self.k
    }
    pub fn ell(&self) -> u32 {
        self.ell
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn shape(&self) -> BlockShape {
        self.shape
    }
    pub fn palette_size(&self) -> u32 {
        self.palette_size
    }
    pub fn d(&self) -> Rational {
        self.d
    }
    pub fn d_f64(&self) -> f64 {
        *self.d.numer() as f64 / *self.d.denom() as f64
    }
    pub fn block_size(&self) -> usize {
        self.shape.vertex_count()
    }

    /// Total vertices: `n` (complete) or `2n` with `X = 0..n`, `Y = n..2n`.
    pub fn vertex_count(&self) -> u32 {
        match self.mode {
            Mode::Complete => self.n,
            Mode::Bipartite => 2 * self.n,
        }
    }

    pub fn side(&self, v: u32) -> Side {
        if self.mode == Mode::Bipartite && v >= self.n {
            Side::Y
        } else {
            Side::X
        }
    }

    pub fn adjacent(&self, u: u32, v: u32) -> bool {
        u != v
            && u < self.vertex_count()
            && v < self.vertex_count()
            && (self.mode == Mode::Complete || self.side(u) != self.side(v))
    }

    pub fn edge_count(&self) -> usize {
        let n = self.n as usize;
        match self.mode {
            Mode::Complete => n * n.saturating_sub(1) / 2,
            Mode::Bipartite => n * n,
        }
    }

    /// Dense index of a host edge; `None` for non-edges.
    pub fn edge_index(&self, u: u32, v: u32) -> Option<usize> {
        if !self.adjacent(u, v) {
            return None;
        }
        Some(match self.mode {
            Mode::Complete => {
                let (a, b) = if u < v { (u, v) } else { (v, u) };
                (b as usize * (b as usize - 1)) / 2 + a as usize
            }
            Mode::Bipartite => {
                let (x, y) = if u < v { (u, v) } else { (v, u) };
                x as usize * self.n as usize + (y - self.n) as usize
            }
        })
    }

    /// Endpoints of the edge with dense index `idx`, smaller id first.
    pub fn edge_endpoints(&self, idx: usize) -> (u32, u32) {
        match self.mode {
            Mode::Complete => {
                let mut b = ((1.0 + (1.0 + 8.0 * idx as f64).sqrt()) / 2.0) as usize;
                while b * (b - 1) / 2 > idx {
                    b -= 1;
                }
                while (b + 1) * b / 2 <= idx {
                    b += 1;
                }
                let a = idx - b * (b - 1) / 2;
                (a as u32, b as u32)
            }
            Mode::Bipartite => {
                let n = self.n as usize;
                ((idx / n) as u32, (idx % n) as u32 + self.n)
            }
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.edge_count()).map(move |i| self.edge_endpoints(i))
    }

    pub fn neighbours(&self, v: u32) -> impl Iterator<Item = u32> + '_ {
        let range = match (self.mode, self.side(v)) {
            (Mode::Complete, _) => 0..self.n,
            (Mode::Bipartite, Side::X) => self.n..2 * self.n,
            (Mode::Bipartite, Side::Y) => 0..self.n,
        };
        range.filter(move |&w| w != v)
    }

    /// Degree of every vertex in the host.
    pub fn host_degree(&self) -> u32 {
        match self.mode {
            Mode::Complete => self.n.saturating_sub(1),
            Mode::Bipartite => self.n,
        }
    }

    /// Number of vertex sets a block can occupy.
    pub fn placement_count(&self) -> u128 {
        let n = self.n as u64;
        match self.shape {
            BlockShape::Clique { order } => binomial(n, order as u64),
            BlockShape::Biclique { small, large } => {
                2 * checked_binomial(n, small as u64)
                    .unwrap_or(u128::MAX / 4)
                    .saturating_mul(checked_binomial(n, large as u64).unwrap_or(u128::MAX / 4))
            }
        }
    }

    /// `|E(H)| = placements × palette`.
    pub fn hyperedge_count(&self) -> u128 {
        self.placement_count().saturating_mul(self.palette_size as u128)
    }

    /// Index of an unordered pair of distinct vertices among all `C(V,2)` pairs
    /// (same-side pairs included).
    pub fn pair_index(&self, u: u32, v: u32) -> usize {
        let (a, b) = if u < v { (u as usize, v as usize) } else { (v as usize, u as usize) };
        b * (b - 1) / 2 + a
    }

    pub fn pair_count(&self) -> usize {
        let v = self.vertex_count() as usize;
        v * v.saturating_sub(1) / 2
    }

    /// Largest conflict half-length `⌊ℓ/2⌋`.
    pub fn max_half_length(&self) -> u32 {
        self.ell / 2
    }

    /// Cycle lengths that must see three colours.
    pub fn forbidden_lengths(&self) -> Vec<u32> {
        match self.mode {
            Mode::Complete => (self.k..=self.ell).collect(),
            Mode::Bipartite => (self.k * self.k - self.k + 2..=self.ell).filter(|h| h % 2 == 0).collect(),
        }
    }

    /// Half-lengths `m` of leftover 2m-cycles whose proper 2-colouring is a bad event.
    pub fn two_coloured_cycle_range(&self) -> RangeInclusive<u32> {
        match self.mode {
            Mode::Complete => self.k.div_ceil(2)..=self.ell / 2,
            Mode::Bipartite => (self.k * self.k - self.k + 2) / 2..=self.ell / 2,
        }
    }

    /// Half-lengths `m` of block-alternating cycles that are bad events.
    pub fn alternating_cycle_range(&self) -> RangeInclusive<u32> {
        2..=self.ell / 2
    }
}

impl fmt::Display for HostSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} n={} k={} ell={}", self.mode, self.n, self.k, self.ell)
    }
}
