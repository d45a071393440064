//! Line-oriented certificate files and their JSON mirror.
//!
//! ```text
//! # comment
//! mode complete
//! n 12
//! k 4
//! ell 4
//! alpha 0.25
//! seed 7
//! B 1 0 1 2
//! F 3 4 2
//! VERDICT violations 1
//! V 0 3 5 4
//! END
//! ```
//!
//! Vertex ids are 0-based. Bipartite `B` lines read `B <colour> X <xs> Y <ys>`
//! and `F` lines `F <x> <y> <fresh>`, both with per-side indices; `V` lines
//! always use global ids (`Y` side offset by `n`).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::block::Block;
use super::colouring::{graph_of_matching, Colouring, EdgeColour, FreshPalette};
use super::host::{HostParams, HostSpec, Mode};
use super::matching::BlockMatching;
use crate::error::{DecodeError, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            o => Err(Error::InvalidQuery(format!("unknown format `{o}`"))),
        }
    }
}

/// Per-stage seeds derived from the root seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StageSeeds {
    pub matcher: u64,
    pub fresh: u64,
    pub resample: u64,
    pub verify: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct PipelineStats {
    pub coverage: f64,
    pub rounds: u64,
    pub attempts: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum CertificateVerdict {
    Unverified,
    Certified,
    /// `count` is exact; `cycles` may be a capped subset.
    Violations {
        count: u64,
        cycles: Vec<Vec<u32>>,
    },
}

/// A colouring together with how it was produced and what the verifier said.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Repr", into = "Repr")]
pub struct Certificate {
    pub host: HostSpec,
    pub seed: u64,
    pub alpha: Option<f64>,
    /// Fresh palette size when it was chosen explicitly rather than from `alpha`.
    pub fresh_size: Option<u32>,
    pub delta: Option<f64>,
    pub stage_seeds: Option<StageSeeds>,
    pub blocks: Vec<Block>,
    /// `(u, v, fresh colour)` with global ids, `u < v`.
    pub leftover: Vec<(u32, u32, u32)>,
    pub stats: PipelineStats,
    pub verdict: CertificateVerdict,
}

#[derive(Serialize, Deserialize)]
struct Repr {
    host: HostParams,
    seed: u64,
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    fresh_size: Option<u32>,
    #[serde(default)]
    delta: Option<f64>,
    #[serde(default)]
    stage_seeds: Option<StageSeeds>,
    blocks: Vec<Block>,
    leftover: Vec<(u32, u32, u32)>,
    #[serde(default)]
    stats: PipelineStats,
    verdict: CertificateVerdict,
}

impl From<Certificate> for Repr {
    fn from(c: Certificate) -> Self {
        Repr {
            host: c.host.params(),
            seed: c.seed,
            alpha: c.alpha,
            fresh_size: c.fresh_size,
            delta: c.delta,
            stage_seeds: c.stage_seeds,
            blocks: c.blocks,
            leftover: c.leftover,
            stats: c.stats,
            verdict: c.verdict,
        }
    }
}

impl TryFrom<Repr> for Certificate {
    type Error = Error;
    fn try_from(r: Repr) -> Result<Self> {
        let cert = Certificate {
            host: HostSpec::from_params(r.host)?,
            seed: r.seed,
            alpha: r.alpha,
            fresh_size: r.fresh_size,
            delta: r.delta,
            stage_seeds: r.stage_seeds,
            blocks: r.blocks.into_iter().map(|b| Block::new(b.colour, b.vertices)).collect(),
            leftover: r.leftover,
            stats: r.stats,
            verdict: r.verdict,
        };
        cert.validate()?;
        Ok(cert)
    }
}

impl Certificate {
    /// Certificate for a colouring, with `leftover` read off its fresh edges.
    pub fn from_parts(m: &BlockMatching, c: &Colouring, seed: u64) -> Self {
        let host = m.host().clone();
        let leftover = c
            .colours()
            .iter()
            .enumerate()
            .filter_map(|(i, col)| match *col {
                EdgeColour::Fresh(f) => {
                    let (u, v) = host.edge_endpoints(i);
                    Some((u, v, f))
                }
                _ => None,
            })
            .collect();
        Certificate {
            host,
            seed,
            alpha: c.fresh_palette().map(|p| p.alpha),
            fresh_size: c.fresh_palette().map(|p| p.size),
            delta: None,
            stage_seeds: None,
            blocks: m.blocks().to_vec(),
            leftover,
            stats: PipelineStats::default(),
            verdict: CertificateVerdict::Unverified,
        }
    }

    pub fn fresh_palette(&self) -> Option<FreshPalette> {
        let derived = FreshPalette::new(self.host.n(), self.alpha?).ok()?;
        Some(FreshPalette { size: self.fresh_size.unwrap_or(derived.size), ..derived })
    }

    /// Structured palette size plus fresh palette size.
    pub fn total_colours(&self) -> u32 {
        self.host.palette_size() + self.fresh_palette().map_or(0, |p| p.size)
    }

    pub fn matching(&self) -> Result<BlockMatching> {
        BlockMatching::from_blocks(&self.host, self.blocks.iter().cloned())
    }

    /// The colouring described: blocks as structured colours, leftover as fresh.
    pub fn colouring(&self) -> Result<Colouring> {
        let m = self.matching()?;
        let mut c = graph_of_matching(&m);
        if let Some(p) = self.fresh_palette() {
            c.set_fresh_palette(p);
        }
        for &(u, v, f) in &self.leftover {
            self.check_leftover(&c, u, v, f)?;
            c.set(u, v, EdgeColour::Fresh(f))?;
        }
        Ok(c)
    }

    fn check_leftover(&self, c: &Colouring, u: u32, v: u32, f: u32) -> Result<()> {
        match c.get(u, v) {
            None => return Err(Error::InvalidQuery(format!("leftover {u}-{v} is not a host edge"))),
            Some(EdgeColour::Uncoloured) => {}
            Some(_) => return Err(Error::InvalidQuery(format!("leftover {u}-{v} is already coloured"))),
        }
        let r = self.fresh_palette().map_or(0, |p| p.size);
        if f == 0 || f > r {
            return Err(Error::InvalidQuery(format!("fresh colour {f} outside 1..={r}")));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(a) = self.alpha {
            FreshPalette::new(self.host.n(), a)?;
        }
        match (self.alpha, self.fresh_size) {
            (None, Some(_)) => return Err(Error::InvalidQuery("fresh palette size given without alpha".into())),
            (_, Some(0)) => return Err(Error::InvalidQuery("fresh palette size must be positive".into())),
            _ => {}
        }
        self.colouring().map(|_| ())
    }

    pub fn encode(&self, format: Format) -> Result<String> {
        match format {
            Format::Text => Ok(self.encode_text()),
            Format::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
        }
    }

    /// Decodes text or JSON, chosen by the first non-blank byte.
    pub fn decode(bytes: &[u8]) -> std::result::Result<Self, DecodeError> {
        let first = bytes.iter().position(|b| !b.is_ascii_whitespace());
        if first.is_some_and(|i| bytes[i] == b'{') {
            Self::decode_json(bytes)
        } else {
            Self::decode_text(bytes)
        }
    }

    pub fn encode_text(&self) -> String {
        let h = &self.host;
        let mut s = String::new();
        let _ = writeln!(s, "mode {}", h.mode());
        let _ = writeln!(s, "n {}", h.n());
        let _ = writeln!(s, "k {}", h.k());
        let _ = writeln!(s, "ell {}", h.ell());
        let _ = writeln!(s, "eps {}", h.eps());
        match self.alpha {
            Some(a) => writeln!(s, "alpha {a}"),
            None => writeln!(s, "alpha -"),
        }
        .ok();
        if let Some(d) = self.delta {
            let _ = writeln!(s, "delta {d}");
        }
        let _ = writeln!(s, "seed {}", self.seed);
        if let Some(ss) = self.stage_seeds {
            let _ = writeln!(s, "stage-seeds {} {} {} {}", ss.matcher, ss.fresh, ss.resample, ss.verify);
        }
        let _ = writeln!(s, "palette {}", h.palette_size());
        if let (Some(r), Some(_)) = (self.fresh_size, self.alpha) {
            let _ = writeln!(s, "fresh-palette {r}");
        }
        let _ = writeln!(s, "coverage {}", self.stats.coverage);
        let _ = writeln!(s, "rounds {}", self.stats.rounds);
        let _ = writeln!(s, "attempts {}", self.stats.attempts);
        for b in &self.blocks {
            let _ = write!(s, "B {}", b.colour);
            match h.mode() {
                Mode::Complete => b.vertices.iter().for_each(|v| {
                    let _ = write!(s, " {v}");
                }),
                Mode::Bipartite => {
                    s.push_str(" X");
                    b.x_side(h).iter().for_each(|v| {
                        let _ = write!(s, " {v}");
                    });
                    s.push_str(" Y");
                    b.y_side(h).iter().for_each(|v| {
                        let _ = write!(s, " {}", v - h.n());
                    });
                }
            }
            s.push('\n');
        }
        for &(u, v, f) in &self.leftover {
            let (a, b) = match h.mode() {
                Mode::Complete => (u, v),
                Mode::Bipartite => (u.min(v), u.max(v) - h.n()),
            };
            let _ = writeln!(s, "F {a} {b} {f}");
        }
        match &self.verdict {
            CertificateVerdict::Unverified => s.push_str("VERDICT unverified\n"),
            CertificateVerdict::Certified => s.push_str("VERDICT certified\n"),
            CertificateVerdict::Violations { count, cycles } => {
                let _ = writeln!(s, "VERDICT violations {count}");
                for c in cycles {
                    s.push('V');
                    for v in c {
                        let _ = write!(s, " {v}");
                    }
                    s.push('\n');
                }
            }
        }
        s.push_str("END\n");
        s
    }

    pub fn decode_json(bytes: &[u8]) -> std::result::Result<Self, DecodeError> {
        serde_json::from_slice(bytes).map_err(|e| {
            let offset = offset_of(bytes, e.line(), e.column());
            if e.is_eof() {
                DecodeError::Truncated { offset, message: e.to_string() }
            } else {
                DecodeError::Syntax { offset, line: e.line(), message: e.to_string() }
            }
        })
    }

    pub fn decode_text(bytes: &[u8]) -> std::result::Result<Self, DecodeError> {
        TextDecoder::default().run(bytes)
    }
}

fn offset_of(bytes: &[u8], line: usize, column: usize) -> usize {
    let mut l = 1;
    for (i, &b) in bytes.iter().enumerate() {
        if l == line {
            return (i + column.saturating_sub(1)).min(bytes.len());
        }
        if b == b'\n' {
            l += 1;
        }
    }
    bytes.len()
}

#[derive(Default)]
struct Header {
    mode: Option<Mode>,
    n: Option<u32>,
    k: Option<u32>,
    ell: Option<u32>,
    eps: Option<f64>,
    alpha: Option<Option<f64>>,
    delta: Option<f64>,
    seed: Option<u64>,
    stage_seeds: Option<StageSeeds>,
    palette: Option<u32>,
    fresh_palette: Option<u32>,
    stats: PipelineStats,
}

#[derive(Default)]
struct TextDecoder {
    header: Header,
    host: Option<HostSpec>,
    matching: Option<BlockMatching>,
    colouring: Option<Colouring>,
    leftover: Vec<(u32, u32, u32)>,
    verdict: Option<CertificateVerdict>,
    ended: bool,
}

struct Line<'a> {
    offset: usize,
    number: usize,
    text: &'a str,
}

impl Line<'_> {
    fn syntax(&self, message: impl Into<String>) -> DecodeError {
        DecodeError::Syntax { offset: self.offset, line: self.number, message: message.into() }
    }

    fn invalid(&self, e: Error) -> DecodeError {
        DecodeError::Invalid { offset: self.offset, line: self.number, source: Box::new(e) }
    }

    fn num<T: std::str::FromStr>(&self, tok: Option<&str>, what: &str) -> std::result::Result<T, DecodeError> {
        let tok = tok.ok_or_else(|| self.syntax(format!("missing {what}")))?;
        tok.parse().map_err(|_| self.syntax(format!("bad {what} `{tok}`")))
    }
}

impl TextDecoder {
    fn run(mut self, bytes: &[u8]) -> std::result::Result<Certificate, DecodeError> {
        let text = std::str::from_utf8(bytes).map_err(|e| DecodeError::Syntax {
            offset: e.valid_up_to(),
            line: bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1,
            message: "input is not UTF-8".into(),
        })?;
        let mut offset = 0;
        for (i, raw) in text.split_inclusive('\n').enumerate() {
            let line = Line { offset, number: i + 1, text: raw.trim_end_matches(['\n', '\r']) };
            offset += raw.len();
            if !raw.ends_with('\n') {
                return Err(DecodeError::Truncated {
                    offset: bytes.len(),
                    message: format!("line {} has no terminating newline", line.number),
                });
            }
            let t = line.text.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            if self.ended {
                return Err(line.syntax("content after END"));
            }
            self.line(&line, t)?;
        }
        if !self.ended {
            return Err(DecodeError::Truncated { offset: bytes.len(), message: "missing END line".into() });
        }
        let h = self.header;
        Ok(Certificate {
            host: self.host.expect("END implies a host"),
            seed: h.seed.unwrap_or(0),
            alpha: h.alpha.flatten(),
            fresh_size: h.fresh_palette,
            delta: h.delta,
            stage_seeds: h.stage_seeds,
            blocks: self.matching.map(|m| m.blocks().to_vec()).unwrap_or_default(),
            leftover: self.leftover,
            stats: h.stats,
            verdict: self.verdict.expect("END implies a verdict"),
        })
    }

    fn ensure_host(&mut self, line: &Line) -> std::result::Result<(), DecodeError> {
        if self.host.is_some() {
            return Ok(());
        }
        let h = &self.header;
        let (Some(mode), Some(n), Some(k), Some(ell)) = (h.mode, h.n, h.k, h.ell) else {
            return Err(line.syntax("header needs mode, n, k and ell before the body"));
        };
        let host = HostSpec::from_params(HostParams { mode, n, k, ell, eps: h.eps }).map_err(|e| line.invalid(e))?;
        if let Some(p) = h.palette {
            if p != host.palette_size() {
                return Err(line.invalid(Error::InvalidHost(format!(
                    "palette {p} disagrees with derived {}",
                    host.palette_size()
                ))));
            }
        }
        let alpha = h.alpha.flatten();
        let mut fresh = alpha.map(|a| FreshPalette::new(n, a)).transpose().map_err(|e| line.invalid(e))?;
        match (h.fresh_palette, fresh.as_mut()) {
            (Some(0), _) => return Err(line.invalid(Error::InvalidQuery("fresh-palette must be positive".into()))),
            (Some(_), None) => {
                return Err(line.invalid(Error::InvalidQuery("fresh-palette given without alpha".into())))
            }
            (Some(r), Some(p)) => p.size = r,
            (None, _) => {}
        }
        let mut c = Colouring::uncoloured(&host);
        if let Some(p) = fresh {
            c.set_fresh_palette(p);
        }
        self.matching = Some(BlockMatching::new(&host));
        self.colouring = Some(c);
        self.host = Some(host);
        Ok(())
    }

    fn line(&mut self, line: &Line, t: &str) -> std::result::Result<(), DecodeError> {
        let mut toks = t.split_ascii_whitespace();
        let key = toks.next().unwrap_or_default();
        if self.verdict.is_some() && !matches!(key, "V" | "END") {
            return Err(line.syntax(format!("unexpected `{key}` after VERDICT")));
        }
        let in_body = self.host.is_some();
        let header_key = !matches!(key, "B" | "F" | "VERDICT" | "V" | "END");
        if in_body && header_key {
            return Err(line.syntax(format!("header key `{key}` after body lines")));
        }
        let h = &mut self.header;
        match key {
            "mode" => {
                let m = toks.next().ok_or_else(|| line.syntax("missing mode"))?;
                h.mode = Some(m.parse().map_err(|_| line.syntax(format!("bad mode `{m}`")))?);
            }
            "n" => h.n = Some(line.num(toks.next(), "n")?),
            "k" => h.k = Some(line.num(toks.next(), "k")?),
            "ell" => h.ell = Some(line.num(toks.next(), "ell")?),
            "eps" => h.eps = Some(line.num(toks.next(), "eps")?),
            "alpha" => {
                h.alpha = Some(match toks.next() {
                    Some("-") => None,
                    other => Some(line.num(other, "alpha")?),
                })
            }
            "delta" => h.delta = Some(line.num(toks.next(), "delta")?),
            "seed" => h.seed = Some(line.num(toks.next(), "seed")?),
            "stage-seeds" => {
                h.stage_seeds = Some(StageSeeds {
                    matcher: line.num(toks.next(), "matcher seed")?,
                    fresh: line.num(toks.next(), "fresh seed")?,
                    resample: line.num(toks.next(), "resample seed")?,
                    verify: line.num(toks.next(), "verify seed")?,
                })
            }
            "palette" => h.palette = Some(line.num(toks.next(), "palette")?),
            "fresh-palette" => h.fresh_palette = Some(line.num(toks.next(), "fresh-palette")?),
            "coverage" => h.stats.coverage = line.num(toks.next(), "coverage")?,
            "rounds" => h.stats.rounds = line.num(toks.next(), "rounds")?,
            "attempts" => h.stats.attempts = line.num(toks.next(), "attempts")?,
            "B" => {
                self.ensure_host(line)?;
                let host = self.host.as_ref().unwrap();
                let colour: u32 = line.num(toks.next(), "colour")?;
                let rest: Vec<&str> = toks.by_ref().collect();
                let vertices = match host.mode() {
                    Mode::Complete => rest
                        .iter()
                        .map(|tok| line.num(Some(tok), "vertex"))
                        .collect::<std::result::Result<Vec<u32>, _>>()?,
                    Mode::Bipartite => {
                        let yi = rest.iter().position(|&x| x == "Y").ok_or_else(|| line.syntax("missing Y"))?;
                        if rest.first() != Some(&"X") {
                            return Err(line.syntax("bipartite block must start with X"));
                        }
                        let mut vs = Vec::new();
                        for tok in &rest[1..yi] {
                            vs.push(side_index(line, tok, host.n(), 0)?);
                        }
                        for tok in &rest[yi + 1..] {
                            vs.push(side_index(line, tok, host.n(), host.n())?);
                        }
                        vs
                    }
                };
                let block = Block::new(colour, vertices);
                let m = self.matching.as_mut().unwrap();
                m.insert(block.clone()).map_err(|e| line.invalid(e))?;
                let c = self.colouring.as_mut().unwrap();
                for (u, v) in block.edges(host) {
                    c.set(u, v, EdgeColour::Structured(colour)).map_err(|e| line.invalid(e))?;
                }
            }
            "F" => {
                self.ensure_host(line)?;
                let host = self.host.as_ref().unwrap();
                let a: u32 = line.num(toks.next(), "vertex")?;
                let b: u32 = line.num(toks.next(), "vertex")?;
                let f: u32 = line.num(toks.next(), "fresh colour")?;
                let (u, v) = match host.mode() {
                    Mode::Complete => (a.min(b), a.max(b)),
                    Mode::Bipartite => {
                        if a >= host.n() || b >= host.n() {
                            return Err(line.syntax("side index out of range"));
                        }
                        (a, b + host.n())
                    }
                };
                let c = self.colouring.as_mut().unwrap();
                let r = c.fresh_palette().map_or(0, |p| p.size);
                match c.get(u, v) {
                    None => return Err(line.invalid(Error::InvalidQuery(format!("{u}-{v} is not a host edge")))),
                    Some(EdgeColour::Uncoloured) => {}
                    Some(_) => return Err(line.invalid(Error::InvalidQuery(format!("{u}-{v} coloured twice")))),
                }
                if f == 0 || f > r {
                    return Err(line.invalid(Error::InvalidQuery(format!("fresh colour {f} outside 1..={r}"))));
                }
                c.set(u, v, EdgeColour::Fresh(f)).map_err(|e| line.invalid(e))?;
                self.leftover.push((u, v, f));
            }
            "VERDICT" => {
                self.ensure_host(line)?;
                self.verdict = Some(match toks.next() {
                    Some("certified") => CertificateVerdict::Certified,
                    Some("unverified") => CertificateVerdict::Unverified,
                    Some("violations") => CertificateVerdict::Violations {
                        count: line.num(toks.next(), "violation count")?,
                        cycles: vec![],
                    },
                    other => return Err(line.syntax(format!("bad verdict {other:?}"))),
                });
            }
            "V" => {
                let Some(CertificateVerdict::Violations { cycles, .. }) = self.verdict.as_mut() else {
                    return Err(line.syntax("V line outside a violations verdict"));
                };
                let vs =
                    toks.by_ref().map(|t| line.num(Some(t), "vertex")).collect::<std::result::Result<Vec<u32>, _>>()?;
                cycles.push(vs);
            }
            "END" => {
                if self.verdict.is_none() {
                    return Err(line.syntax("END before VERDICT"));
                }
                self.ended = true;
            }
            other => return Err(line.syntax(format!("unknown key `{other}`"))),
        }
        if let Some(extra) = toks.next() {
            return Err(line.syntax(format!("trailing token `{extra}`")));
        }
        Ok(())
    }
}

fn side_index(line: &Line, tok: &str, n: u32, base: u32) -> std::result::Result<u32, DecodeError> {
    let i: u32 = line.num(Some(tok), "vertex")?;
    if i >= n {
        return Err(line.syntax(format!("side index {i} >= n = {n}")));
    }
    Ok(i + base)
}
