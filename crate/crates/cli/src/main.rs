use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tricolour::exact::{bipartite_bounds, exact_ramsey, lower_bound_complete, ExactOptions};
use tricolour::hyperaudit::{audit_conflicts_with_cap, audit_regularity, ChainQuery, DEFAULT_CONFLICT_CAP};
use tricolour::lll::{init_fresh, moser_tardos};
use tricolour::matcher::{greedy_match, MatcherParams};
use tricolour::model::{CertificateVerdict, Format, HostParams, StageSeeds};
use tricolour::pipeline::{
    run_pipeline, stage_seeds, PipelineConfig, PipelineVerify, DEFAULT_MAX_ROUNDS, DEFAULT_STALL,
};
use tricolour::verify::{verify_lengths, VerifyMode, DEFAULT_TUPLE_CAP};
use tricolour::{build_host, graph_of_matching, Certificate, Mode};

const THREADS_VAR: &str = "TRICOLOUR_THREADS";

#[derive(Parser)]
#[command(
    name = "tricolour",
    version,
    about = "Build, audit and verify edge colourings in which every short cycle sees three colours"
)]
struct Cli {
    /// Root seed for every random stage.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Text)]
    format: OutFormat,
    /// Where the main artifact goes; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Text,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Format {
        match f {
            OutFormat::Text => Format::Text,
            OutFormat::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum HostMode {
    Complete,
    Bipartite,
}

impl From<HostMode> for Mode {
    fn from(m: HostMode) -> Mode {
        match m {
            HostMode::Complete => Mode::Complete,
            HostMode::Bipartite => Mode::Bipartite,
        }
    }
}

#[derive(Args)]
struct HostArgs {
    #[arg(long, value_enum, default_value_t = HostMode::Complete)]
    mode: HostMode,
    /// Vertices (per side for bipartite hosts).
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    /// Longest forbidden cycle length.
    #[arg(long)]
    ell: u32,
    #[arg(long)]
    eps: Option<f64>,
}

impl HostArgs {
    fn params(&self) -> HostParams {
        HostParams { mode: self.mode.into(), n: self.n, k: self.k, ell: self.ell, eps: self.eps }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckMode {
    Exhaustive,
    Sampled,
}

#[derive(Subcommand)]
enum Command {
    /// Greedy conflict-free block matching; writes an unverified certificate.
    Forge {
        #[command(flatten)]
        host: HostArgs,
        #[arg(long, default_value_t = DEFAULT_STALL)]
        stall: u64,
        #[arg(long)]
        target_coverage: Option<f64>,
        /// Chain statistics to report, as `u,v,m`; repeatable.
        #[arg(long, value_parser = parse_track)]
        track: Vec<ChainQuery>,
    },
    /// Fresh colouring of the leftover graph and resampling of bad events.
    Recolour {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS)]
        max_rounds: u64,
        /// Resample log destination; standard error when absent.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Checks every forbidden cycle of a certificate's colouring.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = CheckMode::Exhaustive)]
        check: CheckMode,
        /// Random cycles per length in sampled mode.
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
        /// Cycle lengths to check instead of the host's forbidden lengths.
        #[arg(long, value_delimiter = ',')]
        lengths: Option<Vec<u32>>,
        /// Writes the certificate with its verdict updated.
        #[arg(long)]
        certificate_out: Option<PathBuf>,
    },
    /// Degree, codegree and conflict audits of the block hypergraph.
    Audit {
        #[command(flatten)]
        host: HostArgs,
        /// Also audit the conflict system.
        #[arg(long)]
        conflicts: bool,
        #[arg(long, default_value_t = DEFAULT_CONFLICT_CAP)]
        conflict_cap: usize,
    },
    /// Exact minimum colour count for a tiny host.
    Exact {
        #[arg(long, value_enum, default_value_t = HostMode::Complete)]
        mode: HostMode,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k_low: u32,
        #[arg(long)]
        k_high: u32,
        #[arg(long, default_value_t = 3)]
        q: u32,
        #[arg(long)]
        no_symmetry: bool,
        /// Writes the witness colouring as `u v colour` lines.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Closed-form lower and upper bound calculators.
    Bounds {
        #[arg(long, value_enum, default_value_t = HostMode::Complete)]
        mode: HostMode,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
    },
    /// Forge, recolour and verify with restarts.
    Pipeline {
        #[command(flatten)]
        host: HostArgs,
        #[arg(long, default_value_t = DEFAULT_STALL)]
        stall: u64,
        #[arg(long)]
        target_coverage: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS)]
        max_rounds: u64,
        #[arg(long, default_value_t = 1)]
        restarts: u32,
        #[arg(long, value_enum, default_value_t = CheckMode::Exhaustive)]
        check: CheckMode,
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
    },
}

fn parse_track(s: &str) -> Result<ChainQuery, String> {
    let parts: Vec<u32> =
        s.split(',').map(|p| p.trim().parse::<u32>().map_err(|e| format!("`{p}`: {e}"))).collect::<Result<_, _>>()?;
    match parts[..] {
        [u, v, m] => Ok(ChainQuery::new(u, v, m)),
        _ => Err(format!("expected u,v,m, got `{s}`")),
    }
}

type Res<T> = Result<T, Box<dyn std::error::Error>>;

struct Ctx {
    seed: u64,
    format: OutFormat,
    out: Option<PathBuf>,
}

impl Ctx {
    fn render<T: Serialize>(&self, text: String, value: &T) -> Res<String> {
        Ok(match self.format {
            OutFormat::Text => text,
            OutFormat::Json => serde_json::to_string_pretty(value)? + "\n",
        })
    }

    /// Writes the main artifact to `--out` (report to stdout) or, without
    /// `--out`, the artifact to stdout and the report to stderr.
    fn emit(&self, artifact: &str, report: &str) -> Res<()> {
        match &self.out {
            Some(p) => {
                write_file(p, artifact)?;
                print!("{report}");
            }
            None => {
                print!("{artifact}");
                eprint!("{report}");
            }
        }
        Ok(())
    }

    /// Reports that are the artifact themselves.
    fn emit_report(&self, report: &str) -> Res<()> {
        match &self.out {
            Some(p) => write_file(p, report),
            None => {
                print!("{report}");
                Ok(())
            }
        }
    }
}

fn write_file(p: &Path, s: &str) -> Res<()> {
    std::fs::write(p, s).map_err(|e| format!("{}: {e}", p.display()).into())
}

fn read_certificate(p: &Path) -> Res<Certificate> {
    let bytes = std::fs::read(p).map_err(|e| format!("{}: {e}", p.display()))?;
    Certificate::decode(&bytes).map_err(|e| format!("{}: {e}", p.display()).into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Ok(v) = std::env::var(THREADS_VAR) {
        match v.parse::<usize>() {
            Ok(t) if t > 0 => {
                tricolour::init_workers(t);
            }
            _ => {
                eprintln!("error: {THREADS_VAR} must be a positive integer, got `{v}`");
                return ExitCode::from(1);
            }
        }
    }
    let ctx = Ctx { seed: cli.seed, format: cli.format, out: cli.out };
    match run(&ctx, cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(ctx: &Ctx, cmd: Command) -> Res<u8> {
    match cmd {
        Command::Forge { host, stall, target_coverage, track } => forge(ctx, &host, stall, target_coverage, track),
        Command::Recolour { input, alpha, delta, max_rounds, log } => {
            recolour(ctx, &input, alpha, delta, max_rounds, log)
        }
        Command::Verify { input, check, budget, lengths, certificate_out } => {
            verify(ctx, &input, check, budget, lengths, certificate_out)
        }
        Command::Audit { host, conflicts, conflict_cap } => audit(ctx, &host, conflicts, conflict_cap),
        Command::Exact { mode, n, k_low, k_high, q, no_symmetry, witness } => {
            exact(ctx, mode.into(), n, (k_low, k_high), q, !no_symmetry, witness)
        }
        Command::Bounds { mode, n, k } => bounds(ctx, mode.into(), n, k),
        Command::Pipeline { host, stall, target_coverage, alpha, delta, max_rounds, restarts, check, budget } => {
            let mut cfg = PipelineConfig::new(host.params(), ctx.seed);
            cfg.stall = stall;
            cfg.target_coverage = target_coverage;
            cfg.alpha = alpha;
            cfg.delta = delta;
            cfg.max_rounds = max_rounds;
            cfg.restarts = restarts;
            cfg.verify = match check {
                CheckMode::Exhaustive => PipelineVerify::Exhaustive,
                CheckMode::Sampled => PipelineVerify::Sampled { budget },
            };
            pipeline(ctx, &cfg)
        }
    }
}

fn forge(ctx: &Ctx, h: &HostArgs, stall: u64, target: Option<f64>, track: Vec<ChainQuery>) -> Res<u8> {
    let host = build_host(h.mode.into(), h.n, h.k, h.ell, h.eps)?;
    let params = MatcherParams { seed: ctx.seed, stall, target_coverage: target, track };
    let (m, tests, stats) = greedy_match(&host, &params)?;
    let mut cert = Certificate::from_parts(&m, &graph_of_matching(&m), ctx.seed);
    cert.stats.coverage = stats.coverage;
    let mut text = String::new();
    writeln!(text, "host {host}")?;
    writeln!(text, "blocks {}", m.len())?;
    writeln!(text, "samples {} accepted {} acceptance {:.4}", stats.samples, stats.accepted, stats.acceptance_rate)?;
    writeln!(text, "rejected incompatible {} conflict {}", stats.rejected_incompatible, stats.rejected_conflict)?;
    writeln!(text, "coverage {:.4}", stats.coverage)?;
    writeln!(text, "vertex weight predicted {:.3}", tests.vertex_weight_predicted)?;
    for t in &tests.chains {
        let q = &t.query;
        writeln!(
            text,
            "track u={} v={} m={} chains {} (predicted {:.3}, deviation {:+.3}) crossed {} (predicted {:.3}, deviation {:+.3})",
            q.u, q.v, q.m, t.chains_in_matching, t.chains_predicted, t.chains_deviation, t.crossed_in_matching,
            t.crossed_predicted, t.crossed_deviation
        )?;
    }
    #[derive(Serialize)]
    struct Out<'a> {
        stats: &'a tricolour::matcher::GreedyStats,
        tests: &'a tricolour::matcher::TestFunctionReport,
    }
    let report = ctx.render(text, &Out { stats: &stats, tests: &tests })?;
    ctx.emit(&cert.encode(ctx.format.into())?, &report)?;
    Ok(0)
}

fn recolour(ctx: &Ctx, input: &Path, alpha: Option<f64>, delta: f64, max_rounds: u64, log: Option<PathBuf>) -> Res<u8> {
    let mut cert = read_certificate(input)?;
    let m = cert.matching()?;
    let alpha = alpha.or(cert.alpha).unwrap_or(delta / 5.0);
    let seeds = stage_seeds(ctx.seed);
    let fresh = init_fresh(&graph_of_matching(&m), alpha, seeds.fresh)?;
    let (coloured, out) = moser_tardos(&fresh, &m, seeds.resample, max_rounds)?;
    let mut lines = String::new();
    for e in &out.log {
        writeln!(lines, "{e}")?;
    }
    match &log {
        Some(p) => write_file(p, &lines)?,
        None => eprint!("{lines}"),
    }
    let root = cert.seed;
    let stats = cert.stats;
    cert = Certificate::from_parts(&m, &coloured, root);
    cert.delta = Some(delta);
    cert.stage_seeds = Some(StageSeeds { matcher: root, ..seeds });
    cert.stats.coverage = stats.coverage;
    cert.stats.rounds = out.rounds;
    cert.stats.attempts = 1;
    let text = format!(
        "fresh palette {}\nrounds {}\nresampling {}\nresidual events {}\n",
        cert.fresh_palette().map_or(0, |p| p.size),
        out.rounds,
        if out.certified { "certified" } else { "stopped at round cap" },
        out.residual.len()
    );
    let report = ctx.render(text, &out)?;
    ctx.emit(&cert.encode(ctx.format.into())?, &report)?;
    Ok(if out.certified { 0 } else { 3 })
}

fn verify(
    ctx: &Ctx,
    input: &Path,
    check: CheckMode,
    budget: u64,
    lengths: Option<Vec<u32>>,
    cert_out: Option<PathBuf>,
) -> Res<u8> {
    let mut cert = read_certificate(input)?;
    let c = cert.colouring()?;
    let mode = match check {
        CheckMode::Exhaustive => VerifyMode::Exhaustive,
        CheckMode::Sampled => VerifyMode::Sampled { budget, seed: ctx.seed },
    };
    let lengths = lengths.unwrap_or_else(|| cert.host.forbidden_lengths());
    let v = verify_lengths(&c, &lengths, mode, DEFAULT_TUPLE_CAP)?;
    let mut text = String::new();
    for l in &v.lengths {
        writeln!(text, "length {:>3}  checked {:>12}  violations {}", l.length, l.checked, l.violations)?;
    }
    for x in &v.violations {
        let cyc: Vec<String> = x.cycle.iter().map(|v| v.to_string()).collect();
        writeln!(text, "violation {}", cyc.join(" "))?;
    }
    writeln!(text, "verdict {}", if v.is_certified() { "certified" } else { "violations" })?;
    let report = ctx.render(text, &v)?;
    cert.verdict = CertificateVerdict::from(&v);
    if let Some(p) = cert_out {
        write_file(&p, &cert.encode(ctx.format.into())?)?;
    }
    ctx.emit_report(&report)?;
    Ok(if v.is_certified() { 0 } else { 2 })
}

fn audit(ctx: &Ctx, h: &HostArgs, conflicts: bool, cap: usize) -> Res<u8> {
    let host = build_host(h.mode.into(), h.n, h.k, h.ell, h.eps)?;
    let mut report = audit_regularity(&host)?;
    if conflicts {
        let c = audit_conflicts_with_cap(&host, cap)?;
        report.entries.extend(c.entries);
        report.conflicts = c.conflicts;
    }
    let text = report.to_string();
    ctx.emit_report(&ctx.render(text, &report)?)?;
    Ok(0)
}

fn exact(
    ctx: &Ctx,
    mode: Mode,
    n: u32,
    (lo, hi): (u32, u32),
    q: u32,
    symmetry: bool,
    witness: Option<PathBuf>,
) -> Res<u8> {
    let r = exact_ramsey(mode, n, lo, hi, q, ExactOptions { symmetry_breaking: symmetry, vertex_cap: None })?;
    let host = r.host()?;
    let mut text = String::new();
    writeln!(text, "host {} n={} lengths {:?} q={}", mode, n, r.lengths, q)?;
    writeln!(text, "value {}", r.value)?;
    match r.refuted {
        Some(c) => writeln!(text, "refuted {c} colours by exhaustive search")?,
        None => writeln!(text, "refuted none (value is the trivial minimum)")?,
    }
    writeln!(text, "cycles {}  nodes {}", r.cycles, r.nodes)?;
    if let Some(p) = witness {
        let mut w = String::new();
        for (i, &c) in r.witness.iter().enumerate() {
            let (u, v) = host.edge_endpoints(i);
            writeln!(w, "{u} {v} {c}")?;
        }
        write_file(&p, &w)?;
        writeln!(text, "witness {}", p.display())?;
    }
    ctx.emit_report(&ctx.render(text, &r)?)?;
    Ok(0)
}

fn bounds(ctx: &Ctx, mode: Mode, n: u32, k: u32) -> Res<u8> {
    let b = match mode {
        Mode::Complete => lower_bound_complete(n, k)?,
        Mode::Bipartite => bipartite_bounds(n, k)?,
    };
    let mut text = String::new();
    writeln!(text, "host {mode} n={n} k={k}")?;
    writeln!(text, "lower bound {}", b.lower_bound)?;
    writeln!(text, "path extremal {}", b.path_extremal)?;
    if let (Some(t), Some((a, c))) = (b.block_parameter, b.upper_coefficient) {
        writeln!(text, "block parameter {t}")?;
        writeln!(text, "upper coefficient {a}/{c}")?;
    }
    ctx.emit_report(&ctx.render(text, &b)?)?;
    Ok(0)
}

fn pipeline(ctx: &Ctx, cfg: &PipelineConfig) -> Res<u8> {
    let out = run_pipeline(cfg)?;
    let mut text = String::new();
    for (i, a) in out.attempts.iter().enumerate() {
        writeln!(
            text,
            "attempt {} seed {} coverage {:.4} leftover {} (max degree {}) rounds {} resampling {} violations {}",
            i + 1,
            a.attempt_seed,
            a.greedy.coverage,
            a.leftover_edges,
            a.leftover_max_degree,
            a.rounds,
            if a.resampling_certified { "certified" } else { "capped" },
            a.violations
        )?;
    }
    writeln!(text, "total colours {}", out.certificate.total_colours())?;
    writeln!(text, "status {:?}", out.status)?;
    #[derive(Serialize)]
    struct Out<'a> {
        status: tricolour::pipeline::PipelineStatus,
        total_colours: u32,
        attempts: &'a [tricolour::pipeline::AttemptSummary],
    }
    let report = ctx.render(
        text,
        &Out { status: out.status, total_colours: out.certificate.total_colours(), attempts: &out.attempts },
    )?;
    ctx.emit(&out.certificate.encode(ctx.format.into())?, &report)?;
    Ok(out.status.exit_code() as u8)
}
