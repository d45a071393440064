//! The two-stage construction end to end: greedy blocks, fresh colouring of
//! the leftover, resampling, verification, with whole-run restarts.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lll::{init_fresh, moser_tardos};
use crate::matcher::{greedy_match, GreedyStats, MatcherParams};
use crate::model::{
    graph_of_matching, Certificate, CertificateVerdict, FreshPalette, HostParams, HostSpec, PipelineStats, StageSeeds,
};
use crate::verify::{verify_colouring, Verdict, VerifyMode};

pub const DEFAULT_DELTA: f64 = 0.1;
pub const DEFAULT_STALL: u64 = 20_000;
pub const DEFAULT_MAX_ROUNDS: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PipelineVerify {
    Exhaustive,
    Sampled { budget: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub host: HostParams,
    pub seed: u64,
    pub stall: u64,
    pub target_coverage: Option<f64>,
    /// Fresh palette exponent; `None` means `delta / 5`.
    pub alpha: Option<f64>,
    pub delta: f64,
    pub max_rounds: u64,
    /// Full runs allowed, at least 1.
    pub restarts: u32,
    pub verify: PipelineVerify,
}

impl PipelineConfig {
    pub fn new(host: HostParams, seed: u64) -> Self {
        PipelineConfig {
            host,
            seed,
            stall: DEFAULT_STALL,
            target_coverage: None,
            alpha: None,
            delta: DEFAULT_DELTA,
            max_rounds: DEFAULT_MAX_ROUNDS,
            restarts: 1,
            verify: PipelineVerify::Exhaustive,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(self.delta / 5.0)
    }

    pub fn validate(&self) -> Result<HostSpec> {
        let host = HostSpec::from_params(self.host)?;
        if self.restarts == 0 {
            return Err(Error::InvalidQuery("restart budget must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidQuery(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        FreshPalette::new(host.n(), self.alpha())?;
        MatcherParams { seed: 0, stall: self.stall, target_coverage: self.target_coverage, track: Vec::new() }
            .validate()?;
        Ok(host)
    }
}

/// Process exit status of a pipeline run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PipelineStatus {
    Certified,
    /// The final attempt's verifier found violations.
    Violations,
    /// Every attempt stopped at the resampling cap without verifier violations
    /// on the last one.
    RetriesExhausted,
}

impl PipelineStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            PipelineStatus::Certified => 0,
            PipelineStatus::Violations => 2,
            PipelineStatus::RetriesExhausted => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttemptSummary {
    pub attempt_seed: u64,
    pub stage_seeds: StageSeeds,
    pub greedy: GreedyStats,
    pub leftover_edges: usize,
    pub leftover_max_degree: u32,
    pub rounds: u64,
    pub resampling_certified: bool,
    pub violations: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineOutcome {
    pub certificate: Certificate,
    pub status: PipelineStatus,
    pub attempts: Vec<AttemptSummary>,
    /// Verdict of the final attempt.
    pub verdict: Verdict,
}

/// Stage seeds of one attempt, split from the attempt seed.
pub fn stage_seeds(attempt_seed: u64) -> StageSeeds {
    let mut rng = ChaCha8Rng::seed_from_u64(attempt_seed);
    StageSeeds { matcher: rng.next_u64(), fresh: rng.next_u64(), resample: rng.next_u64(), verify: rng.next_u64() }
}

/// Runs attempts with seeds `seed, seed+1, …` until one is certified by both
/// the resampling loop and the verifier, or the restart budget is spent.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    let host = cfg.validate()?;
    let alpha = cfg.alpha();
    let mut attempts = Vec::new();
    for a in 0..cfg.restarts {
        let attempt_seed = cfg.seed.wrapping_add(a as u64);
        let seeds = stage_seeds(attempt_seed);
        let mut mp = MatcherParams::new(seeds.matcher, cfg.stall);
        mp.target_coverage = cfg.target_coverage;
        let (m, _, greedy) = greedy_match(&host, &mp)?;
        let base = graph_of_matching(&m);
        let leftover = crate::model::leftover_graph(&base);
        let fresh = init_fresh(&base, alpha, seeds.fresh)?;
        let (coloured, mt) = moser_tardos(&fresh, &m, seeds.resample, cfg.max_rounds)?;
        let mode = match cfg.verify {
            PipelineVerify::Exhaustive => VerifyMode::Exhaustive,
            PipelineVerify::Sampled { budget } => VerifyMode::Sampled { budget, seed: seeds.verify },
        };
        let verdict = verify_colouring(&coloured, mode)?;
        attempts.push(AttemptSummary {
            attempt_seed,
            stage_seeds: seeds,
            greedy: greedy.clone(),
            leftover_edges: leftover.edges.len(),
            leftover_max_degree: leftover.max_degree,
            rounds: mt.rounds,
            resampling_certified: mt.certified,
            violations: verdict.violation_count(),
        });
        let done = mt.certified && verdict.is_certified();
        if done || a + 1 == cfg.restarts {
            let mut cert = Certificate::from_parts(&m, &coloured, cfg.seed);
            cert.delta = Some(cfg.delta);
            cert.stage_seeds = Some(seeds);
            cert.stats = PipelineStats { coverage: greedy.coverage, rounds: mt.rounds, attempts: a + 1 };
            cert.verdict = if verdict.is_certified() && !mt.certified {
                CertificateVerdict::Unverified
            } else {
                CertificateVerdict::from(&verdict)
            };
            let status = if done {
                PipelineStatus::Certified
            } else if verdict.is_certified() {
                PipelineStatus::RetriesExhausted
            } else {
                PipelineStatus::Violations
            };
            return Ok(PipelineOutcome { certificate: cert, status, attempts, verdict });
        }
    }
    unreachable!("restart budget is at least 1")
}
