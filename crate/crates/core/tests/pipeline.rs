mod common;

use common::*;
use tricolour::model::{CertificateVerdict, Format, HostParams};
use tricolour::pipeline::{run_pipeline, PipelineConfig, PipelineStatus, PipelineVerify};
use tricolour::verify::{verify_colouring, VerifyMode};
use tricolour::{Certificate, Mode};

fn config(n: u32, seed: u64) -> PipelineConfig {
    let mut cfg = PipelineConfig::new(HostParams { mode: Mode::Complete, n, k: 3, ell: 4, eps: None }, seed);
    cfg.alpha = Some(0.25);
    cfg.stall = 3000;
    cfg.restarts = 4;
    cfg
}

#[test]
fn certified_certificate_survives_a_round_trip() {
    let out = run_pipeline(&config(24, 3)).unwrap();
    assert_eq!(out.status, PipelineStatus::Certified);
    for fmt in [Format::Text, Format::Json] {
        let back = Certificate::decode(out.certificate.encode(fmt).unwrap().as_bytes()).unwrap();
        assert_eq!(back, out.certificate);
        let c = back.colouring().unwrap();
        assert!(verify_colouring(&c, VerifyMode::Exhaustive).unwrap().is_certified());
        assert!(brute_violations(&c, &[3, 4]).is_empty());
    }
    assert!(out.certificate.total_colours() <= 24 + 11);
}

#[test]
fn runs_are_reproducible() {
    let a = run_pipeline(&config(20, 8)).unwrap();
    let b = run_pipeline(&config(20, 8)).unwrap();
    assert_eq!(a.certificate, b.certificate);
    assert_eq!(a.attempts, b.attempts);
}

#[test]
fn capped_resampling_reports_exhaustion_or_violations() {
    let mut cfg = config(20, 1);
    cfg.max_rounds = 0;
    cfg.restarts = 2;
    let out = run_pipeline(&cfg).unwrap();
    assert_eq!(out.attempts.len(), 2);
    match out.status {
        PipelineStatus::Violations => {
            let c = out.certificate.colouring().unwrap();
            let genuine = brute_violations(&c, &[3, 4]);
            let CertificateVerdict::Violations { count, cycles } = &out.certificate.verdict else {
                panic!("verdict {:?}", out.certificate.verdict)
            };
            assert_eq!(*count as usize, genuine.len());
            assert!(cycles.iter().all(|cy| genuine.contains(cy)));
        }
        PipelineStatus::RetriesExhausted => {
            assert_eq!(out.certificate.verdict, CertificateVerdict::Unverified);
        }
        PipelineStatus::Certified => panic!("nothing was resampled"),
    }
    assert_ne!(out.status.exit_code(), 0);
}

#[test]
fn sampled_verification_is_accepted() {
    let mut cfg = config(20, 2);
    cfg.verify = PipelineVerify::Sampled { budget: 500 };
    let out = run_pipeline(&cfg).unwrap();
    assert_eq!(out.status, PipelineStatus::Certified);
}
