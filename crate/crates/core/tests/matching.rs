use deanon::matching::{match_rows, segment, typicality_deviation, RowStatus, StageStatus};
use deanon::rng::Stream;
use deanon::synth::{apply_channel, generate_database, generate_seeds};
use deanon::{
    deanonymize, Distributions, DistributionEstimate, Instance, MatchOptions, ModelSpec,
    RepetitionPattern, SeedPair, Streams,
};

#[test]
fn true_rows_are_jointly_typical() {
    let spec = ModelSpec::bsc(0.1, vec![0.0, 1.0]).unwrap();
    let est = DistributionEstimate::from_spec(&spec).unwrap();
    let n = 10_000;
    let mut typical = 0;
    for t in 0..100 {
        let inst = Instance::generate(&spec, 1, n, 1, &Streams::for_trial(1, 0, t)).unwrap();
        let seg = segment(&inst.pair.d2, &inst.pair.pattern, 2).unwrap();
        let dev = typicality_deviation(inst.pair.d1.row(0), &seg, 0, &est).unwrap();
        if dev.joint <= 0.05 {
            typical += 1;
        }
    }
    assert!(typical >= 99, "{typical}/100");
}

#[test]
fn tiny_noiseless_databases_match_exactly() {
    let spec = ModelSpec::symmetric(2, 1.0, vec![0.0, 1.0]).unwrap();
    let est = DistributionEstimate::from_spec(&spec).unwrap();
    let mut exact = 0;
    for t in 0..100 {
        let inst = Instance::generate(&spec, 4, 50, 1, &Streams::for_trial(2, 0, t)).unwrap();
        let seg = segment(&inst.pair.d2, &inst.pair.pattern, 2).unwrap();
        let r = match_rows(&inst.pair.d1, &seg, &est, 0.1).unwrap();
        if r.row_error_rate(&inst.pair.sigma) == 0.0 {
            exact += 1;
        }
    }
    assert!(exact >= 95, "{exact}/100");
}

#[test]
fn noiseless_full_pipeline_recovers_every_row() {
    // m = 2^(n/4) with neither deletions nor replicas: both replica series
    // are single-component and every column is its own source.
    let spec = ModelSpec::symmetric(2, 1.0, vec![0.0, 1.0]).unwrap();
    let inst = Instance::generate(&spec, 1024, 40, 2000, &Streams::new(3)).unwrap();
    let options = MatchOptions::new(2, 1).with_epsilon(0.1);
    let run = deanonymize(&inst.pair.d1, &inst.pair.d2, &inst.seeds, &options, Distributions::Estimated).unwrap();
    assert!(run.stages.replica_single_component);
    assert_eq!(run.stages.matching, StageStatus::Ok);
    assert_eq!(run.row_error_rate(&inst.pair.sigma), 0.0);
}

#[test]
fn six_user_instance() {
    // Six users; the second column is replicated and the fifth deleted. Row
    // i of D1 is row sigma(i) of D2 with sigma = (2 6 4 1 3 5), 1-based.
    let sigma = vec![1, 5, 3, 0, 2, 4];
    let pattern = RepetitionPattern::new(vec![1, 2, 1, 1, 0, 1]);
    let spec = ModelSpec::symmetric(2, 1.0, vec![0.2, 0.6, 0.2]).unwrap();
    let streams = Streams::new(5);
    let d1 = generate_database(6, 6, &spec, &mut streams.rng(Stream::Database)).unwrap();
    let kept = d1.select_columns(&pattern.retained());
    let rows: std::collections::HashSet<_> = kept.row_iter().collect();
    assert_eq!(rows.len(), 6, "draw has duplicate rows; pick another seed");
    let d2 = apply_channel(&d1, &pattern, &sigma, &spec, &mut streams.rng(Stream::Channel)).unwrap();
    assert_eq!(d2.cols(), 6);
    let seeds: SeedPair = generate_seeds(
        10_000,
        6,
        &pattern,
        &spec,
        &mut streams.rng(Stream::SeedRows),
        &mut streams.rng(Stream::SeedChannel),
    )
    .unwrap();

    let options = MatchOptions::new(2, 2).with_epsilon(0.1);
    let run = deanonymize(&d1, &d2, &seeds, &options, Distributions::Estimated).unwrap();
    assert_eq!(run.s_hat.as_ref(), Some(&pattern), "{:?}", run.stages);
    let seg = segment(&d2, &pattern, 2).unwrap();
    assert_eq!(seg.arity(), &[1, 2, 1, 1, 0, 1]);
    let result = run.matching.unwrap();
    assert!(result.status.iter().all(|s| *s == RowStatus::Matched));
    let hat: Vec<usize> = result.sigma_hat.iter().map(|s| s.unwrap()).collect();
    assert_eq!(hat, sigma);
}
