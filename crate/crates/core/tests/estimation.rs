use deanon::deletion::RetentionResult;
use deanon::estimate::{assemble_joint, estimate_p_s, estimate_p_x, estimate_p_y_given_x};
use deanon::info::capacity;
use deanon::matching::StageStatus;
use deanon::rng::Stream;
use deanon::synth::generate_database;
use deanon::{
    deanonymize, Distributions, DistributionEstimate, Instance, MatchOptions, ModelSpec,
    RepetitionPattern, Streams,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn p_x_concentrates() {
    let spec = ModelSpec::bsc(0.1, vec![0.0, 1.0]).unwrap();
    let mut good = 0;
    for t in 0..100 {
        let g1 = generate_database(10_000, 100, &spec, &mut Streams::for_trial(1, 0, t).rng(Stream::SeedRows)).unwrap();
        let p = estimate_p_x(&g1, 2).unwrap();
        if (p[1] - 0.5).abs() <= 0.002 {
            good += 1;
        }
    }
    // sd of the estimate is 0.0005, so 0.002 is four standard deviations
    assert!(good >= 95, "{good}/100");
}

fn conditional_from(spec: &ModelSpec, lambda: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let pattern = RepetitionPattern::new(vec![1; n]);
    let inst = Instance::with_pattern(spec, 1, lambda, pattern, &Streams::new(seed)).unwrap();
    let retention = RetentionResult::from_retained((0..n).collect(), n);
    let q = spec.alphabet_size();
    estimate_p_y_given_x(&inst.seeds.g1, &inst.seeds.g2, &retention, q, 0.0)
        .unwrap()
        .matrix
}

#[test]
fn identity_channel_estimate() {
    let spec = ModelSpec::symmetric(3, 1.0, vec![0.0, 1.0]).unwrap();
    let m = conditional_from(&spec, 10_000, 10, 2);
    for (x, row) in m.iter().enumerate() {
        for (y, p) in row.iter().enumerate() {
            let want = if x == y { 1.0 } else { 0.0 };
            assert!((p - want).abs() <= 0.01);
        }
    }
}

#[test]
fn bsc_crossover_estimate() {
    let spec = ModelSpec::bsc(0.1, vec![0.0, 1.0]).unwrap();
    let m = conditional_from(&spec, 10_000, 10, 3);
    assert!((m[0][1] - 0.1).abs() <= 0.01, "{m:?}");
    assert!((m[1][0] - 0.1).abs() <= 0.01, "{m:?}");
}

#[test]
fn p_s_concentrates() {
    let spec = ModelSpec::bsc(0.1, vec![0.3, 0.4, 0.3]).unwrap();
    let mut good = 0;
    for t in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(t);
        let pattern = deanon::synth::draw_pattern(10_000, &spec, &mut rng).unwrap();
        let p = estimate_p_s(&pattern).unwrap();
        if p.iter().zip(spec.p_s()).all(|(a, b)| (a - b).abs() <= 0.02) {
            good += 1;
        }
    }
    assert!(good >= 95, "{good}/100");
}

#[test]
fn exact_inputs_give_exact_tables() {
    let spec = ModelSpec::bsc(0.1, vec![0.2, 0.5, 0.3]).unwrap();
    let est = DistributionEstimate::from_spec(&spec).unwrap();
    let t0 = est.table(0).unwrap();
    assert_eq!(t0.probs, vec![0.5, 0.5]);
    let t1 = est.table(1).unwrap();
    assert!((t1.prob(1, 1) - 0.45).abs() < 1e-15);
    let t2 = est.table(2).unwrap();
    for x in 0..2 {
        for y1 in 0..2 {
            for y2 in 0..2 {
                let want = 0.5 * spec.p_y_given_x()[x][y1] * spec.p_y_given_x()[x][y2];
                assert!((t2.prob(x, y1 * 2 + y2) - want).abs() < 1e-15);
            }
        }
    }
    // With the true model the plug-in information equals the capacity.
    let c = capacity(&spec).unwrap().capacity;
    assert!((est.mutual_information() - c).abs() < 1e-12);
}

#[test]
fn pipeline_estimate_matches_direct_estimate() {
    let spec = ModelSpec::symmetric(3, 0.8, vec![0.15, 0.6, 0.25]).unwrap();
    let inst = Instance::generate(&spec, 300, 40, 5000, &Streams::new(4)).unwrap();
    let options = MatchOptions::new(3, 2);
    let run = deanonymize(&inst.pair.d1, &inst.pair.d2, &inst.seeds, &options, Distributions::Estimated).unwrap();
    assert_eq!(run.stages.estimation, StageStatus::Ok);
    let pattern = &inst.pair.pattern;
    assert_eq!(run.s_hat.as_ref(), Some(pattern));

    let heads = pattern.run_heads();
    let g2_tilde = inst.seeds.g2.select_columns(&heads);
    let retention = RetentionResult::from_retained(pattern.retained(), pattern.len());
    let p_x = estimate_p_x(&inst.seeds.g1, 3).unwrap();
    let cond = estimate_p_y_given_x(&inst.seeds.g1, &g2_tilde, &retention, 3, 0.0).unwrap();
    let direct = assemble_joint(&p_x, &cond, &estimate_p_s(pattern).unwrap()).unwrap().with_s_max(2);
    let piped = run.estimate.unwrap();
    for (a, b) in [
        (piped.h_joint(), direct.h_joint()),
        (piped.h_y(), direct.h_y()),
        (piped.mutual_information(), direct.mutual_information()),
    ] {
        assert!((a - b).abs() < 1e-12);
    }
    for (a, b) in piped.p_y_given_x.iter().flatten().zip(direct.p_y_given_x.iter().flatten()) {
        assert!((a - b).abs() < 1e-12);
    }
}
