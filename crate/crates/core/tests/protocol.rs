use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relay_core::baselines::{direct_estimator, ml_decode, run_simple_forwarding, EstimateForward};
use relay_core::channel::{ChannelModel, Word};
use relay_core::codebook::{generate_dmc, Codebook, Metric};
use relay_core::oracle::{exact_error_probability, markov_chain_check};
use relay_core::protocol::teacher::IndexSpace;
use relay_core::protocol::{
    reference_decode, BaseEstimator, ProtocolConfig, ProtocolRunner, ReferenceVariant, SourceModel, Transcript,
};

fn bernoulli_runner(theta: f64, n: usize, k: usize, eps: f64, p: f64, seed: u64) -> ProtocolRunner {
    let ch = ChannelModel::bsc(p).unwrap();
    let book = generate_dmc(k, k + 1, &ch, &mut ChaCha8Rng::seed_from_u64(seed), 0.5, 1000).unwrap();
    ProtocolRunner::new(SourceModel::bernoulli(theta).unwrap(), ch, book, ProtocolConfig::new(n, k, eps)).unwrap()
}

fn gaussian_runner(mean: f64, n: usize, k: usize, eps: f64, step: f64, seed: u64) -> ProtocolRunner {
    // 8-ary symmetric channel; the lattice needs more codewords than 2^k
    let rows: Vec<Vec<f64>> = (0..8).map(|i| (0..8).map(|j| if i == j { 0.72 } else { 0.04 }).collect()).collect();
    let ch = ChannelModel::from_rows(rows).unwrap();
    let source = SourceModel::gaussian(mean, 0.25).unwrap();
    let config = ProtocolConfig::new(n, k, eps).with_grid_override(step);
    let space = IndexSpace::new(k, 1.0 / k as f64, BaseEstimator::SampleMean, source.clip_c()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = (0..space.len()).map(|_| Word::new((0..k).map(|_| rng.random_range(0..8u8)).collect())).collect();
    let book = Codebook::new(words, Metric::Bhattacharyya, Some(&ch)).unwrap();
    ProtocolRunner::new(source, ch, book, config).unwrap()
}

fn blocks_of(received: &[u8], k: usize) -> Vec<Word> {
    received.chunks_exact(k).map(|c| Word::new(c.to_vec())).collect()
}

#[test]
fn fast_decoder_matches_reference_bernoulli() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..120 {
        let k = rng.random_range(2..=6);
        let blocks = rng.random_range(2..=36 / k - 1);
        let n = k * (blocks + 1);
        let theta = [0.0, 1.0, 0.5, rng.random_range(0.0..1.0)][case % 4];
        let eps = rng.random_range(0.05..0.45);
        let p = [0.05, 0.1, 0.25][case % 3];
        let r = bernoulli_runner(theta, n, k, eps, p, case as u64);
        let (_, received) = r.simulate(&mut rng).unwrap();
        let fast = r.decode(&received.chunks_exact(k).collect::<Vec<_>>()).unwrap();
        let slow = reference_decode(
            &blocks_of(&received, k),
            ReferenceVariant::Bernoulli,
            r.codebook(),
            r.channel(),
            r.grid(),
            r.exclusion_radius(),
        )
        .unwrap();
        assert_eq!(fast.survivors, slow.survivors, "case {case}");
        assert_eq!(fast.theta_hat, slow.theta_hat, "case {case}");
        assert_eq!(fast.fallback_used, slow.fallback_used);
        for (a, b) in fast.log_scores.iter().zip(&slow.log_scores) {
            assert!(a == b || (a - b).abs() <= 1e-9 * a.abs().max(1.0), "case {case}: {a} vs {b}");
        }
    }
}

#[test]
fn fast_decoder_matches_reference_subgaussian() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..20 {
        let k = rng.random_range(2..=4);
        let n = k * rng.random_range(3..=6);
        let r = gaussian_runner(rng.random_range(0.1..0.9), n, k, 0.3, 1.0 / 32.0, case);
        let (_, received) = r.simulate(&mut rng).unwrap();
        let fast = r.decode(&received.chunks_exact(k).collect::<Vec<_>>()).unwrap();
        let space = r.index_space().unwrap();
        let slow = reference_decode(
            &blocks_of(&received, k),
            ReferenceVariant::SubGaussian { sigma2: 0.25, space },
            r.codebook(),
            r.channel(),
            r.grid(),
            r.exclusion_radius(),
        )
        .unwrap();
        assert_eq!(fast.survivors, slow.survivors, "case {case}");
        assert_eq!(fast.theta_hat, slow.theta_hat, "case {case}");
    }
}

#[test]
fn transcripts_round_trip_and_check() {
    let r = bernoulli_runner(0.3, 60, 6, 0.1, 0.1, 3);
    let run = r.run(&mut ChaCha8Rng::seed_from_u64(4)).unwrap();
    let text = run.transcript.to_jsonl();
    let back = Transcript::from_jsonl(&text).unwrap();
    assert_eq!(back, run.transcript);
    back.check(&r).unwrap();
    let mut bad = back.clone();
    bad.records[0].codeword = (bad.records[0].codeword + 1) % 7;
    assert!(bad.check(&r).is_err());
}

#[test]
fn exact_miss_probability_matches_simulation() {
    // k = 3, two usable blocks: 64 received tuples
    let r = bernoulli_runner(0.35, 9, 3, 0.3, 0.2, 5);
    let exact = exact_error_probability(&r).unwrap();
    assert!(exact.containment_holds());
    let trials = 40_000u32;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let misses = (0..trials).filter(|_| r.misses(r.run(&mut rng).unwrap().theta_hat)).count() as f64;
    let p = exact.miss_probability;
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    assert!((misses / trials as f64 - p).abs() <= 5.0 * se, "{} vs {p}", misses / trials as f64);
    assert!(markov_chain_check(&r).unwrap().satisfied);
}

#[test]
fn exact_probability_is_unchanged_by_relabelling() {
    // mirrored source and mirrored codebook on a symmetric channel
    let a = bernoulli_runner(0.3, 12, 4, 0.2, 0.1, 9);
    let b = ProtocolRunner::new(
        SourceModel::bernoulli(0.7).unwrap(),
        a.channel().clone(),
        Codebook::new(
            a.codebook().codewords().iter().rev().cloned().collect(),
            a.codebook().metric(),
            Some(a.channel()),
        )
        .unwrap(),
        a.config().clone(),
    )
    .unwrap();
    let pa = exact_error_probability(&a).unwrap().miss_probability;
    let pb = exact_error_probability(&b).unwrap().miss_probability;
    assert!((pa - pb).abs() < 1e-12, "{pa} vs {pb}");
}

#[test]
fn baselines_behave_on_clean_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let source = SourceModel::bernoulli(0.5).unwrap();
    let x: Vec<f64> = (0..400).map(|i| (i % 2) as f64).collect();
    let d = direct_estimator(&x, &source, 0.1, 1.0 / 800.0).unwrap();
    assert!((d.theta_hat - 0.5).abs() < 1e-12);

    let clean = ChannelModel::noiseless(2);
    let hits = (0..200)
        .filter(|_| {
            let run = run_simple_forwarding(&source, &clean, 2000, 0.1, None, &mut rng).unwrap();
            (run.theta_hat - 0.5).abs() <= 0.1
        })
        .count();
    assert_eq!(hits, 200);

    let bsc = ChannelModel::bsc(0.1).unwrap();
    let q = EstimateForward::quantizer_for(&source, 0.1, 0.5).unwrap();
    let book = generate_dmc(64, q.len(), &bsc, &mut rng, 0.3, 1000).unwrap();
    for (i, w) in book.codewords().iter().enumerate() {
        assert_eq!(ml_decode(&book, &bsc, w).unwrap(), i);
    }
    let (src, uses) = EstimateForward::oneshot_budget(400, 0.25).unwrap();
    assert_eq!((src, uses), (300, 100));
}
