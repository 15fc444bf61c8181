use relay_core::oracle::exact_error_probability;
use relay_sim::experiment::{estimate_with, Prepared};
use relay_sim::{run_experiment, ExperimentSpec};

fn spec(json: &str) -> ExperimentSpec {
    ExperimentSpec::from_json(json).unwrap()
}

const TINY: &str = r#"{"strategy":"main","source":{"type":"bernoulli","theta":0.35},
    "channel":{"type":"bsc","p":0.2},"eps":0.3,"n_values":[9],"trials":2000,"master_seed":0,
    "params":{"k_rule":{"fixed":3}}}"#;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn thread_count_does_not_change_results() {
    let s = spec(
        r#"{"strategy":"main","source":{"type":"bernoulli","theta":0.5},"channel":{"type":"bsc","p":0.1},
        "eps":0.1,"n_values":[100,150],"trials":500,"master_seed":42}"#,
    );
    let one = in_pool(1, || run_experiment(&s).unwrap());
    let four = in_pool(4, || run_experiment(&s).unwrap());
    assert_eq!(one, four);
    assert_eq!(one.to_csv(), four.to_csv());
    assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&four).unwrap());
}

#[test]
fn extra_trials_extend_rather_than_reshuffle() {
    // the first 300 trials of a 600-trial run are the 300-trial run
    let mut s = spec(TINY);
    s.trials = 300;
    let p = Prepared::new(&s, 9).unwrap();
    let short = estimate_with(&p, &s, 9).unwrap();
    let per_trial: Vec<bool> = (0..600)
        .map(|t| p.trial(relay_sim::trial_seed(s.master_seed, "main", 9, t)).unwrap().miss)
        .collect();
    assert_eq!(short.misses, per_trial[..300].iter().filter(|&&m| m).count() as u64);
    s.trials = 600;
    let long = estimate_with(&p, &s, 9).unwrap();
    assert_eq!(long.misses, per_trial.iter().filter(|&&m| m).count() as u64);
}

#[test]
fn wilson_intervals_cover_the_exact_probability() {
    let mut covered = 0;
    for rep in 0..100 {
        let mut s = spec(TINY);
        s.master_seed = rep;
        let prepared = Prepared::new(&s, 9).unwrap();
        let Prepared::Main(runner) = &prepared else { panic!("main strategy") };
        let exact = exact_error_probability(runner).unwrap().miss_probability;
        let row = estimate_with(&prepared, &s, 9).unwrap();
        if row.wilson_lo <= exact && exact <= row.wilson_hi {
            covered += 1;
        }
    }
    assert!(covered >= 93, "covered {covered}/100");
}

#[test]
fn rows_satisfy_table_invariants() {
    let t = run_experiment(&spec(TINY)).unwrap();
    for r in &t.rows {
        assert_eq!(r.p_hat, r.misses as f64 / r.trials as f64);
        assert!(r.wilson_lo <= r.p_hat && r.p_hat <= r.wilson_hi);
        assert!(r.fallback_count <= r.trials);
    }
    // one row cannot be fitted
    assert!(t.fit.is_none() && t.fit_note.is_some());
}
