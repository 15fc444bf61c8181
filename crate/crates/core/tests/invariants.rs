use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relay_core::channel::{ChannelModel, Word};
use relay_core::codebook::{generate_binary, verify, Codebook, Metric};
use relay_core::exponents::{bernoulli_db, binary_kl, c_m_bsc, e_src_bernoulli};
use relay_core::numeric::{exact, log_sum_exp};
use relay_core::protocol::teacher::{exact_branch_probabilities, median_of_means, rounding_branches};
use relay_core::protocol::{survivors, Grid};

/// Survivors by definition: clearly above every point at index distance >= d.
fn survivors_naive(scores: &[f64], d: usize) -> Vec<usize> {
    let above = |a: f64, b: f64| b == f64::NEG_INFINITY && a > b || a - b > 1e-10 * a.abs().max(b.abs()).max(1.0);
    (0..scores.len())
        .filter(|&i| (0..scores.len()).all(|j| i.abs_diff(j) < d || above(scores[i], scores[j])))
        .collect()
}

proptest! {
    #[test]
    fn db_is_a_symmetric_nonnegative_divergence(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let ab = bernoulli_db(a, b).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab, bernoulli_db(b, a).unwrap());
        prop_assert!(bernoulli_db(a, a).unwrap().abs() < 1e-15);
        // rho <= 1 with equality on the diagonal
        let rho = (a * b).sqrt() + ((1.0 - a) * (1.0 - b)).sqrt();
        if rho > 0.0 {
            prop_assert!((ab - (-rho.ln()).max(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn source_exponent_identities(eps in 1e-4f64..0.4999) {
        let e = e_src_bernoulli(eps).unwrap();
        let closed = -0.5 * (1.0 - 4.0 * eps * eps).ln();
        prop_assert!((e - closed).abs() <= 1e-12 * closed.max(1e-300) + 1e-15);
        prop_assert!((bernoulli_db(0.5 - eps, 0.5 + eps).unwrap() - closed).abs() < 1e-12);
        prop_assert!((binary_kl(0.5, 0.5 + eps).unwrap() - closed).abs() < 1e-12);
        prop_assert!((binary_kl(0.5, 0.5 - eps).unwrap() - closed).abs() < 1e-12);
        // more accuracy never costs less
        prop_assert!(e_src_bernoulli(eps * 0.9).unwrap() < e);
    }

    #[test]
    fn kl_dominates_twice_db(a in 0.001f64..0.999, b in 0.001f64..0.999) {
        prop_assert!(binary_kl(a, b).unwrap() + 1e-12 >= 2.0 * bernoulli_db(a, b).unwrap());
    }

    #[test]
    fn c_m_decreases_to_one(m in 2u64..2000) {
        let c = c_m_bsc(m).unwrap();
        prop_assert!(c > 1.0 && c <= 2.0);
        prop_assert!(c_m_bsc(m + 1).unwrap() <= c);
    }

    #[test]
    fn fast_survivors_match_definition(
        scores in prop::collection::vec(prop_oneof![(-5i32..5).prop_map(f64::from), -10.0f64..10.0], 1..40),
        d in 0usize..12,
    ) {
        prop_assert_eq!(survivors(&scores, d), survivors_naive(&scores, d));
    }

    #[test]
    fn survivors_contain_a_unique_argmax(scores in prop::collection::vec(-3.0f64..3.0, 1..30), d in 1usize..10) {
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let argmax: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] == max).collect();
        let s = survivors(&scores, d);
        if argmax.len() == 1 {
            prop_assert!(s.contains(&argmax[0]));
        }
        // survivors sit within d - 1 of each other
        if let (Some(a), Some(b)) = (s.first(), s.last()) {
            prop_assert!(b - a < 2 * d);
        }
    }

    #[test]
    fn grid_rounding(lo in -2.0f64..2.0, len in 2usize..500, x in -3.0f64..3.0, target in -3.0f64..3.0) {
        let step = 1.0 / 64.0;
        let g = Grid::new(lo, lo + (len - 1) as f64 * step, step).unwrap();
        prop_assert_eq!(g.len(), len);
        let i = g.nearest(x);
        let clamped = x.clamp(g.value(0), g.value(len - 1));
        prop_assert!((g.value(i) - clamped).abs() <= step / 2.0 + 1e-12);
        let j = g.round_toward(x, target);
        if x >= g.value(0) && x <= g.value(len - 1) {
            prop_assert!((g.value(j) - x).abs() < step + 1e-12);
            // never moves away from the target
            prop_assert!((g.value(j) - target).abs() <= (x - target).abs() + 1e-12);
        }
    }

    #[test]
    fn stochastic_rounding_is_exactly_unbiased(x in -50.0f64..50.0, inv in 1u32..600) {
        let step = 1.0 / inv as f64;
        let (p_down, p_up, down) = exact_branch_probabilities(x, step);
        let s = exact(step);
        let lo = BigRational::from_integer(down.into()) * &s;
        let hi = BigRational::from_integer((down + 1).into()) * &s;
        prop_assert_eq!(&p_down * lo + &p_up * hi, exact(x));
        prop_assert!(p_up >= BigRational::from_integer(0.into()));
        let b = rounding_branches(x, step);
        prop_assert_eq!(b.down, down);
    }

    #[test]
    fn median_of_means_is_bracketed(block in prop::collection::vec(-100.0f64..100.0, 1..64), g in 1usize..64) {
        let groups = g.min(block.len());
        let m = median_of_means(&block, groups).unwrap();
        let lo = block.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = block.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(m >= lo - 1e-9 && m <= hi + 1e-9);
        let c = vec![block[0]; block.len()];
        prop_assert!((median_of_means(&c, groups).unwrap() - block[0]).abs() < 1e-9);
    }

    #[test]
    fn log_sum_exp_bounds(v in prop::collection::vec(-700.0f64..700.0, 1..20)) {
        let l = log_sum_exp(&v);
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(l >= max && l <= max + (v.len() as f64).ln() + 1e-9);
    }

    #[test]
    fn binary_books_verify_and_round_trip(k in 4usize..40, m in 2usize..12, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let Ok(book) = generate_binary(k, m, 0.25, &mut rng, 200) {
            let v = verify(&book, None).unwrap();
            prop_assert!(v.min_pairwise >= (0.25 * k as f64).ceil());
            let back = Codebook::from_text(&book.to_text().unwrap(), None).unwrap();
            prop_assert_eq!(back.codewords(), book.codewords());
            prop_assert_eq!(back.metric(), Metric::Hamming);
        }
    }

    #[test]
    fn word_db_is_additive(bits in prop::collection::vec(any::<bool>(), 1..30), p in 0.01f64..0.49) {
        let ch = ChannelModel::bsc(p).unwrap();
        let a = Word::new(bits.iter().map(|&b| b as u8).collect());
        let b = Word::zeros(bits.len());
        let ones = bits.iter().filter(|&&b| b).count() as f64;
        let per = -(2.0 * (p * (1.0 - p)).sqrt()).ln();
        prop_assert!((ch.word_db(&a, &b).unwrap() - ones * per).abs() < 1e-9);
    }
}
