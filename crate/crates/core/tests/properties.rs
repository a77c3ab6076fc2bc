mod common;

use common::*;
use proptest::prelude::*;
use wiretap_fca::attack_a::{next_combination, unrank_combination};
use wiretap_fca::channel::{cascade, random_key, run_pipeline, ChannelParams};
use wiretap_fca::checks::{build_checks, even_parity_prob, posterior};
use wiretap_fca::gf2::{solve_gf2, BitSequence, Gf2Matrix};
use wiretap_fca::harness::run::format_sig;
use wiretap_fca::harness::{AttackKind, ExperimentConfig};
use wiretap_fca::lfsr::{generate, output_row, LfsrKey};
use wiretap_fca::Exec;

fn bits(len: usize) -> impl Strategy<Value = BitSequence> {
    proptest::collection::vec(any::<bool>(), len).prop_map(BitSequence::from_bits)
}

fn probability() -> impl Strategy<Value = f64> {
    (0u32..=500).prop_map(|i| i as f64 / 1000.0)
}

proptest! {
    #[test]
    fn xor_is_an_involution(len in 1usize..300, seed in any::<u64>()) {
        let a = BitSequence::from_bits((0..len).map(|i| (seed >> (i % 64)) & 1 == 1));
        let b = BitSequence::from_bits((0..len).map(|i| i % 3 == 0));
        prop_assert_eq!(a.xor(&b).unwrap().xor(&b).unwrap(), a.clone());
        prop_assert_eq!(a.hamming_distance(&b).unwrap(), a.xor(&b).unwrap().count_ones());
    }

    #[test]
    fn inverse_solves_square_systems(rows in proptest::collection::vec(bits(12), 12), x in bits(12)) {
        let a = Gf2Matrix::from_rows(12, rows).unwrap();
        let b = a.mul_vec(&x).unwrap();
        match a.inverse() {
            Ok(inv) => {
                prop_assert_eq!(a.rank(), 12);
                prop_assert_eq!(inv.mul_vec(&b).unwrap(), x.clone());
                prop_assert_eq!(solve_gf2(&a, &b).unwrap(), x);
            }
            Err(_) => prop_assert!(a.rank() < 12),
        }
    }

    #[test]
    fn lfsr_output_is_linear_in_the_key(s1 in 1u64..1 << 31, s2 in 1u64..1 << 31) {
        prop_assume!(s1 != s2);
        let poly = poly(DEGREE31_POLY);
        let key = |v: u64| LfsrKey::new(BitSequence::from_word(v, 31)).unwrap();
        let a = generate(&poly, &key(s1), 400).unwrap();
        let b = generate(&poly, &key(s2), 400).unwrap();
        let c = generate(&poly, &key(s1 ^ s2), 400).unwrap();
        prop_assert_eq!(a.xor(&b).unwrap(), c);
    }

    #[test]
    fn output_rows_predict_bits(seed in any::<u64>(), j in 0usize..2000) {
        let poly = poly(TRIALS_POLY);
        let key = random_key(15, seed);
        let a = generate(&poly, &key, 2000).unwrap();
        prop_assert_eq!(output_row(&poly, j).dot(key.bits()).unwrap(), a.get(j));
    }

    #[test]
    fn clean_sequences_satisfy_every_check(seed in any::<u64>()) {
        for text in [DEGREE31_POLY, TRIALS_POLY, "7,1,0"] {
            let poly = poly(text);
            let a = generate(&poly, &random_key(poly.degree(), seed), 1000).unwrap();
            prop_assert!(build_checks(&poly, 1000).unwrap().syndrome(&a).unwrap().is_zero());
        }
    }

    #[test]
    fn cascade_is_a_symmetric_probability(p1 in probability(), p2 in probability()) {
        let p = cascade(p1, p2).unwrap();
        prop_assert_eq!(p, cascade(p2, p1).unwrap());
        prop_assert!((p1.max(p2) - 1e-15..=0.5 + 1e-15).contains(&p));
        prop_assert_eq!(cascade(p1, 0.0).unwrap(), p1);
    }

    #[test]
    fn pipeline_error_rate_is_plausible(p1 in probability(), p2 in probability(), seed in any::<u64>()) {
        let poly = poly("10,3,0");
        let n = 4000;
        let params = ChannelParams::new(p1, p2).unwrap();
        let trace = run_pipeline(&poly, &random_key(10, seed), params, n, seed).unwrap();
        let rate = trace.error_pattern().count_ones() as f64 / n as f64;
        let p = params.p_prime();
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        prop_assert!((rate - p).abs() <= 6.0 * sd + 1e-12);
    }

    #[test]
    fn posterior_is_monotone_in_satisfied_checks(p in 0.01f64..0.49, t in 1usize..8, m in 1usize..60) {
        let s = even_parity_prob(p, t);
        let mut last = -1.0;
        for h in 0..=m {
            let q = posterior(p, s, h, m).unwrap();
            prop_assert!((0.0..=1.0).contains(&q));
            prop_assert!(q >= last);
            last = q;
        }
    }

    #[test]
    fn even_parity_is_between_half_and_one(p in probability(), t in 1usize..20) {
        let s = even_parity_prob(p, t);
        prop_assert!((0.5 - 1e-15..=1.0).contains(&s));
    }

    #[test]
    fn combinations_unrank_in_order(
        (k, w, rank) in (2usize..20)
            .prop_flat_map(|k| (Just(k), 1..k))
            .prop_flat_map(|(k, w)| {
                let total = wiretap_fca::prob::binomial(k, w) as u64;
                (Just(k), Just(w), 0..total - 1)
            })
    ) {
        let mut c = unrank_combination(k, w, rank);
        prop_assert!(c.windows(2).all(|p| p[0] < p[1]));
        prop_assert!(next_combination(&mut c, k));
        prop_assert_eq!(c, unrank_combination(k, w, rank + 1));
    }

    #[test]
    fn config_round_trips(
        p1 in proptest::collection::vec(probability(), 1..4),
        p2 in proptest::collection::vec(probability(), 1..4),
        n in 40usize..100_000,
        seed in any::<u64>(),
        runs in 1usize..50,
        alpha in 1usize..9,
        threshold in any::<bool>(),
    ) {
        let mut cfg = ExperimentConfig::new(AttackKind::B, DEGREE31_POLY, n, p1, p2);
        cfg.seed = seed;
        cfg.runs = runs;
        cfg.alpha = alpha;
        if threshold {
            cfg.verification = wiretap_fca::harness::VerificationMode::Threshold;
            cfg.max_trials = Some(seed % 1000 + 1);
        }
        prop_assert_eq!(ExperimentConfig::parse(&cfg.render()).unwrap(), cfg);
    }

    #[test]
    fn six_significant_digits(x in -1e12f64..1e12) {
        let text = format_sig(x);
        let back: f64 = text.parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-6 * x.abs() + 1e-300);
        let digits = text.split('e').next().unwrap().chars().filter(char::is_ascii_digit).collect::<String>();
        prop_assert!(digits.trim_matches('0').len() <= 6);
    }
}

#[test]
fn attack_results_do_not_depend_on_execution_mode() {
    let mut cfg = ExperimentConfig::new(
        AttackKind::B,
        DEGREE31_POLY,
        3100,
        vec![0.2],
        vec![0.0, 0.1],
    );
    cfg.runs = 2;
    assert_eq!(
        wiretap_fca::harness::run_experiment(&cfg, Exec::Sequential).unwrap(),
        wiretap_fca::harness::run_experiment(&cfg, Exec::Parallel).unwrap()
    );
}
