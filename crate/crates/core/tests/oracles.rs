//! Derived quantities checked against independent computations: brute-force
//! enumeration, Monte Carlo, or direct counting.

mod common;

use common::*;
use rand::Rng;
use wiretap_fca::attack_a::{bound_trials, run_attack_a, AttackAConfig};
use wiretap_fca::attack_b::{derive_threshold, run_attack_b, AttackBConfig, ParityUpdate};
use wiretap_fca::channel::rng_from_seed;
use wiretap_fca::checks::{
    build_checks, even_parity_prob, posterior, reliabilities, ReliabilityModel,
};
use wiretap_fca::lfsr::OutputRows;
use wiretap_fca::prob::binary_entropy;
use wiretap_fca::Exec;

#[test]
fn even_parity_matches_enumeration() {
    for t in 1..=12 {
        for i in 0..=10 {
            let p = i as f64 * 0.05;
            let got = even_parity_prob(p, t);
            let want = even_parity_by_enumeration(p, t);
            assert!((got - want).abs() < 1e-12, "t={t} p={p}: {got} vs {want}");
        }
    }
}

/// One bit plus `m` checks, each over the bit and `t` further independent
/// bits. Enumerates every error pattern of the `1 + m t` bits and returns
/// `Pr(bit correct | h checks hold)` for each `h`.
fn posterior_by_enumeration(p: f64, t: usize, m: usize) -> Vec<f64> {
    let bits = 1 + m * t;
    let mut joint = vec![(0.0, 0.0); m + 1];
    for pattern in 0u32..1 << bits {
        let w = pattern.count_ones() as i32;
        let weight = p.powi(w) * (1.0 - p).powi(bits as i32 - w);
        let own = pattern & 1;
        let holding = (0..m)
            .filter(|c| {
                let others = (pattern >> (1 + c * t)) & ((1 << t) - 1);
                (own + others.count_ones()).is_multiple_of(2)
            })
            .count();
        if own == 0 {
            joint[holding].0 += weight;
        } else {
            joint[holding].1 += weight;
        }
    }
    joint.iter().map(|(ok, bad)| ok / (ok + bad)).collect()
}

#[test]
fn posterior_matches_enumeration() {
    for (t, m) in [(2, 2), (2, 4), (3, 3), (4, 3), (2, 6)] {
        for p in [0.05, 0.2, 0.26, 0.4] {
            let s = even_parity_prob(p, t);
            for (h, want) in posterior_by_enumeration(p, t, m).into_iter().enumerate() {
                let got = posterior(p, s, h, m).unwrap();
                assert!((got - want).abs() < 1e-12, "t={t} m={m} p={p} h={h}");
            }
        }
    }
}

#[test]
fn posterior_matches_monte_carlo() {
    let (p, t, m) = (0.2, 4, 5);
    let s = even_parity_prob(p, t);
    let mut rng = rng_from_seed(11);
    let mut counts = vec![(0u32, 0u32); m + 1];
    for _ in 0..400_000 {
        let own = rng.random::<f64>() < p;
        let holding = (0..m)
            .filter(|_| {
                let wrong = (0..t).filter(|_| rng.random::<f64>() < p).count();
                (own as usize + wrong).is_multiple_of(2)
            })
            .count();
        let entry = &mut counts[holding];
        entry.1 += 1;
        if !own {
            entry.0 += 1;
        }
    }
    for (h, &(ok, total)) in counts.iter().enumerate() {
        if total < 5000 {
            continue;
        }
        let empirical = ok as f64 / total as f64;
        let predicted = posterior(p, s, h, m).unwrap();
        assert!(
            (empirical - predicted).abs() < 0.01,
            "h={h}: {empirical} vs {predicted}"
        );
    }
}

#[test]
fn trial_count_matches_direct_count() {
    for (k, r) in [(15usize, 3usize), (10, 0), (10, 10), (12, 5)] {
        let direct = (0u32..1 << k)
            .filter(|w| w.count_ones() as usize <= r)
            .count() as u128;
        let (exact, bound) = bound_trials(k, r).unwrap();
        assert_eq!(exact, direct);
        if 2 * r <= k {
            assert!(bound + 1e-9 >= exact as f64);
        }
    }
    let (exact, bound) = bound_trials(15, 3).unwrap();
    assert_eq!(exact, 576);
    assert!((bound - 2f64.powf(binary_entropy(0.2) * 15.0)).abs() < 1e-9);
    assert!((bound - 1818.99).abs() < 0.01);
}

#[test]
fn posteriors_are_calibrated() {
    let poly = poly(DEGREE31_POLY);
    let n = 100_000;
    for p in [0.2, 0.26] {
        let (_, trace) = observe(&poly, p, 0.0, n, 5);
        let checks = build_checks(&poly, n).unwrap();
        let model = ReliabilityModel::new(p, poly.taps()).unwrap();
        let post = reliabilities(&checks, &trace.y, &model, Exec::Parallel).unwrap();
        let mut bins = [(0usize, 0.0, 0.0); 10];
        for (j, &q) in post.iter().enumerate() {
            let bin = &mut bins[((q * 10.0) as usize).min(9)];
            bin.0 += 1;
            bin.1 += q;
            bin.2 += (trace.y.get(j) == trace.a.get(j)) as u8 as f64;
        }
        for (count, sum_p, sum_ok) in bins.into_iter().filter(|b| b.0 >= 200) {
            let predicted = sum_p / count as f64;
            let empirical = sum_ok / count as f64;
            let se = (predicted * (1.0 - predicted) / count as f64).sqrt();
            assert!(
                (empirical - predicted).abs() <= 3.0 * se,
                "p={p}: {empirical} vs {predicted} (n={count})"
            );
        }
    }
}

#[test]
fn first_round_gain_matches_expectation() {
    let poly = poly(DEGREE31_POLY);
    let n = 3100;
    let checks = build_checks(&poly, n).unwrap();
    for p in [0.2, 0.26] {
        let model = ReliabilityModel::new(p, poly.taps()).unwrap();
        let expected = derive_threshold(&model, &checks, n).unwrap().flip.n_i();
        let runs = 300;
        let gains: Vec<f64> = (0..runs)
            .map(|seed| {
                let (key, trace) = observe(&poly, p, 0.0, n, seed);
                let mut cfg = AttackBConfig::new(poly.clone(), trace.y, p).with_truth(key);
                cfg.alpha = 1;
                cfg.max_rounds = 1;
                cfg.parity = ParityUpdate::Fixed;
                let report = run_attack_b(&cfg, &checks).unwrap();
                let after = report
                    .traces
                    .last()
                    .and_then(|t| t.correct_bits)
                    .unwrap_or(n);
                after as f64 - report.initial_correct.unwrap() as f64
            })
            .collect();
        let mean = gains.iter().sum::<f64>() / runs as f64;
        let var = gains.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
        let se = (var / runs as f64).sqrt();
        // a mean of integer counts cannot resolve finer than 1/runs
        let tolerance = (3.0 * se).max(1.0 / runs as f64);
        assert!(
            (mean - expected).abs() <= tolerance,
            "p={p}: {mean} vs {expected} (se {se})"
        );
    }
}

#[test]
fn rbar_tracks_selected_errors() {
    let poly = poly(TRIALS_POLY);
    let n = 1500;
    let checks = build_checks(&poly, n).unwrap();
    let rows = OutputRows::with_len(poly.clone(), n);
    for (p1, p2) in [(0.2, 0.0), (0.2, 0.1), (0.3, 0.0), (0.3, 0.1)] {
        let runs = 100;
        let mut errors = 0;
        let mut r_bar = 0.0;
        for seed in 0..runs {
            let (key, trace) = observe(&poly, p1, p2, n, seed);
            let p_prime = wiretap_fca::cascade(p1, p2).unwrap();
            let cfg = AttackAConfig::new(poly.clone(), trace.y, p_prime).with_oracle(key);
            let report = run_attack_a(&cfg, &checks, &rows).unwrap();
            errors += report.selected_errors.unwrap();
            r_bar = report.estimate.r_bar;
        }
        let observed = errors as f64 / runs as f64;
        assert!(
            (observed - r_bar).abs() <= 0.25 * r_bar + 0.1,
            "p1={p1} p2={p2}: {observed} vs {r_bar}"
        );
    }
}

#[test]
fn attack_a_agrees_with_exhaustive_correlation() {
    for text in SMALL_POLYS {
        let poly = poly(text);
        let n = 100 * poly.degree();
        let checks = build_checks(&poly, n).unwrap();
        let rows = OutputRows::with_len(poly.clone(), n);
        for seed in 0..5 {
            let (key, trace) = observe(&poly, 0.2, 0.05, n, seed);
            let best = argmax_correlation_key(&poly, &trace.y);
            let p_prime = wiretap_fca::cascade(0.2, 0.05).unwrap();
            let cfg = AttackAConfig::new(poly.clone(), trace.y.clone(), p_prime);
            let threshold = run_attack_a(&cfg, &checks, &rows).unwrap();
            let oracle = run_attack_a(&cfg.with_oracle(key), &checks, &rows).unwrap();
            assert_eq!(oracle.key.as_ref(), Some(&best), "{text} seed {seed}");
            assert_eq!(threshold.key.as_ref(), Some(&best), "{text} seed {seed}");
        }
    }
}
