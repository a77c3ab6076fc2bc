#![allow(dead_code)]

use wiretap_fca::channel::{random_key, run_pipeline, ChannelParams, PipelineTrace};
use wiretap_fca::gf2::BitSequence;
use wiretap_fca::lfsr::{generate, ConnectionPolynomial, LfsrKey};

pub const DEGREE31_POLY: &str = "31,21,12,3,2,1,0";
pub const TRIALS_POLY: &str = "15,4,2,1,0";
pub const BOUND_POLY: &str = "32,10,4,3,2,1,0";
pub const SMALL_POLYS: [&str; 3] = ["5,2,0", "7,1,0", "10,3,0"];

pub fn poly(text: &str) -> ConnectionPolynomial {
    text.parse().unwrap()
}

pub fn observe(
    poly: &ConnectionPolynomial,
    p1: f64,
    p2: f64,
    n: usize,
    seed: u64,
) -> (LfsrKey, PipelineTrace) {
    let key = random_key(poly.degree(), seed);
    let params = ChannelParams::new(p1, p2).unwrap();
    let trace = run_pipeline(poly, &key, params, n, seed).unwrap();
    (key, trace)
}

/// Probability that `t` independent bits, each wrong with probability `p`,
/// contain an even number of errors, by summing over all `2^t` patterns.
pub fn even_parity_by_enumeration(p: f64, t: usize) -> f64 {
    (0u32..1 << t)
        .filter(|pattern| pattern.count_ones() % 2 == 0)
        .map(|pattern| {
            let w = pattern.count_ones() as i32;
            p.powi(w) * (1.0 - p).powi(t as i32 - w)
        })
        .sum()
}

/// Key whose sequence agrees with `y` in the most positions; lowest key
/// value on ties.
pub fn argmax_correlation_key(poly: &ConnectionPolynomial, y: &BitSequence) -> LfsrKey {
    let k = poly.degree();
    let mut best = (0usize, 0u64);
    for value in 1u64..1 << k {
        let key = LfsrKey::new(BitSequence::from_word(value, k)).unwrap();
        let a = generate(poly, &key, y.len()).unwrap();
        let agree = y.len() - a.hamming_distance(y).unwrap();
        if agree > best.0 {
            best = (agree, value);
        }
    }
    LfsrKey::new(BitSequence::from_word(best.1, k)).unwrap()
}
