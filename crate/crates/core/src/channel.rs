//! Two binary symmetric channels in cascade, and the known-plaintext
//! pipeline that turns a hidden LFSR sequence into the eavesdropper's noisy
//! observation.
//!
//! Every stochastic step draws exactly one uniform per bit whatever the flip
//! probability, so runs with the same seed and different probabilities see
//! the same underlying randomness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf2::BitSequence;
use crate::lfsr::{generate, ConnectionPolynomial, LfsrKey};

/// Seedable generator used for every stochastic operation in the crate.
pub type SimRng = ChaCha8Rng;

/// Stream reserved for drawing keys, so key choice never shifts the noise.
const KEY_STREAM: u64 = 1;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Effective flip probability of two BSCs in series: `p1 + p2 - 2 p1 p2`.
pub fn cascade(p1: f64, p2: f64) -> Result<f64> {
    check_unit("p1", p1)?;
    check_unit("p2", p2)?;
    Ok(p1 + p2 - 2.0 * p1 * p2)
}

fn check_unit(name: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::out_of_range(name, p, 0.0, 1.0));
    }
    Ok(())
}

/// Flip probabilities of the keystream-correlation channel (`p1`) and the
/// post-decoding wiretap channel (`p2`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelParams {
    p1: f64,
    p2: f64,
    p_prime: f64,
}

impl ChannelParams {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        for (name, p) in [("p1", p1), ("p2", p2)] {
            if !(0.0..=0.5).contains(&p) {
                return Err(Error::out_of_range(name, p, 0.0, 0.5));
            }
        }
        Ok(ChannelParams {
            p1,
            p2,
            p_prime: cascade(p1, p2)?,
        })
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    pub fn p_prime(&self) -> f64 {
        self.p_prime
    }
}

/// Passes `x` through a BSC with flip probability `p`.
pub fn bsc_transmit<R: Rng + ?Sized>(x: &BitSequence, p: f64, rng: &mut R) -> BitSequence {
    let mut out = x.clone();
    for i in 0..x.len() {
        let u: f64 = rng.random();
        if u < p {
            out.flip(i);
        }
    }
    out
}

pub fn random_bits<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BitSequence {
    BitSequence::from_bits((0..n).map(|_| rng.random::<bool>()))
}

/// Uniformly random nonzero key of length `k` derived from `seed`.
pub fn random_key(k: usize, seed: u64) -> LfsrKey {
    let mut rng = rng_from_seed(seed);
    rng.set_stream(KEY_STREAM);
    loop {
        if let Ok(key) = LfsrKey::new(random_bits(k, &mut rng)) {
            return key;
        }
    }
}

/// All sequences of one known-plaintext observation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineTrace {
    /// LFSR output.
    pub a: BitSequence,
    /// Keystream.
    pub z: BitSequence,
    /// Known plaintext.
    pub m: BitSequence,
    /// Ciphertext.
    pub s: BitSequence,
    /// Eavesdropper's noisy keystream estimate.
    pub y: BitSequence,
    pub seed: u64,
}

impl PipelineTrace {
    /// Positions where `y` disagrees with `a`.
    pub fn error_pattern(&self) -> BitSequence {
        self.y.xor(&self.a).expect("trace sequences share a length")
    }
}

/// Generates `a`, the keystream `z`, plaintext `m`, ciphertext `s = m ^ z`
/// and the eavesdropper's `y = BSC_p2(s) ^ m`.
///
/// Draw order is fixed: `n` uniforms for the keystream channel, `n` plaintext
/// bits, then `n` uniforms for the wiretap channel.
pub fn run_pipeline(
    poly: &ConnectionPolynomial,
    key: &LfsrKey,
    params: ChannelParams,
    n: usize,
    seed: u64,
) -> Result<PipelineTrace> {
    let a = generate(poly, key, n)?;
    let mut rng = rng_from_seed(seed);
    let z = bsc_transmit(&a, params.p1(), &mut rng);
    let m = random_bits(n, &mut rng);
    let s = m.xor(&z)?;
    let received = bsc_transmit(&s, params.p2(), &mut rng);
    let y = received.xor(&m)?;
    Ok(PipelineTrace {
        a,
        z,
        m,
        s,
        y,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cascade_worked_examples() {
        assert_eq!(cascade(0.2, 0.0).unwrap(), 0.2);
        assert!((cascade(0.2, 0.1).unwrap() - 0.26).abs() < 1e-15);
        for x in [0.0, 0.1, 0.37, 0.5] {
            assert!((cascade(0.5, x).unwrap() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn cascade_rejects_out_of_range() {
        assert!(cascade(-0.1, 0.2).is_err());
        assert!(cascade(0.2, 1.5).is_err());
        assert!(ChannelParams::new(0.6, 0.0).is_err());
    }

    #[test]
    fn bsc_extremes() {
        let x = BitSequence::from_u8s(&[1, 0, 0, 1, 1, 1, 0, 1, 0]);
        let mut rng = rng_from_seed(3);
        assert_eq!(bsc_transmit(&x, 0.0, &mut rng), x);
        let flipped = bsc_transmit(&x, 1.0, &mut rng);
        assert_eq!(flipped.hamming_distance(&x).unwrap(), x.len());
    }

    #[test]
    fn bsc_flip_rate_within_binomial_bound() {
        let n = 100_000;
        let p = 0.25;
        let x = BitSequence::zeros(n);
        let out = bsc_transmit(&x, p, &mut rng_from_seed(2024));
        let rate = out.count_ones() as f64 / n as f64;
        assert!((rate - p).abs() <= 3.0 * (p * (1.0 - p) / n as f64).sqrt());
    }

    #[test]
    fn noiseless_pipeline_recovers_a() {
        let poly: ConnectionPolynomial = "7,1,0".parse().unwrap();
        let key = random_key(7, 5);
        let params = ChannelParams::new(0.0, 0.0).unwrap();
        let trace = run_pipeline(&poly, &key, params, 300, 9).unwrap();
        assert_eq!(trace.y, trace.a);
        assert_eq!(trace.z, trace.a);
        assert_eq!(trace.s.xor(&trace.m).unwrap(), trace.z);
    }

    #[test]
    fn random_key_is_nonzero_and_seeded() {
        assert_eq!(random_key(31, 4), random_key(31, 4));
        assert!(!random_key(3, 0).bits().is_zero());
    }
}
