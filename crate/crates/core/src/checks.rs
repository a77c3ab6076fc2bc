//! Parity checks derived from the feedback polynomial and its repeated
//! squares, plus the per-bit reliability model built on them.
//!
//! Squaring `g(x)` `d` times multiplies every exponent by `2^d`, so level `d`
//! contributes the checks `y_i + y_{i + 2^d j_1} + ... + y_{i + 2^d k} = 0`
//! for every shift `i` that keeps all indices inside the sequence. Levels are
//! added while `2^d k < n`.
//!
//! Checks are never materialized: a check is a `(level, shift)` pair and the
//! checks touching a bit are enumerated from the tap offsets.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::gf2::BitSequence;
use crate::lfsr::ConnectionPolynomial;

/// Which checks a bit is credited with.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CheckCounting {
    /// A bit belongs to every check in which it occupies any tap position,
    /// so interior bits see `t + 1` checks per level.
    #[default]
    AllTaps,
    /// A bit is credited only with the checks it leads (lowest index), one
    /// per level.
    LeadingOnly,
}

/// One squaring level of the check polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckLevel {
    /// Squaring depth `d`.
    pub depth: u32,
    /// Tap offsets `2^d j_0, ..., 2^d j_t`, ascending.
    pub offsets: Vec<usize>,
    /// Number of valid shifts, `n - 2^d k`.
    pub shifts: usize,
}

impl CheckLevel {
    /// Degree of this level's polynomial, `2^d k`.
    pub fn span(&self) -> usize {
        *self.offsets.last().unwrap()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CheckRef {
    pub level: usize,
    pub shift: usize,
}

#[derive(Clone, Debug)]
pub struct CheckSystem {
    n: usize,
    taps: usize,
    counting: CheckCounting,
    levels: Vec<CheckLevel>,
}

/// Builds the check system for sequences of length `n`, crediting bits with
/// every tap position.
pub fn build_checks(poly: &ConnectionPolynomial, n: usize) -> Result<CheckSystem> {
    CheckSystem::new(poly, n, CheckCounting::AllTaps)
}

impl CheckSystem {
    pub fn new(poly: &ConnectionPolynomial, n: usize, counting: CheckCounting) -> Result<Self> {
        let k = poly.degree();
        if n <= k {
            return Err(Error::InsufficientLength { n, k });
        }
        let mut levels = Vec::new();
        let mut depth = 0u32;
        while let Some(span) = k.checked_mul(1usize << depth) {
            if span >= n {
                break;
            }
            levels.push(CheckLevel {
                depth,
                offsets: poly.exponents().iter().map(|&e| e << depth).collect(),
                shifts: n - span,
            });
            depth += 1;
            if depth as usize >= usize::BITS as usize - 1 {
                break;
            }
        }
        Ok(CheckSystem {
            n,
            taps: poly.taps(),
            counting,
            levels,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Taps `t` of the base polynomial; each check covers `t + 1` bits.
    pub fn taps(&self) -> usize {
        self.taps
    }

    pub fn counting(&self) -> CheckCounting {
        self.counting
    }

    pub fn levels(&self) -> &[CheckLevel] {
        &self.levels
    }

    pub fn num_checks(&self) -> usize {
        self.levels.iter().map(|l| l.shifts).sum()
    }

    /// Sequence positions covered by a check, ascending.
    pub fn check_indices(&self, check: CheckRef) -> impl Iterator<Item = usize> + '_ {
        let level = &self.levels[check.level];
        debug_assert!(check.shift < level.shifts);
        level.offsets.iter().map(move |&o| check.shift + o)
    }

    /// Checks credited to bit `j`, paired with the tap position `j` occupies.
    pub fn checks_of(&self, j: usize) -> impl Iterator<Item = (CheckRef, usize)> + '_ {
        let taps_considered = match self.counting {
            CheckCounting::AllTaps => self.taps + 1,
            CheckCounting::LeadingOnly => 1,
        };
        self.levels.iter().enumerate().flat_map(move |(li, level)| {
            level.offsets[..taps_considered]
                .iter()
                .enumerate()
                .filter_map(move |(tap, &o)| {
                    let shift = j.checked_sub(o)?;
                    (shift < level.shifts).then_some((CheckRef { level: li, shift }, tap))
                })
        })
    }

    /// Total number of checks credited to bit `j`.
    pub fn c_to(&self, j: usize) -> usize {
        self.checks_of(j).count()
    }

    pub fn c_to_all(&self, exec: Exec) -> Vec<u32> {
        exec.map(0..self.n, |j| self.c_to(j) as u32)
    }

    /// Mean of `c_to` over all bits, computed from the level sizes.
    pub fn mean_c_to(&self) -> f64 {
        let per_check = match self.counting {
            CheckCounting::AllTaps => self.taps + 1,
            CheckCounting::LeadingOnly => 1,
        };
        (per_check * self.num_checks()) as f64 / self.n as f64
    }

    /// Mean check count rounded to the nearest integer.
    pub fn rounded_mean_c_to(&self) -> usize {
        self.mean_c_to().round() as usize
    }

    /// Evaluates every check on `y`. A set bit marks an unsatisfied check.
    pub fn syndrome(&self, y: &BitSequence) -> Result<Syndrome> {
        if y.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: y.len(),
            });
        }
        let per_level = self
            .levels
            .iter()
            .map(|level| {
                let mut acc = window(y, level.offsets[0], level.shifts);
                for &o in &level.offsets[1..] {
                    acc.xor_assign(&window(y, o, level.shifts))
                        .expect("windows share a length");
                }
                acc
            })
            .collect();
        Ok(Syndrome { per_level })
    }

    /// Number of satisfied checks `c_s` for every bit.
    pub fn satisfied_counts(&self, syndrome: &Syndrome, exec: Exec) -> Vec<u32> {
        exec.map(0..self.n, |j| {
            self.checks_of(j)
                .filter(|(c, _)| !syndrome.is_unsatisfied(*c))
                .count() as u32
        })
    }
}

/// Bits `y[start..start + len]` as a new sequence, copied word-wise.
fn window(y: &BitSequence, start: usize, len: usize) -> BitSequence {
    debug_assert!(start + len <= y.len());
    let words = y.words();
    let word_shift = start / 64;
    let bit_shift = start % 64;
    let out_words = len.div_ceil(64);
    let mut out = Vec::with_capacity(out_words);
    for i in 0..out_words {
        let lo = words.get(word_shift + i).copied().unwrap_or(0);
        let w = if bit_shift == 0 {
            lo
        } else {
            let hi = words.get(word_shift + i + 1).copied().unwrap_or(0);
            (lo >> bit_shift) | (hi << (64 - bit_shift))
        };
        out.push(w);
    }
    BitSequence::from_words(out, len)
}

/// Check outcomes, one packed vector per level indexed by shift.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Syndrome {
    per_level: Vec<BitSequence>,
}

impl Syndrome {
    pub fn is_unsatisfied(&self, check: CheckRef) -> bool {
        self.per_level[check.level].get(check.shift)
    }

    pub fn weight(&self) -> usize {
        self.per_level.iter().map(BitSequence::count_ones).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.per_level.iter().all(BitSequence::is_zero)
    }

    pub fn level(&self, level: usize) -> &BitSequence {
        &self.per_level[level]
    }
}

/// Probability that an even number of the other `t` bits of a check are in
/// error, each independently with probability `p_prime`.
///
/// Computed with the recursion `s(1) = 1 - p'`,
/// `s(j) = (1 - p') s(j-1) + p' (1 - s(j-1))`.
pub fn even_parity_prob(p_prime: f64, t: usize) -> f64 {
    assert!(t >= 1, "a check has at least one other bit");
    let mut s = 1.0 - p_prime;
    for _ in 1..t {
        s = (1.0 - p_prime) * s + p_prime * (1.0 - s);
    }
    s
}

/// `Pr(y_j = a_j | h of m checks satisfied)`, with prior `1 - p'` on the
/// bit being correct.
///
/// Each satisfied check multiplies the odds of a correct bit by
/// `s / (1 - s)`, each failed one by its inverse.
pub fn posterior(p_prime: f64, s: f64, h: usize, m: usize) -> Result<f64> {
    if h > m {
        return Err(Error::out_of_range("h", h as f64, 0.0, m as f64));
    }
    Ok(posterior_with_prior(1.0 - p_prime, s, h, m))
}

/// Same as [`posterior`] with an arbitrary prior probability of being
/// correct. `h <= m` is the caller's responsibility.
pub fn posterior_with_prior(prior: f64, s: f64, h: usize, m: usize) -> f64 {
    debug_assert!(h <= m);
    if prior <= 0.0 {
        return 0.0;
    }
    if prior >= 1.0 {
        return 1.0;
    }
    let exponent = 2 * h as i64 - m as i64;
    let ratio = ((1.0 - s) / s).powi(exponent as i32);
    let odds_wrong = (1.0 - prior) / prior;
    let x = odds_wrong * ratio;
    if x.is_nan() {
        return 0.5;
    }
    1.0 / (1.0 + x)
}

/// Channel-level inputs to the posterior: `p'`, the tap count `t`, and the
/// derived even-parity probability `s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReliabilityModel {
    pub p_prime: f64,
    pub t: usize,
    pub s: f64,
}

impl ReliabilityModel {
    pub fn new(p_prime: f64, t: usize) -> Result<Self> {
        if !(0.0..=0.5).contains(&p_prime) {
            return Err(Error::out_of_range("p_prime", p_prime, 0.0, 0.5));
        }
        Ok(ReliabilityModel {
            p_prime,
            t,
            s: even_parity_prob(p_prime, t),
        })
    }

    pub fn posterior(&self, h: usize, m: usize) -> Result<f64> {
        posterior(self.p_prime, self.s, h, m)
    }
}

/// Posterior `p*_j` for every bit of `y`, from its own satisfied and total
/// check counts.
pub fn reliabilities(
    checks: &CheckSystem,
    y: &BitSequence,
    model: &ReliabilityModel,
    exec: Exec,
) -> Result<Vec<f64>> {
    let syndrome = checks.syndrome(y)?;
    let sat = checks.satisfied_counts(&syndrome, exec);
    Ok(exec.map(0..checks.n(), |j| {
        posterior_with_prior(
            1.0 - model.p_prime,
            model.s,
            sat[j] as usize,
            checks.c_to(j),
        )
    }))
}
