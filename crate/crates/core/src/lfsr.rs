//! Maximal-length LFSR sequences and the linear map from initial state to
//! output bits.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gf2::BitSequence;

/// Feedback polynomial `g(x)` given by the exponents of its nonzero
/// coefficients.
///
/// Exponents are kept ascending, so `exponents()[0] == 0` and the last entry
/// is the degree `k`. The number of taps `t` is one less than the number of
/// nonzero coefficients and is always even.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConnectionPolynomial {
    exponents: Vec<usize>,
}

impl ConnectionPolynomial {
    pub fn new(mut exponents: Vec<usize>) -> Result<Self> {
        exponents.sort_unstable();
        if exponents.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPolynomial("repeated exponent".into()));
        }
        if exponents.first() != Some(&0) {
            return Err(Error::InvalidPolynomial(
                "constant term g_0 must be 1".into(),
            ));
        }
        if exponents.len() < 2 {
            return Err(Error::InvalidPolynomial("degree must be at least 1".into()));
        }
        if exponents.len().is_multiple_of(2) {
            return Err(Error::InvalidPolynomial(format!(
                "{} nonzero coefficients; a primitive polynomial has an odd count",
                exponents.len()
            )));
        }
        Ok(ConnectionPolynomial { exponents })
    }

    /// Degree `k`, the register length.
    pub fn degree(&self) -> usize {
        *self.exponents.last().unwrap()
    }

    /// Number of feedback taps `t`.
    pub fn taps(&self) -> usize {
        self.exponents.len() - 1
    }

    pub fn exponents(&self) -> &[usize] {
        &self.exponents
    }

    /// Exponents below the degree: the offsets whose XOR produces
    /// `a_{j+k}` from the window starting at `j`.
    pub fn feedback_offsets(&self) -> &[usize] {
        &self.exponents[..self.exponents.len() - 1]
    }

    /// Period of the generated sequence for a nonzero state, found by walking
    /// the state space. Only available for `k <= 32`.
    pub fn period(&self) -> Option<u64> {
        let k = self.degree();
        if k > 32 {
            return None;
        }
        let mask = (1u64 << k) - 1;
        let taps: u64 = self.feedback_offsets().iter().map(|&e| 1u64 << e).sum();
        let start = 1u64;
        let mut state = start;
        for step in 1..=(1u64 << k) {
            let feedback = (state & taps).count_ones() as u64 & 1;
            state = ((state >> 1) | (feedback << (k - 1))) & mask;
            if state == start {
                return Some(step);
            }
        }
        None
    }

    /// True when the state walk confirms period `2^k - 1`; `None` when `k` is
    /// too large to check.
    pub fn has_maximal_period(&self) -> Option<bool> {
        let k = self.degree();
        if k > 24 {
            return None;
        }
        self.period().map(|p| p == (1u64 << k) - 1)
    }
}

impl FromStr for ConnectionPolynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let exponents = s
            .split(',')
            .map(|part| {
                let part = part.trim();
                part.parse::<usize>().map_err(|_| {
                    Error::InvalidPolynomial(format!("`{part}` is not a nonnegative integer"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ConnectionPolynomial::new(exponents)
    }
}

impl fmt::Display for ConnectionPolynomial {
    /// Comma-separated exponents, highest first: `31,21,12,3,2,1,0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.exponents.iter().rev().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Initial register contents `(a_0, ..., a_{k-1})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LfsrKey(BitSequence);

impl LfsrKey {
    pub fn new(bits: BitSequence) -> Result<Self> {
        if bits.is_zero() {
            return Err(Error::DegenerateKey);
        }
        Ok(LfsrKey(bits))
    }

    pub fn bits(&self) -> &BitSequence {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for LfsrKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// First `n` output bits of the register started from `key`.
pub fn generate(poly: &ConnectionPolynomial, key: &LfsrKey, n: usize) -> Result<BitSequence> {
    let k = poly.degree();
    if key.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: key.len(),
        });
    }
    if n < k {
        return Err(Error::InsufficientLength { n, k });
    }
    Ok(extend_recurrence(poly, key.bits(), n))
}

/// Runs the recurrence from an arbitrary (possibly zero) initial window.
pub(crate) fn extend_recurrence(
    poly: &ConnectionPolynomial,
    state: &BitSequence,
    n: usize,
) -> BitSequence {
    let k = poly.degree();
    let offsets = poly.feedback_offsets();
    let mut bits: Vec<bool> = Vec::with_capacity(n);
    bits.extend(state.iter());
    for j in 0..n.saturating_sub(k) {
        let next = offsets.iter().fold(false, |acc, &e| acc ^ bits[j + e]);
        bits.push(next);
    }
    bits.truncate(n);
    BitSequence::from_bits(bits)
}

/// Row `r` with `a_j = r · key` for every key.
pub fn output_row(poly: &ConnectionPolynomial, j: usize) -> BitSequence {
    let mut rows = OutputRows::new(poly.clone());
    rows.extend_to(j + 1);
    rows.row(j).clone()
}

/// Cache of output rows `0..len`, filled by running the recurrence on
/// symbolic unit vectors.
#[derive(Clone, Debug)]
pub struct OutputRows {
    poly: ConnectionPolynomial,
    rows: Vec<BitSequence>,
}

impl OutputRows {
    pub fn new(poly: ConnectionPolynomial) -> Self {
        let k = poly.degree();
        let rows = (0..k).map(|i| BitSequence::unit(k, i)).collect();
        OutputRows { poly, rows }
    }

    pub fn with_len(poly: ConnectionPolynomial, len: usize) -> Self {
        let mut rows = Self::new(poly);
        rows.extend_to(len);
        rows
    }

    pub fn poly(&self) -> &ConnectionPolynomial {
        &self.poly
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Ensures rows for indices `0..len` exist. Repeated calls are no-ops.
    pub fn extend_to(&mut self, len: usize) {
        let k = self.poly.degree();
        while self.rows.len() < len {
            let j = self.rows.len() - k;
            let mut next = BitSequence::zeros(k);
            for &e in self.poly.feedback_offsets() {
                next.xor_assign(&self.rows[j + e])
                    .expect("rows share length k");
            }
            self.rows.push(next);
        }
    }

    /// Panics if `j` was not filled by [`OutputRows::extend_to`].
    pub fn row(&self, j: usize) -> &BitSequence {
        &self.rows[j]
    }
}
