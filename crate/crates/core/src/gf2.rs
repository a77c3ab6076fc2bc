//! Packed GF(2) vectors and small dense matrices.
//!
//! [`BitSequence`] stores bits little-endian inside `u64` words; bits past
//! `len` in the last word are always zero so that word-level XOR and
//! popcount never see stale data.

use std::fmt;

use crate::error::{Error, Result};

const WORD: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// Fixed-length sequence of bits.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitSequence {
    words: Vec<u64>,
    len: usize,
}

impl BitSequence {
    pub fn zeros(len: usize) -> Self {
        BitSequence {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut seq = BitSequence {
            words: vec![!0; words_for(len)],
            len,
        };
        seq.clear_tail();
        seq
    }

    /// Unit vector with a single 1 at `index`.
    pub fn unit(len: usize, index: usize) -> Self {
        let mut seq = Self::zeros(len);
        seq.set(index, true);
        seq
    }

    pub fn from_bits<I>(bits: I) -> Self
    where
        I: IntoIterator<Item = bool>,
    {
        let mut words = Vec::new();
        let mut len = 0;
        for bit in bits {
            if len % WORD == 0 {
                words.push(0);
            }
            if bit {
                words[len / WORD] |= 1 << (len % WORD);
            }
            len += 1;
        }
        BitSequence { words, len }
    }

    /// Builds a sequence from 0/1 values. Any nonzero value counts as 1.
    pub fn from_u8s(values: &[u8]) -> Self {
        Self::from_bits(values.iter().map(|&v| v != 0))
    }

    /// Parses a string of `0` and `1` characters.
    pub fn parse(text: &str) -> Option<Self> {
        let mut bits = Vec::with_capacity(text.len());
        for c in text.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return None,
            }
        }
        Some(Self::from_bits(bits))
    }

    /// Packed words, little-endian; bits past `len` are discarded.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(words_for(len), 0);
        let mut seq = BitSequence { words, len };
        seq.clear_tail();
        seq
    }

    /// Low `len` bits of `value`, bit `i` of the word becoming element `i`.
    pub fn from_word(value: u64, len: usize) -> Self {
        assert!(len <= WORD);
        let mut seq = BitSequence {
            words: vec![value],
            len,
        };
        if len == 0 {
            seq.words.clear();
        }
        seq.clear_tail();
        seq
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, index: usize) -> bool {
        assert!(
            index < self.len,
            "bit index {index} out of range {}",
            self.len
        );
        (self.words[index / WORD] >> (index % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, index: usize, value: bool) {
        assert!(
            index < self.len,
            "bit index {index} out of range {}",
            self.len
        );
        let mask = 1u64 << (index % WORD);
        if value {
            self.words[index / WORD] |= mask;
        } else {
            self.words[index / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, index: usize) {
        assert!(
            index < self.len,
            "bit index {index} out of range {}",
            self.len
        );
        self.words[index / WORD] ^= 1 << (index % WORD);
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_u8s(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    /// Indices of the set bits, ascending.
    pub fn ones_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(w * WORD + bit)
            })
        })
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// First word of the packed representation, or 0 for an empty sequence.
    pub fn low_word(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor(&self, other: &BitSequence) -> Result<BitSequence> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    pub fn xor_assign(&mut self, other: &BitSequence) -> Result<()> {
        self.check_len(other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    /// Number of positions where the two sequences differ.
    pub fn hamming_distance(&self, other: &BitSequence) -> Result<usize> {
        self.check_len(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitSequence) -> Result<bool> {
        self.check_len(other)?;
        let parity = self
            .words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones());
        Ok(parity & 1 == 1)
    }

    /// Copies `len` bits starting at `start`.
    pub fn slice(&self, start: usize, len: usize) -> BitSequence {
        assert!(start + len <= self.len);
        BitSequence::from_bits((start..start + len).map(|i| self.get(i)))
    }

    fn check_len(&self, other: &BitSequence) -> Result<()> {
        if self.len != other.len {
            return Err(Error::DimensionMismatch {
                expected: self.len,
                found: other.len,
            });
        }
        Ok(())
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitSequence({self})")
    }
}

impl fmt::Display for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Element-wise XOR of two equal-length sequences.
pub fn xor_sequences(x: &BitSequence, y: &BitSequence) -> Result<BitSequence> {
    x.xor(y)
}

/// Dense matrix over GF(2), stored as packed rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gf2Matrix {
    rows: Vec<BitSequence>,
    cols: usize,
}

impl Gf2Matrix {
    pub fn new(cols: usize) -> Self {
        Gf2Matrix {
            rows: Vec::new(),
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        Gf2Matrix {
            rows: (0..n).map(|i| BitSequence::unit(n, i)).collect(),
            cols: n,
        }
    }

    pub fn from_rows(cols: usize, rows: Vec<BitSequence>) -> Result<Self> {
        for row in &rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
        }
        Ok(Gf2Matrix { rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitSequence {
        &self.rows[i]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn push_row(&mut self, row: BitSequence) -> Result<()> {
        if row.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    /// `A·x` over GF(2).
    pub fn mul_vec(&self, x: &BitSequence) -> Result<BitSequence> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        let mut out = BitSequence::zeros(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            if row.dot(x)? {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    pub fn rank(&self) -> usize {
        let mut basis = RowBasis::new(self.cols);
        self.rows
            .iter()
            .filter(|row| basis.insert(row).unwrap_or(false))
            .count()
    }

    /// Inverse of a square nonsingular matrix, by Gauss-Jordan elimination
    /// on the augmented matrix `[A | I]`.
    pub fn inverse(&self) -> Result<Gf2Matrix> {
        let n = self.cols;
        if self.rows.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.rows.len(),
            });
        }
        let mut left = self.rows.clone();
        let mut right: Vec<BitSequence> = (0..n).map(|i| BitSequence::unit(n, i)).collect();
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| left[r].get(col))
                .ok_or(Error::SingularMatrix)?;
            left.swap(col, pivot);
            right.swap(col, pivot);
            let (pl, pr) = (left[col].clone(), right[col].clone());
            for r in 0..n {
                if r != col && left[r].get(col) {
                    left[r].xor_assign(&pl)?;
                    right[r].xor_assign(&pr)?;
                }
            }
        }
        Ok(Gf2Matrix {
            rows: right,
            cols: n,
        })
    }

    /// Column `c` as a sequence of length `rows()`.
    pub fn column(&self, c: usize) -> BitSequence {
        BitSequence::from_bits(self.rows.iter().map(|row| row.get(c)))
    }
}

/// Solves `A·x = b` for square nonsingular `A` by Gaussian elimination with
/// row-swap pivoting.
pub fn solve_gf2(a: &Gf2Matrix, b: &BitSequence) -> Result<BitSequence> {
    let n = a.cols();
    if a.rows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.rows(),
        });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let mut rows = a.rows.clone();
    let mut rhs: Vec<bool> = b.iter().collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| rows[r].get(col))
            .ok_or(Error::SingularMatrix)?;
        rows.swap(col, pivot);
        rhs.swap(col, pivot);
        let pivot_row = rows[col].clone();
        let pivot_rhs = rhs[col];
        for r in col + 1..n {
            if rows[r].get(col) {
                rows[r].xor_assign(&pivot_row)?;
                rhs[r] ^= pivot_rhs;
            }
        }
    }
    // back substitution on the upper-triangular system
    let mut x = BitSequence::zeros(n);
    for col in (0..n).rev() {
        let mut value = rhs[col];
        for c in rows[col].ones_positions().filter(|&c| c > col) {
            value ^= x.get(c);
        }
        x.set(col, value);
    }
    Ok(x)
}

/// True iff appending `row` to `a` strictly increases its rank.
pub fn rank_extend(a: &Gf2Matrix, row: &BitSequence) -> Result<bool> {
    if row.len() != a.cols() {
        return Err(Error::DimensionMismatch {
            expected: a.cols(),
            found: row.len(),
        });
    }
    let mut basis = RowBasis::new(a.cols());
    for r in &a.rows {
        basis.insert(r)?;
    }
    basis.insert(row)
}

/// Incremental echelon basis used for greedy independent-row selection.
///
/// Each stored vector has a distinct pivot (its lowest set bit) and no other
/// stored vector has that pivot set.
#[derive(Clone, Debug)]
pub struct RowBasis {
    cols: usize,
    reduced: Vec<(usize, BitSequence)>,
}

impl RowBasis {
    pub fn new(cols: usize) -> Self {
        RowBasis {
            cols,
            reduced: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.reduced.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Adds `row` if it is independent of the rows seen so far.
    pub fn insert(&mut self, row: &BitSequence) -> Result<bool> {
        if row.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: row.len(),
            });
        }
        let mut v = row.clone();
        for (pivot, basis_row) in &self.reduced {
            if v.get(*pivot) {
                v.xor_assign(basis_row)?;
            }
        }
        let Some(pivot) = v.ones_positions().next() else {
            return Ok(false);
        };
        for (_, basis_row) in self.reduced.iter_mut() {
            if basis_row.get(pivot) {
                basis_row.xor_assign(&v)?;
            }
        }
        self.reduced.push((pivot, v));
        Ok(true)
    }
}
