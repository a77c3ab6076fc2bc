//! Attack A: solve for the key from the `k` most reliable observed bits,
//! then search error patterns on those bits in order of increasing weight.
//!
//! The selected system is inverted once. A trial with error pattern `e`
//! yields the key `x0 ^ A^{-1} e`, so each trial costs a handful of XORs of
//! precomputed inverse columns.

use crate::checks::{reliabilities, CheckSystem, ReliabilityModel};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::gf2::{BitSequence, Gf2Matrix, RowBasis};
use crate::lfsr::{extend_recurrence, ConnectionPolynomial, LfsrKey, OutputRows};
use crate::prob::{binary_entropy, binomial, binomial_pmf};

/// Patterns handed to one worker at a time during the search.
const SEARCH_BLOCK: u64 = 1 << 12;

/// Largest register the search supports; keys are handled as `u64` words.
pub const MAX_DEGREE: usize = 64;

/// How a candidate key is accepted.
#[derive(Clone, Debug, PartialEq)]
pub enum Verification {
    /// Accept exactly the true key, the best case for the attacker.
    Oracle(LfsrKey),
    /// Accept when the regenerated sequence agrees with `y` in at least
    /// `N(1 - p') - margin * sqrt(N p'(1 - p'))` positions.
    CorrelationThreshold { margin: f64 },
}

impl Verification {
    pub const DEFAULT_MARGIN: f64 = 3.0;
}

#[derive(Clone, Debug)]
pub struct AttackAConfig {
    pub poly: ConnectionPolynomial,
    pub y: BitSequence,
    pub p_prime: f64,
    pub verification: Verification,
    /// Give up after this many trials; `None` searches all `2^k` patterns.
    pub max_trials: Option<u64>,
    pub exec: Exec,
}

impl AttackAConfig {
    pub fn new(poly: ConnectionPolynomial, y: BitSequence, p_prime: f64) -> Self {
        AttackAConfig {
            poly,
            y,
            p_prime,
            verification: Verification::CorrelationThreshold {
                margin: Verification::DEFAULT_MARGIN,
            },
            max_trials: None,
            exec: Exec::default(),
        }
    }

    pub fn with_oracle(mut self, key: LfsrKey) -> Self {
        self.verification = Verification::Oracle(key);
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttackAReport {
    pub key: Option<LfsrKey>,
    /// Error patterns tried, counting the unmodified selection as trial 1.
    pub trials: u64,
    /// Selected positions, most reliable first.
    pub selected: Vec<usize>,
    /// Wrong bits among the selection; known only in oracle mode.
    pub selected_errors: Option<usize>,
    pub estimate: RBarEstimate,
    /// `2^{H(r̄/k) k}`.
    pub bound: f64,
}

impl AttackAReport {
    pub fn succeeded(&self) -> bool {
        self.key.is_some()
    }
}

/// The `k` positions chosen for the linear solve.
#[derive(Clone, Debug)]
pub struct Selection {
    /// Positions in selection order (decreasing reliability).
    pub positions: Vec<usize>,
    /// Posterior of each selected position.
    pub posteriors: Vec<f64>,
    /// Output rows of the selected positions; nonsingular `k x k`.
    pub matrix: Gf2Matrix,
}

/// Picks the `k` most reliable positions whose output rows are linearly
/// independent. Equal posteriors are taken lowest index first.
pub fn select_reliable(
    checks: &CheckSystem,
    y: &BitSequence,
    model: &ReliabilityModel,
    rows: &OutputRows,
    exec: Exec,
) -> Result<Selection> {
    let k = rows.poly().degree();
    if rows.len() < y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: rows.len(),
        });
    }
    let p_star = reliabilities(checks, y, model, exec)?;
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| p_star[b].total_cmp(&p_star[a]).then(a.cmp(&b)));

    let mut basis = RowBasis::new(k);
    let mut positions = Vec::with_capacity(k);
    for &j in &order {
        if basis.insert(rows.row(j))? {
            positions.push(j);
            if positions.len() == k {
                break;
            }
        }
    }
    if positions.len() < k {
        return Err(Error::SelectionFailure {
            found: positions.len(),
            needed: k,
        });
    }
    let matrix = Gf2Matrix::from_rows(k, positions.iter().map(|&j| rows.row(j).clone()).collect())?;
    let posteriors = positions.iter().map(|&j| p_star[j]).collect();
    Ok(Selection {
        positions,
        posteriors,
        matrix,
    })
}

/// `A(k, r) = sum_{i<=r} C(k, i)` and the entropy bound `2^{H(r/k) k}`.
pub fn bound_trials(k: usize, r: usize) -> Result<(u128, f64)> {
    if r > k {
        return Err(Error::out_of_range("r", r as f64, 0.0, k as f64));
    }
    let exact = (0..=r).map(|i| binomial(k, i)).sum();
    Ok((exact, entropy_bound(k, r as f64)))
}

/// `2^{H(r/k) k}` for a possibly fractional error count `r`.
pub fn entropy_bound(k: usize, r: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    (binary_entropy(r / k as f64) * k as f64).exp2()
}

/// Expected number of errors left among the `k` best bits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RBarEstimate {
    pub r_bar: f64,
    /// Largest `h` such that at least `k` bits are expected to satisfy `h`
    /// or more checks.
    pub h_prime: usize,
    /// Mean number of checks per bit, rounded.
    pub m_prime: usize,
}

/// Estimates `r̄ = k (1 - p*(h', m'))` from the binomial mixture of
/// satisfied-check counts over correct and wrong bits.
pub fn estimate_rbar(
    k: usize,
    n: usize,
    checks: &CheckSystem,
    model: &ReliabilityModel,
) -> RBarEstimate {
    let m_prime = checks.rounded_mean_c_to();
    let p = model.p_prime;
    let correct = binomial_pmf(m_prime, model.s);
    let wrong = binomial_pmf(m_prime, 1.0 - model.s);
    // expected count of bits with c_s >= h, accumulated from the top
    let mut tail_correct = 0.0;
    let mut tail_wrong = 0.0;
    let mut h_prime = 0;
    for h in (0..=m_prime).rev() {
        tail_correct += correct[h];
        tail_wrong += wrong[h];
        let expected = n as f64 * ((1.0 - p) * tail_correct + p * tail_wrong);
        if expected >= k as f64 {
            h_prime = h;
            break;
        }
    }
    let reliability = model
        .posterior(h_prime, m_prime)
        .expect("h' never exceeds m'");
    RBarEstimate {
        r_bar: k as f64 * (1.0 - reliability),
        h_prime,
        m_prime,
    }
}

/// Runs the full attack on `cfg.y`.
pub fn run_attack_a(
    cfg: &AttackAConfig,
    checks: &CheckSystem,
    rows: &OutputRows,
) -> Result<AttackAReport> {
    let k = cfg.poly.degree();
    let n = cfg.y.len();
    if k > MAX_DEGREE {
        return Err(Error::InvalidPolynomial(format!(
            "degree {k} exceeds the supported maximum {MAX_DEGREE}"
        )));
    }
    if n <= k {
        return Err(Error::InsufficientLength { n, k });
    }
    if checks.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: checks.n(),
        });
    }
    let model = ReliabilityModel::new(cfg.p_prime, cfg.poly.taps())?;
    let estimate = estimate_rbar(k, n, checks, &model);
    let bound = entropy_bound(k, estimate.r_bar);

    let selection = select_reliable(checks, &cfg.y, &model, rows, cfg.exec)?;
    let inverse = selection.matrix.inverse()?;
    let b = BitSequence::from_bits(selection.positions.iter().map(|&j| cfg.y.get(j)));
    let x0 = inverse.mul_vec(&b)?.low_word();

    // enumeration slots: least reliable selected bit first
    let mut slots: Vec<usize> = (0..k).collect();
    slots.sort_by(|&a, &b| {
        selection.posteriors[a]
            .total_cmp(&selection.posteriors[b])
            .then(selection.positions[a].cmp(&selection.positions[b]))
    });
    let columns: Vec<u64> = slots
        .iter()
        .map(|&r| inverse.column(r).low_word())
        .collect();

    let verifier = Verifier::new(cfg, x0, &columns)?;
    let search = PatternSearch {
        k,
        x0,
        columns: &columns,
        verifier: &verifier,
        limit: cfg.max_trials.unwrap_or(u64::MAX),
    };
    let (found, trials) = search.run(cfg.exec);

    let selected_errors = match &cfg.verification {
        Verification::Oracle(truth) => {
            let a = extend_recurrence(&cfg.poly, truth.bits(), n);
            Some(
                selection
                    .positions
                    .iter()
                    .filter(|&&j| a.get(j) != cfg.y.get(j))
                    .count(),
            )
        }
        Verification::CorrelationThreshold { .. } => None,
    };
    let key = found
        .map(|word| LfsrKey::new(BitSequence::from_word(word, k)))
        .transpose()?;
    Ok(AttackAReport {
        key,
        trials,
        selected: selection.positions,
        selected_errors,
        estimate,
        bound,
    })
}

enum Verifier {
    Oracle(u64),
    Threshold {
        /// `seq(x0) ^ y`, packed.
        base: Vec<u64>,
        /// Sequence contributed by each enumeration slot's inverse column.
        deltas: Vec<Vec<u64>>,
        max_distance: usize,
    },
}

impl Verifier {
    fn new(cfg: &AttackAConfig, x0: u64, columns: &[u64]) -> Result<Self> {
        let k = cfg.poly.degree();
        let n = cfg.y.len();
        Ok(match &cfg.verification {
            Verification::Oracle(key) => {
                if key.len() != k {
                    return Err(Error::DimensionMismatch {
                        expected: k,
                        found: key.len(),
                    });
                }
                Verifier::Oracle(key.bits().low_word())
            }
            Verification::CorrelationThreshold { margin } => {
                let sequence_of =
                    |word: u64| extend_recurrence(&cfg.poly, &BitSequence::from_word(word, k), n);
                let base = sequence_of(x0).xor(&cfg.y)?.words().to_vec();
                let deltas = columns
                    .iter()
                    .map(|&c| sequence_of(c).words().to_vec())
                    .collect();
                let p = cfg.p_prime;
                let nf = n as f64;
                let min_agreement = nf * (1.0 - p) - margin * (nf * p * (1.0 - p)).sqrt();
                let max_distance = (nf - min_agreement).floor().max(-1.0);
                Verifier::Threshold {
                    base,
                    deltas,
                    max_distance: if max_distance < 0.0 {
                        usize::MAX
                    } else {
                        max_distance as usize
                    },
                }
            }
        })
    }

    /// `combo` holds slot indices; `key` is the resulting candidate.
    fn accepts(&self, combo: &[usize], key: u64) -> bool {
        if key == 0 {
            return false;
        }
        match self {
            Verifier::Oracle(truth) => key == *truth,
            Verifier::Threshold {
                base,
                deltas,
                max_distance,
            } => {
                if *max_distance == usize::MAX {
                    return false;
                }
                let mut distance = 0usize;
                for (w, &b) in base.iter().enumerate() {
                    let word = combo.iter().fold(b, |acc, &slot| acc ^ deltas[slot][w]);
                    distance += word.count_ones() as usize;
                    if distance > *max_distance {
                        return false;
                    }
                }
                true
            }
        }
    }
}

struct PatternSearch<'a> {
    k: usize,
    x0: u64,
    columns: &'a [u64],
    verifier: &'a Verifier,
    limit: u64,
}

impl PatternSearch<'_> {
    /// Returns the first accepted key in canonical order and the number of
    /// trials spent reaching it (or the total spent on failure).
    fn run(&self, exec: Exec) -> (Option<u64>, u64) {
        let mut offset: u64 = 0;
        for weight in 0..=self.k {
            let count = binomial(self.k, weight) as u64;
            if offset >= self.limit {
                break;
            }
            let budget = count.min(self.limit - offset);
            let blocks = budget.div_ceil(SEARCH_BLOCK) as usize;
            let hit = exec.find_first(0..blocks, |block| {
                let start = block as u64 * SEARCH_BLOCK;
                let end = (start + SEARCH_BLOCK).min(budget);
                self.scan_block(weight, start, end)
            });
            if let Some((_, (rank, key))) = hit {
                return (Some(key), offset + rank + 1);
            }
            offset += budget;
        }
        (None, offset)
    }

    fn scan_block(&self, weight: usize, start: u64, end: u64) -> Option<(u64, u64)> {
        let mut combo = unrank_combination(self.k, weight, start);
        let mut rank = start;
        loop {
            let key = combo.iter().fold(self.x0, |acc, &s| acc ^ self.columns[s]);
            if self.verifier.accepts(&combo, key) {
                return Some((rank, key));
            }
            rank += 1;
            if rank >= end || !next_combination(&mut combo, self.k) {
                return None;
            }
        }
    }
}

/// The `rank`-th `w`-subset of `0..k` in lexicographic order.
pub fn unrank_combination(k: usize, w: usize, mut rank: u64) -> Vec<usize> {
    let mut combo = Vec::with_capacity(w);
    let mut next = 0;
    for i in 0..w {
        loop {
            let with_next = binomial(k - next - 1, w - i - 1) as u64;
            if rank < with_next {
                combo.push(next);
                next += 1;
                break;
            }
            rank -= with_next;
            next += 1;
        }
    }
    combo
}

/// Advances to the lexicographic successor; false after the last subset.
pub fn next_combination(combo: &mut [usize], k: usize) -> bool {
    let w = combo.len();
    for i in (0..w).rev() {
        if combo[i] < k - w + i {
            combo[i] += 1;
            for j in i + 1..w {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
