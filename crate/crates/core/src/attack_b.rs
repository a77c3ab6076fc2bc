//! Attack B: iterate posteriors with prior feedback, flip the bits that fall
//! below a threshold, repeat until every check is satisfied or progress
//! stops. Also the expected first-round analysis (`N_w`, `N_v`, `C`).

use crate::checks::{posterior_with_prior, CheckSystem, ReliabilityModel, Syndrome};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::gf2::BitSequence;
use crate::lfsr::{extend_recurrence, ConnectionPolynomial, LfsrKey};
use crate::prob::binomial_pmf;

/// Probabilities are kept this far away from 0 and 1.
const PROB_FLOOR: f64 = 1e-12;

/// Expected effect of flipping every bit below one threshold, for a bit
/// with the mean number of checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdPoint {
    /// Bits with fewer than `h_cut` satisfied checks are flipped.
    pub h_cut: usize,
    pub p_thr: f64,
    /// Expected wrong bits flipped (corrected).
    pub n_w: f64,
    /// Expected correct bits flipped (broken).
    pub n_v: f64,
}

impl ThresholdPoint {
    pub fn n_i(&self) -> f64 {
        self.n_w - self.n_v
    }

    pub fn ratio(&self) -> f64 {
        self.n_i() / (self.n_w + self.n_v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrectionAnalysis {
    pub n_w: f64,
    pub n_v: f64,
    pub n_i: f64,
    /// `N_i / (N_w + N_v)`.
    pub c: f64,
    pub p_thr: f64,
    /// Mean checks per bit used by the mixture model.
    pub m_prime: usize,
    /// Threshold maximizing the expected net gain `N_i`; Attack B flips
    /// with this one.
    pub flip: ThresholdPoint,
}

/// Expected first-round flip statistics.
///
/// Candidate thresholds are the posteriors `p*(h, m')` for `h = 1..=m'`.
/// The reported `C` is the largest ratio over candidates that flip anything;
/// for every practical parameter set that is the cut that flips only bits
/// with no satisfied check. `flip` is the gain-maximizing candidate.
pub fn derive_threshold(
    model: &ReliabilityModel,
    checks: &CheckSystem,
    n: usize,
) -> Result<CorrectionAnalysis> {
    let m = checks.rounded_mean_c_to();
    let p = model.p_prime;
    let correct = binomial_pmf(m, model.s);
    let wrong = binomial_pmf(m, 1.0 - model.s);
    let posteriors: Vec<f64> = (0..=m)
        .map(|h| posterior_with_prior(1.0 - p, model.s, h, m))
        .collect();

    let mut candidates = Vec::new();
    for h_cut in 1..=m {
        let thr = posteriors[h_cut];
        let (mut below_w, mut below_c) = (0.0, 0.0);
        for h in 0..=m {
            if posteriors[h] < thr {
                below_w += wrong[h];
                below_c += correct[h];
            }
        }
        let point = ThresholdPoint {
            h_cut,
            p_thr: thr,
            n_w: n as f64 * p * below_w,
            n_v: n as f64 * (1.0 - p) * below_c,
        };
        if point.n_w + point.n_v > 0.0 {
            candidates.push(point);
        }
    }
    let best_by = |key: fn(&ThresholdPoint) -> f64| {
        candidates
            .iter()
            .copied()
            .reduce(|best, c| if key(&c) > key(&best) { c } else { best })
    };
    let ratio = best_by(ThresholdPoint::ratio).ok_or(Error::UndefinedRatio)?;
    let flip = best_by(ThresholdPoint::n_i).ok_or(Error::UndefinedRatio)?;
    Ok(CorrectionAnalysis {
        n_w: ratio.n_w,
        n_v: ratio.n_v,
        n_i: ratio.n_i(),
        c: ratio.ratio(),
        p_thr: ratio.p_thr,
        m_prime: m,
        flip,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Capability {
    /// `C <= 0`: a flip round is expected to break more than it fixes.
    Zero,
    /// `C > 0`. Convergence is still not guaranteed.
    PossiblyCorrecting,
}

pub fn predict_capability(analysis: &CorrectionAnalysis) -> Capability {
    if analysis.c > 0.0 {
        Capability::PossiblyCorrecting
    } else {
        Capability::Zero
    }
}

/// Number of sub-threshold bits that triggers an early flip.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FlipTrigger {
    /// `max(1, ceil((N_w + N_v) / 2))` at the flip threshold.
    #[default]
    Auto,
    Count(usize),
}

/// How the parity probability of a check's other bits is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ParityUpdate {
    /// From the current posteriors of the other bits in each check.
    #[default]
    PerCheck,
    /// The channel value `s(p', t)` for every check.
    Fixed,
}

/// Priors after a flip round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PriorReset {
    /// Every bit goes back to `1 - p'`.
    #[default]
    Channel,
    /// Unflipped bits keep `p*`, flipped bits take `1 - p*`.
    Complement,
}

#[derive(Clone, Debug)]
pub struct AttackBConfig {
    pub poly: ConnectionPolynomial,
    pub y: BitSequence,
    pub p_prime: f64,
    /// Feedback iterations per round before a forced flip.
    pub alpha: usize,
    pub n_thr: FlipTrigger,
    pub max_rounds: usize,
    /// Consecutive zero-flip rounds that end the attack.
    pub stall_rounds: usize,
    pub parity: ParityUpdate,
    pub prior_reset: PriorReset,
    /// When known, rounds report how many bits are correct.
    pub truth: Option<LfsrKey>,
    pub exec: Exec,
}

impl AttackBConfig {
    pub const DEFAULT_ALPHA: usize = 2;
    pub const DEFAULT_MAX_ROUNDS: usize = 200;
    pub const DEFAULT_STALL_ROUNDS: usize = 3;

    pub fn new(poly: ConnectionPolynomial, y: BitSequence, p_prime: f64) -> Self {
        AttackBConfig {
            poly,
            y,
            p_prime,
            alpha: Self::DEFAULT_ALPHA,
            n_thr: FlipTrigger::Auto,
            max_rounds: Self::DEFAULT_MAX_ROUNDS,
            stall_rounds: Self::DEFAULT_STALL_ROUNDS,
            parity: ParityUpdate::default(),
            prior_reset: PriorReset::default(),
            truth: None,
            exec: Exec::default(),
        }
    }

    pub fn with_truth(mut self, key: LfsrKey) -> Self {
        self.truth = Some(key);
        self
    }

    fn validate(&self) -> Result<()> {
        let k = self.poly.degree();
        if self.y.len() <= k {
            return Err(Error::InsufficientLength { n: self.y.len(), k });
        }
        if self.alpha == 0 {
            return Err(Error::out_of_range("alpha", 0.0, 1.0, f64::INFINITY));
        }
        if self.stall_rounds == 0 {
            return Err(Error::out_of_range("stall_rounds", 0.0, 1.0, f64::INFINITY));
        }
        if let Some(truth) = &self.truth {
            if truth.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: truth.len(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundTrace {
    pub round: usize,
    pub bits_flipped: usize,
    pub correct_bits: Option<usize>,
    pub posterior_min: f64,
    pub posterior_mean: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// All checks satisfied and the solved key regenerates the corrected
    /// sequence.
    Converged,
    /// `stall_rounds` consecutive rounds flipped nothing.
    Stagnated,
    RoundLimit,
    /// All checks satisfied but no valid key reproduces the sequence (for
    /// instance the all-zero sequence).
    Inconsistent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttackBReport {
    pub outcome: Outcome,
    pub key: Option<LfsrKey>,
    /// Flip rounds performed; 0 when `y` already satisfies every check.
    pub rounds: usize,
    pub traces: Vec<RoundTrace>,
    pub initial_correct: Option<usize>,
    /// `None` when `y` satisfied every check before any analysis was needed.
    pub analysis: Option<CorrectionAnalysis>,
    pub p_thr: f64,
    pub n_thr: usize,
}

impl AttackBReport {
    pub fn succeeded(&self) -> bool {
        self.outcome == Outcome::Converged
    }
}

pub fn run_attack_b(cfg: &AttackBConfig, checks: &CheckSystem) -> Result<AttackBReport> {
    cfg.validate()?;
    let n = cfg.y.len();
    let k = cfg.poly.degree();
    if checks.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: checks.n(),
        });
    }
    let truth_seq = cfg
        .truth
        .as_ref()
        .map(|key| extend_recurrence(&cfg.poly, key.bits(), n));
    let count_correct = |y: &BitSequence| {
        truth_seq
            .as_ref()
            .map(|a| n - a.hamming_distance(y).expect("equal lengths"))
    };

    let mut y = cfg.y.clone();
    let initial_correct = count_correct(&y);
    let mut syndrome = checks.syndrome(&y)?;
    let mut report = AttackBReport {
        outcome: Outcome::RoundLimit,
        key: None,
        rounds: 0,
        traces: Vec::new(),
        initial_correct,
        analysis: None,
        p_thr: 0.0,
        n_thr: 0,
    };
    if syndrome.is_zero() {
        finish(&mut report, &cfg.poly, &y, k);
        return Ok(report);
    }

    let model = ReliabilityModel::new(cfg.p_prime, cfg.poly.taps())?;
    let analysis = derive_threshold(&model, checks, n)?;
    let p_thr = analysis.flip.p_thr;
    let n_thr = match cfg.n_thr {
        FlipTrigger::Auto => {
            (((analysis.flip.n_w + analysis.flip.n_v) / 2.0).ceil() as usize).max(1)
        }
        FlipTrigger::Count(c) => c.max(1),
    };
    report.analysis = Some(analysis);
    report.p_thr = p_thr;
    report.n_thr = n_thr;

    let channel_prior = (1.0 - cfg.p_prime).clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
    let mut priors = vec![channel_prior; n];
    let mut stalled = 0;
    for round in 1..=cfg.max_rounds {
        let mut post = Vec::new();
        for iteration in 1..=cfg.alpha {
            post = posteriors(checks, &syndrome, &priors, model.s, cfg.parity, cfg.exec);
            let below = post.iter().filter(|&&p| p < p_thr).count();
            if below >= n_thr || iteration == cfg.alpha {
                break;
            }
            priors.clone_from(&post);
        }

        let mut flipped = 0;
        for (j, &p) in post.iter().enumerate() {
            if p < p_thr {
                y.flip(j);
                flipped += 1;
            }
        }
        match cfg.prior_reset {
            PriorReset::Channel => priors.fill(channel_prior),
            PriorReset::Complement => {
                for (prior, &p) in priors.iter_mut().zip(&post) {
                    *prior = if p < p_thr { 1.0 - p } else { p };
                }
            }
        }
        let (min, sum) = post
            .iter()
            .fold((f64::INFINITY, 0.0), |(min, sum), &p| (min.min(p), sum + p));
        report.traces.push(RoundTrace {
            round,
            bits_flipped: flipped,
            correct_bits: count_correct(&y),
            posterior_min: min,
            posterior_mean: sum / n as f64,
        });
        report.rounds = round;

        syndrome = checks.syndrome(&y)?;
        if syndrome.is_zero() {
            finish(&mut report, &cfg.poly, &y, k);
            return Ok(report);
        }
        stalled = if flipped == 0 { stalled + 1 } else { 0 };
        if stalled >= cfg.stall_rounds {
            report.outcome = Outcome::Stagnated;
            return Ok(report);
        }
    }
    report.outcome = Outcome::RoundLimit;
    Ok(report)
}

/// Reads the key off a sequence satisfying every check. Output rows
/// `0..k` are the unit vectors, so the first `k` bits are the key.
fn finish(report: &mut AttackBReport, poly: &ConnectionPolynomial, y: &BitSequence, k: usize) {
    let candidate = y.slice(0, k);
    let key = LfsrKey::new(candidate.clone())
        .ok()
        .filter(|_| extend_recurrence(poly, &candidate, y.len()) == *y);
    report.outcome = if key.is_some() {
        Outcome::Converged
    } else {
        Outcome::Inconsistent
    };
    report.key = key;
}

/// One posterior pass: each bit combines its prior with the evidence of
/// every check it belongs to.
fn posteriors(
    checks: &CheckSystem,
    syndrome: &Syndrome,
    priors: &[f64],
    s_channel: f64,
    parity: ParityUpdate,
    exec: Exec,
) -> Vec<f64> {
    let fixed_llr = llr(s_channel);
    exec.map(0..checks.n(), |j| {
        let prior = priors[j];
        let mut total = (prior / (1.0 - prior)).ln();
        for (check, _) in checks.checks_of(j) {
            let evidence = match parity {
                ParityUpdate::Fixed => fixed_llr,
                ParityUpdate::PerCheck => {
                    let bias: f64 = checks
                        .check_indices(check)
                        .filter(|&i| i != j)
                        .map(|i| 2.0 * priors[i] - 1.0)
                        .product();
                    llr(0.5 * (1.0 + bias))
                }
            };
            if syndrome.is_unsatisfied(check) {
                total -= evidence;
            } else {
                total += evidence;
            }
        }
        let p = 1.0 / (1.0 + (-total).exp());
        p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR)
    })
}

/// `ln(s / (1 - s))` with `s` kept off the endpoints.
fn llr(s: f64) -> f64 {
    let s = s.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
    (s / (1.0 - s)).ln()
}
