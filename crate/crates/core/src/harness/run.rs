//! Runs an [`ExperimentConfig`] and writes its CSV output.
//!
//! Every run at every grid point uses `run_seed = seed + run_index`, for
//! both the key and the channel noise. The same seed at different grid
//! points therefore shares its noise uniforms, so results vary smoothly
//! along a grid.

use std::io::Write;

use crate::attack_a::{entropy_bound, estimate_rbar, run_attack_a, AttackAConfig};
use crate::attack_b::{derive_threshold, run_attack_b, AttackBConfig, CorrectionAnalysis, Outcome};
use crate::channel::{random_key, run_pipeline, ChannelParams, PipelineTrace};
use crate::checks::{CheckSystem, ReliabilityModel};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::harness::config::{AttackKind, ExperimentConfig, VerificationMode};
use crate::lfsr::{ConnectionPolynomial, OutputRows};

pub const RESULT_COLUMNS: [&str; 20] = [
    "attack",
    "poly",
    "k",
    "t",
    "n",
    "p1",
    "p2",
    "p_prime",
    "run",
    "seed",
    "success",
    "trials",
    "rounds",
    "correct_bits",
    "r_bar",
    "bound",
    "c_ratio",
    "n_w",
    "n_v",
    "p_thr",
];

pub const TRACE_COLUMNS: [&str; 6] = ["p1", "p2", "run", "round", "bits_flipped", "correct_bits"];

pub const SIMULATION_COLUMNS: [&str; 6] = ["index", "a", "z", "m", "s", "y"];

/// One CSV row. Outputs that do not apply to the attack are `None` and
/// written as empty cells.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub attack: AttackKind,
    pub poly: String,
    pub k: usize,
    pub t: usize,
    pub n: usize,
    pub p1: f64,
    pub p2: f64,
    pub p_prime: f64,
    pub run: usize,
    pub seed: u64,
    pub success: Option<bool>,
    pub trials: Option<u64>,
    pub rounds: Option<usize>,
    pub correct_bits: Option<usize>,
    pub r_bar: Option<f64>,
    pub bound: Option<f64>,
    pub c_ratio: Option<f64>,
    pub n_w: Option<f64>,
    pub n_v: Option<f64>,
    pub p_thr: Option<f64>,
}

impl ResultRow {
    fn record(&self) -> Vec<String> {
        let real = |x: Option<f64>| x.map(format_sig).unwrap_or_default();
        let int = |x: Option<u64>| x.map(|v| v.to_string()).unwrap_or_default();
        vec![
            self.attack.name().to_string(),
            self.poly.clone(),
            self.k.to_string(),
            self.t.to_string(),
            self.n.to_string(),
            format_sig(self.p1),
            format_sig(self.p2),
            format_sig(self.p_prime),
            self.run.to_string(),
            self.seed.to_string(),
            self.success.map(|s| s.to_string()).unwrap_or_default(),
            int(self.trials),
            int(self.rounds.map(|r| r as u64)),
            int(self.correct_bits.map(|c| c as u64)),
            real(self.r_bar),
            real(self.bound),
            real(self.c_ratio),
            real(self.n_w),
            real(self.n_v),
            real(self.p_thr),
        ]
    }
}

/// One Attack B round, for the per-round trace file.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub p1: f64,
    pub p2: f64,
    pub run: usize,
    pub round: usize,
    pub bits_flipped: usize,
    pub correct_bits: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub traces: Vec<TraceRow>,
}

impl ExperimentOutput {
    /// Whether any simulated run failed to recover the key.
    pub fn any_failure(&self) -> bool {
        self.rows.iter().any(|r| r.success == Some(false))
    }
}

pub fn run_seed(base: u64, run: usize) -> u64 {
    base.wrapping_add(run as u64)
}

/// Runs every (grid point, run) job. Rows come back in canonical order:
/// `p1`, then `p2`, then run index.
pub fn run_experiment(cfg: &ExperimentConfig, exec: Exec) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let poly = cfg.polynomial()?;
    let checks = CheckSystem::new(&poly, cfg.n, cfg.counting)?;
    let rows_cache =
        (cfg.attack == AttackKind::A).then(|| OutputRows::with_len(poly.clone(), cfg.n));
    let ctx = Context {
        cfg,
        poly: &poly,
        poly_text: poly.to_string(),
        checks: &checks,
        rows: rows_cache.as_ref(),
    };

    let grid = cfg.grid();
    let runs = if cfg.attack.is_simulated() {
        cfg.runs
    } else {
        1
    };
    // attack-level parallelism is only used when the grid itself is serial
    let inner = if grid.len() * runs > 1 {
        Exec::Sequential
    } else {
        exec
    };
    let results = exec.map(0..grid.len() * runs, |job| {
        let (p1, p2) = grid[job / runs];
        ctx.job(p1, p2, job % runs, inner)
    });

    let mut out = ExperimentOutput::default();
    for result in results {
        let (row, traces) = result?;
        out.rows.push(row);
        out.traces.extend(traces);
    }
    Ok(out)
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    poly: &'a ConnectionPolynomial,
    poly_text: String,
    checks: &'a CheckSystem,
    rows: Option<&'a OutputRows>,
}

impl Context<'_> {
    fn job(&self, p1: f64, p2: f64, run: usize, exec: Exec) -> Result<(ResultRow, Vec<TraceRow>)> {
        let cfg = self.cfg;
        let params = ChannelParams::new(p1, p2)?;
        let p_prime = params.p_prime();
        let seed = run_seed(cfg.seed, run);
        let mut row = ResultRow {
            attack: cfg.attack,
            poly: self.poly_text.clone(),
            k: self.poly.degree(),
            t: self.poly.taps(),
            n: cfg.n,
            p1,
            p2,
            p_prime,
            run,
            seed,
            success: None,
            trials: None,
            rounds: None,
            correct_bits: None,
            r_bar: None,
            bound: None,
            c_ratio: None,
            n_w: None,
            n_v: None,
            p_thr: None,
        };
        let model = ReliabilityModel::new(p_prime, self.poly.taps())?;
        let mut traces = Vec::new();
        match cfg.attack {
            AttackKind::BoundA => {
                let est = estimate_rbar(self.poly.degree(), cfg.n, self.checks, &model);
                row.r_bar = Some(est.r_bar);
                row.bound = Some(entropy_bound(self.poly.degree(), est.r_bar));
            }
            AttackKind::CorrectionRatio => {
                if let Some(a) = analysis(&model, self.checks, cfg.n)? {
                    fill_analysis(&mut row, &a);
                }
            }
            AttackKind::A => {
                let (key, trace) = self.pipeline(params, seed)?;
                let mut acfg = AttackAConfig::new(self.poly.clone(), trace.y, p_prime);
                acfg.verification = match cfg.verification {
                    VerificationMode::Oracle => crate::attack_a::Verification::Oracle(key.clone()),
                    VerificationMode::Threshold => {
                        crate::attack_a::Verification::CorrelationThreshold { margin: cfg.margin }
                    }
                };
                acfg.max_trials = cfg.max_trials;
                acfg.exec = exec;
                let rows = self.rows.expect("output rows are built for attack a");
                let report = run_attack_a(&acfg, self.checks, rows)?;
                row.success = Some(report.key.as_ref() == Some(&key));
                row.trials = Some(report.trials);
                row.r_bar = Some(report.estimate.r_bar);
                row.bound = Some(report.bound);
            }
            AttackKind::B => {
                let (key, trace) = self.pipeline(params, seed)?;
                let mut bcfg =
                    AttackBConfig::new(self.poly.clone(), trace.y, p_prime).with_truth(key.clone());
                bcfg.alpha = cfg.alpha;
                bcfg.n_thr = cfg.n_thr;
                bcfg.max_rounds = cfg.max_rounds;
                bcfg.stall_rounds = cfg.stall_rounds;
                bcfg.parity = cfg.parity;
                bcfg.prior_reset = cfg.prior_reset;
                bcfg.exec = exec;
                let report = run_attack_b(&bcfg, self.checks)?;
                row.success =
                    Some(report.outcome == Outcome::Converged && report.key.as_ref() == Some(&key));
                row.rounds = Some(report.rounds);
                row.correct_bits = report
                    .traces
                    .last()
                    .and_then(|t| t.correct_bits)
                    .or(report.initial_correct);
                if let Some(a) = &report.analysis {
                    fill_analysis(&mut row, a);
                }
                traces = report
                    .traces
                    .iter()
                    .map(|t| TraceRow {
                        p1,
                        p2,
                        run,
                        round: t.round,
                        bits_flipped: t.bits_flipped,
                        correct_bits: t.correct_bits,
                    })
                    .collect();
            }
        }
        Ok((row, traces))
    }

    fn pipeline(
        &self,
        params: ChannelParams,
        seed: u64,
    ) -> Result<(crate::lfsr::LfsrKey, PipelineTrace)> {
        let key = random_key(self.poly.degree(), seed);
        let trace = run_pipeline(self.poly, &key, params, self.cfg.n, seed)?;
        Ok((key, trace))
    }
}

/// The correction analysis, or `None` when the ratio is undefined.
fn analysis(
    model: &ReliabilityModel,
    checks: &CheckSystem,
    n: usize,
) -> Result<Option<CorrectionAnalysis>> {
    match derive_threshold(model, checks, n) {
        Ok(a) => Ok(Some(a)),
        Err(Error::UndefinedRatio) => Ok(None),
        Err(e) => Err(e),
    }
}

fn fill_analysis(row: &mut ResultRow, a: &CorrectionAnalysis) {
    row.c_ratio = Some(a.c);
    row.n_w = Some(a.n_w);
    row.n_v = Some(a.n_v);
    row.p_thr = Some(a.p_thr);
}

pub fn write_results<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULT_COLUMNS)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_traces<W: Write>(traces: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    for t in traces {
        w.write_record([
            format_sig(t.p1),
            format_sig(t.p2),
            t.run.to_string(),
            t.round.to_string(),
            t.bits_flipped.to_string(),
            t.correct_bits.map(|c| c.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// The full pipeline as one row per index.
pub fn write_simulation<W: Write>(trace: &PipelineTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SIMULATION_COLUMNS)?;
    let bit = |b: bool| if b { "1" } else { "0" };
    for j in 0..trace.y.len() {
        w.write_record([
            j.to_string().as_str(),
            bit(trace.a.get(j)),
            bit(trace.z.get(j)),
            bit(trace.m.get(j)),
            bit(trace.s.get(j)),
            bit(trace.y.get(j)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `x` rounded to 6 significant digits, without trailing zeros.
/// Very large or small magnitudes use exponent notation.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let scientific = format!("{x:.5e}");
    let (mantissa, exp) = scientific.split_once('e').expect("exponent form");
    let exponent: i32 = exp.parse().expect("integer exponent");
    if !(-5..=9).contains(&exponent) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let rounded: f64 = scientific.parse().expect("valid float");
    let decimals = (5 - exponent).max(0) as usize;
    trim_zeros(&format!("{rounded:.decimals$}"))
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}
