//! Experiment configuration and its flat `key = value` file format.
//!
//! ```text
//! # stagnation vs convergence at p2 = 0.1 and 0
//! attack = b
//! poly = 31,21,12,3,2,1,0
//! n = 3100
//! p1 = 0.2
//! p2 = 0, 0.1
//! seed = 1
//! runs = 10
//! ```
//!
//! Lists are comma separated. Keys not given keep their defaults; `poly`,
//! `n`, `p1`, `p2` and `attack` have no useful default and must be set.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::attack_b::{AttackBConfig, FlipTrigger, ParityUpdate, PriorReset};
use crate::checks::CheckCounting;
use crate::error::{Error, Result};
use crate::lfsr::ConnectionPolynomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttackKind {
    A,
    B,
    BoundA,
    CorrectionRatio,
}

impl AttackKind {
    pub fn name(self) -> &'static str {
        match self {
            AttackKind::A => "a",
            AttackKind::B => "b",
            AttackKind::BoundA => "bound-a",
            AttackKind::CorrectionRatio => "correction-ratio",
        }
    }

    /// Whether rows come from simulated runs rather than formulas.
    pub fn is_simulated(self) -> bool {
        matches!(self, AttackKind::A | AttackKind::B)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerificationMode {
    Oracle,
    Threshold,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub attack: AttackKind,
    pub poly: String,
    pub n: usize,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub seed: u64,
    pub runs: usize,
    pub out: Option<PathBuf>,
    pub counting: CheckCounting,
    pub verification: VerificationMode,
    pub margin: f64,
    pub max_trials: Option<u64>,
    pub alpha: usize,
    pub n_thr: FlipTrigger,
    pub max_rounds: usize,
    pub stall_rounds: usize,
    pub parity: ParityUpdate,
    pub prior_reset: PriorReset,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            attack: AttackKind::A,
            poly: String::new(),
            n: 0,
            p1: Vec::new(),
            p2: Vec::new(),
            seed: 0,
            runs: 1,
            out: None,
            counting: CheckCounting::AllTaps,
            verification: VerificationMode::Oracle,
            margin: 3.0,
            max_trials: None,
            alpha: AttackBConfig::DEFAULT_ALPHA,
            n_thr: FlipTrigger::Auto,
            max_rounds: AttackBConfig::DEFAULT_MAX_ROUNDS,
            stall_rounds: AttackBConfig::DEFAULT_STALL_ROUNDS,
            parity: ParityUpdate::PerCheck,
            prior_reset: PriorReset::Channel,
        }
    }
}

impl ExperimentConfig {
    pub fn new(attack: AttackKind, poly: &str, n: usize, p1: Vec<f64>, p2: Vec<f64>) -> Self {
        ExperimentConfig {
            attack,
            poly: poly.to_string(),
            n,
            p1,
            p2,
            ..Default::default()
        }
    }

    /// Parses a config file and validates the result.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets every field named in `text`, without validating the result.
    pub fn apply(&mut self, text: &str) -> Result<()> {
        let mut problems = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line.split_once('=') {
                Some((key, value)) => {
                    if let Err(e) = self.set(key.trim(), value.trim()) {
                        problems.push(format!("line {}: {e}", lineno + 1));
                    }
                }
                None => problems.push(format!("line {}: expected `key = value`", lineno + 1)),
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "attack" => {
                self.attack = match value {
                    "a" => AttackKind::A,
                    "b" => AttackKind::B,
                    "bound-a" => AttackKind::BoundA,
                    "correction-ratio" => AttackKind::CorrectionRatio,
                    _ => return Err(format!("attack: unknown kind `{value}`")),
                }
            }
            "poly" => self.poly = value.to_string(),
            "n" => self.n = number(key, value)?,
            "p1" => self.p1 = list(key, value)?,
            "p2" => self.p2 = list(key, value)?,
            "seed" => self.seed = number(key, value)?,
            "runs" => self.runs = number(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "counting" => {
                self.counting = match value {
                    "all-taps" => CheckCounting::AllTaps,
                    "leading-only" => CheckCounting::LeadingOnly,
                    _ => return Err(format!("counting: unknown mode `{value}`")),
                }
            }
            "verification" => {
                self.verification = match value {
                    "oracle" => VerificationMode::Oracle,
                    "threshold" => VerificationMode::Threshold,
                    _ => return Err(format!("verification: unknown mode `{value}`")),
                }
            }
            "margin" => self.margin = number(key, value)?,
            "max_trials" => {
                self.max_trials = if value == "none" {
                    None
                } else {
                    Some(number(key, value)?)
                }
            }
            "alpha" => self.alpha = number(key, value)?,
            "n_thr" => {
                self.n_thr = if value == "auto" {
                    FlipTrigger::Auto
                } else {
                    FlipTrigger::Count(number(key, value)?)
                }
            }
            "max_rounds" => self.max_rounds = number(key, value)?,
            "stall_rounds" => self.stall_rounds = number(key, value)?,
            "parity" => {
                self.parity = match value {
                    "per-check" => ParityUpdate::PerCheck,
                    "fixed" => ParityUpdate::Fixed,
                    _ => return Err(format!("parity: unknown mode `{value}`")),
                }
            }
            "prior_reset" => {
                self.prior_reset = match value {
                    "channel" => PriorReset::Channel,
                    "complement" => PriorReset::Complement,
                    _ => return Err(format!("prior_reset: unknown mode `{value}`")),
                }
            }
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Config file text that parses back to `self`.
    pub fn render(&self) -> String {
        let join = |ps: &[f64]| ps.iter().map(f64::to_string).collect::<Vec<_>>().join(", ");
        let mut out = String::new();
        let mut line = |key: &str, value: String| out.push_str(&format!("{key} = {value}\n"));
        line("attack", self.attack.name().to_string());
        line("poly", self.poly.clone());
        line("n", self.n.to_string());
        line("p1", join(&self.p1));
        line("p2", join(&self.p2));
        line("seed", self.seed.to_string());
        line("runs", self.runs.to_string());
        if let Some(out) = &self.out {
            line("out", out.display().to_string());
        }
        line(
            "counting",
            match self.counting {
                CheckCounting::AllTaps => "all-taps",
                CheckCounting::LeadingOnly => "leading-only",
            }
            .into(),
        );
        line(
            "verification",
            match self.verification {
                VerificationMode::Oracle => "oracle",
                VerificationMode::Threshold => "threshold",
            }
            .into(),
        );
        line("margin", self.margin.to_string());
        line(
            "max_trials",
            self.max_trials.map_or("none".into(), |t| t.to_string()),
        );
        line("alpha", self.alpha.to_string());
        line(
            "n_thr",
            match self.n_thr {
                FlipTrigger::Auto => "auto".into(),
                FlipTrigger::Count(c) => c.to_string(),
            },
        );
        line("max_rounds", self.max_rounds.to_string());
        line("stall_rounds", self.stall_rounds.to_string());
        line(
            "parity",
            match self.parity {
                ParityUpdate::PerCheck => "per-check",
                ParityUpdate::Fixed => "fixed",
            }
            .into(),
        );
        line(
            "prior_reset",
            match self.prior_reset {
                PriorReset::Channel => "channel",
                PriorReset::Complement => "complement",
            }
            .into(),
        );
        out
    }

    /// Checks every field and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        match self.polynomial() {
            Ok(poly) => {
                let k = poly.degree();
                if self.n <= k {
                    problems.push(format!("n: must exceed the degree {k}, got {}", self.n));
                }
                if self.attack == AttackKind::A && k > crate::attack_a::MAX_DEGREE {
                    problems.push(format!(
                        "poly: attack a supports degree up to {}",
                        crate::attack_a::MAX_DEGREE
                    ));
                }
            }
            Err(e) => problems.push(format!("poly: {e}")),
        }
        for (name, grid) in [("p1", &self.p1), ("p2", &self.p2)] {
            if grid.is_empty() {
                problems.push(format!("{name}: grid is empty"));
            }
            for &p in grid.iter() {
                if !(0.0..=0.5).contains(&p) {
                    problems.push(format!("{name}: {p} is outside [0, 0.5]"));
                }
            }
        }
        if self.runs == 0 {
            problems.push("runs: must be at least 1".into());
        }
        if !(self.margin.is_finite() && self.margin >= 0.0) {
            problems.push(format!(
                "margin: must be finite and non-negative, got {}",
                self.margin
            ));
        }
        if self.max_trials == Some(0) {
            problems.push("max_trials: must be at least 1".into());
        }
        if self.alpha == 0 {
            problems.push("alpha: must be at least 1".into());
        }
        if self.n_thr == FlipTrigger::Count(0) {
            problems.push("n_thr: must be at least 1".into());
        }
        if self.stall_rounds == 0 {
            problems.push("stall_rounds: must be at least 1".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    pub fn polynomial(&self) -> Result<ConnectionPolynomial> {
        self.poly.parse()
    }

    /// Grid points in output order: `p1` outer, `p2` inner.
    pub fn grid(&self) -> Vec<(f64, f64)> {
        self.p1
            .iter()
            .flat_map(|&p1| self.p2.iter().map(move |&p2| (p1, p2)))
            .collect()
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn number<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("{key}: cannot parse `{value}`"))
}

fn list(key: &str, value: &str) -> std::result::Result<Vec<f64>, String> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| number(key, v.trim())).collect()
}
