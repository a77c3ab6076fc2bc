//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on usage, validation or I/O errors, 2 when
//! at least one simulated attack run failed to recover its key.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::channel::{random_key, run_pipeline, ChannelParams};
use crate::error::{Error, Result};
use crate::exec::{with_threads, Exec};
use crate::harness::config::{AttackKind, ExperimentConfig};
use crate::harness::run::{
    run_experiment, write_results, write_simulation, write_traces, ExperimentOutput,
};
use crate::lfsr::ConnectionPolynomial;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_ATTACK_FAILED: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "wiretap-fca",
    version,
    about = "Fast correlation attacks through a wiretap channel"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit one simulated pipeline as CSV (index,a,z,m,s,y)
    Simulate(SimulateArgs),
    /// Attack A: reliable-bit selection and error-pattern search
    AttackA(RunArgs),
    /// Attack B: iterative posteriors and bit flipping
    AttackB(AttackBArgs),
    /// Analytic trial bound 2^{H(r/k)k} over a grid
    BoundA(RunArgs),
    /// Expected first-round correction ratio C over a grid
    CorrectionRatio(RunArgs),
    /// Run the experiment described by a config file
    Sweep(RunArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    poly: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    p1: f64,
    #[arg(long, default_value_t = 0.0)]
    p2: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Config file; flags given on the command line override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Exponents of the connection polynomial, e.g. 31,21,12,3,2,1,0
    #[arg(long)]
    poly: Option<String>,
    #[arg(long)]
    n: Option<String>,
    /// Comma-separated grid
    #[arg(long)]
    p1: Option<String>,
    /// Comma-separated grid
    #[arg(long)]
    p2: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    runs: Option<String>,
    /// Result CSV; standard output when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially
    #[arg(long)]
    threads: Option<usize>,
    /// all-taps or leading-only
    #[arg(long)]
    counting: Option<String>,
    /// Attack A key acceptance: oracle or threshold
    #[arg(long)]
    verification: Option<String>,
    #[arg(long)]
    margin: Option<String>,
    #[arg(long)]
    max_trials: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    /// auto or a count
    #[arg(long)]
    n_thr: Option<String>,
    #[arg(long)]
    max_rounds: Option<String>,
    #[arg(long)]
    stall_rounds: Option<String>,
    /// per-check or fixed
    #[arg(long)]
    parity: Option<String>,
    /// channel or complement
    #[arg(long)]
    prior_reset: Option<String>,
}

#[derive(Args, Debug)]
struct AttackBArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Per-round CSV (p1,p2,run,round,bits_flipped,correct_bits)
    #[arg(long)]
    trace: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let fields = [
            ("poly", &self.poly),
            ("n", &self.n),
            ("p1", &self.p1),
            ("p2", &self.p2),
            ("seed", &self.seed),
            ("runs", &self.runs),
            ("counting", &self.counting),
            ("verification", &self.verification),
            ("margin", &self.margin),
            ("max_trials", &self.max_trials),
            ("alpha", &self.alpha),
            ("n_thr", &self.n_thr),
            ("max_rounds", &self.max_rounds),
            ("stall_rounds", &self.stall_rounds),
            ("parity", &self.parity),
            ("prior_reset", &self.prior_reset),
        ];
        let mut out: Vec<_> = fields
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
            .collect();
        if let Some(path) = &self.out {
            out.push(("out", path.display().to_string()));
        }
        out
    }

    /// Config file (if any) with command-line overrides applied.
    fn config(&self, attack: Option<AttackKind>) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let mut base = ExperimentConfig::default();
                base.apply(&std::fs::read_to_string(path)?)
                    .map_err(|e| match e {
                        Error::Config(problems) => Error::Config(
                            problems
                                .into_iter()
                                .map(|p| format!("{}: {p}", path.display()))
                                .collect(),
                        ),
                        other => other,
                    })?;
                base
            }
            None => {
                if attack.is_none() {
                    return Err(Error::Config(vec!["sweep requires --config".into()]));
                }
                ExperimentConfig::default()
            }
        };
        if let Some(kind) = attack {
            cfg.attack = kind;
        }
        let problems: Vec<String> = self
            .overrides()
            .into_iter()
            .filter_map(|(k, v)| cfg.set(k, &v).err())
            .collect();
        if !problems.is_empty() {
            return Err(Error::Config(problems));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_INVALID
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            match &e {
                Error::Config(problems) => {
                    let _ = writeln!(stderr, "invalid configuration:");
                    for p in problems {
                        let _ = writeln!(stderr, "  {p}");
                    }
                }
                other => {
                    let _ = writeln!(stderr, "error: {other}");
                }
            }
            EXIT_INVALID
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Simulate(args) => simulate(&args, stdout, stderr),
        Command::AttackA(args) => experiment(&args, Some(AttackKind::A), None, stdout, stderr),
        Command::AttackB(args) => experiment(
            &args.run,
            Some(AttackKind::B),
            args.trace.as_deref(),
            stdout,
            stderr,
        ),
        Command::BoundA(args) => experiment(&args, Some(AttackKind::BoundA), None, stdout, stderr),
        Command::CorrectionRatio(args) => experiment(
            &args,
            Some(AttackKind::CorrectionRatio),
            None,
            stdout,
            stderr,
        ),
        Command::Sweep(args) => experiment(&args, None, None, stdout, stderr),
    }
}

fn simulate(args: &SimulateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let poly: ConnectionPolynomial = args.poly.parse()?;
    warn_period(&poly, stderr);
    let params = ChannelParams::new(args.p1, args.p2)?;
    let key = random_key(poly.degree(), args.seed);
    let trace = run_pipeline(&poly, &key, params, args.n, args.seed)?;
    match &args.out {
        Some(path) => write_simulation(&trace, BufWriter::new(File::create(path)?))?,
        None => write_simulation(&trace, &mut *stdout)?,
    }
    Ok(EXIT_OK)
}

fn experiment(
    args: &RunArgs,
    attack: Option<AttackKind>,
    trace_path: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let cfg = args.config(attack)?;
    warn_period(&cfg.polynomial()?, stderr);
    let exec = if args.threads == Some(1) {
        Exec::Sequential
    } else {
        Exec::Parallel
    };
    let output = with_threads(args.threads, || run_experiment(&cfg, exec))?;

    match &cfg.out {
        Some(path) => write_results(&output.rows, BufWriter::new(File::create(path)?))?,
        None => write_results(&output.rows, &mut *stdout)?,
    }
    if let Some(path) = trace_path {
        write_traces(&output.traces, BufWriter::new(File::create(path)?))?;
    }
    if cfg.attack == AttackKind::CorrectionRatio {
        summarize_ratio(&output, stderr);
    }
    Ok(if output.any_failure() {
        EXIT_ATTACK_FAILED
    } else {
        EXIT_OK
    })
}

fn summarize_ratio(output: &ExperimentOutput, stderr: &mut dyn Write) {
    for row in &output.rows {
        let _ = match row.c_ratio {
            Some(c) => writeln!(
                stderr,
                "p1={} p2={} p'={:.4} C={c:.3} ({})",
                row.p1,
                row.p2,
                row.p_prime,
                if c > 0.0 {
                    "possibly correcting"
                } else {
                    "correction capability zero"
                }
            ),
            None => writeln!(
                stderr,
                "p1={} p2={} C undefined: nothing falls below any threshold",
                row.p1, row.p2
            ),
        };
    }
}

fn warn_period(poly: &ConnectionPolynomial, stderr: &mut dyn Write) {
    if poly.has_maximal_period() == Some(false) {
        let _ = writeln!(
            stderr,
            "warning: {poly} does not generate a maximal-length sequence"
        );
    }
}
