//! Fast correlation attacks on LFSR keystreams observed through a noisy
//! wiretap channel.
//!
//! The eavesdropper sees the LFSR output through two binary symmetric
//! channels in series: the keystream generator's correlation noise (`p1`)
//! and the residual wiretap error rate after decoding (`p2`). The crate
//! simulates that observation, runs both Meier–Staffelbach attacks against
//! it, and evaluates the analytic cost and correction-capability metrics.

pub mod attack_a;
pub mod attack_b;
pub mod channel;
pub mod checks;
pub mod error;
pub mod exec;
pub mod gf2;
pub mod harness;
pub mod lfsr;
pub mod prob;

pub use channel::{cascade, run_pipeline, ChannelParams, PipelineTrace};
pub use checks::{build_checks, CheckSystem, ReliabilityModel};
pub use error::{Error, Result};
pub use exec::Exec;
pub use gf2::{BitSequence, Gf2Matrix};
pub use lfsr::{generate, ConnectionPolynomial, LfsrKey};
