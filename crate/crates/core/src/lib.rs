//! Security analysis and simulation of the two-way deterministic LM05 quantum
//! key distribution protocol under photon-number-splitting (PNS) attacks,
//! with BB84 as the one-way baseline.
//!
//! The crate is organised bottom-up:
//!
//! - [`quantum`]: the four BB84 polarization states, the flip operation and
//!   basis measurement.
//! - [`source`]: weak-pulse Poisson source, channel transmissivity, binomial
//!   loss and threshold detectors with dark counts.
//! - [`analytics`]: closed-form detection probabilities, PNS yield bounds,
//!   secret-gain accounting, the `μ` optimizer and the secure-distance solver.
//! - [`adversary`]: PNS eavesdropping strategies as per-pulse automata.
//! - [`engine`]: per-pulse Monte Carlo sessions for LM05 and BB84.
//! - [`reports`]: sweeps, CSV tables and the reports behind the `lm05` binary.
//!
//! Every source of randomness is an explicit [`RandomStream`] argument; a
//! session is a pure function of its configuration and seed.

pub mod adversary;
pub mod analytics;
pub mod engine;
mod error;
pub mod quantum;
pub mod reports;
pub mod source;

pub use analytics::{GainModel, GainReport, Protocol, QberModel, QberTally};
pub use engine::{SessionConfig, SessionStats};
pub use error::{Error, Result};
pub use quantum::{Basis, EncodeOp, PolarizationState};
pub use source::{LinkParams, Pulse};

/// Deterministic random stream used throughout the crate.
///
/// ChaCha8 is portable across platforms and releases, so a seed pins a
/// session bit for bit.
pub type RandomStream = rand_chacha::ChaCha8Rng;

/// Creates a [`RandomStream`] from a 64-bit seed.
pub fn stream_from_seed(seed: u64) -> RandomStream {
    use rand::SeedableRng;
    RandomStream::seed_from_u64(seed)
}
