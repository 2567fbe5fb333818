//! Per-pulse Monte Carlo sessions for LM05 and BB84.
//!
//! A session is split into fixed-size chunks. Chunk `i` draws from the
//! ChaCha stream `i` of the session seed, so results do not depend on how
//! many threads run the chunks; the per-chunk tallies are merged in order.

use rand::RngExt;
use rayon::prelude::*;

use crate::adversary::{BackwardDecision, EveStrategy, ForwardDecision};
use crate::analytics::{GainModel, GainReport, Protocol, QberTally, qber_estimate};
use crate::quantum::{Basis, EncodeOp, apply_encode};
use crate::source::{ClickRecord, LinkParams, PhotonSource, Pulse, detect, thin, transmissivity};
use crate::{Error, RandomStream, Result, stream_from_seed};

/// Pulses per independently seeded chunk.
pub const CHUNK_PULSES: u64 = 1 << 16;

/// Efficiency and dark-count probability of a detector pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    pub eta: f64,
    pub dark: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionConfig {
    pub link: LinkParams,
    pub strategy: EveStrategy,
    pub protocol: Protocol,
    pub n_pulses: u64,
    pub seed: u64,
    /// Share of `Γ_c` on the forward (Bob → Alice) path.
    pub gamma_split: f64,
    /// Alice's control-mode detectors; Bob's parameters when `None`.
    pub alice_detector: Option<DetectorParams>,
}

impl SessionConfig {
    pub fn new(protocol: Protocol, link: LinkParams, n_pulses: u64, seed: u64) -> Self {
        Self {
            link,
            strategy: EveStrategy::none(),
            protocol,
            n_pulses,
            seed,
            gamma_split: 0.5,
            alice_detector: None,
        }
    }

    pub fn with_strategy(mut self, strategy: EveStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.link.validate()?;
        self.strategy.validate()?;
        if self.n_pulses == 0 {
            return Err(Error::Config("n_pulses must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma_split) {
            return Err(Error::domain(
                "gamma_split",
                self.gamma_split,
                "0 <= gamma_split <= 1",
            ));
        }
        if let Some(d) = self.alice_detector
            && (!(0.0..=1.0).contains(&d.eta) || !(0.0..1.0).contains(&d.dark))
        {
            return Err(Error::Config(
                "alice detector parameters out of range".into(),
            ));
        }
        Ok(())
    }

    fn bob_detector(&self) -> DetectorParams {
        DetectorParams {
            eta: self.link.eta_b,
            dark: self.link.d_b,
        }
    }

    fn chunk_stream(&self, chunk: u64) -> RandomStream {
        let mut rng = stream_from_seed(self.seed);
        rng.set_stream(chunk);
        rng
    }

    fn chunks(&self) -> impl IndexedParallelIterator<Item = (u64, u64)> + '_ {
        let n_chunks = self.n_pulses.div_ceil(CHUNK_PULSES) as usize;
        (0..n_chunks).into_par_iter().map(move |i| {
            let i = i as u64;
            let start = i * CHUNK_PULSES;
            (i, CHUNK_PULSES.min(self.n_pulses - start))
        })
    }
}

/// Tallies of one session. Merging is a field-wise sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionStats {
    pub protocol: Protocol,
    pub link: LinkParams,
    /// Pulses emitted by the sender.
    pub sent: u64,
    /// Message-mode pulses (every pulse for BB84).
    pub mm_sent: u64,
    /// Pulses with at least one photon at the first receiver (Alice for
    /// LM05, Bob for BB84).
    pub forward_arrived: u64,
    /// Message-mode pulses with at least one photon back at Bob's detectors.
    pub backward_arrived: u64,
    /// Message-mode (BB84: all) pulses with at least one click at Bob.
    pub detected: u64,
    /// Decoded events: every click for LM05, basis-matched clicks for BB84.
    pub n_tot: u64,
    /// Single-click decoding errors among `n_tot`.
    pub n_err: u64,
    /// Double clicks among `n_tot`.
    pub n_d: u64,
    pub cm_sent: u64,
    /// Control-mode single clicks in the preparation basis.
    pub cm_trials: u64,
    pub cm_errors: u64,
    /// Message-mode pulses Eve delivered to the final receiver.
    pub eve_accepted: u64,
    pub eve_blocked_forward: u64,
    pub eve_blocked_backward: u64,
}

impl SessionStats {
    pub fn empty(protocol: Protocol, link: LinkParams) -> Self {
        Self {
            protocol,
            link,
            sent: 0,
            mm_sent: 0,
            forward_arrived: 0,
            backward_arrived: 0,
            detected: 0,
            n_tot: 0,
            n_err: 0,
            n_d: 0,
            cm_sent: 0,
            cm_trials: 0,
            cm_errors: 0,
            eve_accepted: 0,
            eve_blocked_forward: 0,
            eve_blocked_backward: 0,
        }
    }

    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.protocol != other.protocol || self.link != other.link {
            return Err(Error::ShapeMismatch);
        }
        Ok(Self {
            protocol: self.protocol,
            link: self.link,
            sent: self.sent + other.sent,
            mm_sent: self.mm_sent + other.mm_sent,
            forward_arrived: self.forward_arrived + other.forward_arrived,
            backward_arrived: self.backward_arrived + other.backward_arrived,
            detected: self.detected + other.detected,
            n_tot: self.n_tot + other.n_tot,
            n_err: self.n_err + other.n_err,
            n_d: self.n_d + other.n_d,
            cm_sent: self.cm_sent + other.cm_sent,
            cm_trials: self.cm_trials + other.cm_trials,
            cm_errors: self.cm_errors + other.cm_errors,
            eve_accepted: self.eve_accepted + other.eve_accepted,
            eve_blocked_forward: self.eve_blocked_forward + other.eve_blocked_forward,
            eve_blocked_backward: self.eve_blocked_backward + other.eve_blocked_backward,
        })
    }

    pub fn eve_blocked(&self) -> u64 {
        self.eve_blocked_forward + self.eve_blocked_backward
    }

    pub fn tally(&self) -> QberTally {
        QberTally {
            n_err: self.n_err,
            n_d: self.n_d,
            n_tot: self.n_tot,
        }
    }

    pub fn qber(&self) -> Result<f64> {
        qber_estimate(self.tally())
    }

    /// Fraction of message-mode pulses with a click at Bob.
    pub fn detection_fraction(&self) -> f64 {
        ratio(self.detected, self.mm_sent)
    }

    /// Fraction of message-mode pulses Eve let through to the receiver.
    pub fn acceptance_fraction(&self) -> f64 {
        ratio(self.eve_accepted, self.mm_sent)
    }

    pub fn cm_error_rate(&self) -> f64 {
        ratio(self.cm_errors, self.cm_trials)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Field-wise sum of two tallies from sessions of the same shape.
pub fn merge(a: &SessionStats, b: &SessionStats) -> Result<SessionStats> {
    a.merge(b)
}

/// Runs the session configured in `cfg`.
pub fn run(cfg: &SessionConfig) -> Result<SessionStats> {
    match cfg.protocol {
        Protocol::Lm05 => run_lm05(cfg),
        Protocol::Bb84 => run_bb84(cfg),
    }
}

pub fn run_lm05(cfg: &SessionConfig) -> Result<SessionStats> {
    if cfg.protocol != Protocol::Lm05 {
        return Err(Error::Config("run_lm05 needs an LM05 configuration".into()));
    }
    run_chunks(cfg, lm05_chunk)
}

pub fn run_bb84(cfg: &SessionConfig) -> Result<SessionStats> {
    if cfg.protocol != Protocol::Bb84 {
        return Err(Error::Config("run_bb84 needs a BB84 configuration".into()));
    }
    run_chunks(cfg, bb84_chunk)
}

fn run_chunks<F>(cfg: &SessionConfig, chunk: F) -> Result<SessionStats>
where
    F: Fn(&SessionConfig, &mut RandomStream, u64, &mut SessionStats) -> Result<()> + Sync,
{
    cfg.validate()?;
    let parts: Vec<SessionStats> = cfg
        .chunks()
        .map(|(i, n)| {
            let mut rng = cfg.chunk_stream(i);
            let mut stats = SessionStats::empty(cfg.protocol, cfg.link);
            chunk(cfg, &mut rng, n, &mut stats).map(|_| stats)
        })
        .collect::<Result<_>>()?;
    parts
        .iter()
        .try_fold(SessionStats::empty(cfg.protocol, cfg.link), |acc, s| {
            acc.merge(s)
        })
}

fn vacuum() -> Pulse {
    Pulse::new(0, crate::PolarizationState::H)
}

fn lm05_chunk(
    cfg: &SessionConfig,
    rng: &mut RandomStream,
    pulses: u64,
    stats: &mut SessionStats,
) -> Result<()> {
    let link = &cfg.link;
    let source = PhotonSource::new(link.mu)?;
    let t_fwd = transmissivity(link.alpha, link.l, cfg.gamma_split * link.gamma_c)?;
    let t_bwd = transmissivity(link.alpha, link.l, (1.0 - cfg.gamma_split) * link.gamma_c)?;
    let bob = cfg.bob_detector();
    let alice = cfg.alice_detector.unwrap_or(bob);
    let eve = &cfg.strategy;

    for _ in 0..pulses {
        stats.sent += 1;
        let pulse = source.emit(rng);
        let psi = pulse.state;
        let control = rng.random_bool(link.c);

        let (decision, mut knowledge) = eve.forward(pulse, rng);
        let at_alice = decision
            .delivered()
            .unwrap_or_else(|| thin(pulse, t_fwd, rng));
        if !at_alice.is_vacuum() {
            stats.forward_arrived += 1;
        }

        if control {
            stats.cm_sent += 1;
            let basis = Basis::random(rng);
            let rec = detect(at_alice, basis, alice.eta, alice.dark, rng);
            if basis == psi.basis()
                && let Some(bit) = rec.single_click()
            {
                stats.cm_trials += 1;
                stats.cm_errors += (bit != psi.bit()) as u64;
            }
            continue;
        }

        stats.mm_sent += 1;
        let op = EncodeOp::from_bit(rng.random_bool(0.5));
        let encoded = Pulse::new(at_alice.n, apply_encode(op, at_alice.state));
        let at_bob = match eve.backward(&decision, &mut knowledge, encoded, rng)? {
            BackwardDecision::Pass => thin(encoded, t_bwd, rng),
            BackwardDecision::Forward(p) => {
                stats.eve_accepted += 1;
                p
            }
            BackwardDecision::Block => {
                if decision.is_block() {
                    stats.eve_blocked_forward += 1;
                } else {
                    stats.eve_blocked_backward += 1;
                }
                vacuum()
            }
        };
        if !at_bob.is_vacuum() {
            stats.backward_arrived += 1;
        }

        let rec = detect(at_bob, psi.basis(), bob.eta, bob.dark, rng);
        stats.detected += rec.any() as u64;
        record_key(stats, rec, psi.bit() ^ op.bit());
    }
    Ok(())
}

fn bb84_chunk(
    cfg: &SessionConfig,
    rng: &mut RandomStream,
    pulses: u64,
    stats: &mut SessionStats,
) -> Result<()> {
    let link = &cfg.link;
    let source = PhotonSource::new(link.mu)?;
    let t = transmissivity(link.alpha, link.l, link.gamma_c)?;
    let bob = cfg.bob_detector();

    for _ in 0..pulses {
        stats.sent += 1;
        stats.mm_sent += 1;
        let pulse = source.emit(rng);
        let psi = pulse.state;

        let decision = cfg.strategy.forward_bb84(pulse);
        let at_bob = match decision {
            ForwardDecision::Pass => thin(pulse, t, rng),
            d => {
                if d.is_block() {
                    stats.eve_blocked_forward += 1;
                } else {
                    stats.eve_accepted += 1;
                }
                d.delivered().unwrap_or_else(vacuum)
            }
        };
        if !at_bob.is_vacuum() {
            stats.forward_arrived += 1;
        }

        let basis = Basis::random(rng);
        let rec = detect(at_bob, basis, bob.eta, bob.dark, rng);
        stats.detected += rec.any() as u64;
        if basis == psi.basis() {
            record_key(stats, rec, psi.bit());
        }
    }
    Ok(())
}

/// Books a key-generating click against the expected bit.
fn record_key(stats: &mut SessionStats, rec: ClickRecord, expected: bool) {
    if !rec.any() {
        return;
    }
    stats.n_tot += 1;
    if rec.double_click() {
        stats.n_d += 1;
    } else if rec.single_click() != Some(expected) {
        stats.n_err += 1;
    }
}

/// Gain accounting applied to a session's own measured detection rate and
/// QBER.
pub fn empirical_gain(stats: &SessionStats, model: &GainModel) -> Result<GainReport> {
    let e = stats.qber()?;
    let p_av = stats.detection_fraction();
    model.gain_from_detection(stats.protocol, &stats.link, p_av, e)
}
