//! Photon-number-splitting eavesdroppers as per-pulse intercept automata.
//!
//! Eve sits at the exit of the sender's station, counts photons with a
//! quantum nondemolition (QND) measurement and replaces the lossy channel
//! with her own lossless one. She hides by blocking pulses she cannot read,
//! so the only trace she leaves is the loss rate.
//!
//! The two LM05 attacks are modelled by their conclusive-outcome
//! probabilities, not by simulating the measurements themselves:
//!
//! - **`M`** (PNS_M) reads the absolute polarization `ψ` unambiguously from
//!   three copies with probability 1/2; pulses with more than three photons
//!   are conservatively taken as always conclusive. Knowing `ψ`, Eve re-reads
//!   the returning photon and learns Alice's flip without disturbing it.
//! - **`M′`** (PNS_M′) keeps one photon, sends one to Alice and, on the way
//!   back, tells parallel from antiparallel pairs with probability 1/4. The
//!   conclusive projector is the singlet
//!   `Π_A = (|ψψ⊥⟩ − |ψ⊥ψ⟩)(⟨ψψ⊥| − ⟨ψ⊥ψ|)/2`, `Π_S = I₄ − Π_A`. A third stored
//!   photon is re-encoded and sent on, so at least three photons are needed.
//!
//! Against BB84 the usual PNS attack keeps one photon of every multiphoton
//! pulse and reads it after basis reconciliation.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngExt};

use crate::analytics::{Protocol, pns_yield_bb84, pns_yield_lm05};
use crate::quantum::{EncodeOp, PolarizationState, apply_encode, orthogonal};
use crate::source::{Pulse, poisson_tail};
use crate::{Error, Result};

/// Probability that `M` is conclusive on exactly three photons.
pub const M_CONCLUSIVE: f64 = 0.5;
/// Probability that `M′` is conclusive on a photon pair.
pub const M_PRIME_CONCLUSIVE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum AttackKind {
    #[default]
    None,
    PnsM,
    PnsMPrime,
}

impl FromStr for AttackKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "none" => Ok(AttackKind::None),
            "pnsm" => Ok(AttackKind::PnsM),
            "pnsmprime" | "pnsm'" => Ok(AttackKind::PnsMPrime),
            other => Err(Error::Config(format!("unknown attack {other:?}"))),
        }
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttackKind::None => "none",
            AttackKind::PnsM => "pns-m",
            AttackKind::PnsMPrime => "pns-m-prime",
        })
    }
}

/// Where Eve drops the pulses she cannot read.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BlockPlacement {
    /// Everything is blocked before it reaches Alice.
    #[default]
    ForwardOnly,
    /// A fraction `forward_fraction` of the droppable pulses is blocked before
    /// Alice; the rest is let through untouched and blocked on the way back,
    /// so Alice's own loss statistics look like a symmetric channel.
    SplitBothPaths { forward_fraction: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EveStrategy {
    pub kind: AttackKind,
    pub blocking: BlockPlacement,
}

impl EveStrategy {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(kind: AttackKind) -> Self {
        Self {
            kind,
            blocking: BlockPlacement::ForwardOnly,
        }
    }

    pub fn split(kind: AttackKind, forward_fraction: f64) -> Self {
        Self {
            kind,
            blocking: BlockPlacement::SplitBothPaths { forward_fraction },
        }
    }

    pub fn is_active(&self) -> bool {
        self.kind != AttackKind::None
    }

    pub fn validate(&self) -> Result<()> {
        if let BlockPlacement::SplitBothPaths { forward_fraction } = self.blocking
            && !(0.0..=1.0).contains(&forward_fraction)
        {
            return Err(Error::domain(
                "forward_fraction",
                forward_fraction,
                "0 <= f <= 1",
            ));
        }
        Ok(())
    }

    /// Probability that a pulse of a `μ` source is delivered to the receiver
    /// under this strategy, or `None` when no attack is configured.
    pub fn acceptance_probability(&self, protocol: Protocol, mu: f64) -> Result<Option<f64>> {
        let p = match (self.kind, protocol) {
            (AttackKind::None, _) => return Ok(None),
            (_, Protocol::Bb84) => pns_yield_bb84(mu)?,
            (AttackKind::PnsM, Protocol::Lm05) => pns_yield_lm05(mu)?,
            (AttackKind::PnsMPrime, Protocol::Lm05) => {
                if mu.is_nan() || mu <= 0.0 {
                    return Err(Error::domain("mu", mu, "mu > 0"));
                }
                M_PRIME_CONCLUSIVE * poisson_tail(3, mu)
            }
        };
        Ok(Some(p))
    }

    /// Eve's action as an LM05 pulse leaves Bob's station.
    pub fn forward<R: Rng + ?Sized>(
        &self,
        pulse: Pulse,
        rng: &mut R,
    ) -> (ForwardDecision, EveKnowledge) {
        let (decision, knowledge) = match self.kind {
            AttackKind::None => (ForwardDecision::Pass, EveKnowledge::default()),
            AttackKind::PnsM => pns_m_forward(pulse, rng),
            AttackKind::PnsMPrime => (pns_m_prime_forward(pulse), EveKnowledge::default()),
        };
        (self.place_block(decision, pulse, rng), knowledge)
    }

    /// Eve's action on the photon Alice sends back.
    pub fn backward<R: Rng + ?Sized>(
        &self,
        decision: &ForwardDecision,
        knowledge: &mut EveKnowledge,
        returned: Pulse,
        rng: &mut R,
    ) -> Result<BackwardDecision> {
        match *decision {
            ForwardDecision::Pass => Ok(BackwardDecision::Pass),
            ForwardDecision::Block | ForwardDecision::DelayedBlock { .. } => {
                Ok(BackwardDecision::Block)
            }
            ForwardDecision::ForwardFresh { .. } => {
                let (bit, state) = pns_m_backward(returned.state, knowledge)?;
                knowledge.learned_bit = Some(bit);
                Ok(BackwardDecision::Forward(Pulse::new(1, state)))
            }
            ForwardDecision::ForwardSubset { kept, .. } => {
                Ok(pns_m_prime_backward(kept, returned, knowledge, rng))
            }
        }
    }

    /// Eve's action on a BB84 pulse: keep one photon of every multiphoton
    /// pulse, forward another, block the rest.
    pub fn forward_bb84(&self, pulse: Pulse) -> ForwardDecision {
        if !self.is_active() {
            return ForwardDecision::Pass;
        }
        if qnd_count(&pulse) < 2 {
            ForwardDecision::Block
        } else {
            ForwardDecision::ForwardSubset {
                kept: Pulse::new(pulse.n - 1, pulse.state),
                sent: Pulse::new(1, pulse.state),
            }
        }
    }

    fn place_block<R: Rng + ?Sized>(
        &self,
        decision: ForwardDecision,
        pulse: Pulse,
        rng: &mut R,
    ) -> ForwardDecision {
        match (decision, self.blocking) {
            (ForwardDecision::Block, BlockPlacement::SplitBothPaths { forward_fraction })
                if pulse.n > 0 && !rng.random_bool(forward_fraction) =>
            {
                ForwardDecision::DelayedBlock {
                    sent: Pulse::new(1, pulse.state),
                }
            }
            (d, _) => d,
        }
    }
}

/// Eve's action on the forward path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ForwardDecision {
    /// No eavesdropper: the pulse goes through the ordinary lossy channel.
    Pass,
    /// Nothing reaches Alice.
    Block,
    /// Eve re-prepared a single photon in `state`.
    ForwardFresh {
        state: PolarizationState,
        knows_psi: bool,
    },
    /// Eve keeps `kept` and forwards `sent`.
    ForwardSubset { kept: Pulse, sent: Pulse },
    /// The pulse is let through so Alice sees it, and will be blocked on
    /// the way back.
    DelayedBlock { sent: Pulse },
}

impl ForwardDecision {
    /// What arrives at Alice when Eve handles the pulse; `None` for
    /// [`ForwardDecision::Pass`], where the channel decides.
    pub fn delivered(&self) -> Option<Pulse> {
        match *self {
            ForwardDecision::Pass => None,
            ForwardDecision::Block => Some(Pulse::new(0, PolarizationState::H)),
            ForwardDecision::ForwardFresh { state, .. } => Some(Pulse::new(1, state)),
            ForwardDecision::ForwardSubset { sent, .. }
            | ForwardDecision::DelayedBlock { sent } => Some(sent),
        }
    }

    pub fn is_block(&self) -> bool {
        matches!(self, ForwardDecision::Block)
    }
}

/// Eve's action on the backward path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BackwardDecision {
    Pass,
    Block,
    Forward(Pulse),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EveKnowledge {
    pub psi: Option<PolarizationState>,
    pub conclusive: bool,
    pub learned_bit: Option<bool>,
}

/// QND photon count; leaves the polarization untouched.
pub fn qnd_count(pulse: &Pulse) -> u64 {
    pulse.n
}

/// Forward half of PNS_M.
pub fn pns_m_forward<R: Rng + ?Sized>(
    pulse: Pulse,
    rng: &mut R,
) -> (ForwardDecision, EveKnowledge) {
    let conclusive = match qnd_count(&pulse) {
        0..=2 => false,
        3 => rng.random_bool(M_CONCLUSIVE),
        _ => true,
    };
    if !conclusive {
        return (ForwardDecision::Block, EveKnowledge::default());
    }
    let knowledge = EveKnowledge {
        psi: Some(pulse.state),
        conclusive: true,
        learned_bit: None,
    };
    let decision = ForwardDecision::ForwardFresh {
        state: pulse.state,
        knows_psi: true,
    };
    (decision, knowledge)
}

/// Backward half of PNS_M: read the flip against the known `ψ` and pass the
/// photon on unchanged. Returns `(learned_bit, forwarded_state)`.
pub fn pns_m_backward(
    encoded: PolarizationState,
    k: &EveKnowledge,
) -> Result<(bool, PolarizationState)> {
    match k.psi {
        Some(psi) if k.conclusive => Ok((encoded == orthogonal(psi), encoded)),
        _ => Err(Error::InconclusiveKnowledge),
    }
}

/// Forward half of PNS_M′: with three or more photons keep all but one and
/// send a single photon to Alice.
pub fn pns_m_prime_forward(pulse: Pulse) -> ForwardDecision {
    if qnd_count(&pulse) < 3 {
        return ForwardDecision::Block;
    }
    ForwardDecision::ForwardSubset {
        kept: Pulse::new(pulse.n - 1, pulse.state),
        sent: Pulse::new(1, pulse.state),
    }
}

/// Backward half of PNS_M′: the pair measurement on a stored photon and the
/// returning one. On a conclusive (antisymmetric or known-parallel) outcome
/// Eve applies the inferred operation to a further stored photon and sends
/// it to Bob; otherwise she blocks.
pub fn pns_m_prime_backward<R: Rng + ?Sized>(
    kept: Pulse,
    returned: Pulse,
    knowledge: &mut EveKnowledge,
    rng: &mut R,
) -> BackwardDecision {
    if kept.n < 2 || returned.n == 0 || !rng.random_bool(M_PRIME_CONCLUSIVE) {
        return BackwardDecision::Block;
    }
    let op = EncodeOp::from_bit(returned.state != kept.state);
    knowledge.conclusive = true;
    knowledge.learned_bit = Some(op.bit());
    BackwardDecision::Forward(Pulse::new(1, apply_encode(op, kept.state)))
}

/// Both halves of PNS_M′ for a pulse whose message-mode operation is
/// `alice_op`.
pub fn pns_m_prime<R: Rng + ?Sized>(
    pulse: Pulse,
    alice_op: EncodeOp,
    rng: &mut R,
) -> (ForwardDecision, BackwardDecision, EveKnowledge) {
    let mut knowledge = EveKnowledge::default();
    let forward = pns_m_prime_forward(pulse);
    let backward = match forward {
        ForwardDecision::ForwardSubset { kept, sent } => {
            let returned = Pulse::new(sent.n, apply_encode(alice_op, sent.state));
            pns_m_prime_backward(kept, returned, &mut knowledge, rng)
        }
        _ => BackwardDecision::Block,
    };
    (forward, backward, knowledge)
}
