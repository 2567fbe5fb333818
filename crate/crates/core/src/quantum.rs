//! Four-state polarization algebra.
//!
//! Every protocol event on the quantum channel can be written with the four
//! BB84 states plus classical probabilities, so states are a plain enum
//! rather than amplitude vectors.

use std::fmt;

use rand::{Rng, RngExt};

/// Measurement / preparation basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    /// Eigenbasis of `σ_z`: `|0⟩`, `|1⟩`.
    Z,
    /// Eigenbasis of `σ_x`: `|+⟩`, `|−⟩`.
    X,
}

impl Basis {
    pub const ALL: [Basis; 2] = [Basis::Z, Basis::X];

    /// The two states of this basis, logical 0 first.
    pub fn states(self) -> [PolarizationState; 2] {
        match self {
            Basis::Z => [PolarizationState::H, PolarizationState::V],
            Basis::X => [PolarizationState::D, PolarizationState::A],
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.random_bool(0.5) {
            Basis::Z
        } else {
            Basis::X
        }
    }
}

/// One of the four BB84 polarization states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolarizationState {
    /// `|0⟩`
    H,
    /// `|1⟩`
    V,
    /// `|+⟩`
    D,
    /// `|−⟩`
    A,
}

impl PolarizationState {
    pub const ALL: [PolarizationState; 4] = [
        PolarizationState::H,
        PolarizationState::V,
        PolarizationState::D,
        PolarizationState::A,
    ];

    pub fn basis(self) -> Basis {
        match self {
            PolarizationState::H | PolarizationState::V => Basis::Z,
            PolarizationState::D | PolarizationState::A => Basis::X,
        }
    }

    /// Bit value carried by the state in its own basis (`H`, `D` → 0).
    pub fn bit(self) -> bool {
        matches!(self, PolarizationState::V | PolarizationState::A)
    }

    pub fn from_basis_bit(basis: Basis, bit: bool) -> Self {
        basis.states()[bit as usize]
    }

    /// Uniform draw over the four states.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::ALL[rng.random_range(0..4)]
    }
}

impl fmt::Display for PolarizationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PolarizationState::H => "|0>",
            PolarizationState::V => "|1>",
            PolarizationState::D => "|+>",
            PolarizationState::A => "|->",
        };
        f.write_str(s)
    }
}

/// Alice's message-mode operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EncodeOp {
    /// `I`, logical 0.
    Identity,
    /// `iσ_y`, logical 1.
    Flip,
}

impl EncodeOp {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            EncodeOp::Flip
        } else {
            EncodeOp::Identity
        }
    }

    pub fn bit(self) -> bool {
        self == EncodeOp::Flip
    }
}

/// The state orthogonal to `s` inside its own basis.
pub fn orthogonal(s: PolarizationState) -> PolarizationState {
    match s {
        PolarizationState::H => PolarizationState::V,
        PolarizationState::V => PolarizationState::H,
        PolarizationState::D => PolarizationState::A,
        PolarizationState::A => PolarizationState::D,
    }
}

/// Applies Alice's encoding. `iσ_y` maps every equatorial state on the
/// four-state ring to its orthogonal partner.
pub fn apply_encode(op: EncodeOp, s: PolarizationState) -> PolarizationState {
    match op {
        EncodeOp::Identity => s,
        EncodeOp::Flip => orthogonal(s),
    }
}

/// Projective measurement of `s` in basis `b`.
///
/// Same basis is deterministic; the conjugate basis gives either outcome with
/// probability 1/2. The stream is only consumed in the conjugate case.
pub fn measure<R: Rng + ?Sized>(s: PolarizationState, b: Basis, rng: &mut R) -> PolarizationState {
    if s.basis() == b {
        s
    } else {
        PolarizationState::from_basis_bit(b, rng.random_bool(0.5))
    }
}
