//! Encoding and decoding single photons in the four polarization states.

use lm05::quantum::{Basis, EncodeOp, PolarizationState, apply_encode, measure};
use lm05::stream_from_seed;

fn main() {
    let mut rng = stream_from_seed(1);
    for psi in PolarizationState::ALL {
        for op in [EncodeOp::Identity, EncodeOp::Flip] {
            let encoded = apply_encode(op, psi);
            let decoded = measure(encoded, psi.basis(), &mut rng);
            println!(
                "{psi} --{op:?}--> {encoded}, Bob reads bit {}",
                (decoded.bit() ^ psi.bit()) as u8
            );
        }
    }

    let trials = 10_000;
    let ones = (0..trials)
        .filter(|_| measure(PolarizationState::H, Basis::X, &mut rng).bit())
        .count();
    println!(
        "H measured in X gives bit 1 in {:.3} of {trials} trials",
        ones as f64 / trials as f64
    );
}
