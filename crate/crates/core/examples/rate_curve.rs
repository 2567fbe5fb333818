//! Security margin of both protocols against link transmissivity for a
//! bright (`μ = 1`) source and ideal detector.

use lm05::analytics::margin_zero_crossing;
use lm05::reports::{Layout, SweepSpec, rate_curve};
use lm05::{LinkParams, Protocol};

fn main() -> lm05::Result<()> {
    let link = LinkParams::ideal(1.0);
    let spec = SweepSpec {
        points: 13,
        ..SweepSpec::transmittance()
    };
    print!("{}", rate_curve(&spec, &link)?.render(Layout::Gnuplot));

    for protocol in [Protocol::Lm05, Protocol::Bb84] {
        if let Some(t) = margin_zero_crossing(&link, protocol)? {
            println!("# {protocol} becomes secure above t_link = {t:.4}");
        }
    }
    Ok(())
}
