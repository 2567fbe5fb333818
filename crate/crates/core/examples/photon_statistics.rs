//! Photon-number distribution of a weak coherent source and the fraction of
//! pulses an eavesdropper can exploit.

use lm05::analytics::{pns_yield_bb84, pns_yield_lm05};
use lm05::source::{PhotonSource, poisson_pmf};
use lm05::stream_from_seed;

fn main() -> lm05::Result<()> {
    let mu = 0.1;
    for n in 0..4 {
        println!("P_{n}({mu}) = {:.4e}", poisson_pmf(n, mu)?);
    }

    let source = PhotonSource::new(mu)?;
    let mut rng = stream_from_seed(7);
    let draws = 1_000_000;
    let multi = (0..draws).filter(|_| source.sample(&mut rng) >= 2).count();
    println!(
        "sampled multiphoton fraction {:.4e}",
        multi as f64 / draws as f64
    );

    println!("\n{:>6} {:>12} {:>12}", "mu", "lm05 yield", "bb84 yield");
    for mu in [0.05, 0.118, 0.5, 1.0, 2.0] {
        println!(
            "{mu:>6} {:>12.4e} {:>12.4e}",
            pns_yield_lm05(mu)?,
            pns_yield_bb84(mu)?
        );
    }
    Ok(())
}
