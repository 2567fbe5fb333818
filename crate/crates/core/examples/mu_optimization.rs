//! Best mean photon number per distance and the gain it buys.

use lm05::analytics::optimize_mu;
use lm05::{GainModel, LinkParams, Protocol, QberModel};

fn main() -> lm05::Result<()> {
    let model = GainModel::default();
    println!(
        "{:>5} {:>10} {:>12} {:>10} {:>12}",
        "l/km", "mu* lm05", "G lm05", "mu* bb84", "G bb84"
    );
    for l in [0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0] {
        let p = LinkParams::fiber_830nm(l);
        let lm = optimize_mu(&model, &p, Protocol::Lm05, QberModel::default())?;
        let bb = optimize_mu(&model, &p, Protocol::Bb84, QberModel::default())?;
        println!(
            "{l:>5} {:>10.4} {:>12.4e} {:>10.4} {:>12.4e}",
            lm.mu_star, lm.g_star, bb.mu_star, bb.g_star
        );
    }
    Ok(())
}
