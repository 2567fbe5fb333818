//! Optimized secret-key gain against fibre length at 830 nm.

use lm05::reports::{gain_distance, max_distances};
use lm05::{GainModel, LinkParams, QberModel};

fn main() -> lm05::Result<()> {
    let link = LinkParams::fiber_830nm(0.0);
    let model = GainModel::default();
    let qber = QberModel::default();
    let distances: Vec<f64> = (0..=16).map(|i| i as f64 * 0.5).collect();
    print!(
        "{}",
        gain_distance(&distances, &link, &model, qber)?.to_csv()
    );

    let (lm05, bb84) = max_distances(&link, &model, qber)?;
    eprintln!("reach: lm05 {lm05:.2} km, bb84 {bb84:.2} km");
    Ok(())
}
