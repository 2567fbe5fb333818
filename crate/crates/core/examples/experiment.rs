//! Key gain and rate of a weak-pulse testbed under both readings of the
//! detector efficiency.

use lm05::GainModel;
use lm05::reports::{ExperimentParams, experiment};

fn main() -> lm05::Result<()> {
    let report = experiment(&ExperimentParams::default(), &GainModel::default())?;
    print!("{}", report.to_text());
    Ok(())
}
