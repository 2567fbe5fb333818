//! Monte Carlo sessions with and without a photon-number-splitting
//! eavesdropper. The attack leaves no errors; only the throughput drops.

use lm05::adversary::{AttackKind, EveStrategy};
use lm05::reports::simulate;
use lm05::{GainModel, LinkParams, Protocol, SessionConfig};

fn main() -> lm05::Result<()> {
    let link = LinkParams {
        d_b: 0.0,
        ..LinkParams::weak_pulse_testbed().with_mu(1.0)
    };
    let model = GainModel::default();
    for kind in [AttackKind::None, AttackKind::PnsM, AttackKind::PnsMPrime] {
        let cfg = SessionConfig::new(Protocol::Lm05, link, 1_000_000, 3)
            .with_strategy(EveStrategy::new(kind));
        let r = simulate(&cfg, &model)?;
        let s = &r.stats;
        print!(
            "{kind}: detection {:.4e} (expected {:.4e})",
            r.detection.fraction(),
            r.detection.expected_p
        );
        if let Some(a) = r.acceptance {
            print!(
                ", Eve forwards {:.4e} (bound {:.4e})",
                a.fraction(),
                a.expected_p
            );
        }
        println!(", errors mm {} cm {}", s.n_err + s.n_d, s.cm_errors);
    }
    Ok(())
}
