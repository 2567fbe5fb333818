//! Acceptance gate. Runs every criterion, prints one `[PASS]`/`[FAIL]` line
//! each and exits non-zero if any failed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use lm05::adversary::{AttackKind, EveStrategy};
use lm05::analytics::{
    self, binary_entropy, max_secure_distance, optimize_mu, pns_yield_bb84, pns_yield_lm05, tau,
};
use lm05::engine;
use lm05::reports::{self, Comparison, ExperimentParams};
use lm05::source::poisson_pmf;
use lm05::{GainModel, LinkParams, Protocol, QberModel, SessionConfig};

type Check = Result<String, String>;

struct Criterion {
    id: u8,
    title: &'static str,
    budget: Duration,
    run: fn() -> Check,
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg.into()) }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn poisson_oracle(n: u32, mu: f64) -> f64 {
    mu.powi(n as i32) * (-mu).exp() / factorial(n)
}

fn lm05_yield_oracle(mu: f64) -> f64 {
    1.0 - (1.0 + mu + mu * mu / 2.0 + mu.powi(3) / 12.0) * (-mu).exp()
}

fn bb84_yield_oracle(mu: f64) -> f64 {
    1.0 - (1.0 + mu) * (-mu).exp()
}

fn poisson_values() -> Check {
    let mu = 0.1;
    let p0 = poisson_pmf(0, mu).map_err(|e| e.to_string())?;
    let p1 = poisson_pmf(1, mu).map_err(|e| e.to_string())?;
    let p2 = poisson_pmf(2, mu).map_err(|e| e.to_string())?;
    ensure((p0 - 0.905).abs() < 1e-3, format!("P0 = {p0}"))?;
    ensure((p1 - 0.0905).abs() < 1e-3, format!("P1 = {p1}"))?;
    ensure((p2 - 4.52e-3).abs() < 1e-3, format!("P2 = {p2}"))?;
    for (n, p) in [(0, p0), (1, p1), (2, p2)] {
        ensure(
            (p - poisson_oracle(n, mu)).abs() < 1e-15,
            format!("P{n} disagrees with oracle"),
        )?;
    }
    Ok(format!("P0 = {p0:.5}, P1 = {p1:.5}, P2 = {p2:.3e}"))
}

/// Bisection on `1 − e^{−t} − yield` over (0, 1].
fn crossing_oracle(yield_bound: f64) -> f64 {
    let margin = |t: f64| 1.0 - (-t).exp() - yield_bound;
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if margin(mid) > 0.0 {
            hi = mid
        } else {
            lo = mid
        }
    }
    0.5 * (lo + hi)
}

fn margin_crossings() -> Check {
    let link = LinkParams::ideal(1.0);
    let mut out = Vec::new();
    for (protocol, target, oracle_yield) in [
        (Protocol::Lm05, 0.0509, lm05_yield_oracle(1.0)),
        (Protocol::Bb84, 0.3068, bb84_yield_oracle(1.0)),
    ] {
        let t = analytics::margin_zero_crossing(&link, protocol)
            .map_err(|e| e.to_string())?
            .ok_or(format!("{protocol}: no crossing"))?;
        let oracle = crossing_oracle(oracle_yield);
        ensure(
            (t - oracle).abs() < 1e-3,
            format!("{protocol}: {t} vs oracle {oracle}"),
        )?;
        ensure(
            (t - target).abs() < 1e-3,
            format!("{protocol}: {t} vs {target}"),
        )?;
        let below =
            analytics::security_margin(&link, protocol, t * 0.99).map_err(|e| e.to_string())?;
        let above =
            analytics::security_margin(&link, protocol, t * 1.01).map_err(|e| e.to_string())?;
        ensure(
            below < 0.0 && above > 0.0,
            format!("{protocol}: margin does not change sign at {t}"),
        )?;
        out.push(format!("{protocol} {t:.5}"));
    }
    Ok(out.join(", "))
}

fn gain_distance_ordering() -> Check {
    let model = GainModel::default();
    let qber = QberModel::default();
    let gain = |l: f64, protocol| {
        optimize_mu(&model, &LinkParams::fiber_830nm(l), protocol, qber)
            .map(|o| o.g_star)
            .map_err(|e| e.to_string())
    };
    for l in [1.5, 3.0, 4.5] {
        let (lm, bb) = (gain(l, Protocol::Lm05)?, gain(l, Protocol::Bb84)?);
        ensure(lm > bb, format!("l = {l}: lm05 {lm:.3e} <= bb84 {bb:.3e}"))?;
    }
    let (lm, bb) = (gain(6.0, Protocol::Lm05)?, gain(6.0, Protocol::Bb84)?);
    ensure(bb >= lm, format!("l = 6: bb84 {bb:.3e} < lm05 {lm:.3e}"))?;
    let reach = |protocol| {
        max_secure_distance(&model, &LinkParams::fiber_830nm(0.0), protocol, qber)
            .map_err(|e| e.to_string())
    };
    let (lm_max, bb_max) = (reach(Protocol::Lm05)?, reach(Protocol::Bb84)?);
    let summary = format!("max distance lm05 {lm_max:.2} km, bb84 {bb_max:.2} km");
    ensure(
        (6.0..=7.0).contains(&lm_max),
        format!("{summary}: lm05 outside [6, 7]"),
    )?;
    ensure(
        (6.0..=7.0).contains(&bb_max),
        format!("{summary}: bb84 outside [6, 7]"),
    )?;
    Ok(format!("ordering holds, {summary}"))
}

fn testbed_ratio() -> Check {
    let params = ExperimentParams::default();
    ensure(
        params.rep_rate == 20e6,
        "testbed repetition rate is not 20 MHz",
    )?;
    let report = reports::experiment(&params, &GainModel::default()).map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    let mut passing = None;
    for i in &report.interpretations {
        let (rate_lm, rate_bb) = (
            i.lm05.key_rate(params.rep_rate),
            i.bb84.key_rate(params.rep_rate),
        );
        lines.push(format!(
            "{} ratio {:.3} ({:.0}/{:.0} kbit/s)",
            i.label(),
            i.ratio(),
            rate_lm / 1e3,
            rate_bb / 1e3
        ));
        let order = |r: f64| (1e5..1e6).contains(&r);
        if (i.ratio() - 3.0).abs() <= 0.5 && order(rate_lm) && order(rate_bb) {
            passing.get_or_insert(i.label());
        }
    }
    let summary = lines.join("; ");
    match passing {
        Some(label) => Ok(format!("{summary}; satisfied by {label}")),
        None => Err(summary),
    }
}

fn acceptance_check(
    kind: AttackKind,
    mu: f64,
    pulses: u64,
    seed: u64,
) -> Result<Comparison, String> {
    let strategy = EveStrategy::new(kind);
    let link = LinkParams::weak_pulse_testbed().with_mu(mu);
    let stats = engine::run(
        &SessionConfig::new(Protocol::Lm05, link, pulses, seed).with_strategy(strategy),
    )
    .map_err(|e| e.to_string())?;
    let expected = match kind {
        AttackKind::PnsM => lm05_yield_oracle(mu),
        _ => 0.25 * (1.0 - (1.0 + mu + mu * mu / 2.0) * (-mu).exp()),
    };
    Ok(Comparison {
        observed: stats.eve_accepted,
        trials: stats.mm_sent,
        expected_p: expected,
    })
}

fn attack_bound_consistency() -> Check {
    let mut out = Vec::new();
    for (i, mu) in [0.1, 0.5, 1.0].into_iter().enumerate() {
        let c = acceptance_check(AttackKind::PnsM, mu, 1_000_000, 500 + i as u64)?;
        ensure(
            c.within(3.0),
            format!(
                "PnsM mu = {mu}: {:.5} vs {:.5} (z = {:.2})",
                c.fraction(),
                c.expected_p,
                c.z()
            ),
        )?;
        out.push(format!("M mu={mu} z={:.2}", c.z()));
    }
    for (i, mu) in [0.5, 1.0].into_iter().enumerate() {
        let c = acceptance_check(AttackKind::PnsMPrime, mu, 1_000_000, 600 + i as u64)?;
        ensure(
            c.within(3.0),
            format!(
                "PnsMPrime mu = {mu}: {:.5} vs {:.5} (z = {:.2})",
                c.fraction(),
                c.expected_p,
                c.z()
            ),
        )?;
        out.push(format!("M' mu={mu} z={:.2}", c.z()));
    }
    let prime = EveStrategy::new(AttackKind::PnsMPrime);
    for k in 1..=500 {
        let mu = 5.0 * k as f64 / 500.0;
        let a = prime
            .acceptance_probability(Protocol::Lm05, mu)
            .map_err(|e| e.to_string())?
            .unwrap();
        let full = pns_yield_lm05(mu).map_err(|e| e.to_string())?;
        ensure(
            a < full,
            format!("M' yield {a} not below M yield {full} at mu = {mu}"),
        )?;
    }
    Ok(out.join(", "))
}

fn undetectability() -> Check {
    let mut out = Vec::new();
    for (kind, pulses) in [
        (AttackKind::PnsM, 4_500_000),
        (AttackKind::PnsMPrime, 11_000_000),
    ] {
        let strategy = EveStrategy::new(kind);
        let link = LinkParams {
            d_b: 0.0,
            ..LinkParams::weak_pulse_testbed().with_mu(1.0)
        };
        let s = engine::run(
            &SessionConfig::new(Protocol::Lm05, link, pulses, 700).with_strategy(strategy),
        )
        .map_err(|e| e.to_string())?;
        ensure(
            s.eve_accepted >= 100_000,
            format!("{kind}: only {} accepted pulses", s.eve_accepted),
        )?;
        ensure(s.cm_trials > 0, format!("{kind}: no control-mode trials"))?;
        ensure(
            s.n_err == 0 && s.n_d == 0 && s.cm_errors == 0,
            format!(
                "{kind}: mm errors {} double {} cm errors {}",
                s.n_err, s.n_d, s.cm_errors
            ),
        )?;
        out.push(format!("{kind}: {} accepted, 0 errors", s.eve_accepted));
    }
    let cfg = SessionConfig::new(
        Protocol::Lm05,
        LinkParams::weak_pulse_testbed(),
        1_000_000,
        701,
    );
    let report = reports::simulate(&cfg, &GainModel::default()).map_err(|e| e.to_string())?;
    let d = report.detection;
    ensure(
        d.within(3.0),
        format!(
            "no-Eve detection {:.4e} vs {:.4e} (z = {:.2})",
            d.fraction(),
            d.expected_p,
            d.z()
        ),
    )?;
    out.push(format!("no-Eve detection z = {:.2}", d.z()));
    Ok(out.join(", "))
}

fn property_suites() -> Check {
    let t = tau(0.5).map_err(|e| e.to_string())?;
    ensure((t - 1.0).abs() < 1e-12, format!("tau(0.5) = {t}"))?;
    for k in 0..=1000 {
        let e = k as f64 / 1000.0;
        let (a, b) = (binary_entropy(e).unwrap(), binary_entropy(1.0 - e).unwrap());
        ensure((a - b).abs() < 1e-12, format!("h asymmetric at {e}"))?;
    }
    for k in 1..=500 {
        let mu = 5.0 * k as f64 / 500.0;
        ensure(
            pns_yield_lm05(mu).unwrap() < pns_yield_bb84(mu).unwrap(),
            format!("yield order at {mu}"),
        )?;
    }

    let model = GainModel::default();
    let qber = QberModel::default();
    for (l, protocol) in [
        (1.0, Protocol::Lm05),
        (3.0, Protocol::Lm05),
        (1.0, Protocol::Bb84),
        (5.0, Protocol::Bb84),
    ] {
        let p = LinkParams::fiber_830nm(l);
        let opt = optimize_mu(&model, &p, protocol, qber).map_err(|e| e.to_string())?;
        for k in 0..200 {
            let mu = 1e-4 + (2.0 - 1e-4) * k as f64 / 199.0;
            let g = model.gain(&p.with_mu(mu), protocol, qber).unwrap().g_sec;
            ensure(
                opt.g_star >= g - 1e-9,
                format!("{protocol} l = {l}: grid beats optimizer at mu = {mu}"),
            )?;
        }
    }

    let cfg = SessionConfig::new(
        Protocol::Lm05,
        LinkParams::weak_pulse_testbed().with_mu(0.8),
        300_000,
        77,
    )
    .with_strategy(EveStrategy::new(AttackKind::PnsM));
    let first = reports::simulate(&cfg, &model)
        .map_err(|e| e.to_string())?
        .to_csv();
    let again = reports::simulate(&cfg, &model)
        .map_err(|e| e.to_string())?
        .to_csv();
    ensure(first == again, "reports differ between identical runs")?;

    let link = LinkParams {
        d_b: 1e-3,
        ..LinkParams::fiber_830nm(1.0).with_mu(0.5)
    };
    let run = |seed, n| engine::run(&SessionConfig::new(Protocol::Lm05, link, n, seed)).unwrap();
    let (a, b, c) = (run(1, 30_000), run(2, 20_000), run(3, 10_000));
    let ab = a.merge(&b).unwrap();
    ensure(ab == b.merge(&a).unwrap(), "merge not commutative")?;
    ensure(
        ab.merge(&c).unwrap() == a.merge(&b.merge(&c).unwrap()).unwrap(),
        "merge not associative",
    )?;
    let (qa, qb, qab) = (a.qber().unwrap(), b.qber().unwrap(), ab.qber().unwrap());
    ensure(
        qab >= qa.min(qb) && qab <= qa.max(qb),
        "merged QBER outside component range",
    )?;
    Ok("tau, entropy, yield order, optimizer, determinism, merge".into())
}

const CRITERIA: [Criterion; 7] = [
    Criterion {
        id: 1,
        title: "Poisson values",
        budget: Duration::from_secs(1),
        run: poisson_values,
    },
    Criterion {
        id: 2,
        title: "security margin crossings",
        budget: Duration::from_secs(1),
        run: margin_crossings,
    },
    Criterion {
        id: 3,
        title: "gain vs distance ordering and reach",
        budget: Duration::from_secs(30),
        run: gain_distance_ordering,
    },
    Criterion {
        id: 4,
        title: "testbed gain ratio",
        budget: Duration::from_secs(1),
        run: testbed_ratio,
    },
    Criterion {
        id: 5,
        title: "attack and bound consistency",
        budget: Duration::from_secs(60),
        run: attack_bound_consistency,
    },
    Criterion {
        id: 6,
        title: "undetectability",
        budget: Duration::from_secs(30),
        run: undetectability,
    },
    Criterion {
        id: 7,
        title: "property suites",
        budget: Duration::from_secs(10),
        run: property_suites,
    },
];

fn main() -> ExitCode {
    let mut failed = 0;
    for c in &CRITERIA {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed <= c.budget {
                Ok(detail)
            } else {
                Err(format!(
                    "{detail}; took {elapsed:.1?}, budget {:?}",
                    c.budget
                ))
            }
        });
        match result {
            Ok(detail) => println!(
                "[PASS] criterion {} ({}): {detail} [{elapsed:.2?}]",
                c.id, c.title
            ),
            Err(detail) => {
                failed += 1;
                println!(
                    "[FAIL] criterion {} ({}): {detail} [{elapsed:.2?}]",
                    c.id, c.title
                );
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        CRITERIA.len() - failed,
        CRITERIA.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
