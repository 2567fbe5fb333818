//! Closed-form security quantities for LM05 and BB84 under PNS attacks.
//!
//! The secret gain per emitted pulse is
//!
//! ```text
//! G_sec = s · p_av · [ β (1 − τ(e/β)) − f_casc(e) h(e) ]
//! β     = (p_av − Y) / p_av
//! ```
//!
//! where `Y` is the yield a perfect PNS eavesdropper can deliver without
//! raising the loss rate (`P̃` for LM05, `P*` for BB84) and `s` is the
//! throughput factor: 1/2 for BB84 basis sifting, 1 for LM05 (or `1 − c` when
//! control-mode overhead is accounted).

mod cascade;
mod optimize;

use std::fmt;
use std::str::FromStr;

pub use cascade::{CascadeTable, DEFAULT_ANCHORS, Efficiency, f_cascade};
pub use optimize::{MU_RANGE, MuOptimum, golden_section_max, max_secure_distance, optimize_mu};

use crate::source::{LinkParams, poisson_tail, transmissivity};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    Lm05,
    Bb84,
}

impl Protocol {
    /// Distance travelled between preparation and detection. LM05 uses the
    /// channel twice.
    pub fn path_km(self, l: f64) -> f64 {
        match self {
            Protocol::Lm05 => 2.0 * l,
            Protocol::Bb84 => l,
        }
    }

    /// Yield available to a perfect PNS eavesdropper.
    pub fn pns_yield(self, mu: f64) -> Result<f64> {
        match self {
            Protocol::Lm05 => pns_yield_lm05(mu),
            Protocol::Bb84 => pns_yield_bb84(mu),
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Lm05 => "lm05",
            Protocol::Bb84 => "bb84",
        })
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lm05" => Ok(Protocol::Lm05),
            "bb84" => Ok(Protocol::Bb84),
            other => Err(Error::Config(format!("unknown protocol {other:?}"))),
        }
    }
}

/// How the QBER entering the gain is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QberModel {
    /// A fixed measured QBER.
    Constant(f64),
    /// Optical misalignment floor plus dark counts:
    /// `e = (e_det · p_sign + d_B) / p_av`.
    Detector { e_det: f64 },
}

impl Default for QberModel {
    fn default() -> Self {
        QberModel::Detector { e_det: 0.0248 }
    }
}

impl QberModel {
    pub fn qber(&self, p_sign: f64, d_b: f64, p_av: f64) -> f64 {
        match *self {
            QberModel::Constant(e) => e,
            QberModel::Detector { e_det } => {
                if p_av > 0.0 {
                    ((e_det * p_sign + d_b) / p_av).clamp(0.0, 1.0)
                } else {
                    0.5
                }
            }
        }
    }
}

/// One evaluation of the secret gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainReport {
    pub protocol: Protocol,
    pub p_sign: f64,
    pub p_dark: f64,
    pub p_av: f64,
    /// `P̃` for LM05, `P*` for BB84.
    pub yield_bound: f64,
    pub beta: f64,
    pub e: f64,
    pub tau_prime: f64,
    pub f_casc: f64,
    /// Set when `e` lay above the Cascade table and `f_casc` was clamped.
    pub f_casc_clamped: bool,
    pub h_e: f64,
    /// Throughput factor in front of the bracket (sifting, control mode).
    pub throughput: f64,
    pub g_sec: f64,
    pub mu_used: f64,
    pub total_path_km: f64,
}

impl GainReport {
    /// `β > 0`: the detection rate exceeds what a PNS eavesdropper can fake.
    pub fn is_secure(&self) -> bool {
        self.beta > 0.0
    }

    /// The bracket `β(1 − τ′) − f_casc·h(e)`.
    pub fn bracket(&self) -> f64 {
        self.beta * (1.0 - self.tau_prime) - self.f_casc * self.h_e
    }

    /// Recomputes `G_sec` from the report's own fields.
    pub fn recompute_gain(&self) -> f64 {
        if !self.is_secure() {
            return 0.0;
        }
        (self.throughput * self.p_av * self.bracket()).max(0.0)
    }

    /// Secret bits per second at the given pulse rate.
    pub fn key_rate(&self, rep_rate: f64) -> f64 {
        self.g_sec * rep_rate
    }
}

/// Counts entering the QBER estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct QberTally {
    pub n_err: u64,
    pub n_d: u64,
    pub n_tot: u64,
}

/// `e = (n_err + n_D/2) / n_tot`; ambiguous double clicks count as half an
/// error.
pub fn qber_estimate(t: QberTally) -> Result<f64> {
    if t.n_tot == 0 {
        return Err(Error::EmptySession);
    }
    Ok((t.n_err as f64 + t.n_d as f64 / 2.0) / t.n_tot as f64)
}

/// `1 − exp(−μ η t)`, the probability that at least one signal photon is
/// registered.
pub fn signal_probability_at(mu: f64, eta: f64, t_link: f64) -> f64 {
    -(-mu * eta * t_link).exp_m1()
}

/// Signal detection probability over `path_km` of fibre.
pub fn signal_probability(p: &LinkParams, path_km: f64) -> Result<f64> {
    let t = transmissivity(p.alpha, path_km, p.gamma_c)?;
    Ok(signal_probability_at(p.mu, p.eta_b, t))
}

/// `p_av = p_sign + p_dark − p_sign·p_dark` with `p_dark = 2 d_B` for two
/// detectors.
pub fn detection_probability(p_sign: f64, d_b: f64) -> f64 {
    let p_dark = 2.0 * d_b;
    p_sign + p_dark - p_sign * p_dark
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("mu", mu, "mu > 0"))
    }
}

/// `P̃ = ½ P₃(μ) + P_{n>3}(μ)`: three-photon pulses are read by the
/// unambiguous measurement half of the time, larger pulses always.
pub fn pns_yield_lm05(mu: f64) -> Result<f64> {
    check_mu(mu)?;
    Ok(poisson_tail(3, mu) - 0.5 * crate::source::pmf(3, mu))
}

/// `P* = P_{n≥2}(μ)`.
pub fn pns_yield_bb84(mu: f64) -> Result<f64> {
    check_mu(mu)?;
    Ok(poisson_tail(2, mu))
}

fn check_unit(name: &'static str, e: f64) -> Result<()> {
    if (0.0..=1.0).contains(&e) {
        Ok(())
    } else {
        Err(Error::domain(name, e, "0 <= e <= 1"))
    }
}

/// Shannon binary entropy in bits.
pub fn binary_entropy(e: f64) -> Result<f64> {
    check_unit("e", e)?;
    if e == 0.0 || e == 1.0 {
        return Ok(0.0);
    }
    Ok(-e * e.log2() - (1.0 - e) * (1.0 - e).log2())
}

/// Privacy-amplification fraction for single-photon pulses.
pub fn tau(e: f64) -> Result<f64> {
    check_unit("e", e)?;
    if e <= 0.5 {
        Ok((1.0 + 4.0 * e - 4.0 * e * e).log2())
    } else {
        Ok(1.0)
    }
}

/// `p_sign − Y(μ)` at a given transmissivity; positive inside the secure
/// region.
pub fn security_margin(p: &LinkParams, protocol: Protocol, t_link: f64) -> Result<f64> {
    let y = protocol.pns_yield(p.mu)?;
    Ok(signal_probability_at(p.mu, p.eta_b, t_link) - y)
}

/// The transmissivity where [`security_margin`] changes sign, if it lies in
/// `(0, 1]`.
pub fn margin_zero_crossing(p: &LinkParams, protocol: Protocol) -> Result<Option<f64>> {
    let y = protocol.pns_yield(p.mu)?;
    if p.eta_b <= 0.0 {
        return Ok(None);
    }
    let t = -(-y).ln_1p() / (p.mu * p.eta_b);
    Ok((t > 0.0 && t <= 1.0).then_some(t))
}

/// Options shared by every gain evaluation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GainModel {
    pub cascade: CascadeTable,
    /// Treat `η_B` as already contained in the measured loss (`Γ_c` or
    /// `t_link`) instead of applying it again at the detector.
    pub eta_in_gamma: bool,
    /// Scale LM05 throughput by the message-mode fraction `1 − c`.
    pub account_cm: bool,
}

impl GainModel {
    pub fn effective_eta(&self, p: &LinkParams) -> f64 {
        if self.eta_in_gamma { 1.0 } else { p.eta_b }
    }

    pub fn throughput(&self, protocol: Protocol, c: f64) -> f64 {
        match protocol {
            Protocol::Bb84 => 0.5,
            Protocol::Lm05 if self.account_cm => 1.0 - c,
            Protocol::Lm05 => 1.0,
        }
    }

    /// Signal probability for `protocol` over the configured link.
    pub fn p_sign(&self, p: &LinkParams, protocol: Protocol) -> Result<f64> {
        let t = transmissivity(p.alpha, protocol.path_km(p.l), p.gamma_c)?;
        Ok(signal_probability_at(p.mu, self.effective_eta(p), t))
    }

    /// Gain at a fixed QBER `e`.
    pub fn secure_gain(&self, p: &LinkParams, protocol: Protocol, e: f64) -> Result<GainReport> {
        self.gain(p, protocol, QberModel::Constant(e))
    }

    /// Gain with the QBER supplied by `qber`.
    pub fn gain(&self, p: &LinkParams, protocol: Protocol, qber: QberModel) -> Result<GainReport> {
        p.validate()?;
        let p_sign = self.p_sign(p, protocol)?;
        let p_av = detection_probability(p_sign, p.d_b);
        let e = qber.qber(p_sign, p.d_b, p_av);
        self.evaluate(protocol, p, p_sign, p_av, e)
    }

    /// Gain from a measured detection probability, as obtained from a
    /// session's tallies.
    pub fn gain_from_detection(
        &self,
        protocol: Protocol,
        p: &LinkParams,
        p_av: f64,
        e: f64,
    ) -> Result<GainReport> {
        let p_dark = 2.0 * p.d_b;
        let p_sign = if p_dark < 1.0 {
            ((p_av - p_dark) / (1.0 - p_dark)).max(0.0)
        } else {
            0.0
        };
        self.evaluate(protocol, p, p_sign, p_av, e)
    }

    fn evaluate(
        &self,
        protocol: Protocol,
        p: &LinkParams,
        p_sign: f64,
        p_av: f64,
        e: f64,
    ) -> Result<GainReport> {
        check_unit("e", e)?;
        let yield_bound = protocol.pns_yield(p.mu)?;
        let beta = (p_av - yield_bound) / p_av;
        let eff = self.cascade.lookup(e);
        let h_e = binary_entropy(e)?;
        let tau_prime = if beta > 0.0 {
            tau((e / beta).min(1.0))?
        } else {
            1.0
        };
        let mut report = GainReport {
            protocol,
            p_sign,
            p_dark: 2.0 * p.d_b,
            p_av,
            yield_bound,
            beta,
            e,
            tau_prime,
            f_casc: eff.value,
            f_casc_clamped: eff.clamped,
            h_e,
            throughput: self.throughput(protocol, p.c),
            g_sec: 0.0,
            mu_used: p.mu,
            total_path_km: protocol.path_km(p.l),
        };
        report.g_sec = report.recompute_gain();
        Ok(report)
    }
}

/// [`GainModel::secure_gain`] with default options.
pub fn secure_gain(p: &LinkParams, protocol: Protocol, e: f64) -> Result<GainReport> {
    GainModel::default().secure_gain(p, protocol, e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    // Closed forms, kept separate from the tail-sum route in the
    // implementation.
    fn p_tilde_closed(mu: f64) -> f64 {
        1.0 - (1.0 + mu + mu * mu / 2.0 + mu.powi(3) / 12.0) * (-mu).exp()
    }

    fn p_star_closed(mu: f64) -> f64 {
        1.0 - (1.0 + mu) * (-mu).exp()
    }

    #[test]
    fn signal_probability_examples() {
        assert!(close(
            signal_probability_at(1.0, 1.0, 1.0),
            0.632_120_558_8,
            1e-10
        ));
        assert!(close(
            signal_probability_at(0.118, 0.5, 0.27),
            0.015_804,
            1e-6
        ));
        assert_eq!(signal_probability_at(0.0, 1.0, 1.0), 0.0);
        let p = LinkParams::ideal(1.0);
        assert!(close(
            signal_probability(&p, 0.0).unwrap(),
            0.632_120_558_8,
            1e-10
        ));
    }

    #[test]
    fn detection_probability_examples() {
        assert_eq!(detection_probability(0.5, 0.0), 0.5);
        assert_eq!(detection_probability(0.0, 0.25), 0.5);
        assert!(close(
            detection_probability(0.01581, 2.4e-6),
            0.015_814_724,
            1e-9
        ));
    }

    #[test]
    fn lm05_yield_examples() {
        assert!(close(pns_yield_lm05(1.0).unwrap(), 0.049_644_777, 1e-9));
        assert!(close(pns_yield_lm05(0.118).unwrap(), 1.290_316e-4, 1e-10));
        let mu: f64 = 1e-4;
        assert!(close(
            pns_yield_lm05(mu).unwrap() / (mu.powi(3) / 12.0),
            1.0,
            1e-3
        ));
        for mu in [0.05, 0.1, 0.5, 1.0, 2.0, 5.0] {
            assert!(close(
                pns_yield_lm05(mu).unwrap(),
                p_tilde_closed(mu),
                1e-13
            ));
        }
        assert!(pns_yield_lm05(0.0).is_err());
    }

    #[test]
    fn bb84_yield_examples() {
        assert!(close(pns_yield_bb84(1.0).unwrap(), 0.264_241, 1e-6));
        assert!(close(pns_yield_bb84(0.1).unwrap(), 0.004_679, 1e-6));
        let mu: f64 = 1e-5;
        assert!(close(
            pns_yield_bb84(mu).unwrap() / (mu * mu / 2.0),
            1.0,
            1e-4
        ));
        for mu in [0.05, 0.1, 0.5, 1.0, 2.0, 5.0] {
            assert!(close(pns_yield_bb84(mu).unwrap(), p_star_closed(mu), 1e-13));
        }
        assert!(pns_yield_bb84(-1.0).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert!(close(binary_entropy(0.0248).unwrap(), 0.167_6, 1e-4));
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn tau_examples() {
        assert_eq!(tau(0.0).unwrap(), 0.0);
        assert!((tau(0.5).unwrap() - 1.0).abs() < 1e-12);
        assert!(close(tau(0.25).unwrap(), 1.75f64.log2(), 1e-15));
        assert_eq!(tau(0.75).unwrap(), 1.0);
        assert!(tau(-0.1).is_err());
    }

    #[test]
    fn qber_estimates() {
        let t = |n_err, n_d, n_tot| QberTally { n_err, n_d, n_tot };
        assert_eq!(qber_estimate(t(248, 0, 10_000)).unwrap(), 0.0248);
        assert_eq!(qber_estimate(t(0, 0, 55)).unwrap(), 0.0);
        assert_eq!(qber_estimate(t(10, 4, 100)).unwrap(), 0.12);
        assert!(matches!(
            qber_estimate(t(0, 0, 0)),
            Err(Error::EmptySession)
        ));
    }

    #[test]
    fn margin_examples() {
        let p = LinkParams::ideal(1.0);
        let lm = security_margin(&p, Protocol::Lm05, 1.0).unwrap();
        let bb = security_margin(&p, Protocol::Bb84, 1.0).unwrap();
        assert!(close(lm, 0.5825, 1e-4));
        assert!(close(bb, 0.3679, 1e-4));
        let t_lm = margin_zero_crossing(&p, Protocol::Lm05).unwrap().unwrap();
        let t_bb = margin_zero_crossing(&p, Protocol::Bb84).unwrap().unwrap();
        assert!(close(t_lm, 0.0509, 1e-3));
        assert!(close(t_bb, 0.3068, 1e-3));
        assert!(security_margin(&p, Protocol::Lm05, t_lm).unwrap().abs() < 1e-14);
    }

    #[test]
    fn lossless_limit() {
        let p = LinkParams {
            d_b: 0.0,
            ..LinkParams::ideal(1e-6)
        };
        let r = secure_gain(&p, Protocol::Lm05, 0.0).unwrap();
        assert!(close(r.beta, 1.0, 1e-12));
        assert_eq!(r.tau_prime, 0.0);
        assert_eq!(r.h_e, 0.0);
        assert!(close(r.g_sec, r.p_av, 1e-18));
    }

    #[test]
    fn insecure_gain_is_zero() {
        let p = LinkParams::fiber_830nm(30.0).with_mu(0.5);
        let r = secure_gain(&p, Protocol::Lm05, 0.02).unwrap();
        assert!(!r.is_secure());
        assert_eq!(r.g_sec, 0.0);
    }

    #[test]
    fn bb84_carries_sifting_factor() {
        let p = LinkParams::ideal(0.01);
        let r = secure_gain(&p, Protocol::Bb84, 0.0).unwrap();
        assert_eq!(r.throughput, 0.5);
        assert!(close(r.g_sec, 0.5 * r.p_av * r.bracket(), 1e-18));
        let cm = GainModel {
            account_cm: true,
            ..GainModel::default()
        };
        let p = LinkParams { c: 0.25, ..p };
        assert_eq!(
            cm.secure_gain(&p, Protocol::Lm05, 0.0).unwrap().throughput,
            0.75
        );
        assert_eq!(
            cm.secure_gain(&p, Protocol::Bb84, 0.0).unwrap().throughput,
            0.5
        );
    }

    #[test]
    fn eta_in_gamma_drops_detector_efficiency() {
        let p = LinkParams::weak_pulse_testbed();
        let folded = GainModel {
            eta_in_gamma: true,
            ..GainModel::default()
        };
        let a = GainModel::default().p_sign(&p, Protocol::Lm05).unwrap();
        let b = folded.p_sign(&p, Protocol::Lm05).unwrap();
        assert!(close(a, signal_probability_at(0.118, 0.5, 0.27), 1e-12));
        assert!(close(b, signal_probability_at(0.118, 1.0, 0.27), 1e-12));
    }

    #[test]
    fn detector_qber_model() {
        let m = QberModel::Detector { e_det: 0.02 };
        assert!(close(m.qber(0.1, 0.0, 0.1), 0.02, 1e-15));
        let p_av = detection_probability(0.0, 0.01);
        assert!(close(m.qber(0.0, 0.01, p_av), 0.5, 1e-15));
    }

    #[test]
    fn protocol_parsing() {
        assert_eq!("LM05".parse::<Protocol>().unwrap(), Protocol::Lm05);
        assert_eq!("bb84".parse::<Protocol>().unwrap(), Protocol::Bb84);
        assert!("b92".parse::<Protocol>().is_err());
        assert_eq!(Protocol::Lm05.to_string(), "lm05");
    }
}
