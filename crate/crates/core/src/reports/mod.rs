//! Report generators behind the `lm05` binary: secure-margin and gain
//! curves as tables, the weak-pulse testbed evaluation and Monte Carlo
//! session summaries. Everything here is a deterministic function of its
//! inputs.

mod config;
mod table;

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

pub use config::{KNOWN_KEYS, Settings};
pub use table::{Cell, INSECURE, Layout, Table};

use crate::analytics::{
    GainModel, GainReport, Protocol, QberModel, detection_probability, max_secure_distance,
    optimize_mu, security_margin, signal_probability,
};
use crate::engine::{self, SessionConfig, SessionStats};
use crate::source::{LinkParams, loss_db_for};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    TLink,
    DistanceKm,
    Mu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" | "lin" => Ok(Scale::Linear),
            "log" => Ok(Scale::Log),
            other => Err(Error::Config(format!("unknown scale {other:?}"))),
        }
    }
}

/// A one-dimensional grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: Scale,
}

impl SweepSpec {
    /// Default transmissivity grid: 20 points per decade from 10⁻³ to 1.
    pub fn transmittance() -> Self {
        Self {
            variable: SweepVariable::TLink,
            start: 1e-3,
            stop: 1.0,
            points: 61,
            scale: Scale::Log,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(Error::Config(format!(
                "sweep needs start < stop (got {} .. {})",
                self.start, self.stop
            )));
        }
        if self.points < 2 {
            return Err(Error::Config("sweep needs at least 2 points".into()));
        }
        if self.scale == Scale::Log && self.start <= 0.0 {
            return Err(Error::Config("log sweep needs start > 0".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let last = (self.points - 1) as f64;
        let mut v: Vec<f64> = (0..self.points)
            .map(|i| {
                let f = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.start + f * (self.stop - self.start),
                    Scale::Log => (self.start.ln() + f * (self.stop / self.start).ln()).exp(),
                }
            })
            .collect();
        v[self.points - 1] = self.stop;
        Ok(v)
    }
}

/// Security margin `p_sign − Y` of both protocols against transmissivity.
///
/// Columns: `t_link, margin_lm05, margin_bb84, log10_margin_lm05,
/// log10_margin_bb84`; the logarithms carry the sentinel where the margin is
/// not positive.
pub fn rate_curve(spec: &SweepSpec, link: &LinkParams) -> Result<Table> {
    if spec.variable != SweepVariable::TLink || spec.start <= 0.0 || spec.stop > 1.0 {
        return Err(Error::Config(
            "rate curve sweeps t_link within (0, 1]".into(),
        ));
    }
    link.validate()?;
    let mut table = Table::new(vec![
        "t_link",
        "margin_lm05",
        "margin_bb84",
        "log10_margin_lm05",
        "log10_margin_bb84",
    ]);
    for t in spec.values()? {
        let lm = security_margin(link, Protocol::Lm05, t)?;
        let bb = security_margin(link, Protocol::Bb84, t)?;
        table.push(vec![
            t.into(),
            lm.into(),
            bb.into(),
            Cell::secure_or_sentinel(lm.log10(), lm > 0.0),
            Cell::secure_or_sentinel(bb.log10(), bb > 0.0),
        ]);
    }
    Ok(table)
}

/// Gain against Alice–Bob distance with `μ` optimized per point and per
/// protocol.
///
/// Columns: `distance, mu_star_lm05, g_lm05, mu_star_bb84, g_bb84`.
pub fn gain_distance(
    distances: &[f64],
    link: &LinkParams,
    model: &GainModel,
    qber: QberModel,
) -> Result<Table> {
    if distances.is_empty() || distances.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(Error::Config(
            "distances must be a non-empty list of values >= 0".into(),
        ));
    }
    let rows: Vec<Vec<Cell>> = distances
        .par_iter()
        .map(|&l| -> Result<Vec<Cell>> {
            let p = link.with_distance(l);
            let lm = optimize_mu(model, &p, Protocol::Lm05, qber)?;
            let bb = optimize_mu(model, &p, Protocol::Bb84, qber)?;
            Ok(vec![
                l.into(),
                Cell::secure_or_sentinel(lm.mu_star, lm.is_secure()),
                Cell::secure_or_sentinel(lm.g_star, lm.is_secure()),
                Cell::secure_or_sentinel(bb.mu_star, bb.is_secure()),
                Cell::secure_or_sentinel(bb.g_star, bb.is_secure()),
            ])
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(vec![
        "distance",
        "mu_star_lm05",
        "g_lm05",
        "mu_star_bb84",
        "g_bb84",
    ]);
    for r in rows {
        table.push(r);
    }
    Ok(table)
}

/// Maximum secure distance of each protocol, `(lm05, bb84)`.
pub fn max_distances(link: &LinkParams, model: &GainModel, qber: QberModel) -> Result<(f64, f64)> {
    let (lm, bb) = rayon::join(
        || max_secure_distance(model, link, Protocol::Lm05, qber),
        || max_secure_distance(model, link, Protocol::Bb84, qber),
    );
    Ok((lm?, bb?))
}

/// Inputs of the weak-pulse testbed evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentParams {
    pub mu: f64,
    pub e: f64,
    /// Measured end-to-end transmissivity, used as is for both protocols.
    pub t_link: f64,
    pub eta_b: f64,
    pub d_b: f64,
    pub rep_rate: f64,
    pub c: f64,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        Self {
            mu: 0.118,
            e: 0.0248,
            t_link: 0.27,
            eta_b: 0.5,
            d_b: 2.4e-6,
            rep_rate: 20e6,
            c: 0.5,
        }
    }
}

impl ExperimentParams {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let d = Self::default();
        let get = |k: &str, v: f64| -> Result<f64> { Ok(s.get::<f64>(k)?.unwrap_or(v)) };
        let p = Self {
            mu: get("mu", d.mu)?,
            e: get("e", d.e)?,
            t_link: get("t_link", d.t_link)?,
            eta_b: get("eta_b", d.eta_b)?,
            d_b: get("d_b", d.d_b)?,
            rep_rate: get("rep_rate", d.rep_rate)?,
            c: get("c", d.c)?,
        };
        if !(p.t_link > 0.0 && p.t_link <= 1.0) {
            return Err(Error::domain("t_link", p.t_link, "0 < t_link <= 1"));
        }
        p.link().validate()?;
        Ok(p)
    }

    /// A zero-length link whose terminal loss reproduces `t_link`.
    pub fn link(&self) -> LinkParams {
        LinkParams {
            mu: self.mu,
            alpha: 0.0,
            l: 0.0,
            gamma_c: loss_db_for(self.t_link),
            eta_b: self.eta_b,
            d_b: self.d_b,
            c: self.c,
            rep_rate: self.rep_rate,
        }
    }
}

/// One reading of how `η_B` enters the measured transmissivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interpretation {
    pub eta_in_gamma: bool,
    pub lm05: GainReport,
    pub bb84: GainReport,
}

impl Interpretation {
    pub fn label(&self) -> &'static str {
        if self.eta_in_gamma {
            "eta_in_t_link"
        } else {
            "eta_separate"
        }
    }

    pub fn ratio(&self) -> f64 {
        self.lm05.g_sec / self.bb84.g_sec
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub params: ExperimentParams,
    pub interpretations: Vec<Interpretation>,
}

/// Evaluates the testbed gains under both `η` interpretations.
pub fn experiment(params: &ExperimentParams, model: &GainModel) -> Result<ExperimentReport> {
    let link = params.link();
    let interpretations = [false, true]
        .into_iter()
        .map(|eta_in_gamma| {
            let m = GainModel {
                eta_in_gamma,
                ..model.clone()
            };
            Ok(Interpretation {
                eta_in_gamma,
                lm05: m.secure_gain(&link, Protocol::Lm05, params.e)?,
                bb84: m.secure_gain(&link, Protocol::Bb84, params.e)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ExperimentReport {
        params: *params,
        interpretations,
    })
}

impl ExperimentReport {
    /// Columns: `interpretation, g_lm05, g_bb84, ratio, rate_lm05_bps,
    /// rate_bb84_bps`.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("interpretation,g_lm05,g_bb84,ratio,rate_lm05_bps,rate_bb84_bps\n");
        for i in &self.interpretations {
            let rate = self.params.rep_rate;
            writeln!(
                out,
                "{},{},{},{},{},{}",
                i.label(),
                i.lm05.g_sec,
                i.bb84.g_sec,
                i.ratio(),
                i.lm05.key_rate(rate),
                i.bb84.key_rate(rate)
            )
            .unwrap();
        }
        out
    }

    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        writeln!(
            out,
            "weak-pulse testbed: mu = {}, e = {}, t_link = {}, eta_B = {}, d_B = {}, rep = {} Hz",
            p.mu, p.e, p.t_link, p.eta_b, p.d_b, p.rep_rate
        )
        .unwrap();
        for i in &self.interpretations {
            writeln!(out, "\n[{}]", i.label()).unwrap();
            for r in [&i.lm05, &i.bb84] {
                writeln!(
                    out,
                    "  {}: p_sign = {:.6}  p_av = {:.6}  Y = {:.4e}  beta = {:.6}  tau' = {:.4}  f = {:.3}  h = {:.4}  G = {:.5}  rate = {:.1} kbit/s",
                    r.protocol,
                    r.p_sign,
                    r.p_av,
                    r.yield_bound,
                    r.beta,
                    r.tau_prime,
                    r.f_casc,
                    r.h_e,
                    r.g_sec,
                    r.key_rate(p.rep_rate) / 1e3
                )
                .unwrap();
            }
            writeln!(out, "  ratio G_lm05 / G_bb84 = {:.3}", i.ratio()).unwrap();
        }
        out
    }
}

/// Monte Carlo estimate compared with its analytic expectation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub observed: u64,
    pub trials: u64,
    pub expected_p: f64,
}

impl Comparison {
    pub fn fraction(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.observed as f64 / self.trials as f64
        }
    }

    /// Binomial standard deviation of the fraction.
    pub fn sigma(&self) -> f64 {
        let p = self.expected_p;
        (p * (1.0 - p) / self.trials.max(1) as f64).sqrt()
    }

    /// Deviation in units of `sigma`; exact agreement with a degenerate
    /// expectation gives 0.
    pub fn z(&self) -> f64 {
        let diff = self.fraction() - self.expected_p;
        let s = self.sigma();
        if s > 0.0 {
            diff.abs() / s
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn within(&self, n_sigma: f64) -> bool {
        self.z() <= n_sigma
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub config: SessionConfig,
    pub stats: SessionStats,
    pub qber: Option<f64>,
    /// Message-mode clicks at Bob against the analytic detection probability.
    pub detection: Comparison,
    /// Eve's delivered fraction against the strategy's yield.
    pub acceptance: Option<Comparison>,
    pub gain: Option<GainReport>,
}

/// Sigma band of the self check.
pub const SELF_CHECK_SIGMA: f64 = 5.0;

/// Runs a session and compares it with the closed-form expectations.
pub fn simulate(cfg: &SessionConfig, model: &GainModel) -> Result<SimulationReport> {
    let stats = engine::run(cfg)?;
    let link = &cfg.link;
    let acceptance_p = cfg.strategy.acceptance_probability(cfg.protocol, link.mu)?;
    let expected_detection = match acceptance_p {
        None => {
            let p_sign = signal_probability(link, cfg.protocol.path_km(link.l))?;
            detection_probability(p_sign, link.d_b)
        }
        // Eve delivers single photons losslessly; everything else is darks.
        Some(a) => {
            a * detection_probability(link.eta_b, link.d_b)
                + (1.0 - a) * detection_probability(0.0, link.d_b)
        }
    };
    let detection = Comparison {
        observed: stats.detected,
        trials: stats.mm_sent,
        expected_p: expected_detection,
    };
    let acceptance = acceptance_p.map(|p| Comparison {
        observed: stats.eve_accepted,
        trials: stats.mm_sent,
        expected_p: p,
    });
    let qber = stats.qber().ok();
    let gain = qber
        .map(|_| engine::empirical_gain(&stats, model))
        .transpose()?;
    Ok(SimulationReport {
        config: *cfg,
        stats,
        qber,
        detection,
        acceptance,
        gain,
    })
}

impl SimulationReport {
    pub fn self_check_passed(&self) -> bool {
        self.detection.within(SELF_CHECK_SIGMA)
            && self.acceptance.is_none_or(|a| a.within(SELF_CHECK_SIGMA))
    }

    /// Two-column `metric,value` listing.
    pub fn to_csv(&self) -> String {
        let s = &self.stats;
        let mut rows: Vec<(&str, String)> = vec![
            ("protocol", s.protocol.to_string()),
            ("attack", self.config.strategy.kind.to_string()),
            ("seed", self.config.seed.to_string()),
            ("sent", s.sent.to_string()),
            ("mm_sent", s.mm_sent.to_string()),
            ("forward_arrived", s.forward_arrived.to_string()),
            ("backward_arrived", s.backward_arrived.to_string()),
            ("detected", s.detected.to_string()),
            ("n_tot", s.n_tot.to_string()),
            ("n_err", s.n_err.to_string()),
            ("n_d", s.n_d.to_string()),
            ("cm_sent", s.cm_sent.to_string()),
            ("cm_trials", s.cm_trials.to_string()),
            ("cm_errors", s.cm_errors.to_string()),
            ("eve_accepted", s.eve_accepted.to_string()),
            ("eve_blocked_forward", s.eve_blocked_forward.to_string()),
            ("eve_blocked_backward", s.eve_blocked_backward.to_string()),
            ("qber", opt(self.qber)),
            ("detection_mc", self.detection.fraction().to_string()),
            ("detection_analytic", self.detection.expected_p.to_string()),
            ("detection_sigma", self.detection.sigma().to_string()),
        ];
        if let Some(a) = &self.acceptance {
            rows.push(("acceptance_mc", a.fraction().to_string()));
            rows.push(("acceptance_analytic", a.expected_p.to_string()));
            rows.push(("acceptance_sigma", a.sigma().to_string()));
        }
        rows.push((
            "g_sec",
            self.gain.map_or(INSECURE.to_string(), |g| {
                if g.is_secure() {
                    g.g_sec.to_string()
                } else {
                    INSECURE.to_string()
                }
            }),
        ));
        rows.push((
            "self_check",
            if self.self_check_passed() {
                "pass"
            } else {
                "fail"
            }
            .into(),
        ));
        let mut out = String::from("metric,value\n");
        for (k, v) in rows {
            writeln!(out, "{k},{v}").unwrap();
        }
        out
    }

    pub fn to_text(&self) -> String {
        let s = &self.stats;
        let mut out = String::new();
        writeln!(
            out,
            "{} session, attack {}, {} pulses, seed {}",
            s.protocol, self.config.strategy.kind, s.sent, self.config.seed
        )
        .unwrap();
        writeln!(
            out,
            "  decoded {} (errors {}, double clicks {}), QBER {}",
            s.n_tot,
            s.n_err,
            s.n_d,
            opt(self.qber)
        )
        .unwrap();
        if s.protocol == Protocol::Lm05 {
            writeln!(
                out,
                "  control mode: {} pulses, {} matched-basis clicks, {} errors",
                s.cm_sent, s.cm_trials, s.cm_errors
            )
            .unwrap();
        }
        let line = |out: &mut String, name: &str, c: &Comparison| {
            writeln!(
                out,
                "  {name}: MC {:.6e} vs analytic {:.6e} (sigma {:.2e}, {:.2} sigma)",
                c.fraction(),
                c.expected_p,
                c.sigma(),
                c.z()
            )
            .unwrap();
        };
        line(&mut out, "detection", &self.detection);
        if let Some(a) = &self.acceptance {
            line(&mut out, "acceptance", a);
        }
        match &self.gain {
            Some(g) if g.is_secure() => writeln!(out, "  empirical G_sec {:.6e}", g.g_sec).unwrap(),
            _ => writeln!(out, "  empirical G_sec: {INSECURE}").unwrap(),
        }
        writeln!(
            out,
            "  self check ({SELF_CHECK_SIGMA} sigma): {}",
            if self.self_check_passed() {
                "pass"
            } else {
                "FAIL"
            }
        )
        .unwrap();
        out
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |v| v.to_string())
}
