//! Weak-pulse source, lossy channel and threshold detectors.

use rand::{Rng, RngExt};
use rand_distr::{Binomial, Distribution, Poisson};

use crate::quantum::{Basis, PolarizationState, measure};
use crate::{Error, Result};

/// A laser pulse: `n` photons sharing one polarization, `|ψ⟩^⊗n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pulse {
    pub n: u64,
    pub state: PolarizationState,
}

impl Pulse {
    pub fn new(n: u64, state: PolarizationState) -> Self {
        Self { n, state }
    }

    pub fn is_vacuum(&self) -> bool {
        self.n == 0
    }
}

/// Device and channel configuration shared by the analytic and Monte Carlo
/// paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    /// Mean photon number per pulse.
    pub mu: f64,
    /// Fibre attenuation in dB/km.
    pub alpha: f64,
    /// Alice–Bob distance in km.
    pub l: f64,
    /// Constant loss of the terminal equipment in dB, counted once per
    /// photon lifetime.
    pub gamma_c: f64,
    /// Detector quantum efficiency.
    pub eta_b: f64,
    /// Dark-count probability per gating window, per detector.
    pub d_b: f64,
    /// Probability that Alice runs control mode.
    pub c: f64,
    /// Pulse repetition rate in Hz.
    pub rep_rate: f64,
}

impl Default for LinkParams {
    fn default() -> Self {
        Self::ideal(1.0)
    }
}

impl LinkParams {
    /// Lossless channel with perfect, noiseless detectors.
    pub fn ideal(mu: f64) -> Self {
        Self {
            mu,
            alpha: 0.0,
            l: 0.0,
            gamma_c: 0.0,
            eta_b: 1.0,
            d_b: 0.0,
            c: 0.5,
            rep_rate: 20e6,
        }
    }

    /// First-window fibre link at 830 nm: 2.5 dB/km, 8 dB terminal loss,
    /// `η_B = 0.5`, `d_B = 5·10⁻⁸`.
    pub fn fiber_830nm(l: f64) -> Self {
        Self {
            mu: 0.1,
            alpha: 2.5,
            l,
            gamma_c: 8.0,
            eta_b: 0.5,
            d_b: 5e-8,
            c: 0.5,
            rep_rate: 20e6,
        }
    }

    /// The 810 nm weak-pulse testbed: `μ = 0.118`, measured `t_link ≈ 0.27`,
    /// `η_B = 0.5`, `d_B = 2.4·10⁻⁶`, 20 MHz repetition rate. The whole loss is
    /// expressed through `gamma_c` at zero distance.
    pub fn weak_pulse_testbed() -> Self {
        Self {
            mu: 0.118,
            alpha: 2.5,
            l: 0.0,
            gamma_c: loss_db_for(0.27),
            eta_b: 0.5,
            d_b: 2.4e-6,
            c: 0.5,
            rep_rate: 20e6,
        }
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_distance(mut self, l: f64) -> Self {
        self.l = l;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check(
            self.mu > 0.0 && self.mu.is_finite(),
            "mu",
            self.mu,
            "mu > 0",
        )?;
        check(self.alpha >= 0.0, "alpha", self.alpha, "alpha >= 0")?;
        check(self.l >= 0.0 && self.l.is_finite(), "l", self.l, "l >= 0")?;
        check(self.gamma_c >= 0.0, "gamma_c", self.gamma_c, "gamma_c >= 0")?;
        check(
            (0.0..=1.0).contains(&self.eta_b),
            "eta_b",
            self.eta_b,
            "0 <= eta_b <= 1",
        )?;
        check(
            (0.0..1.0).contains(&self.d_b),
            "d_b",
            self.d_b,
            "0 <= d_b < 1",
        )?;
        check((0.0..=1.0).contains(&self.c), "c", self.c, "0 <= c <= 1")?;
        check(
            self.rep_rate > 0.0,
            "rep_rate",
            self.rep_rate,
            "rep_rate > 0",
        )?;
        Ok(())
    }
}

fn check(ok: bool, name: &'static str, value: f64, expected: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::domain(name, value, expected))
    }
}

/// Loss in dB corresponding to a transmissivity.
pub fn loss_db_for(t: f64) -> f64 {
    -10.0 * t.log10()
}

/// Detection outcome of Bob's (or Alice's) two threshold detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClickRecord {
    pub click0: bool,
    pub click1: bool,
}

impl ClickRecord {
    pub fn no_click(&self) -> bool {
        !self.click0 && !self.click1
    }

    pub fn double_click(&self) -> bool {
        self.click0 && self.click1
    }

    /// The decoded bit when exactly one detector fired.
    pub fn single_click(&self) -> Option<bool> {
        match (self.click0, self.click1) {
            (true, false) => Some(false),
            (false, true) => Some(true),
            _ => None,
        }
    }

    pub fn any(&self) -> bool {
        self.click0 || self.click1
    }
}

/// `P_n(μ) = μⁿ e^{−μ} / n!`.
pub fn poisson_pmf(n: i64, mu: f64) -> Result<f64> {
    if n < 0 {
        return Err(Error::domain("n", n as f64, "n >= 0"));
    }
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::domain("mu", mu, "mu > 0"));
    }
    Ok(pmf(n as u64, mu))
}

pub(crate) fn pmf(n: u64, mu: f64) -> f64 {
    let ln_fact: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
    (n as f64 * mu.ln() - mu - ln_fact).exp()
}

/// `P_{n≥k}(μ)`, summed term by term so small tails keep full relative
/// precision.
pub(crate) fn poisson_tail(k: u64, mu: f64) -> f64 {
    let mut term = pmf(k, mu);
    let mut sum = 0.0;
    let mut n = k;
    loop {
        sum += term;
        n += 1;
        term *= mu / n as f64;
        if (n as f64 > mu && term <= sum * 1e-17) || term == 0.0 {
            break;
        }
    }
    sum.min(1.0)
}

/// Draws a photon number from the weak-pulse source.
pub fn sample_photon_number<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> u64 {
    PhotonSource::new(mu)
        .expect("mu must be positive")
        .sample(rng)
}

/// Poisson photon-number source with its distribution prepared once.
#[derive(Debug, Clone, Copy)]
pub struct PhotonSource {
    dist: Poisson<f64>,
}

impl PhotonSource {
    pub fn new(mu: f64) -> Result<Self> {
        let dist = Poisson::new(mu).map_err(|_| Error::domain("mu", mu, "mu > 0"))?;
        Ok(Self { dist })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.dist.sample(rng) as u64
    }

    /// A pulse with a fresh photon number and a uniformly random polarization.
    pub fn emit<R: Rng + ?Sized>(&self, rng: &mut R) -> Pulse {
        let state = PolarizationState::random(rng);
        Pulse::new(self.sample(rng), state)
    }
}

/// `t_link = 10^{−(α·l + Γ_c)/10}`.
pub fn transmissivity(alpha: f64, l: f64, gamma_c: f64) -> Result<f64> {
    check(alpha >= 0.0, "alpha", alpha, "alpha >= 0")?;
    check(l >= 0.0, "l", l, "l >= 0")?;
    check(gamma_c >= 0.0, "gamma_c", gamma_c, "gamma_c >= 0")?;
    // an opaque fibre of zero length still transmits
    let fibre = if l == 0.0 { 0.0 } else { alpha * l };
    Ok(10f64.powf(-(fibre + gamma_c) / 10.0))
}

/// Independent per-photon loss: the surviving count is `Binomial(n, t)`.
pub fn thin<R: Rng + ?Sized>(pulse: Pulse, t: f64, rng: &mut R) -> Pulse {
    debug_assert!((0.0..=1.0).contains(&t));
    let n = if pulse.n == 0 || t >= 1.0 {
        pulse.n
    } else if t <= 0.0 {
        0
    } else {
        Binomial::new(pulse.n, t).expect("t in [0, 1]").sample(rng)
    };
    Pulse { n, ..pulse }
}

/// Two threshold detectors behind a polarizing beam splitter set to
/// `analysis_basis`.
///
/// Each photon is registered with probability `eta_b` and routed by a
/// projective measurement; each detector also fires on its own with
/// probability `d_b`.
pub fn detect<R: Rng + ?Sized>(
    pulse: Pulse,
    analysis_basis: Basis,
    eta_b: f64,
    d_b: f64,
    rng: &mut R,
) -> ClickRecord {
    let registered = thin(pulse, eta_b, rng);
    let mut rec = ClickRecord::default();
    for _ in 0..registered.n {
        if measure(registered.state, analysis_basis, rng).bit() {
            rec.click1 = true;
        } else {
            rec.click0 = true;
        }
        if rec.double_click() {
            break;
        }
    }
    if d_b > 0.0 {
        rec.click0 |= rng.random_bool(d_b);
        rec.click1 |= rng.random_bool(d_b);
    }
    rec
}
