//! Mean-photon-number optimization and the secure-distance solver.

use super::{GainModel, GainReport, Protocol, QberModel};
use crate::Result;
use crate::source::LinkParams;

/// Search interval for `μ`.
pub const MU_RANGE: (f64, f64) = (1e-4, 2.0);

const MU_TOL: f64 = 1e-5;
const SCAN_POINTS: usize = 400;
const DISTANCE_RESOLUTION_KM: f64 = 0.01;
const DISTANCE_CAP_KM: f64 = 10_000.0;

/// Result of maximizing the gain over `μ` at fixed distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuOptimum {
    /// `NaN` when no `μ` yields positive gain.
    pub mu_star: f64,
    pub g_star: f64,
    pub report: Option<GainReport>,
}

impl MuOptimum {
    fn insecure() -> Self {
        Self {
            mu_star: f64::NAN,
            g_star: 0.0,
            report: None,
        }
    }

    pub fn is_secure(&self) -> bool {
        self.g_star > 0.0
    }
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
/// Returns `(argmax, max)`.
pub fn golden_section_max<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    if f1 >= f2 { (x1, f1) } else { (x2, f2) }
}

/// Maximizes the gain over `μ ∈ MU_RANGE` with the distance in `p` fixed.
///
/// The gain is identically zero over much of the range at long distance, so a
/// logarithmic scan first brackets the positive region and golden-section
/// search then refines inside the bracket.
pub fn optimize_mu(
    model: &GainModel,
    p: &LinkParams,
    protocol: Protocol,
    qber: QberModel,
) -> Result<MuOptimum> {
    let (lo, hi) = MU_RANGE;
    let gain_at = |mu: f64| model.gain(&p.with_mu(mu), protocol, qber).map(|r| r.g_sec);

    let ratio = (hi / lo).ln() / (SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| lo * (ratio * i as f64).exp())
        .collect();
    let mut best = (0, 0.0);
    for (i, &mu) in grid.iter().enumerate() {
        let g = gain_at(mu)?;
        if g > best.1 {
            best = (i, g);
        }
    }
    if best.1 <= 0.0 {
        return Ok(MuOptimum::insecure());
    }

    let a = grid[best.0.saturating_sub(1)];
    let b = grid[(best.0 + 1).min(SCAN_POINTS - 1)];
    let (mut mu_star, mut g_star) =
        golden_section_max(|mu| gain_at(mu).unwrap_or(0.0), a, b, MU_TOL);
    if g_star < best.1 {
        (mu_star, g_star) = (grid[best.0], best.1);
    }
    let report = model.gain(&p.with_mu(mu_star), protocol, qber)?;
    Ok(MuOptimum {
        mu_star,
        g_star,
        report: Some(report),
    })
}

/// Largest Alice–Bob distance, to 10 m, at which some `μ` still gives a
/// positive gain. Returns 0 when even the zero-length link is insecure.
pub fn max_secure_distance(
    model: &GainModel,
    p: &LinkParams,
    protocol: Protocol,
    qber: QberModel,
) -> Result<f64> {
    let secure_at = |l: f64| -> Result<bool> {
        Ok(optimize_mu(model, &p.with_distance(l), protocol, qber)?.is_secure())
    };
    if !secure_at(0.0)? {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while secure_at(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > DISTANCE_CAP_KM {
            return Ok(lo);
        }
    }
    while hi - lo > DISTANCE_RESOLUTION_KM {
        let mid = 0.5 * (lo + hi);
        if secure_at(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
