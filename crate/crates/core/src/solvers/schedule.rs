use super::epoch::EpochSegParams;
use super::REL_TOL;
use crate::error::{invalid, require_finite, require_positive, Result};

/// Derived constants of a recursive anchored run.
///
/// `levels` is `S = ⌊log₂(L/μ)⌋`. The per-level vectors have `max(S, 1)`
/// entries: when `S = 0` the single entry drives one plain `epoch_seg` run on
/// the base problem, with `S` replaced by 1 in the epoch-count formulas.
#[derive(Clone, Debug, PartialEq)]
pub struct RainSchedule {
    pub levels: usize,
    /// `λ_s = μ·2^s`.
    pub lambdas: Vec<f64>,
    pub n_epochs: Vec<u32>,
    pub k_epochs: Vec<u32>,
    pub eps: f64,
    pub distance: f64,
    pub sigma: f64,
    pub mu: f64,
    pub lipschitz: f64,
}

impl RainSchedule {
    /// `epoch_seg` parameters of level `s`: modulus λ_s, smoothness 2L.
    pub fn epoch_params(&self, s: usize) -> EpochSegParams {
        EpochSegParams {
            mu: self.lambdas[s],
            lipschitz: 2.0 * self.lipschitz,
            n: self.n_epochs[s],
            k: self.k_epochs[s],
        }
    }
}

/// Smallest integer `n` with `2ⁿ ≥ x`, or `None` for `x ≤ 0`.
pub fn ceil_log2(x: f64) -> Option<i64> {
    if x <= 0.0 || x.is_nan() {
        return None;
    }
    let mut n = x.log2().ceil() as i64;
    while 2f64.powi(n as i32 - 1) >= x {
        n -= 1;
    }
    while 2f64.powi(n as i32) < x {
        n += 1;
    }
    Some(n)
}

/// Largest `S ≥ 0` with `μ·2^S ≤ L`.
fn level_count(mu: f64, lipschitz: f64) -> usize {
    let ratio = lipschitz / mu;
    let mut s = ratio.log2().floor().max(0.0) as usize;
    while 2f64.powi(s as i32 + 1) <= ratio * (1.0 + REL_TOL) {
        s += 1;
    }
    while s > 0 && 2f64.powi(s as i32) > ratio * (1.0 + REL_TOL) {
        s -= 1;
    }
    s
}

fn clamp_count(n: Option<i64>, floor: i64) -> u32 {
    n.map_or(floor, |n| n.max(floor)).min(u32::MAX as i64) as u32
}

/// Builds the schedule:
///
/// ```text
/// S   = ⌊log₂(L/μ)⌋,   λ_s = μ·2^s
/// N_0 = ⌈log₂(512 μ² S² D² / ε²)⌉,   N_s = 3 (s ≥ 1)
/// K_s = ⌈log₂(2048 λ_s S² σ² / (L ε²))⌉,   floored at 1
/// ```
///
/// `N_0` is floored at 0; σ = 0 gives `K_s = 1` everywhere.
pub fn rain_schedule(mu: f64, lipschitz: f64, eps: f64, distance: f64, sigma: f64) -> Result<RainSchedule> {
    require_positive("mu", mu)?;
    require_positive("L", lipschitz)?;
    require_positive("eps", eps)?;
    require_positive("D", distance)?;
    require_finite("sigma", sigma)?;
    if sigma < 0.0 {
        return Err(invalid("sigma", format!("must be >= 0, got {sigma}")));
    }
    if mu > lipschitz {
        return Err(invalid("mu", format!("mu = {mu} exceeds L = {lipschitz}")));
    }
    let levels = level_count(mu, lipschitz);
    let runs = levels.max(1);
    let s2 = (runs * runs) as f64;
    let lambdas: Vec<f64> = (0..runs).map(|s| mu * 2f64.powi(s as i32)).collect();
    let n0 = clamp_count(ceil_log2(512.0 * mu * mu * s2 * distance * distance / (eps * eps)), 0);
    let n_epochs = (0..runs).map(|s| if s == 0 { n0 } else { 3 }).collect();
    let k_epochs = lambdas
        .iter()
        .map(|&lam| clamp_count(ceil_log2(2048.0 * lam * s2 * sigma * sigma / (lipschitz * eps * eps)), 1))
        .collect();
    Ok(RainSchedule {
        levels,
        lambdas,
        n_epochs,
        k_epochs,
        eps,
        distance,
        sigma,
        mu,
        lipschitz,
    })
}
