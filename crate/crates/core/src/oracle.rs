//! Stochastic first-order oracle.
//!
//! Every evaluation of `F(z; ξ)` goes through [`StochasticOracle`], which owns
//! the call counter, so no solver path can query noisy operator values
//! without being counted.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rand_distr::StandardNormal;

use crate::error::{invalid, require_finite, Error, Result};
use crate::problems::{check_finite, MinimaxProblem, Point};

/// Identity of the random-stream construction, echoed in experiment output.
pub const STREAM_ALGORITHM: &str =
    "xoshiro256++/rand_xoshiro-0.6; seed_from_u64(master_seed); long_jump x role; jump x rep_id; v1";

/// What a derived stream is used for. Each role starts `2¹⁹²` steps after
/// the previous one, so roles never share draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamRole {
    /// Oracle noise.
    Noise = 0,
    /// Solver-side choices (the random half-point in SEG).
    Selection = 1,
    /// Experiment setup that must not depend on replication order.
    Setup = 2,
}

/// Noise stream for one replication: `split_stream_for(.., StreamRole::Noise)`.
pub fn split_stream(master_seed: u64, replication_id: u64) -> Xoshiro256PlusPlus {
    split_stream_for(master_seed, replication_id, StreamRole::Noise)
}

/// Deterministic stream for `(master_seed, replication_id, role)`.
///
/// The master generator is advanced by `role` long jumps (`2¹⁹²` steps each)
/// and then `replication_id` jumps (`2¹²⁸` steps each), so distinct ids get
/// disjoint subsequences of length `2¹²⁸`. Cost is linear in
/// `replication_id`, well under a millisecond for ids below 10³.
pub fn split_stream_for(master_seed: u64, replication_id: u64, role: StreamRole) -> Xoshiro256PlusPlus {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(master_seed);
    for _ in 0..role as u8 {
        rng.long_jump();
    }
    for _ in 0..replication_id {
        rng.jump();
    }
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseKind {
    GaussianIsotropic,
}

/// Additive zero-mean noise with `E‖noise‖² = σ²`.
///
/// Each of the `d` coordinates is drawn independently with standard
/// deviation `σ/√d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    sigma: f64,
    kind: NoiseKind,
}

impl NoiseModel {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        require_finite("sigma", sigma)?;
        if sigma < 0.0 {
            return Err(invalid("sigma", format!("must be >= 0, got {sigma}")));
        }
        Ok(Self {
            sigma,
            kind: NoiseKind::GaussianIsotropic,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }
}

#[derive(Clone, Debug)]
enum NoiseSource {
    Stream(Xoshiro256PlusPlus),
    Replay { draws: Vec<Vec<f64>>, next: usize },
}

/// Unbiased noisy evaluator `F(z; ξ) = F(z) + noise` with an exact call counter.
///
/// Anchored problems add their regularization terms exactly; since the noise
/// is additive, perturbing the full value is the same as perturbing only the
/// base operator, and the variance bound σ² holds at every anchoring level.
#[derive(Clone, Debug)]
pub struct StochasticOracle {
    noise: NoiseModel,
    source: NoiseSource,
    calls: u64,
    recorded: Option<Vec<Vec<f64>>>,
}

impl StochasticOracle {
    pub fn new(noise: NoiseModel, stream: Xoshiro256PlusPlus) -> Self {
        Self {
            noise,
            source: NoiseSource::Stream(stream),
            calls: 0,
            recorded: None,
        }
    }

    /// Oracle for replication `replication_id` of an experiment seeded with `master_seed`.
    pub fn seeded(sigma: f64, master_seed: u64, replication_id: u64) -> Result<Self> {
        Ok(Self::new(
            NoiseModel::gaussian(sigma)?,
            split_stream(master_seed, replication_id),
        ))
    }

    /// Oracle that adds the given noise vectors, one per call, in order.
    pub fn replay(draws: Vec<Vec<f64>>) -> Self {
        Self {
            noise: NoiseModel {
                sigma: f64::NAN,
                kind: NoiseKind::GaussianIsotropic,
            },
            source: NoiseSource::Replay { draws, next: 0 },
            calls: 0,
            recorded: None,
        }
    }

    /// Starts capturing every noise vector this oracle adds.
    pub fn record_noise(&mut self) {
        self.recorded = Some(Vec::new());
    }

    pub fn take_recorded(&mut self) -> Vec<Vec<f64>> {
        self.recorded.take().unwrap_or_default()
    }

    /// The noise model; σ is NaN for replay oracles.
    pub fn noise(&self) -> NoiseModel {
        self.noise
    }

    /// Number of stochastic evaluations performed so far.
    pub fn sfo_count(&self) -> u64 {
        self.calls
    }

    /// Checked `F(z; ξ)`.
    pub fn eval<P: MinimaxProblem + ?Sized>(&mut self, problem: &P, z: &Point) -> Result<Vec<f64>> {
        problem.check_point(z)?;
        check_finite(z.as_slice())?;
        let mut out = vec![0.0; problem.dim()];
        self.eval_into(problem, z.as_slice(), &mut out)?;
        Ok(out)
    }

    /// Unchecked hot path used by the solvers.
    #[inline]
    pub(crate) fn eval_into<P: MinimaxProblem + ?Sized>(
        &mut self,
        problem: &P,
        z: &[f64],
        out: &mut [f64],
    ) -> Result<()> {
        problem.apply(z, out);
        self.calls += 1;
        match (&mut self.source, &self.recorded) {
            (NoiseSource::Stream(rng), None) => {
                add_gaussian(rng, self.noise.sigma, out);
                Ok(())
            }
            _ => self.perturb_slow(out),
        }
    }

    #[cold]
    fn perturb_slow(&mut self, out: &mut [f64]) -> Result<()> {
        let clean = out.to_vec();
        match &mut self.source {
            NoiseSource::Stream(rng) => add_gaussian(rng, self.noise.sigma, out),
            NoiseSource::Replay { draws, next } => {
                let Some(draw) = draws.get(*next) else {
                    self.calls -= 1;
                    return Err(Error::NoiseExhausted { used: *next });
                };
                if draw.len() != out.len() {
                    self.calls -= 1;
                    return Err(Error::DimensionMismatch {
                        expected: out.len(),
                        found: draw.len(),
                    });
                }
                for (o, e) in out.iter_mut().zip(draw) {
                    *o += e;
                }
                *next += 1;
            }
        }
        if let Some(log) = self.recorded.as_mut() {
            log.push(out.iter().zip(&clean).map(|(a, b)| a - b).collect());
        }
        Ok(())
    }
}

#[inline]
fn add_gaussian(rng: &mut Xoshiro256PlusPlus, sigma: f64, out: &mut [f64]) {
    if sigma > 0.0 {
        let sd = sigma / (out.len() as f64).sqrt();
        for o in out.iter_mut() {
            let n: f64 = rng.sample(StandardNormal);
            *o += sd * n;
        }
    }
}

/// Empirical noise moments of repeated oracle calls at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseStatistics {
    pub draws: u64,
    pub sigma: f64,
    /// Per-coordinate mean of `F(z; ξ) − F(z)`.
    pub mean_error: Vec<f64>,
    /// Mean of `‖F(z; ξ) − F(z)‖²`.
    pub mean_sq_norm: f64,
}

impl NoiseStatistics {
    /// Four standard errors of a per-coordinate mean, `4 (σ/√d) / √n`.
    pub fn mean_tolerance(&self) -> f64 {
        let d = self.mean_error.len() as f64;
        4.0 * self.sigma / d.sqrt() / (self.draws as f64).sqrt()
    }

    pub fn max_mean_error(&self) -> f64 {
        self.mean_error.iter().fold(0.0, |m, e| m.max(e.abs()))
    }

    /// Every coordinate mean lies within `tol` of zero.
    pub fn unbiased_within(&self, tol: f64) -> bool {
        self.max_mean_error() <= tol
    }

    pub fn unbiased(&self) -> bool {
        self.unbiased_within(self.mean_tolerance())
    }

    /// `|mean ‖noise‖² − σ²| ≤ rel · σ²`.
    pub fn variance_within(&self, rel: f64) -> bool {
        let s2 = self.sigma * self.sigma;
        (self.mean_sq_norm - s2).abs() <= rel * s2
    }
}

/// Calls a fresh `σ` oracle `draws` times at `z` and summarises the deviations
/// from the exact operator value.
pub fn noise_statistics<P: MinimaxProblem + ?Sized>(
    problem: &P,
    z: &Point,
    sigma: f64,
    draws: u64,
    master_seed: u64,
) -> Result<NoiseStatistics> {
    if draws < 1 {
        return Err(invalid("draws", "need at least one draw"));
    }
    let exact = problem.eval(z)?;
    let mut oracle = StochasticOracle::seeded(sigma, master_seed, 0)?;
    let mut out = vec![0.0; exact.len()];
    let mut sum = vec![0.0; exact.len()];
    let mut sq = 0.0;
    for _ in 0..draws {
        oracle.eval_into(problem, z.as_slice(), &mut out)?;
        for ((s, o), f) in sum.iter_mut().zip(&out).zip(&exact) {
            let e = o - f;
            *s += e;
            sq += e * e;
        }
    }
    let n = draws as f64;
    Ok(NoiseStatistics {
        draws,
        sigma,
        mean_error: sum.into_iter().map(|s| s / n).collect(),
        mean_sq_norm: sq / n,
    })
}

/// Pearson correlation of the first `n` standard-normal draws of two streams.
pub fn stream_correlation(mut a: Xoshiro256PlusPlus, mut b: Xoshiro256PlusPlus, n: usize) -> f64 {
    let xs: Vec<f64> = (0..n).map(|_| a.sample(StandardNormal)).collect();
    let ys: Vec<f64> = (0..n).map(|_| b.sample(StandardNormal)).collect();
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}
