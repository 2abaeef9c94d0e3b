//! Stochastic extragradient solvers.
//!
//! - [`seg`]: stochastic extragradient with a uniformly random half-point output.
//! - [`epoch_seg`]: restarted SEG, a fixed-step phase then a phase of halving
//!   step sizes with growing epoch lengths.
//! - [`rain`]: recursive anchoring; each level runs `epoch_seg` on the base
//!   operator plus all anchors so far, then anchors at its own output with
//!   twice the previous weight.
//! - [`rain_cc`]: anchors a merely monotone problem once at `z0` and runs
//!   [`rain`] on the resulting strongly monotone problem.
//!
//! All noisy evaluations go through [`StochasticOracle`](crate::oracle::StochasticOracle), so its counter is
//! the exact oracle complexity of a run.

mod epoch;
mod rain;
mod schedule;
mod seg;
mod trace;

pub use epoch::{epoch_seg, epoch_seg_sfo, EpochSegParams};
pub use rain::{cc_anchor_weight, rain, rain_cc, CcParams, RainParams};
pub use schedule::{ceil_log2, rain_schedule, RainSchedule};
pub use seg::{seg, seg_half_points, SegParams};
pub use trace::{LevelSummary, RunTrace, TraceRecord};

use rand::Rng;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{require_positive, Result};
use crate::oracle::{split_stream_for, StreamRole};
use crate::problems::{MinimaxProblem, Point};

/// How SEG picks its output among the half-points `z_{t+1/2}`.
#[derive(Clone, Debug)]
pub enum HalfPointSelection {
    /// Uniformly at random, from a stream separate from the oracle's.
    Uniform(Xoshiro256PlusPlus),
    /// Always the final half-point; makes σ = 0 runs fully deterministic.
    Last,
}

impl HalfPointSelection {
    /// Uniform selection on the `Selection` stream of a replication.
    pub fn uniform(master_seed: u64, replication_id: u64) -> Self {
        Self::Uniform(split_stream_for(
            master_seed,
            replication_id,
            StreamRole::Selection,
        ))
    }

    pub(crate) fn pick(&mut self, iterations: u64) -> u64 {
        match self {
            Self::Uniform(rng) => rng.gen_range(0..iterations),
            Self::Last => iterations - 1,
        }
    }
}

/// True iff `‖F(z)‖ ≤ eps`.
pub fn check_stationary<P: MinimaxProblem + ?Sized>(problem: &P, z: &Point, eps: f64) -> Result<bool> {
    require_positive("eps", eps)?;
    Ok(problem.grad_norm(z)? <= eps)
}

/// Relative slack for comparing step sizes and constants built by float arithmetic.
pub(crate) const REL_TOL: f64 = 1e-12;
