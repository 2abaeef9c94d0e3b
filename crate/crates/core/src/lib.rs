//! Stochastic extragradient solvers for smooth minimax problems.
//!
//! The crate is organised bottom-up:
//!
//! - [`problems`]: gradient-operator abstraction `F(z) = (∇ₓf, −∇ᵧf)`, affine
//!   quadratic games with known constants, and the anchored (recursively
//!   regularized) wrapper.
//! - [`oracle`]: the unbiased noisy operator oracle with exact call counting and
//!   splittable random streams.
//! - [`solvers`]: stochastic extragradient (SEG), its epoch variant, the
//!   recursive anchored iteration and the convex-concave reduction.
//! - [`reference`]: closed-form ground truth and numerical checks of the
//!   anchoring inequalities.
//! - [`harness`]: config parsing, Monte-Carlo replication, CSV output and the
//!   validator sweeps driven by the `minimax` binary.

pub mod error;
pub mod harness;
pub mod oracle;
pub mod problems;
pub mod reference;
pub mod solvers;

pub use error::{Error, Result};

pub use problems::{
    anchor_push, gen_bilinear, gen_scsc_quadratic, AffineMinimaxProblem, AnchoredProblem,
    MinimaxProblem, Point,
};
pub use oracle::{
    noise_statistics, split_stream, split_stream_for, NoiseModel, NoiseStatistics, StochasticOracle, StreamRole,
};
pub use solvers::{
    check_stationary, epoch_seg, rain, rain_cc, rain_schedule, seg, CcParams, EpochSegParams,
    HalfPointSelection, RainParams, RainSchedule, RunTrace, SegParams, TraceRecord,
};
