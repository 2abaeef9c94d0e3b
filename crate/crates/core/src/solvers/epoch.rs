use super::seg::{seg_point, SegParams};
use super::{HalfPointSelection, RunTrace, TraceRecord, REL_TOL};
use crate::error::{invalid, require_positive, Result};
use crate::oracle::StochasticOracle;
use crate::problems::{check_finite, norm, MinimaxProblem, Point};

/// Parameters of `Epoch-SEG(f, z0, μ, L, N, K)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochSegParams {
    pub mu: f64,
    pub lipschitz: f64,
    /// Fixed-step epochs.
    pub n: u32,
    /// Halving-step epochs; at least one.
    pub k: u32,
}

impl EpochSegParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("mu", self.mu)?;
        require_positive("L", self.lipschitz)?;
        if self.mu > self.lipschitz {
            return Err(invalid(
                "mu",
                format!("mu = {} exceeds L = {}", self.mu, self.lipschitz),
            ));
        }
        if self.k < 1 {
            return Err(invalid("K", "need at least one second-phase epoch"));
        }
        Ok(())
    }

    /// `(η, T)` for all `N + K` epochs in order.
    ///
    /// Phase one uses `(1/(4L), ⌈8L/μ⌉)`; epoch `k` of phase two uses
    /// `(1/(2^{k+3}L), ⌈2^{k+5}L/μ⌉)`.
    pub fn epochs(&self) -> Result<Vec<SegParams>> {
        self.validate()?;
        let kappa = self.lipschitz / self.mu;
        let mut out = Vec::with_capacity((self.n + self.k) as usize);
        let first = SegParams {
            eta: 1.0 / (4.0 * self.lipschitz),
            iterations: epoch_length(8.0 * kappa)?,
        };
        out.extend(std::iter::repeat(first).take(self.n as usize));
        for k in 0..self.k as i32 {
            out.push(SegParams {
                eta: 1.0 / (2f64.powi(k + 3) * self.lipschitz),
                iterations: epoch_length(2f64.powi(k + 5) * kappa)?,
            });
        }
        Ok(out)
    }
}

/// `⌈x⌉`, except that values within rounding noise of an integer map to it.
fn epoch_length(x: f64) -> Result<u64> {
    if !x.is_finite() || x > 2f64.powi(53) {
        return Err(invalid("epoch length", format!("{x} iterations is out of range")));
    }
    let nearest = x.round();
    let len = if (x - nearest).abs() <= 1e-9 * x.max(1.0) {
        nearest
    } else {
        x.ceil()
    };
    Ok((len as u64).max(1))
}

/// Exact number of oracle calls `epoch_seg` makes with these parameters.
pub fn epoch_seg_sfo(params: &EpochSegParams) -> Result<u64> {
    Ok(params.epochs()?.iter().map(|e| 2 * e.iterations).sum())
}

/// Where epoch snapshots go and which operator they measure.
pub(crate) struct Monitor<'a> {
    pub metric: &'a dyn MinimaxProblem,
    pub level: usize,
    pub records: &'a mut Vec<TraceRecord>,
}

impl Monitor<'_> {
    fn record(&mut self, epoch: usize, sfo_count: u64, z: &[f64], scratch: &mut [f64]) {
        self.metric.apply(z, scratch);
        self.records.push(TraceRecord {
            sfo_count,
            grad_norm: norm(scratch),
            level: self.level,
            epoch,
        });
    }
}

pub(crate) fn epoch_seg_impl<P: MinimaxProblem + ?Sized>(
    oracle: &mut StochasticOracle,
    problem: &P,
    z0: &[f64],
    params: &EpochSegParams,
    selection: &mut HalfPointSelection,
    monitor: &mut Monitor<'_>,
) -> Result<Vec<f64>> {
    let epochs = params.epochs()?;
    if problem.smoothness() > params.lipschitz * (1.0 + REL_TOL) {
        return Err(invalid(
            "L",
            format!(
                "problem smoothness {} exceeds the L = {} given to epoch_seg",
                problem.smoothness(),
                params.lipschitz
            ),
        ));
    }
    let mut z = z0.to_vec();
    let mut scratch = vec![0.0; z0.len()];
    for (epoch, seg_params) in epochs.into_iter().enumerate() {
        z = seg_point(oracle, problem, &z, seg_params, selection)?;
        monitor.record(epoch, oracle.sfo_count(), &z, &mut scratch);
    }
    Ok(z)
}

/// Epoch-SEG: `N` SEG epochs with fixed step `1/(4L)` and length `⌈8L/μ⌉`,
/// then `K` epochs whose step halves and whose length doubles, each started
/// from the previous epoch's output. Returns `z_{N+K}`.
pub fn epoch_seg<P: MinimaxProblem + ?Sized>(
    oracle: &mut StochasticOracle,
    problem: &P,
    z0: &Point,
    params: EpochSegParams,
    selection: &mut HalfPointSelection,
) -> Result<(Point, RunTrace)> {
    problem.check_point(z0)?;
    check_finite(z0.as_slice())?;
    let mut records = Vec::new();
    let mut monitor = Monitor {
        metric: &problem,
        level: 0,
        records: &mut records,
    };
    let out = epoch_seg_impl(oracle, problem, z0.as_slice(), &params, selection, &mut monitor)?;
    let point = Point::from_parts(out, z0.d_x());
    let mut trace = RunTrace::new(point.clone());
    trace.records = records;
    Ok((point, trace))
}
